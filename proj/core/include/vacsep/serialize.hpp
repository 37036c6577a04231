#pragma once

// Text formats shared by the library and the command-line driver. Doubles
// are always written with 17 significant digits so that a parse of the
// output reproduces the bits.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vacsep/chain.hpp"
#include "vacsep/chain_optimizer.hpp"
#include "vacsep/gaussian.hpp"
#include "vacsep/sweeps.hpp"

namespace vacsep::io {

/// "%.17g" in the C locale; non-finite values become "nan", "inf", "-inf".
std::string format_double(double x);

std::string variance_to_json(const VarianceMatrix2Mode& v);
/// Accepts the flat object written by variance_to_json. Throws InputError on
/// missing keys, non-numeric values or malformed JSON.
VarianceMatrix2Mode variance_from_json(std::string_view text);

/// Sites are reported 1-based: "first_site" is offset + 1.
std::string profile_to_json(const chain::DiscreteProfile& p);
std::string chain_params_to_json(const chain::ChainParams& p);

namespace csv {

inline constexpr std::string_view kCriticalTableHeader = "d,n_crit,alpha,N,epsilon_max";
inline constexpr std::string_view kSweepHeader = "D,eps_max,L_opt,s_opt,converged";
inline constexpr std::string_view kLminHeader =
    "D,L_min,s_at_L_min,found,at_floor,multiple_sign_changes";
inline constexpr std::string_view kProfileHeader = "j,f_j,g_j";
inline constexpr std::string_view kExtrapolationHeader = "L,slope,C,D,rows";
inline constexpr std::string_view kContinuumPointHeader =
    "s,L,D,m,qq_A,pp_A,qq_AB,pp_AB,epsilon,entangled,negativity,error_estimate";
inline constexpr std::string_view kSimonHeader =
    "qq_A,pp_A,qq_B,pp_B,qq_AB,pp_AB,physical,simon_lhs,epsilon,entangled,negativity,symmetric";

/// Rows carry no trailing newline. Missing values are written as empty cells.
std::string row(const chain::NCritRow& r);
std::string row(const continuum::OptimumPoint& p);
std::string row(const continuum::LminPoint& p);

/// Splits a CSV line on commas (no quoting is ever produced by this module).
std::vector<std::string> split(std::string_view line);

}  // namespace csv

/// CRC-32 (IEEE polynomial) of a byte string.
std::uint32_t crc32(std::string_view bytes);

}  // namespace vacsep::io
