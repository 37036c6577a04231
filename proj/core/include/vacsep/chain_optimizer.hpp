#pragma once

// Search for detection profiles that maximise the entanglement of the two
// collective chain modes, and the critical-block-size analysis built on it.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vacsep/chain.hpp"
#include "vacsep/gaussian.hpp"

namespace vacsep::chain {

struct OptimizerOptions {
  double g_tol = 1e-10;        ///< projected-gradient norm for convergence
  int max_iter = 5000;         ///< per restart
  int random_restarts = 4;     ///< in addition to the four fixed shapes
  std::uint64_t seed = 0;
  Tolerances tol{};
  /// Called with every accepted iterate (unit-norm weights; for the
  /// unconstrained search f and g are concatenated).
  std::function<void(std::span<const double>)> observer;
};

struct OptimizationResult {
  DiscreteProfile profile;    ///< block A
  DiscreteProfile profile_b;  ///< block B (the mirror of A when mirrored)
  double epsilon_max = -1.0;
  bool entangled = false;
  VarianceMatrix2Mode variance;
  int iterations = 0;         ///< summed over restarts
  bool converged = false;     ///< for the restart that produced epsilon_max
  int restarts_used = 0;
  std::vector<double> restart_epsilons;
};

/// Maximises epsilon over unit-norm profiles. With `mirrored` the B profile
/// is the reflection of A and the symmetric degree of entanglement is used;
/// otherwise f and g are independent and epsilon_general is maximised, with
/// the verdict taken from the sign of simon_lhs_general.
OptimizationResult optimize_profile(const ChainParams& params, bool mirrored,
                                    const OptimizerOptions& opts = {});

/// Same, reusing an already computed ground state.
OptimizationResult optimize_profile(const ChainGroundState& state, const ChainParams& params,
                                    bool mirrored, const OptimizerOptions& opts = {});

/// Degree of entanglement of a given mirrored profile pair.
double mirrored_epsilon(const ChainGroundState& state, const ChainParams& params,
                        std::span<const double> weights);

struct NCritRow {
  std::size_t gap = 0;
  std::optional<std::size_t> n_crit;  ///< empty when the ceiling was reached
  double alpha = 0.0;
  std::size_t sites = 0;
  double epsilon_max = 0.0;
  bool converged = true;
};

struct NCritOptions {
  std::size_t n_ceiling = 400;
  /// 0 selects default_ring_size for every n.
  std::size_t ring_size = 0;
  OptimizerOptions optimizer{};
};

/// Smallest n >= n_start whose optimised mirrored profile is entangled, with
/// alpha tied to n through alpha_from_physical. Linear upward scan.
NCritRow find_n_crit(double length, double mass, std::size_t gap, std::size_t n_start,
                     const NCritOptions& opts = {});

struct CriticalSizeTable {
  double length = 0.0;
  double mass = 1.0;
  std::vector<NCritRow> rows;
  double slope = 0.0;            ///< least-squares dn_crit/dd
  double c_of_l = 0.0;           ///< 1 / slope
  double d_of_l = 0.0;           ///< C(L) * L
  std::vector<double> residuals;
};

/// Scans d = gap_min..gap_max, seeding each scan at the previous n_crit.
/// Rows whose scan hit the ceiling are kept with an empty n_crit and the
/// scan continues from the previous value.
CriticalSizeTable build_critical_table(double length, double mass, std::size_t gap_min,
                                       std::size_t gap_max, const NCritOptions& opts = {});

/// Least-squares fit of n_crit against d over the rows with a value.
/// Fills slope, c_of_l, d_of_l and residuals and returns C(L). Throws
/// InputError for fewer than 4 usable rows or zero variance in d.
double fit_C(CriticalSizeTable& table);

struct ExtrapolationPoint {
  double length = 0.0;
  double c_of_l = 0.0;
  double d_of_l = 0.0;
  CriticalSizeTable table;
};

/// Full n_crit / C(L) pipeline for each region length.
std::vector<ExtrapolationPoint> critical_distance_extrapolation(
    std::span<const double> lengths, double mass, std::size_t gap_min, std::size_t gap_max,
    const NCritOptions& opts = {});

}  // namespace vacsep::chain
