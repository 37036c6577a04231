#pragma once

// Parameter sweeps over the separation D for the triangle modes: the
// (L, s)-maximised degree of entanglement, its symmetric-profile
// counterpart, the minimal support length L_min(D) and the critical
// distance.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vacsep/continuum.hpp"
#include "vacsep/gaussian.hpp"
#include "vacsep/nelder_mead.hpp"

namespace vacsep::continuum {

struct SearchBox {
  double length_min = 1e-3;
  double length_max = 200.0;
  double tip_min = 0.5;
  double tip_max = 0.999;
};

struct SweepOptions {
  SearchBox box;
  double mass = 1.0;
  QuadratureSettings quad;
  Tolerances tol;
  NelderMeadOptions simplex{1e-5, 1e-13, 600};
  /// Worker threads for independent grid points; 0 picks the hardware count.
  unsigned threads = 0;
  /// Re-optimise every point from its predecessor's optimum after the
  /// independent pass.
  bool warm_start = true;
  /// Optimum (L, s) of the point preceding the first grid entry, used when a
  /// sweep is continued from earlier output.
  std::optional<std::array<double, 2>> initial_warm;
  /// Bisection tolerance on L for L_min.
  double length_tol = 1e-3;
};

struct OptimumPoint {
  double gap = 0.0;       ///< D
  double eps_max = 0.0;
  double length = 0.0;    ///< L_opt
  double tip = 0.5;       ///< s_opt
  bool entangled = false;
  bool converged = false;
  bool at_length_bound = false;
  std::size_t evaluations = 0;
};

/// Maximises epsilon over (L, s) in the box at fixed D. With `symmetric` the
/// tip is pinned to 1/2 and only L varies. A warm start is used in addition
/// to the fixed seeds when given as (L, s).
/// Called once per grid point, in input order, as soon as the point and all
/// points before it are final.
using OptimumCallback = std::function<void(std::size_t, const OptimumPoint&)>;

OptimumPoint maximize_epsilon(double gap, const SweepOptions& opts, bool symmetric = false,
                              std::optional<std::array<double, 2>> warm = std::nullopt);

std::vector<OptimumPoint> sweep_epsmax(std::span<const double> gaps, const SweepOptions& opts,
                                       const OptimumCallback& on_point = {});
std::vector<OptimumPoint> sweep_symmetric(std::span<const double> gaps, const SweepOptions& opts,
                                          const OptimumCallback& on_point = {});

struct LminPoint {
  double gap = 0.0;
  /// Empty when no L up to box.length_max gives epsilon > eps_tol.
  std::optional<double> length_min;
  double tip = 0.5;  ///< maximising s at L_min
  /// Entangled already at box.length_min, so L_min is only bounded above.
  bool at_floor = false;
  /// More than one sign change of max_s epsilon(L) seen while bracketing.
  bool multiple_sign_changes = false;
  std::vector<std::string> warnings;
};

/// max over s of epsilon(s, L, D) and the maximising s.
std::pair<double, double> max_over_tip(double length, double gap, const SweepOptions& opts);

using LminCallback = std::function<void(std::size_t, const LminPoint&)>;

std::vector<LminPoint> sweep_Lmin(std::span<const double> gaps, const SweepOptions& opts,
                                  const LminCallback& on_point = {});

struct CriticalDistance {
  /// Smallest probed D whose maximised epsilon does not exceed eps_tol.
  std::optional<double> d_crit;
  double last_entangled = 0.0;
  double eps_at_last_entangled = 0.0;
  std::vector<OptimumPoint> probes;
};

/// Scans D upward from `lo` with step `coarse`, then refines the bracket
/// with step `fine`.
CriticalDistance critical_distance(const SweepOptions& opts, bool symmetric = false,
                                   double lo = 0.0, double hi = 0.5, double coarse = 0.01,
                                   double fine = 1e-3);

/// Expands "lo:hi:step" into an inclusive grid. Throws InputError on bad input.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace vacsep::continuum
