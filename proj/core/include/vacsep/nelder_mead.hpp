#pragma once

// Small dense Nelder-Mead minimiser used for the (L, s) maximisation of the
// continuum entanglement. Box constraints are the caller's business; map them
// onto an unconstrained parametrisation before calling.

#include <array>
#include <cstddef>
#include <functional>

namespace vacsep {

template <std::size_t Dim>
struct NelderMeadResult {
  std::array<double, Dim> x{};
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  double x_tol = 1e-7;   ///< simplex diameter (max-norm) at convergence
  double f_tol = 1e-13;  ///< spread of vertex values at convergence
  std::size_t max_evaluations = 2000;
};

NelderMeadResult<2> nelder_mead(const std::function<double(const std::array<double, 2>&)>& f,
                                const std::array<double, 2>& start,
                                const std::array<double, 2>& step,
                                const NelderMeadOptions& opts = {});

}  // namespace vacsep
