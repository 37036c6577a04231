#pragma once

// Globally adaptive Gauss-Kronrod (10/21 point) quadrature for integrands
// returning a fixed-size vector. All components share the abscissae, so the
// expensive part of an integrand (a Fourier transform, say) is evaluated once
// per node for every component.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace vacsep::quad {

template <int M>
using Vec = Eigen::Array<double, M, 1>;

template <int M>
struct Result {
  Vec<M> value = Vec<M>::Zero();
  Vec<M> error = Vec<M>::Zero();
  std::size_t intervals = 0;
  bool converged = false;
};

struct Options {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 400000;
};

namespace detail {

template <int M>
struct Panel {
  double a, b;
  Vec<M> value, error;
  double priority;
  bool operator<(const Panel& o) const { return priority < o.priority; }
};

template <int M, class F>
Panel<M> gk21(F& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& x = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);

  Vec<M> kron = f(mid) * wk[0];
  Vec<M> gauss = Vec<M>::Zero();
  for (std::size_t i = 1; i < x.size(); ++i) {
    const Vec<M> sum = f(mid + half * x[i]) + f(mid - half * x[i]);
    kron += sum * wk[i];
    if (i % 2 == 1) gauss += sum * wg[i / 2];
  }
  Panel<M> p;
  p.a = a;
  p.b = b;
  p.value = kron * half;
  p.error = ((kron - gauss) * half).abs().max(p.value.abs() * 4e-16);
  p.priority = p.error.maxCoeff();
  return p;
}

}  // namespace detail

struct AbsScale {
  template <class V>
  V operator()(const V& v) const {
    return v.abs();
  }
};

/// Integrates f over [breakpoints.front(), breakpoints.back()], starting from
/// one panel per breakpoint interval and bisecting the panel with the largest
/// error estimate until every component meets max(abs_tol, rel_tol S), where
/// S = scale(I) defaults to |I| componentwise.
template <int M, class F, class Scale = AbsScale>
Result<M> integrate(F&& f, std::span<const double> breakpoints, const Options& opts = {},
                    Scale scale = {}) {
  Result<M> out;
  if (breakpoints.size() < 2) return out;

  std::priority_queue<detail::Panel<M>> heap;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) continue;
    auto p = detail::gk21<M>(f, breakpoints[i], breakpoints[i + 1]);
    out.value += p.value;
    out.error += p.error;
    heap.push(std::move(p));
  }

  auto done = [&] {
    const Vec<M> tol = (scale(out.value) * opts.rel_tol).max(opts.abs_tol);
    return (out.error <= tol).all();
  };

  while (!done() && heap.size() < opts.max_intervals) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Panel cannot be split further in double precision.
      heap.push(std::move(worst));
      break;
    }
    auto left = detail::gk21<M>(f, worst.a, mid);
    auto right = detail::gk21<M>(f, mid, worst.b);
    out.value += left.value + right.value - worst.value;
    out.error += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
  }

  // Re-sum to shed the drift of the incremental updates.
  out.value.setZero();
  out.error.setZero();
  out.intervals = heap.size();
  while (!heap.empty()) {
    out.value += heap.top().value;
    out.error += heap.top().error;
    heap.pop();
  }
  out.converged = done();
  return out;
}

}  // namespace vacsep::quad
