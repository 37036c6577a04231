#include "vacsep/nelder_mead.hpp"

#include <algorithm>
#include <cmath>

namespace vacsep {

NelderMeadResult<2> nelder_mead(const std::function<double(const std::array<double, 2>&)>& f,
                                const std::array<double, 2>& start,
                                const std::array<double, 2>& step,
                                const NelderMeadOptions& opts) {
  using Point = std::array<double, 2>;
  constexpr std::size_t n = 2;
  std::array<Point, n + 1> x;
  std::array<double, n + 1> fx;
  NelderMeadResult<2> res;

  auto eval = [&](const Point& p) {
    ++res.evaluations;
    const double v = f(p);
    return std::isnan(v) ? HUGE_VAL : v;
  };
  auto affine = [](const Point& a, const Point& b, double t) {
    // a + t (b - a)
    return Point{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
  };

  x[0] = start;
  for (std::size_t i = 0; i < n; ++i) {
    x[i + 1] = start;
    x[i + 1][i] += step[i];
  }
  for (std::size_t i = 0; i <= n; ++i) fx[i] = eval(x[i]);

  std::array<std::size_t, n + 1> order{0, 1, 2};
  while (res.evaluations < opts.max_evaluations) {
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fx[a] < fx[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        diameter = std::max(diameter, std::abs(x[order[i]][j] - x[best][j]));
    if (diameter <= opts.x_tol && fx[worst] - fx[best] <= opts.f_tol) {
      res.converged = true;
      break;
    }

    Point centroid{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += x[order[i]][j] / n;

    const Point xr = affine(centroid, x[worst], -1.0);
    const double fr = eval(xr);
    if (fr < fx[best]) {
      const Point xe = affine(centroid, x[worst], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        x[worst] = xe;
        fx[worst] = fe;
      } else {
        x[worst] = xr;
        fx[worst] = fr;
      }
      continue;
    }
    if (fr < fx[second]) {
      x[worst] = xr;
      fx[worst] = fr;
      continue;
    }
    const bool outside = fr < fx[worst];
    const Point xc = outside ? affine(centroid, xr, 0.5) : affine(centroid, x[worst], 0.5);
    const double fc = eval(xc);
    if (fc < std::min(fr, fx[worst])) {
      x[worst] = xc;
      fx[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      const std::size_t k = order[i];
      x[k] = affine(x[best], x[k], 0.5);
      fx[k] = eval(x[k]);
    }
  }

  const auto it = std::min_element(fx.begin(), fx.end());
  res.x = x[static_cast<std::size_t>(it - fx.begin())];
  res.value = *it;
  return res;
}

}  // namespace vacsep
