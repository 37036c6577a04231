#include <algorithm>
#include <cmath>
#include <numbers>

#include "vacsep/continuum.hpp"
#include "vacsep/errors.hpp"

namespace vacsep::continuum {
namespace {

using cplx = std::complex<double>;

// psi(z) = integral_0^1 t exp(z t) dt.
cplx psi(cplx z) {
  if (std::abs(z) < 1.0) {
    cplx term = 1.0, sum = 0.5;
    for (int n = 1; n < 30; ++n) {
      term *= z / static_cast<double>(n);
      sum += term / static_cast<double>(n + 2);
    }
    return sum;
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

}  // namespace

double TriangularProfile::height() const { return std::sqrt(3.0 / length); }

std::array<double, 3> TriangularProfile::knots() const {
  if (side == Side::A) return {-length, -length * (1.0 - tip), 0.0};
  return {0.0, length * (1.0 - tip), length};
}

double TriangularProfile::value(double x) const {
  if (side == Side::B) x = -x;
  const double h = height();
  const double rise = tip * length, fall = (1.0 - tip) * length;
  if (x > -length && x <= -fall) return h * (x + length) / rise;
  if (x > -fall && x < 0.0) return h * (-x) / fall;
  return 0.0;
}

double TriangularProfile::slope(double x) const {
  const double sign = side == Side::B ? -1.0 : 1.0;
  if (side == Side::B) x = -x;
  const double h = height();
  const double rise = tip * length, fall = (1.0 - tip) * length;
  if (x > -length && x < -fall) return sign * h / rise;
  if (x > -fall && x < 0.0) return -sign * h / fall;
  return 0.0;
}

std::array<double, 3> TriangularProfile::slope_jumps() const {
  const double h = height();
  const double up = h / (tip * length), down = h / ((1.0 - tip) * length);
  // g'' of the mirror image is the mirrored g'', so B lists the same
  // coefficients in reverse knot order.
  if (side == Side::A) return {up, -up - down, down};
  return {down, -up - down, up};
}

std::vector<std::string> TriangularProfile::violations() const {
  std::vector<std::string> out;
  if (!(tip > 0.0 && tip < 1.0)) out.emplace_back("tip position s must lie in (0,1)");
  if (!(length > 0.0) || !std::isfinite(length)) out.emplace_back("support length L must be positive");
  return out;
}

void TriangularProfile::validate() const {
  if (auto v = violations(); !v.empty()) throw InputError(v.front());
}

std::complex<double> profile_fourier(const TriangularProfile& prof, double k) {
  if (prof.side == Side::B) {
    return profile_fourier({prof.tip, prof.length, Side::A}, -k);
  }
  const double h = prof.height();
  const double rise = prof.tip * prof.length, fall = (1.0 - prof.tip) * prof.length;
  const cplx i(0.0, 1.0);
  const cplx left = rise * std::exp(i * (k * prof.length)) * psi(-i * (k * rise));
  const cplx right = fall * psi(i * (k * fall));
  return kInvSqrt2Pi * h * (left + right);
}

double fourier_decay_constant(const TriangularProfile& prof) {
  double s = 0.0;
  for (double c : prof.slope_jumps()) s += std::abs(c);
  return kInvSqrt2Pi * s;
}

namespace {

// Simpson's rule is exact for the piecewise quadratic product of two
// piecewise linear functions once every knot is a panel edge.
template <class F>
double piecewise_quadratic_integral(std::vector<double> knots, F&& f) {
  std::sort(knots.begin(), knots.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i], b = knots[i + 1];
    if (!(b > a)) continue;
    const double eps = 1e-15 * std::max(1.0, std::abs(b - a));
    // Sample just inside the panel so the one-sided limits are used at knots.
    total += (b - a) / 6.0 * (f(a + eps) + 4.0 * f(0.5 * (a + b)) + f(b - eps));
  }
  return total;
}

}  // namespace

std::vector<std::string> ContinuumConfig::violations() const {
  auto out = profile_a().violations();
  if (!(gap >= 0.0) || !std::isfinite(gap)) out.emplace_back("supports overlap");
  if (!(mass > 0.0) || !std::isfinite(mass)) out.emplace_back("mass m must be positive");
  return out;
}

void ContinuumConfig::validate() const {
  if (auto v = violations(); !v.empty()) throw InputError(v.front());
}

double self_overlap(const TriangularProfile& prof) {
  prof.validate();
  const auto k = prof.knots();
  return piecewise_quadratic_integral({k.begin(), k.end()}, [&](double x) {
    const double g = prof.value(x);
    return g * g;
  });
}

double orthonormality_check(const ContinuumConfig& config) {
  if (config.gap < 0.0) throw InputError("supports overlap");
  config.validate();
  const auto a = config.profile_a();
  const auto b = config.profile_b();
  std::vector<double> knots;
  for (double x : a.knots()) knots.push_back(x);
  for (double x : b.knots()) knots.push_back(x + config.gap);
  return piecewise_quadratic_integral(std::move(knots), [&](double x) {
    return a.value(x) * b.value(x - config.gap);
  });
}

}  // namespace vacsep::continuum
