#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "vacsep/continuum.hpp"
#include "vacsep/errors.hpp"
#include "vacsep/quadrature.hpp"

namespace vacsep::continuum {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMaxHeadPanels = 20000;
// Initial head panels span this many periods of the fastest oscillation.
constexpr double kHeadPeriods = 4.0;

struct Phase {
  double shift;  // |a| in cos(a k)
  double coef;
};

// Above the cutoff every transform is an exact finite sum of 1/k^2 plane
// waves, so each product becomes sum coef * cos(a k) / k^4. Rotating
// [K, inf) onto K - i y turns the oscillation into exp(-|a| y).
struct Tail {
  double cutoff, mass;
  std::vector<Phase> self, cross;

  Tail(const ContinuumConfig& c, double k_cut) : cutoff(k_cut), mass(c.mass) {
    const auto x = c.profile_a().knots();
    const auto w = c.profile_a().slope_jumps();
    const double norm = 1.0 / (2.0 * kPi);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        self.push_back({std::abs(x[i] - x[j]), norm * w[i] * w[j]});
        cross.push_back({std::abs(x[i] + x[j] - c.gap), norm * w[i] * w[j]});
      }
    }
  }

  // Integrand in y, already doubled for the half-line fold.
  quad::Vec<4> at(double y) const {
    const cplx k(cutoff, -y);
    const cplx omega = std::sqrt(k * k + mass * mass);
    const cplx k4 = (k * k) * (k * k);
    const cplx fq = 1.0 / (2.0 * omega * k4);
    const cplx fp = omega / (2.0 * k4);
    const cplx minus_i(0.0, -1.0);
    auto sum = [&](const std::vector<Phase>& ph, cplx f) {
      double acc = 0.0;
      for (const auto& p : ph) {
        const cplx e = minus_i * std::exp(cplx(-p.shift * y, -p.shift * cutoff));
        acc += p.coef * (e * f).real();
      }
      return 2.0 * acc;
    };
    quad::Vec<4> out;
    out << sum(self, fq), sum(self, fp), sum(cross, fq), sum(cross, fp);
    return out;
  }
};

double momentum_cutoff(const ContinuumConfig& c) {
  const double shortest = std::min(c.tip, 1.0 - c.tip) * c.length;
  return 4.0 * std::max(c.mass, 1.0 / shortest);
}

std::vector<double> head_breakpoints(const ContinuumConfig& c, double k_cut) {
  const double widest = 2.0 * c.length + c.gap;
  const double period = kHeadPeriods * 2.0 * kPi / widest;
  const auto panels = static_cast<std::size_t>(
      std::clamp(std::ceil(k_cut / period), 1.0, static_cast<double>(kMaxHeadPanels)));
  std::vector<double> bp(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i) bp[i] = k_cut * static_cast<double>(i) / panels;
  return bp;
}

std::vector<double> tail_breakpoints() {
  return {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.2, 0.5, 0.8, 1.0};
}

// Cross correlations enter epsilon next to the local variances, so their
// accuracy is measured against the matching self term.
struct CrossScale {
  quad::Vec<4> operator()(const quad::Vec<4>& v) const {
    quad::Vec<4> s = v.abs();
    s[2] = std::max(s[2], s[0]);
    s[3] = std::max(s[3], s[1]);
    return s;
  }
};

template <int M, class F>
quad::Result<M> integrate_tail(const Tail& tail, F&& proj, const quad::Options& o) {
  const auto bp = tail_breakpoints();
  return quad::integrate<M>(
      [&](double t) -> quad::Vec<M> {
        if (t >= 1.0) return quad::Vec<M>::Zero();
        const double y = tail.cutoff * t / (1.0 - t);
        const double jac = tail.cutoff / ((1.0 - t) * (1.0 - t));
        return proj(tail.at(y)) * jac;
      },
      bp, o, CrossScale{});
}

}  // namespace

CorrelationReport correlation_report(const ContinuumConfig& config, const QuadratureSettings& q,
                                     bool with_diagnostics) {
  config.validate();
  const auto a = config.profile_a();
  const double m2 = config.mass * config.mass;
  const double d = config.gap;
  const double k_cut = momentum_cutoff(config);
  const quad::Options opts{q.abs_tol, q.rel_tol, q.max_intervals};

  const auto bp = head_breakpoints(config, k_cut);
  auto head = quad::integrate<4>(
      [&](double k) {
        const cplx g = profile_fourier(a, k);
        const double omega = std::sqrt(k * k + m2);
        const double self = std::norm(g);
        const double cross = (std::polar(1.0, k * d) * g * g).real();
        quad::Vec<4> v;
        v << self / omega, self * omega, cross / omega, cross * omega;
        return v;  // 2 x (1/2) weights fold into unit factors
      },
      bp, opts, CrossScale{});

  const Tail tail(config, k_cut);
  auto rest = integrate_tail<4>(tail, [](const quad::Vec<4>& v) { return v; }, opts);

  const quad::Vec<4> total = head.value + rest.value;
  const quad::Vec<4> err = head.error + rest.error;

  CorrelationReport rep;
  rep.variance.qq_a = rep.variance.qq_b = total[0];
  rep.variance.pp_a = rep.variance.pp_b = total[1];
  rep.variance.qq_ab = total[2];
  rep.variance.pp_ab = total[3];
  rep.error_estimate = err.maxCoeff();
  rep.momentum_cutoff = k_cut;
  rep.intervals = head.intervals + rest.intervals;

  const quad::Vec<4> tol = (CrossScale{}(total) * q.rel_tol).max(q.abs_tol);
  if (!(err <= 2.0 * tol).all() || !total.isFinite().all()) {
    throw QuadratureError("correlation integrals did not converge", rep.error_estimate);
  }

  if (with_diagnostics) {
    // B-side self terms from the B transform, plus the imaginary parts of the
    // full-line cross integrands from explicit evaluation at -k. Self
    // integrands are real pointwise. The imaginary tail is odd in k and
    // cancels identically, so only the head carries information.
    const auto b = config.profile_b();
    auto diag = quad::integrate<4>(
        [&](double k) {
          const double omega = std::sqrt(k * k + m2);
          const cplx gb = profile_fourier(b, k);
          // <Q_A Q_B> integrand conj(g_A) * g_B shifted by D, at k and -k.
          auto cross_at = [&](double kk) {
            const cplx shifted = std::polar(1.0, -kk * d) * profile_fourier(b, kk);
            return std::conj(profile_fourier(a, kk)) * shifted;
          };
          const double im = 0.5 * (cross_at(k).imag() + cross_at(-k).imag());
          quad::Vec<4> v;
          v << std::norm(gb) / omega, std::norm(gb) * omega, im / omega, im * omega;
          return v;
        },
        bp, opts, CrossScale{});
    const double qb = diag.value[0] + rest.value[0];
    const double pb = diag.value[1] + rest.value[1];
    rep.variance.qq_b = qb;
    rep.variance.pp_b = pb;
    rep.symmetry_mismatch = std::max(std::abs(qb - total[0]) / std::abs(total[0]),
                               std::abs(pb - total[1]) / std::abs(total[1]));
    rep.imag_max = diag.value.tail<2>().abs().maxCoeff();
  }
  return rep;
}

VarianceMatrix2Mode correlations(const ContinuumConfig& config, const QuadratureSettings& q) {
  return correlation_report(config, q, false).variance;
}

double epsilon_value(const ContinuumConfig& config, const QuadratureSettings& q) {
  const auto v = correlations(config, q);
  return 1.0 - 4.0 * (v.qq_a - std::abs(v.qq_ab)) * (v.pp_a - std::abs(v.pp_ab));
}

EntanglementVerdict epsilon_continuum(const ContinuumConfig& config, const QuadratureSettings& q,
                                      const Tolerances& tol) {
  return epsilon_symmetric(correlations(config, q), tol);
}

}  // namespace vacsep::continuum
