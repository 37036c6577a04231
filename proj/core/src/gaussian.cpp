#include "vacsep/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>

#include "vacsep/errors.hpp"

namespace vacsep {

Eigen::Matrix4d VarianceMatrix2Mode::dense() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = qq_a;
  m(1, 1) = pp_a;
  m(2, 2) = qq_b;
  m(3, 3) = pp_b;
  m(0, 2) = m(2, 0) = qq_ab;
  m(1, 3) = m(3, 1) = pp_ab;
  return m;
}

bool VarianceMatrix2Mode::all_finite() const {
  for (double x : {qq_a, pp_a, qq_b, pp_b, qq_ab, pp_ab}) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

VarianceMatrix2Mode two_mode_squeezed(double r) {
  const double c = 0.5 * std::cosh(2.0 * r);
  const double s = 0.5 * std::sinh(2.0 * r);
  return {c, c, c, c, s, -s};
}

double negativity_from_epsilon(double epsilon) {
  if (!(epsilon >= 0.0) || !(epsilon < 1.0)) {
    throw InputError("negativity is defined for epsilon in [0, 1)");
  }
  return epsilon / (2.0 * (1.0 - epsilon));
}

EntanglementVerdict make_verdict(double epsilon, double eps_tol) {
  EntanglementVerdict v;
  v.epsilon = epsilon;
  v.entangled = epsilon > eps_tol;
  v.negativity = v.entangled ? negativity_from_epsilon(epsilon) : 0.0;
  return v;
}

double min_uncertainty_eigenvalue(const VarianceMatrix2Mode& v) {
  using C = std::complex<double>;
  Eigen::Matrix4cd h = v.dense().cast<C>();
  // (i/2) Omega with Omega = [[0, 1], [-1, 0]] on each mode.
  const C half_i(0.0, 0.5);
  h(0, 1) += half_i;
  h(1, 0) -= half_i;
  h(2, 3) += half_i;
  h(3, 2) -= half_i;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool check_physical(const VarianceMatrix2Mode& v, double slack) {
  if (!v.all_finite()) throw InputError("variance matrix has non-finite entries");
  if (v.qq_a <= 0.0 || v.pp_a <= 0.0 || v.qq_b <= 0.0 || v.pp_b <= 0.0) return false;
  return min_uncertainty_eigenvalue(v) >= -slack;
}

double simon_lhs_general(const VarianceMatrix2Mode& v) {
  const double det_q = v.qq_a * v.qq_b - v.qq_ab * v.qq_ab;
  const double det_p = v.pp_a * v.pp_b - v.pp_ab * v.pp_ab;
  return 0.25 - v.qq_a * v.pp_a - v.qq_b * v.pp_b -
         2.0 * std::abs(v.qq_ab * v.pp_ab) + 4.0 * det_q * det_p;
}

bool is_symmetric(const VarianceMatrix2Mode& v, const Tolerances& tol) {
  auto close = [&](double a, double b) {
    return std::abs(a - b) <= tol.symmetry_rel * std::max(std::abs(a), std::abs(b));
  };
  return close(v.qq_a, v.qq_b) && close(v.pp_a, v.pp_b);
}

EntanglementVerdict epsilon_symmetric(const VarianceMatrix2Mode& v, const Tolerances& tol) {
  if (!v.all_finite()) throw InputError("variance matrix has non-finite entries");
  if (!is_symmetric(v, tol)) {
    throw AsymmetricStateError(
        "local variances of A and B differ; use simon_lhs_general");
  }
  const double eps =
      1.0 - 4.0 * (v.qq_a - std::abs(v.qq_ab)) * (v.pp_a - std::abs(v.pp_ab));
  return make_verdict(eps, tol.eps_tol);
}

double epsilon_general(const VarianceMatrix2Mode& v) {
  // nu^2 solves nu^4 - delta nu^2 + det = 0 with the worst-case sign of
  // <Q_A Q_B><P_A P_B>, matching the |.| in the Simon form.
  const double det = (v.qq_a * v.qq_b - v.qq_ab * v.qq_ab) *
                     (v.pp_a * v.pp_b - v.pp_ab * v.pp_ab);
  const double delta = v.qq_a * v.pp_a + v.qq_b * v.pp_b + 2.0 * std::abs(v.qq_ab * v.pp_ab);
  const double disc = std::max(0.0, delta * delta - 4.0 * det);
  const double denom = delta + std::sqrt(disc);
  const double nu2 = denom > 0.0 ? 2.0 * det / denom : 0.0;
  return 1.0 - 4.0 * nu2;
}

}  // namespace vacsep
