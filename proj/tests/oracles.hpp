#pragma once

// Reference computations that share no code with the library: dense linear
// algebra for the chain, symplectic spectra for two-mode states, and
// position-space double integrals for the continuum.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

namespace oracle {

/// Dense <q q> and <p p> of the ring: K = 1 - (alpha/2)(S + S^T),
/// <qq> = K^{-1/2}/2, <pp> = K^{1/2}/2 by full eigendecomposition.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> chain_dense(int n, double alpha) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(n, n);
  for (int j = 0; j < n; ++j) {
    k(j, (j + 1) % n) -= alpha / 2;
    k((j + 1) % n, j) -= alpha / 2;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const Eigen::VectorXd lam = es.eigenvalues();
  const Eigen::MatrixXd u = es.eigenvectors();
  Eigen::MatrixXd q = 0.5 * u * lam.array().rsqrt().matrix().asDiagonal() * u.transpose();
  Eigen::MatrixXd p = 0.5 * u * lam.array().sqrt().matrix().asDiagonal() * u.transpose();
  return {q, p};
}

/// Symplectic eigenvalues (smaller, larger) of a real 4x4 covariance matrix
/// in the (Q_A, P_A, Q_B, P_B) ordering.
inline std::pair<double, double> symplectic(const Eigen::Matrix4d& v) {
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 1) = omega(2, 3) = 1.0;
  omega(1, 0) = omega(3, 2) = -1.0;
  Eigen::EigenSolver<Eigen::Matrix4d> es(omega * v);
  std::vector<double> nu;
  for (int i = 0; i < 4; ++i) nu.push_back(std::abs(es.eigenvalues()[i].imag()));
  std::sort(nu.begin(), nu.end());
  return {nu[0], nu[3]};
}

/// Covariance in which <Q_A Q_B><P_A P_B> >= 0: the partial transpose when
/// the product is negative, the state itself otherwise.
inline Eigen::Matrix4d worst_transpose(double qa, double pa, double qb, double pb, double qab,
                                       double pab) {
  Eigen::Matrix4d v = Eigen::Matrix4d::Zero();
  v(0, 0) = qa;
  v(1, 1) = pa;
  v(2, 2) = qb;
  v(3, 3) = pb;
  v(0, 2) = v(2, 0) = qab;
  const double p = (qab * pab < 0.0) ? -pab : pab;
  v(1, 3) = v(3, 1) = p;
  return v;
}

/// Smallest eigenvalue of V + (i/2) Omega by a dense Hermitian solver.
inline double uncertainty_min(double qa, double pa, double qb, double pb, double qab, double pab) {
  Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
  h(0, 0) = qa;
  h(1, 1) = pa;
  h(2, 2) = qb;
  h(3, 3) = pb;
  h(0, 2) = h(2, 0) = qab;
  h(1, 3) = h(3, 1) = pab;
  const std::complex<double> i2(0.0, 0.5);
  h(0, 1) = i2;
  h(1, 0) = -i2;
  h(2, 3) = i2;
  h(3, 2) = -i2;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
  return es.eigenvalues().minCoeff();
}

/// Triangle of support length l with tip fraction s on (-l, 0), mirrored
/// onto (0, l) for side B, then shifted.
struct Triangle {
  double s, l, shift;
  bool mirror;

  double height() const { return std::sqrt(3.0 / l); }
  // Evaluate in the A frame.
  double a_value(double x) const {
    const double tip = -l * (1 - s);
    if (x <= -l || x >= 0) return 0.0;
    return x < tip ? height() * (x + l) / (s * l) : height() * (-x) / ((1 - s) * l);
  }
  double a_slope(double x) const {
    const double tip = -l * (1 - s);
    if (x <= -l || x >= 0) return 0.0;
    return x < tip ? height() / (s * l) : -height() / ((1 - s) * l);
  }
  double value(double x) const {
    const double y = x - shift;
    return mirror ? a_value(-y) : a_value(y);
  }
  double slope(double x) const {
    const double y = x - shift;
    return mirror ? -a_slope(-y) : a_slope(y);
  }
  std::array<double, 3> knots() const {
    if (!mirror) return {shift - l, shift - l * (1 - s), shift};
    return {shift, shift + l * (1 - s), shift + l};
  }
};

/// (1/sqrt(2 pi)) integral e^{-ikx} g(x) dx, piece by piece with
/// Gauss-Kronrod.
inline std::complex<double> fourier(const Triangle& t, double k) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto kn = t.knots();
  double re = 0.0, im = 0.0;
  for (int i = 0; i < 2; ++i) {
    re += GK::integrate([&](double x) { return std::cos(k * x) * t.value(x); }, kn[i], kn[i + 1], 15, 1e-14);
    im -= GK::integrate([&](double x) { return std::sin(k * x) * t.value(x); }, kn[i], kn[i + 1], 15, 1e-14);
  }
  return std::complex<double>(re, im) / std::sqrt(2.0 * std::numbers::pi);
}

struct PositionSpace {
  double qq, pp;
};

/// <Q_u Q_v> = (1/2pi) double integral u v K0(m|x-y|) and
/// <P_u P_v> = (1/2pi) double integral (m^2 u v + u' v') K0(m|x-y|), the 1D
/// massive vacuum kernels, by nested tanh-sinh quadrature split at every
/// knot and at the diagonal.
inline PositionSpace position_space(const Triangle& u, const Triangle& v, double m) {
  boost::math::quadrature::tanh_sinh<double> outer_q, inner_q;
  const double tol = 1e-11;
  const auto ku = u.knots();
  const auto kv = v.knots();
  auto k0 = [&](double r) { return r > 0 ? boost::math::cyl_bessel_k(0, m * r) : 0.0; };

  auto inner = [&](double x, bool momentum, double c, double d) {
    auto weight = [&](double y) {
      return momentum ? m * m * u.value(x) * v.value(y) + u.slope(x) * v.slope(y)
                      : u.value(x) * v.value(y);
    };
    double total = 0.0;
    if (x > c && x < d) {
      total += inner_q.integrate(
          [&](double y, double yc) { return weight(y) * k0(yc > 0 ? yc : x - y); }, c, x, tol);
      total += inner_q.integrate(
          [&](double y, double yc) { return weight(y) * k0(yc < 0 ? -yc : y - x); }, x, d, tol);
    } else {
      total += inner_q.integrate([&](double y) { return weight(y) * k0(std::abs(x - y)); }, c, d, tol);
    }
    return total;
  };

  PositionSpace out{0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double a = ku[i], b = ku[i + 1], c = kv[j], d = kv[j + 1];
      out.qq += outer_q.integrate([&](double x) { return inner(x, false, c, d); }, a, b, tol);
      out.pp += outer_q.integrate([&](double x) { return inner(x, true, c, d); }, a, b, tol);
    }
  }
  out.qq /= 2.0 * std::numbers::pi;
  out.pp /= 2.0 * std::numbers::pi;
  return out;
}

}  // namespace oracle
