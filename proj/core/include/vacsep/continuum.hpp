#pragma once

// Collective modes of the 1D massive Klein-Gordon vacuum smeared with
// mirrored asymmetric triangles. All lengths are in Compton wavelengths 1/m
// unless a mass is given explicitly.

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "vacsep/gaussian.hpp"

namespace vacsep::continuum {

enum class Side { A, B };

/// Normalised triangle of support length L with its tip at fraction s of the
/// support. Side A lives on (-L, 0) and rises towards the tip from -L; side B
/// is its mirror image g_B(x) = g_A(-x) on (0, L).
struct TriangularProfile {
  double tip = 0.5;     ///< s in (0, 1)
  double length = 1.0;  ///< L > 0
  Side side = Side::A;

  double height() const;
  /// Knots (-L, -L(1-s), 0) for A, mirrored for B, in increasing order.
  std::array<double, 3> knots() const;
  double value(double x) const;
  /// Derivative away from the knots.
  double slope(double x) const;
  /// Jumps of g' at the knots, ordered like knots().
  std::array<double, 3> slope_jumps() const;

  std::vector<std::string> violations() const;
  void validate() const;
};

/// (1/sqrt(2 pi)) * integral of exp(-i k x) g(x) dx in closed form.
std::complex<double> profile_fourier(const TriangularProfile& prof, double k);

/// c such that |profile_fourier(prof, k)| <= c / k^2 for all k != 0.
double fourier_decay_constant(const TriangularProfile& prof);

struct ContinuumConfig {
  double tip = 0.5;     ///< s
  double length = 1.0;  ///< L
  double gap = 0.0;     ///< D, distance between the supports
  double mass = 1.0;    ///< m

  TriangularProfile profile_a() const { return {tip, length, Side::A}; }
  TriangularProfile profile_b() const { return {tip, length, Side::B}; }

  std::vector<std::string> violations() const;
  void validate() const;
};

/// Overlap integral of g_A(x - x_A) and g_B(x - x_B) with x_B - x_A = D.
/// Throws InputError when D < 0 (supports would overlap).
double orthonormality_check(const ContinuumConfig& config);

/// Overlap of a profile with itself, analytically 1.
double self_overlap(const TriangularProfile& prof);

struct QuadratureSettings {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 400000;
};

/// Correlations with diagnostics. `imag_max` is the largest imaginary part
/// of the four full-line integrals and `symmetry_mismatch` the largest relative
/// difference between the A and B local variances; both are only computed
/// when requested because each needs an extra pass.
struct CorrelationReport {
  VarianceMatrix2Mode variance;
  double error_estimate = 0.0;
  double momentum_cutoff = 0.0;
  double imag_max = 0.0;
  double symmetry_mismatch = 0.0;
  std::size_t intervals = 0;
};

CorrelationReport correlation_report(const ContinuumConfig& config,
                                     const QuadratureSettings& q = {},
                                     bool with_diagnostics = false);

/// <Q_A^2>, <P_A^2>, <Q_A Q_B>, <P_A P_B> as momentum integrals of the profile
/// transforms; B variances equal A by mirror symmetry. Throws QuadratureError
/// when the requested tolerance is not reached.
VarianceMatrix2Mode correlations(const ContinuumConfig& config, const QuadratureSettings& q = {});

/// Symmetric degree of entanglement of the two triangle modes.
EntanglementVerdict epsilon_continuum(const ContinuumConfig& config,
                                      const QuadratureSettings& q = {},
                                      const Tolerances& tol = kDefaultTolerances);

/// Raw epsilon without building a verdict.
double epsilon_value(const ContinuumConfig& config, const QuadratureSettings& q = {});

}  // namespace vacsep::continuum
