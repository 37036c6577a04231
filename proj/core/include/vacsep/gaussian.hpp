#pragma once

// Two-mode Gaussian states in standard form (zero means, no Q-P cross
// correlations) and the separability tests that act on them.

#include <Eigen/Core>

namespace vacsep {

/// Numerical thresholds shared by every verdict in the library.
struct Tolerances {
  /// |epsilon| <= eps_tol is reported separable.
  double eps_tol = 1e-9;
  /// Slack on the smallest eigenvalue of V + (i/2) Omega.
  double physical_slack = 1e-10;
  /// Maximum relative mismatch of the local variances for the symmetric form.
  double symmetry_rel = 1e-8;
};

inline constexpr Tolerances kDefaultTolerances{};

/// Second moments of (Q_A, P_A, Q_B, P_B). The <{Q_i, P_j}> blocks are
/// structurally zero and are not stored.
struct VarianceMatrix2Mode {
  double qq_a = 0.5;
  double pp_a = 0.5;
  double qq_b = 0.5;
  double pp_b = 0.5;
  double qq_ab = 0.0;
  double pp_ab = 0.0;

  /// Dense 4x4 matrix in the ordering (Q_A, P_A, Q_B, P_B).
  Eigen::Matrix4d dense() const;

  /// Swaps the roles of A and B.
  VarianceMatrix2Mode swapped() const {
    return {qq_b, pp_b, qq_a, pp_a, qq_ab, pp_ab};
  }

  bool all_finite() const;

  friend bool operator==(const VarianceMatrix2Mode&,
                         const VarianceMatrix2Mode&) = default;
};

/// Vacuum of two uncoupled unit oscillators.
inline VarianceMatrix2Mode vacuum_variance() { return {}; }

/// Two-mode squeezed vacuum with squeezing r.
VarianceMatrix2Mode two_mode_squeezed(double r);

struct EntanglementVerdict {
  double epsilon = 0.0;
  bool entangled = false;
  /// epsilon / (2 (1 - epsilon)) when entangled, 0 otherwise.
  double negativity = 0.0;
};

/// Inverts epsilon = N / (N + 1/2). Defined for epsilon in [0, 1).
double negativity_from_epsilon(double epsilon);

/// Builds a verdict from a degree of entanglement under the given threshold.
EntanglementVerdict make_verdict(double epsilon, double eps_tol = kDefaultTolerances.eps_tol);

/// True iff V + (i/2) Omega has no eigenvalue below -slack. A non-positive
/// diagonal entry is reported as unphysical. Throws InputError on non-finite
/// entries.
bool check_physical(const VarianceMatrix2Mode& v,
                    double slack = kDefaultTolerances.physical_slack);

/// Smallest eigenvalue of the Hermitian matrix V + (i/2) Omega.
double min_uncertainty_eigenvalue(const VarianceMatrix2Mode& v);

/// Left-hand side of Simon's separability inequality. Negative means the
/// (Gaussian) state is entangled.
double simon_lhs_general(const VarianceMatrix2Mode& v);

/// Degree of entanglement 1 - 4 (<Q_A^2> - |<Q_A Q_B>|)(<P_A^2> - |<P_A P_B>|).
/// Requires <Q_A^2> = <Q_B^2> and <P_A^2> = <P_B^2> within
/// tol.symmetry_rel; otherwise throws AsymmetricStateError.
EntanglementVerdict epsilon_symmetric(const VarianceMatrix2Mode& v,
                                      const Tolerances& tol = kDefaultTolerances);

/// 1 - 4 nu^2 where nu is the smaller partially transposed symplectic
/// eigenvalue implied by the Simon form. Coincides with epsilon_symmetric
/// whenever the local variances agree, and has the same sign as
/// -simon_lhs_general for any physical state.
double epsilon_general(const VarianceMatrix2Mode& v);

/// True when the local variances of A and B agree within the tolerance.
bool is_symmetric(const VarianceMatrix2Mode& v,
                  const Tolerances& tol = kDefaultTolerances);

}  // namespace vacsep
