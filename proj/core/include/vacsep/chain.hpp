#pragma once

// Ground state of the periodic harmonic chain
//
//   H = (E0/2) sum_j (q_j^2 + p_j^2 - alpha q_j q_{j-1}),   q_0 = q_N,
//
// and its reduction to two collective modes. E0 only sets the energy scale
// and never enters the ground-state correlations, so it is not modelled.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vacsep/gaussian.hpp"

namespace vacsep::chain {

/// Coupling that makes a block of n sites represent a region of physical
/// length L for a field of mass m (lengths in Compton wavelengths 1/m).
double alpha_from_physical(double mass, double length, std::size_t sites_per_block);

/// Physical distance between two blocks of n sites separated by d sites.
double separation_D(std::size_t gap_sites, std::size_t sites_per_block, double length);

/// Default ring size 10 (2n + d), at which the infinite-chain limit is reached.
std::size_t default_ring_size(std::size_t block, std::size_t gap);

struct ChainParams {
  std::size_t sites = 0;  ///< N, total ring size
  double alpha = 0.0;     ///< dimensionless coupling, 0 <= alpha < 1
  double mass = 1.0;      ///< field mass m
  double length = 0.0;    ///< physical block length L (0 if not derived)
  std::size_t block = 1;  ///< n, sites per block
  std::size_t gap = 0;    ///< d, sites between the blocks

  /// Derives alpha from (m, L, n). ring_size = 0 selects default_ring_size.
  static ChainParams from_physical(double mass, double length, std::size_t block,
                                   std::size_t gap, std::size_t ring_size = 0);

  /// Physical separation of the two blocks.
  double separation() const { return separation_D(gap, block, length); }

  /// Every violated precondition, empty when the parameters are usable.
  std::vector<std::string> violations() const;
  /// Throws InputError carrying the first violation.
  void validate() const;
};

/// Circulant position and momentum correlations <q_j q_l>, <p_j p_l>.
/// Immutable after construction and safe to share between threads.
class ChainGroundState {
 public:
  /// Throws DivergenceError for alpha >= 1 and InputError for alpha < 0 or N = 0.
  ChainGroundState(std::size_t sites, double alpha);

  std::size_t sites() const noexcept { return q_.size(); }
  double alpha() const noexcept { return alpha_; }

  /// Correlation at ring separation r (any integer, reduced mod N).
  double q_at(long long r) const noexcept { return q_[wrap(r)]; }
  double p_at(long long r) const noexcept { return p_[wrap(r)]; }

  double qq(std::size_t j, std::size_t l) const noexcept {
    return q_at(static_cast<long long>(j) - static_cast<long long>(l));
  }
  double pp(std::size_t j, std::size_t l) const noexcept {
    return p_at(static_cast<long long>(j) - static_cast<long long>(l));
  }

  Eigen::MatrixXd dense_q() const;
  Eigen::MatrixXd dense_p() const;

 private:
  std::size_t wrap(long long r) const noexcept {
    const auto n = static_cast<long long>(q_.size());
    r %= n;
    return static_cast<std::size_t>(r < 0 ? r + n : r);
  }

  double alpha_;
  std::vector<double> q_;
  std::vector<double> p_;
};

ChainGroundState ground_state(const ChainParams& params);

/// Shared, memoised ground state keyed by (N, alpha).
std::shared_ptr<const ChainGroundState> cached_ground_state(std::size_t sites, double alpha);

/// Weights f_1..f_n of a block starting at 0-based site `offset`.
struct DiscreteProfile {
  std::vector<double> weights;
  std::size_t offset = 0;

  std::size_t size() const noexcept { return weights.size(); }
  double norm_squared() const;
  /// Same block, weights scaled to unit norm. Throws InputError on a zero vector.
  DiscreteProfile normalized() const;
  /// Reversed weights g_j = f_{n+1-j} at a new offset.
  DiscreteProfile mirrored(std::size_t new_offset) const;

  static DiscreteProfile uniform(std::size_t n, std::size_t offset);
};

/// Blocks used throughout: A at sites [0, n), B at [n + d, 2n + d).
std::size_t block_b_offset(const ChainParams& params);

/// Two-mode variance matrix of the collective operators built from the two
/// profiles. Blocks may wrap around the ring but must not share a site.
VarianceMatrix2Mode collective_variance(const ChainGroundState& state,
                                        const DiscreteProfile& a,
                                        const DiscreteProfile& b);

}  // namespace vacsep::chain
