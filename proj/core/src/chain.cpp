#include "vacsep/chain.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "vacsep/errors.hpp"

namespace vacsep::chain {

double alpha_from_physical(double mass, double length, std::size_t sites_per_block) {
  if (!(mass > 0.0)) throw InputError("mass must be positive");
  if (!(length > 0.0)) throw InputError("region length L must be positive");
  if (sites_per_block == 0) throw InputError("block must contain at least one site");
  const double spacing = mass * length / static_cast<double>(sites_per_block);
  return 1.0 / (1.0 + 0.5 * spacing * spacing);
}

double separation_D(std::size_t gap_sites, std::size_t sites_per_block, double length) {
  if (sites_per_block == 0) throw InputError("block must contain at least one site");
  return static_cast<double>(gap_sites) / static_cast<double>(sites_per_block) * length;
}

std::size_t default_ring_size(std::size_t block, std::size_t gap) {
  return 10 * (2 * block + gap);
}

ChainParams ChainParams::from_physical(double mass, double length, std::size_t block,
                                       std::size_t gap, std::size_t ring_size) {
  ChainParams p;
  p.mass = mass;
  p.length = length;
  p.block = block;
  p.gap = gap;
  p.alpha = alpha_from_physical(mass, length, block);
  p.sites = ring_size == 0 ? default_ring_size(block, gap) : ring_size;
  return p;
}

std::vector<std::string> ChainParams::violations() const {
  std::vector<std::string> out;
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha >= 1.0) {
    out.emplace_back("alpha must lie in (0,1)");
  }
  if (!(mass > 0.0)) out.emplace_back("mass must be positive");
  if (length < 0.0 || !std::isfinite(length)) out.emplace_back("region length L must be positive");
  if (block == 0) out.emplace_back("block size n must be at least 1");
  if (sites < 2 * block + gap) out.emplace_back("ring size N must be at least 2n + d");
  return out;
}

void ChainParams::validate() const {
  if (auto v = violations(); !v.empty()) throw InputError(v.front());
}

ChainGroundState::ChainGroundState(std::size_t sites, double alpha) : alpha_(alpha) {
  if (sites == 0) throw InputError("ring must contain at least one site");
  if (!std::isfinite(alpha) || alpha < 0.0) throw InputError("alpha must lie in (0,1)");
  if (alpha >= 1.0) {
    throw DivergenceError("alpha >= 1: the k = 0 normal mode has zero frequency");
  }
  const std::size_t n = sites;
  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n);

  std::vector<double> cos_table(n);
  for (std::size_t j = 0; j < n; ++j) cos_table[j] = std::cos(two_pi_over_n * static_cast<double>(j));

  // Normal-mode frequencies 1 - alpha cos(2 pi k / N), written to avoid
  // cancellation as alpha -> 1.
  std::vector<double> omega(n), inv_omega(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double half = std::sin(0.5 * two_pi_over_n * static_cast<double>(k));
    omega[k] = std::sqrt((1.0 - alpha) + 2.0 * alpha * half * half);
    inv_omega[k] = 1.0 / omega[k];
  }

  q_.assign(n, 0.0);
  p_.assign(n, 0.0);
  const double norm = 0.5 / static_cast<double>(n);
  for (std::size_t r = 0; r <= n / 2; ++r) {
    double sq = 0.0, sp = 0.0;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
      sq += cos_table[idx] * inv_omega[k];
      sp += cos_table[idx] * omega[k];
      idx += r;
      if (idx >= n) idx -= n;
    }
    q_[r] = norm * sq;
    p_[r] = norm * sp;
    q_[(n - r) % n] = q_[r];
    p_[(n - r) % n] = p_[r];
  }
}

Eigen::MatrixXd ChainGroundState::dense_q() const {
  const auto n = static_cast<Eigen::Index>(sites());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = 0; l < n; ++l) m(j, l) = q_at(j - l);
  return m;
}

Eigen::MatrixXd ChainGroundState::dense_p() const {
  const auto n = static_cast<Eigen::Index>(sites());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = 0; l < n; ++l) m(j, l) = p_at(j - l);
  return m;
}

ChainGroundState ground_state(const ChainParams& params) {
  params.validate();
  return ChainGroundState(params.sites, params.alpha);
}

std::shared_ptr<const ChainGroundState> cached_ground_state(std::size_t sites, double alpha) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, double>, std::shared_ptr<const ChainGroundState>> cache;
  constexpr std::size_t kMaxEntries = 64;

  const auto key = std::make_pair(sites, alpha);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto state = std::make_shared<const ChainGroundState>(sites, alpha);
  std::lock_guard lock(mutex);
  if (cache.size() >= kMaxEntries) cache.clear();
  return cache.emplace(key, std::move(state)).first->second;
}

double DiscreteProfile::norm_squared() const {
  double s = 0.0;
  for (double w : weights) s += w * w;
  return s;
}

DiscreteProfile DiscreteProfile::normalized() const {
  const double n2 = norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw InputError("profile has zero or non-finite norm");
  DiscreteProfile out = *this;
  const double inv = 1.0 / std::sqrt(n2);
  for (double& w : out.weights) w *= inv;
  return out;
}

DiscreteProfile DiscreteProfile::mirrored(std::size_t new_offset) const {
  DiscreteProfile out;
  out.weights.assign(weights.rbegin(), weights.rend());
  out.offset = new_offset;
  return out;
}

DiscreteProfile DiscreteProfile::uniform(std::size_t n, std::size_t offset) {
  if (n == 0) throw InputError("profile must have at least one weight");
  DiscreteProfile p;
  p.weights.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
  p.offset = offset;
  return p;
}

std::size_t block_b_offset(const ChainParams& params) { return params.block + params.gap; }

VarianceMatrix2Mode collective_variance(const ChainGroundState& state, const DiscreteProfile& a,
                                        const DiscreteProfile& b) {
  const std::size_t n_sites = state.sites();
  if (a.size() == 0 || b.size() == 0) throw InputError("profiles must be non-empty");
  if (a.size() + b.size() > n_sites) throw InputError("blocks do not fit on the ring");

  // Disjointness on the ring: B must start after A ends and end before A
  // starts again.
  const std::size_t start_a = a.offset % n_sites;
  const std::size_t start_b = b.offset % n_sites;
  const std::size_t rel = (start_b + n_sites - start_a) % n_sites;
  if (rel < a.size() || rel + b.size() > n_sites) {
    throw InputError("blocks overlap: collective modes would not commute");
  }

  auto quad = [](std::span<const double> f, std::size_t off_f, std::span<const double> g,
                 std::size_t off_g, auto&& corr) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        row += corr(static_cast<long long>(off_g + j) - static_cast<long long>(off_f + i)) * g[j];
      }
      s += f[i] * row;
    }
    return s;
  };
  auto q = [&](long long r) { return state.q_at(r); };
  auto p = [&](long long r) { return state.p_at(r); };

  VarianceMatrix2Mode v;
  v.qq_a = quad(a.weights, a.offset, a.weights, a.offset, q);
  v.pp_a = quad(a.weights, a.offset, a.weights, a.offset, p);
  v.qq_b = quad(b.weights, b.offset, b.weights, b.offset, q);
  v.pp_b = quad(b.weights, b.offset, b.weights, b.offset, p);
  v.qq_ab = quad(a.weights, a.offset, b.weights, b.offset, q);
  v.pp_ab = quad(a.weights, a.offset, b.weights, b.offset, p);
  return v;
}

}  // namespace vacsep::chain
