#include "vacsep/chain_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "vacsep/errors.hpp"

namespace vacsep::chain {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Correlation blocks for mirrored profiles: A at [0, n), B at [n + d, 2n + d)
// with g_j = f_{n-1-j}. The cross forms become Hankel matrices in f.
struct MirroredObjective {
  MatrixXd tq, hq, tp, hp;

  MirroredObjective(const ChainGroundState& s, std::size_t n, std::size_t d) {
    const auto nn = static_cast<Eigen::Index>(n);
    tq.resize(nn, nn);
    hq.resize(nn, nn);
    tp.resize(nn, nn);
    hp.resize(nn, nn);
    const auto span = static_cast<long long>(2 * n + d) - 1;
    for (Eigen::Index i = 0; i < nn; ++i) {
      for (Eigen::Index k = 0; k < nn; ++k) {
        tq(i, k) = s.q_at(i - k);
        tp(i, k) = s.p_at(i - k);
        hq(i, k) = s.q_at(span - i - k);
        hp(i, k) = s.p_at(span - i - k);
      }
    }
  }

  std::vector<Eigen::Index> blocks() const { return {tq.rows()}; }

  VarianceMatrix2Mode variance(const VectorXd& x) const {
    const double nn = x.squaredNorm();
    VarianceMatrix2Mode v;
    v.qq_a = v.qq_b = x.dot(tq * x) / nn;
    v.pp_a = v.pp_b = x.dot(tp * x) / nn;
    v.qq_ab = x.dot(hq * x) / nn;
    v.pp_ab = x.dot(hp * x) / nn;
    return v;
  }

  double value(const VectorXd& x) const {
    const auto v = variance(x);
    return 1.0 - 4.0 * (v.qq_a - std::abs(v.qq_ab)) * (v.pp_a - std::abs(v.pp_ab));
  }

  double value_and_gradient(const VectorXd& x, VectorXd& grad) const {
    const double nn = x.squaredNorm();
    const VectorXd tqx = tq * x, hqx = hq * x, tpx = tp * x, hpx = hp * x;
    const double b = x.dot(hqx), e = x.dot(hpx);
    const double pq = (x.dot(tqx) - std::abs(b)) / nn;
    const double pm = (x.dot(tpx) - std::abs(e)) / nn;
    const VectorXd dq = (2.0 * (tqx - sgn(b) * hqx) - 2.0 * pq * x) / nn;
    const VectorXd dm = (2.0 * (tpx - sgn(e) * hpx) - 2.0 * pm * x) / nn;
    grad = -4.0 * (dq * pm + pq * dm);
    return 1.0 - 4.0 * pq * pm;
  }
};

// Independent profiles f (block A) and g (block B), both in site order.
// Maximises epsilon_general, which reduces to the symmetric measure when the
// local variances agree.
struct GeneralObjective {
  MatrixXd tq, tp, cq, cp;

  GeneralObjective(const ChainGroundState& s, std::size_t n, std::size_t d) {
    const auto nn = static_cast<Eigen::Index>(n);
    tq.resize(nn, nn);
    tp.resize(nn, nn);
    cq.resize(nn, nn);
    cp.resize(nn, nn);
    const auto off = static_cast<long long>(n + d);
    for (Eigen::Index i = 0; i < nn; ++i) {
      for (Eigen::Index j = 0; j < nn; ++j) {
        tq(i, j) = s.q_at(i - j);
        tp(i, j) = s.p_at(i - j);
        cq(i, j) = s.q_at(off + j - i);
        cp(i, j) = s.p_at(off + j - i);
      }
    }
  }

  std::vector<Eigen::Index> blocks() const { return {tq.rows(), tq.rows()}; }

  VarianceMatrix2Mode variance(const VectorXd& x) const {
    const auto n = tq.rows();
    const VectorXd f = x.head(n), g = x.tail(n);
    const double nf = f.squaredNorm(), ng = g.squaredNorm(), nfg = std::sqrt(nf * ng);
    VarianceMatrix2Mode v;
    v.qq_a = f.dot(tq * f) / nf;
    v.pp_a = f.dot(tp * f) / nf;
    v.qq_b = g.dot(tq * g) / ng;
    v.pp_b = g.dot(tp * g) / ng;
    v.qq_ab = f.dot(cq * g) / nfg;
    v.pp_ab = f.dot(cp * g) / nfg;
    return v;
  }

  double value(const VectorXd& x) const { return epsilon_general(variance(x)); }

  double value_and_gradient(const VectorXd& x, VectorXd& grad) const {
    const auto n = tq.rows();
    const VectorXd f = x.head(n), g = x.tail(n);
    const double nf = f.squaredNorm(), ng = g.squaredNorm(), nfg = std::sqrt(nf * ng);
    const VectorXd tqf = tq * f, tpf = tp * f, tqg = tq * g, tpg = tp * g;
    const VectorXd cqg = cq * g, cpg = cp * g;
    const VectorXd cqtf = cq.transpose() * f, cptf = cp.transpose() * f;

    const double qa = f.dot(tqf) / nf, pa = f.dot(tpf) / nf;
    const double qb = g.dot(tqg) / ng, pb = g.dot(tpg) / ng;
    const double qab = f.dot(cqg) / nfg, pab = f.dot(cpg) / nfg;

    const double xq = qa * qb - qab * qab, xp = pa * pb - pab * pab;
    const double det = xq * xp;
    const double s = sgn(qab * pab);
    const double delta = qa * pa + qb * pb + 2.0 * std::abs(qab * pab);
    const double root = std::sqrt(std::max(0.0, delta * delta - 4.0 * det));
    const double nu2 = 2.0 * det / (delta + root);
    // d nu2 = (nu2 d delta - d det) / (2 nu2 - delta), with 2 nu2 - delta = -root.
    const double inv = -1.0 / std::max(root, 1e-300);
    auto dnu = [&](double ddelta, double ddet) { return (nu2 * ddelta - ddet) * inv; };
    const double e_qa = -4.0 * dnu(pa, qb * xp);
    const double e_pa = -4.0 * dnu(qa, pb * xq);
    const double e_qb = -4.0 * dnu(pb, qa * xp);
    const double e_pb = -4.0 * dnu(qb, pa * xq);
    const double e_qab = -4.0 * dnu(2.0 * s * pab, -2.0 * qab * xp);
    const double e_pab = -4.0 * dnu(2.0 * s * qab, -2.0 * pab * xq);

    grad.resize(2 * n);
    grad.head(n) = e_qa * (2.0 * tqf - 2.0 * qa * f) / nf + e_pa * (2.0 * tpf - 2.0 * pa * f) / nf +
                   e_qab * (cqg / nfg - qab * f / nf) + e_pab * (cpg / nfg - pab * f / nf);
    grad.tail(n) = e_qb * (2.0 * tqg - 2.0 * qb * g) / ng + e_pb * (2.0 * tpg - 2.0 * pb * g) / ng +
                   e_qab * (cqtf / nfg - qab * g / ng) + e_pab * (cptf / nfg - pab * g / ng);
    return 1.0 - 4.0 * nu2;
  }
};

void project(VectorXd& x, const std::vector<Eigen::Index>& blocks) {
  Eigen::Index start = 0;
  for (auto len : blocks) {
    x.segment(start, len).normalize();
    start += len;
  }
}

void tangent(VectorXd& g, const VectorXd& x, const std::vector<Eigen::Index>& blocks) {
  Eigen::Index start = 0;
  for (auto len : blocks) {
    auto xs = x.segment(start, len);
    auto gs = g.segment(start, len);
    gs -= gs.dot(xs) * xs;
    start += len;
  }
}

struct RunResult {
  VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Spectral projected gradient ascent on a product of unit spheres: the
// Barzilai-Borwein step is safeguarded by a non-monotone backtracking line
// search and every trial point is renormalised block by block.
template <class Objective>
RunResult ascend(const Objective& obj, VectorXd x, const OptimizerOptions& opts) {
  const auto blocks = obj.blocks();
  project(x, blocks);
  if (opts.observer) opts.observer(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));

  VectorXd g;
  double f = obj.value_and_gradient(x, g);
  tangent(g, x, blocks);

  constexpr int kMemory = 10;
  constexpr double kArmijo = 1e-4;
  std::deque<double> history{f};

  RunResult out;
  double step = 1.0 / std::max(g.norm(), 1e-12);
  VectorXd x_new, g_new;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const double gnorm = g.norm();
    if (gnorm < opts.g_tol) {
      out.converged = true;
      break;
    }
    const double f_ref = *std::max_element(history.begin(), history.end());
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f_ref));

    double t = step;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + t * g;
      project(x_new, blocks);
      f_new = obj.value_and_gradient(x_new, g_new);
      if (std::isfinite(f_new) && f_new >= f_ref + kArmijo * t * gnorm * gnorm - noise) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    tangent(g_new, x_new, blocks);
    const VectorXd s = x_new - x;
    const VectorXd y = g_new - g;
    const double sy = -s.dot(y);
    step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * t;
    step = std::clamp(step, 1e-12, 1e12);

    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    history.push_back(f);
    if (history.size() > kMemory) history.pop_front();
    if (opts.observer) opts.observer(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }
  if (!out.converged && g.norm() < opts.g_tol) out.converged = true;
  out.x = std::move(x);
  out.value = obj.value(out.x);
  out.iterations = it;
  return out;
}

std::vector<VectorXd> deterministic_shapes(Eigen::Index n) {
  VectorXd uniform = VectorXd::Ones(n);
  VectorXd ramp(n), reversed(n), triangle(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ramp(i) = static_cast<double>(i + 1);
    reversed(i) = static_cast<double>(n - i);
    triangle(i) = static_cast<double>(std::min(i + 1, n - i));
  }
  return {uniform, ramp, reversed, triangle};
}

VectorXd reversed_copy(const VectorXd& v) { return v.reverse(); }

template <class Objective>
OptimizationResult run_multistart(const Objective& obj, Eigen::Index n, bool mirrored,
                                  const ChainParams& params, const OptimizerOptions& opts) {
  std::vector<VectorXd> starts;
  for (const auto& shape : deterministic_shapes(n)) {
    if (mirrored) {
      starts.push_back(shape);
    } else {
      VectorXd x(2 * n);
      x << shape, reversed_copy(shape);
      starts.push_back(x);
    }
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int r = 0; r < opts.random_restarts; ++r) {
    VectorXd x(mirrored ? n : 2 * n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    starts.push_back(x);
  }

  OptimizationResult res;
  RunResult best;
  for (const auto& x0 : starts) {
    RunResult r = ascend(obj, x0, opts);
    res.iterations += r.iterations;
    res.restart_epsilons.push_back(r.value);
    ++res.restarts_used;
    if (r.value > best.value) best = std::move(r);
  }

  const std::size_t off_b = block_b_offset(params);
  res.epsilon_max = best.value;
  res.converged = best.converged;
  res.variance = obj.variance(best.x);
  res.profile.offset = 0;
  if (mirrored) {
    res.profile.weights.assign(best.x.data(), best.x.data() + n);
    res.profile_b = res.profile.mirrored(off_b);
    res.entangled = res.epsilon_max > opts.tol.eps_tol;
  } else {
    res.profile.weights.assign(best.x.data(), best.x.data() + n);
    res.profile_b.weights.assign(best.x.data() + n, best.x.data() + 2 * n);
    res.profile_b.offset = off_b;
    res.entangled = res.epsilon_max > opts.tol.eps_tol &&
                    simon_lhs_general(res.variance) < 0.0;
  }
  return res;
}

}  // namespace

OptimizationResult optimize_profile(const ChainGroundState& state, const ChainParams& params,
                                    bool mirrored, const OptimizerOptions& opts) {
  params.validate();
  if (state.sites() != params.sites) throw InputError("ground state does not match ring size");
  const auto n = static_cast<Eigen::Index>(params.block);
  if (mirrored) {
    return run_multistart(MirroredObjective(state, params.block, params.gap), n, true, params, opts);
  }
  return run_multistart(GeneralObjective(state, params.block, params.gap), n, false, params, opts);
}

OptimizationResult optimize_profile(const ChainParams& params, bool mirrored,
                                    const OptimizerOptions& opts) {
  params.validate();
  return optimize_profile(ChainGroundState(params.sites, params.alpha), params, mirrored, opts);
}

double mirrored_epsilon(const ChainGroundState& state, const ChainParams& params,
                        std::span<const double> weights) {
  if (weights.size() != params.block) throw InputError("profile length must equal block size");
  MirroredObjective obj(state, params.block, params.gap);
  VectorXd x = Eigen::Map<const VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return obj.value(x);
}

NCritRow find_n_crit(double length, double mass, std::size_t gap, std::size_t n_start,
                     const NCritOptions& opts) {
  if (!(mass > 0.0)) throw InputError("mass must be positive (massless field is out of scope)");
  if (!(length > 0.0)) throw InputError("region length L must be positive");
  if (gap < 1) throw InputError("gap d must be at least 1");

  NCritRow row;
  row.gap = gap;
  for (std::size_t n = std::max<std::size_t>(1, n_start); n <= opts.n_ceiling; ++n) {
    const auto params = ChainParams::from_physical(mass, length, n, gap, opts.ring_size);
    const ChainGroundState state(params.sites, params.alpha);
    const auto res = optimize_profile(state, params, true, opts.optimizer);
    row.alpha = params.alpha;
    row.sites = params.sites;
    row.epsilon_max = res.epsilon_max;
    row.converged = res.converged;
    if (res.epsilon_max > opts.optimizer.tol.eps_tol) {
      row.n_crit = n;
      return row;
    }
  }
  return row;
}

CriticalSizeTable build_critical_table(double length, double mass, std::size_t gap_min,
                                       std::size_t gap_max, const NCritOptions& opts) {
  if (gap_min < 1 || gap_max < gap_min) throw InputError("gap range must satisfy 1 <= d_min <= d_max");
  CriticalSizeTable table;
  table.length = length;
  table.mass = mass;
  std::size_t n_start = 1;
  for (std::size_t d = gap_min; d <= gap_max; ++d) {
    auto row = find_n_crit(length, mass, d, n_start, opts);
    if (row.n_crit) n_start = *row.n_crit;
    table.rows.push_back(row);
  }
  return table;
}

double fit_C(CriticalSizeTable& table) {
  std::vector<double> xs, ys;
  for (const auto& r : table.rows) {
    if (!r.n_crit) continue;
    xs.push_back(static_cast<double>(r.gap));
    ys.push_back(static_cast<double>(*r.n_crit));
  }
  if (xs.size() < 4) throw InputError("fit_C needs at least 4 rows with a critical size");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw InputError("degenerate fit: all rows share the same d");
  const double slope = sxy / sxx;
  if (!(slope > 0.0)) throw InputError("degenerate fit: n_crit does not grow with d");
  const double intercept = my - slope * mx;
  table.slope = slope;
  table.c_of_l = 1.0 / slope;
  table.d_of_l = table.c_of_l * table.length;
  table.residuals.clear();
  for (std::size_t i = 0; i < xs.size(); ++i) table.residuals.push_back(ys[i] - (intercept + slope * xs[i]));
  return table.c_of_l;
}

std::vector<ExtrapolationPoint> critical_distance_extrapolation(std::span<const double> lengths,
                                                                double mass, std::size_t gap_min,
                                                                std::size_t gap_max,
                                                                const NCritOptions& opts) {
  if (!(mass > 0.0)) throw InputError("mass must be positive (massless field is out of scope)");
  for (double l : lengths) {
    if (!(l > 0.0)) throw InputError("every region length L must be positive");
  }
  std::vector<ExtrapolationPoint> out;
  for (double l : lengths) {
    ExtrapolationPoint p;
    p.length = l;
    p.table = build_critical_table(l, mass, gap_min, gap_max, opts);
    p.c_of_l = fit_C(p.table);
    p.d_of_l = p.table.d_of_l;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace vacsep::chain
