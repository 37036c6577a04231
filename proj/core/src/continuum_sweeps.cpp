#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "vacsep/errors.hpp"
#include "vacsep/sweeps.hpp"

namespace vacsep::continuum {
namespace {

constexpr std::array<std::array<double, 2>, 3> kFixedSeeds{{{1.0, 0.9}, {0.3, 0.95}, {3.0, 0.85}}};
constexpr int kLengthGrid = 25;
constexpr int kBrentBits = 40;

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// Objective on the unconstrained plane (log L, s): the point is clamped into
// the box and the distance travelled outside is charged linearly, which keeps
// the simplex close to the feasible set without moving the constrained
// optimum.
class Objective {
 public:
  Objective(double gap, const SweepOptions& o) : gap_(gap), opts_(o) {
    lo_ = std::log(o.box.length_min);
    hi_ = std::log(o.box.length_max);
  }

  double epsilon(double length, double tip) const {
    ++evaluations;
    try {
      return epsilon_value({tip, length, gap_, opts_.mass}, opts_.quad);
    } catch (const QuadratureError&) {
      ++failures;
      return -HUGE_VAL;
    }
  }

  double clamp_log_length(double u) const { return std::clamp(u, lo_, hi_); }
  double clamp_tip(double s) const { return std::clamp(s, opts_.box.tip_min, opts_.box.tip_max); }

  double operator()(const std::array<double, 2>& p) const {
    const double u = clamp_log_length(p[0]), s = clamp_tip(p[1]);
    const double outside = std::abs(u - p[0]) + std::abs(s - p[1]);
    return -epsilon(std::exp(u), s) + 1e-3 * outside;
  }

  double log_min() const { return lo_; }
  double log_max() const { return hi_; }

  mutable std::size_t evaluations = 0;
  mutable std::size_t failures = 0;

 private:
  double gap_;
  const SweepOptions& opts_;
  double lo_, hi_;
};

std::vector<double> tip_grid(const SearchBox& box) {
  std::vector<double> s;
  for (double t = box.tip_min; t < box.tip_max - 1e-12; t += 0.05) s.push_back(t);
  for (double t : {0.975, box.tip_max})
    if (t > box.tip_min && t <= box.tip_max) s.push_back(t);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

double grid_log_length(const Objective& obj, int i) {
  return obj.log_min() + (obj.log_max() - obj.log_min()) * i / (kLengthGrid - 1);
}

void finish(OptimumPoint& pt, const Objective& obj, double length, double eps,
            const SweepOptions& opts) {
  pt.length = length;
  pt.eps_max = eps;
  pt.entangled = eps > opts.tol.eps_tol;
  pt.at_length_bound = std::abs(std::log(length) - obj.log_min()) < 1e-6 ||
                       std::abs(std::log(length) - obj.log_max()) < 1e-6;
  pt.evaluations = obj.evaluations;
}

OptimumPoint maximize_symmetric(double gap, const SweepOptions& opts,
                                std::optional<std::array<double, 2>> warm) {
  Objective obj(gap, opts);
  auto f = [&](double u) { return -obj.epsilon(std::exp(obj.clamp_log_length(u)), 0.5); };

  std::vector<double> us, fs;
  for (int i = 0; i < kLengthGrid; ++i) {
    us.push_back(grid_log_length(obj, i));
    fs.push_back(f(us.back()));
  }
  const double h = us[1] - us[0];
  std::size_t best = static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  double centre = us[best];
  if (warm) {
    const double uw = obj.clamp_log_length(std::log((*warm)[0]));
    if (f(uw) < fs[best]) centre = uw;
  }
  const double a = obj.clamp_log_length(centre - h), b = obj.clamp_log_length(centre + h);
  std::uintmax_t iters = 200;
  const auto [u, v] = boost::math::tools::brent_find_minima(f, a, b, kBrentBits, iters);

  OptimumPoint pt;
  pt.gap = gap;
  pt.tip = 0.5;
  pt.converged = iters < 200 && obj.failures == 0;
  finish(pt, obj, std::exp(obj.clamp_log_length(u)), -v, opts);
  return pt;
}

NelderMeadResult<2> simplex_from(const Objective& obj, const std::array<double, 2>& start,
                                 const SweepOptions& opts) {
  return nelder_mead(std::cref(obj), start, {0.3, 0.03}, opts.simplex);
}

}  // namespace

OptimumPoint maximize_epsilon(double gap, const SweepOptions& opts, bool symmetric,
                              std::optional<std::array<double, 2>> warm) {
  if (!(gap >= 0.0)) throw InputError("supports overlap");
  if (symmetric) return maximize_symmetric(gap, opts, warm);

  Objective obj(gap, opts);
  std::vector<std::array<double, 2>> starts;
  for (const auto& seed : kFixedSeeds) starts.push_back({std::log(seed[0]), seed[1]});
  if (warm) starts.push_back({std::log((*warm)[0]), (*warm)[1]});

  // Coarse scan so that optima far from the fixed seeds (large L near the
  // critical distance) are still found.
  std::array<double, 2> grid_best{};
  double grid_value = HUGE_VAL;
  for (int i = 0; i < kLengthGrid; ++i) {
    for (double s : tip_grid(opts.box)) {
      const std::array<double, 2> p{grid_log_length(obj, i), s};
      if (const double v = obj(p); v < grid_value) {
        grid_value = v;
        grid_best = p;
      }
    }
  }
  starts.push_back(grid_best);

  NelderMeadResult<2> best;
  best.value = HUGE_VAL;
  for (const auto& st : starts) {
    auto r = simplex_from(obj, st, opts);
    if (r.value < best.value) best = r;
  }

  OptimumPoint pt;
  pt.gap = gap;
  pt.tip = obj.clamp_tip(best.x[1]);
  pt.converged = best.converged && obj.failures == 0;
  const double length = std::exp(obj.clamp_log_length(best.x[0]));
  finish(pt, obj, length, obj.epsilon(length, pt.tip), opts);
  return pt;
}

namespace {

std::vector<OptimumPoint> sweep(std::span<const double> gaps, const SweepOptions& opts,
                                bool symmetric, const OptimumCallback& on_point) {
  std::vector<OptimumPoint> out(gaps.size());
  parallel_for(gaps.size(), opts.threads,
               [&](std::size_t i) { out[i] = maximize_epsilon(gaps[i], opts, symmetric); });

  // The warm pass only ever reads final results of earlier points, so the
  // outcome does not depend on how the first pass was scheduled.
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::optional<std::array<double, 2>> warm;
    if (i > 0) {
      warm = std::array<double, 2>{out[i - 1].length, out[i - 1].tip};
    } else {
      warm = opts.initial_warm;
    }
    if (opts.warm_start && warm) {
      OptimumPoint again;
      if (symmetric) {
        again = maximize_symmetric(gaps[i], opts, *warm);
      } else {
        Objective obj(gaps[i], opts);
        auto r = simplex_from(obj, {std::log((*warm)[0]), (*warm)[1]}, opts);
        again.gap = gaps[i];
        again.tip = obj.clamp_tip(r.x[1]);
        again.converged = r.converged && obj.failures == 0;
        const double length = std::exp(obj.clamp_log_length(r.x[0]));
        finish(again, obj, length, obj.epsilon(length, again.tip), opts);
      }
      if (again.eps_max > out[i].eps_max) {
        again.evaluations += out[i].evaluations;
        out[i] = again;
      } else {
        out[i].evaluations += again.evaluations;
      }
    }
    if (on_point) on_point(i, out[i]);
  }
  return out;
}

}  // namespace

std::vector<OptimumPoint> sweep_epsmax(std::span<const double> gaps, const SweepOptions& opts,
                                       const OptimumCallback& on_point) {
  return sweep(gaps, opts, false, on_point);
}

std::vector<OptimumPoint> sweep_symmetric(std::span<const double> gaps, const SweepOptions& opts,
                                          const OptimumCallback& on_point) {
  return sweep(gaps, opts, true, on_point);
}

std::pair<double, double> max_over_tip(double length, double gap, const SweepOptions& opts) {
  Objective obj(gap, opts);
  const auto grid = tip_grid(opts.box);
  std::size_t best = 0;
  double best_eps = -HUGE_VAL;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (const double e = obj.epsilon(length, grid[i]); e > best_eps) {
      best_eps = e;
      best = i;
    }
  }
  const double a = grid[best == 0 ? 0 : best - 1];
  const double b = grid[std::min(best + 1, grid.size() - 1)];
  std::uintmax_t iters = 100;
  const auto [s, v] = boost::math::tools::brent_find_minima(
      [&](double t) { return -obj.epsilon(length, t); }, a, b, kBrentBits, iters);
  if (-v > best_eps) return {-v, s};
  return {best_eps, grid[best]};
}

namespace {

LminPoint find_length_min(double gap, const SweepOptions& opts) {
  LminPoint out;
  out.gap = gap;
  const double ratio = std::sqrt(2.0);
  auto entangled = [&](double length) {
    const auto [eps, s] = max_over_tip(length, gap, opts);
    return std::pair{eps > opts.tol.eps_tol, s};
  };

  std::vector<double> lengths;
  for (double l = opts.box.length_min; l < opts.box.length_max * (1 + 1e-12); l *= ratio)
    lengths.push_back(l);
  if (lengths.back() < opts.box.length_max) lengths.push_back(opts.box.length_max);

  std::optional<std::size_t> first;
  int rises = 0;
  bool previous = false;
  double first_tip = 0.5;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const auto [ent, s] = entangled(lengths[i]);
    if (ent && !previous) {
      ++rises;
      if (!first) {
        first = i;
        first_tip = s;
      }
    }
    previous = ent;
  }
  if (!first) return out;

  out.multiple_sign_changes = rises > 1;
  if (out.multiple_sign_changes)
    out.warnings.push_back("epsilon(L) becomes positive more than once; L_min is the first crossing");

  if (*first == 0) {
    out.at_floor = true;
    out.length_min = lengths[0];
    out.tip = first_tip;
    out.warnings.push_back("entangled at the smallest admissible L");
    return out;
  }
  double lo = lengths[*first - 1], hi = lengths[*first];
  double tip = first_tip;
  while (hi - lo > opts.length_tol) {
    const double mid = 0.5 * (lo + hi);
    const auto [ent, s] = entangled(mid);
    if (ent) {
      hi = mid;
      tip = s;
    } else {
      lo = mid;
    }
  }
  out.length_min = hi;
  out.tip = tip;
  return out;
}

}  // namespace

std::vector<LminPoint> sweep_Lmin(std::span<const double> gaps, const SweepOptions& opts,
                                  const LminCallback& on_point) {
  for (double g : gaps)
    if (!(g >= 0.0)) throw InputError("supports overlap");
  std::vector<LminPoint> out(gaps.size());
  std::vector<char> done(gaps.size(), 0);
  std::mutex m;
  std::size_t reported = 0;
  parallel_for(gaps.size(), opts.threads, [&](std::size_t i) {
    out[i] = find_length_min(gaps[i], opts);
    std::lock_guard lock(m);
    done[i] = 1;
    while (reported < done.size() && done[reported]) {
      if (on_point) on_point(reported, out[reported]);
      ++reported;
    }
  });
  return out;
}

CriticalDistance critical_distance(const SweepOptions& opts, bool symmetric, double lo, double hi,
                                   double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0) || !(hi > lo) || !(lo >= 0.0))
    throw InputError("critical distance scan needs 0 <= lo < hi and positive steps");
  CriticalDistance out;
  std::optional<std::array<double, 2>> warm;
  auto probe = [&](double d) {
    auto pt = maximize_epsilon(d, opts, symmetric, warm);
    out.probes.push_back(pt);
    if (pt.entangled) {
      warm = std::array<double, 2>{pt.length, pt.tip};
      out.last_entangled = d;
      out.eps_at_last_entangled = pt.eps_max;
    }
    return pt.entangled;
  };

  std::optional<double> first_separable;
  const auto steps = static_cast<long>(std::floor((hi - lo) / coarse + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const double d = lo + coarse * static_cast<double>(i);
    if (!probe(d)) {
      first_separable = d;
      break;
    }
  }
  if (!first_separable) return out;
  if (*first_separable == lo) {
    out.d_crit = lo;
    return out;
  }
  const double start = *first_separable - coarse;
  const auto fine_steps = static_cast<long>(std::floor(coarse / fine + 1e-9));
  for (long i = 1; i < fine_steps; ++i) {
    const double d = start + fine * static_cast<double>(i);
    if (!probe(d)) {
      out.d_crit = d;
      return out;
    }
  }
  out.d_crit = *first_separable;
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw InputError("grid must have the form lo:hi:step");
  double lo, hi, step;
  try {
    lo = std::stod(spec.substr(0, c1));
    hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    step = std::stod(spec.substr(c2 + 1));
  } catch (const std::exception&) {
    throw InputError("grid must have the form lo:hi:step");
  }
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(step > 0.0) || hi < lo)
    throw InputError("grid needs finite lo <= hi and step > 0");
  const double count = std::floor((hi - lo) / step + 1e-9) + 1.0;
  if (count > 1e6) throw InputError("grid has too many points");
  std::vector<double> out;
  for (long i = 0; i < static_cast<long>(count); ++i) out.push_back(lo + step * static_cast<double>(i));
  return out;
}

}  // namespace vacsep::continuum
