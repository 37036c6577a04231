#include "vacsep/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vacsep/chain.hpp"
#include "vacsep/chain_optimizer.hpp"
#include "vacsep/continuum.hpp"
#include "vacsep/errors.hpp"
#include "vacsep/gaussian.hpp"
#include "vacsep/serialize.hpp"
#include "vacsep/sweeps.hpp"

#ifndef VACSEP_VERSION
#define VACSEP_VERSION "unknown"
#endif

namespace vacsep::experiment {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Command, std::string_view>, 8> kCommands{{
    {Command::ChainNcrit, "chain-ncrit"},
    {Command::ChainOptimize, "chain-optimize"},
    {Command::ChainCfit, "chain-cfit"},
    {Command::ContEps, "cont-eps"},
    {Command::ContSweepLmin, "cont-sweep-lmin"},
    {Command::ContSweepEpsmax, "cont-sweep-epsmax"},
    {Command::ContSweepSymmetric, "cont-sweep-symmetric"},
    {Command::SimonCheck, "simon-check"},
}};

enum class Kind { Positive, Real, Count, NonNegInt, Bool, Grid, PositiveList, Text };

struct ParamSpec {
  std::string_view name;
  Kind kind;
  bool required;
  std::string_view fallback;  // empty: no default
};

std::vector<ParamSpec> specs(Command c) {
  switch (c) {
    case Command::ChainNcrit:
      return {{"L", Kind::Positive, true, ""},       {"m", Kind::Positive, false, "1"},
              {"d-min", Kind::Count, false, "1"},    {"d-max", Kind::Count, false, "16"},
              {"n-ceiling", Kind::Count, false, "400"}, {"N", Kind::NonNegInt, false, "0"},
              {"restarts", Kind::NonNegInt, false, "4"}};
    case Command::ChainOptimize:
      return {{"L", Kind::Positive, false, ""},      {"alpha", Kind::Real, false, ""},
              {"n", Kind::Count, true, ""},          {"d", Kind::NonNegInt, true, ""},
              {"m", Kind::Positive, false, "1"},     {"N", Kind::NonNegInt, false, "0"},
              {"mirrored", Kind::Bool, false, "true"}, {"restarts", Kind::NonNegInt, false, "4"}};
    case Command::ChainCfit:
      return {{"L", Kind::PositiveList, true, ""},   {"m", Kind::Positive, false, "1"},
              {"d-min", Kind::Count, false, "1"},    {"d-max", Kind::Count, false, "16"},
              {"n-ceiling", Kind::Count, false, "400"}, {"restarts", Kind::NonNegInt, false, "4"}};
    case Command::ContEps:
      return {{"s", Kind::Real, true, ""},
              {"L", Kind::Positive, true, ""},
              {"D", Kind::Real, true, ""},
              {"m", Kind::Positive, false, "1"}};
    case Command::ContSweepLmin:
    case Command::ContSweepEpsmax:
    case Command::ContSweepSymmetric:
      return {{"D-grid", Kind::Grid, true, ""},      {"m", Kind::Positive, false, "1"},
              {"L-min", Kind::Positive, false, "0.001"}, {"L-max", Kind::Positive, false, "200"},
              {"D-max", Kind::Positive, false, "10"}};
    case Command::SimonCheck:
      return {{"file", Kind::Text, true, ""}};
  }
  return {};
}

std::optional<double> to_double(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(const std::string& text) {
  long long v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<bool> to_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  return std::nullopt;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

// Typed access to a config's parameters after validation has passed.
class Params {
 public:
  explicit Params(const ExperimentConfig& c) : config_(c), specs_(specs(c.command)) {}

  bool has(std::string_view key) const { return !raw(key).empty(); }

  std::string raw(std::string_view key) const {
    if (auto it = config_.parameters.find(std::string(key)); it != config_.parameters.end())
      return it->second;
    for (const auto& s : specs_)
      if (s.name == key) return std::string(s.fallback);
    return {};
  }

  double real(std::string_view key) const { return to_double(raw(key)).value(); }
  std::size_t count(std::string_view key) const {
    return static_cast<std::size_t>(to_integer(raw(key)).value());
  }
  bool flag(std::string_view key) const { return to_bool(raw(key)).value(); }
  std::vector<double> list(std::string_view key) const {
    std::vector<double> out;
    for (const auto& item : split_list(raw(key))) out.push_back(to_double(item).value());
    return out;
  }
  std::vector<double> grid(std::string_view key) const { return continuum::parse_grid(raw(key)); }

  /// Every key with its effective value, defaults included.
  ordered_json resolved() const {
    ordered_json j = ordered_json::object();
    for (const auto& s : specs_)
      if (has(s.name)) j[std::string(s.name)] = raw(s.name);
    return j;
  }

 private:
  const ExperimentConfig& config_;
  std::vector<ParamSpec> specs_;
};

void check_kind(const ParamSpec& spec, const std::string& value, std::vector<std::string>& out) {
  const std::string name(spec.name);
  switch (spec.kind) {
    case Kind::Positive: {
      auto v = to_double(value);
      if (!v || !std::isfinite(*v)) out.push_back(name + " must be a number");
      else if (!(*v > 0.0)) out.push_back(name + " must be positive");
      break;
    }
    case Kind::Real: {
      auto v = to_double(value);
      if (!v || !std::isfinite(*v)) out.push_back(name + " must be a number");
      break;
    }
    case Kind::Count: {
      auto v = to_integer(value);
      if (!v || *v < 1) out.push_back(name + " must be a positive integer");
      break;
    }
    case Kind::NonNegInt: {
      auto v = to_integer(value);
      if (!v || *v < 0) out.push_back(name + " must be a non-negative integer");
      break;
    }
    case Kind::Bool:
      if (!to_bool(value)) out.push_back(name + " must be true or false");
      break;
    case Kind::Grid:
      try {
        (void)continuum::parse_grid(value);
      } catch (const InputError& e) {
        out.push_back(name + ": " + e.what());
      }
      break;
    case Kind::PositiveList: {
      const auto items = split_list(value);
      if (items.empty()) out.push_back(name + " must list at least one value");
      for (const auto& item : items) {
        auto v = to_double(item);
        if (!v || !(*v > 0.0) || !std::isfinite(*v)) {
          out.push_back(name + " must be a comma-separated list of positive numbers");
          break;
        }
      }
      break;
    }
    case Kind::Text:
      break;
  }
}

void append_unique(std::vector<std::string>& out, const std::vector<std::string>& more) {
  for (const auto& m : more)
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
}

void check_command(const ExperimentConfig& config, std::vector<std::string>& out) {
  const Params p(config);
  switch (config.command) {
    case Command::ChainNcrit:
    case Command::ChainCfit:
      if (p.count("d-max") < p.count("d-min")) out.push_back("d-max must not be below d-min");
      if (config.command == Command::ChainCfit && p.count("d-max") - p.count("d-min") < 3)
        out.push_back("the C(L) fit needs at least 4 values of d");
      break;
    case Command::ChainOptimize: {
      if (p.has("L") == p.has("alpha")) {
        out.push_back("give exactly one of L or alpha");
        break;
      }
      chain::ChainParams cp;
      cp.block = p.count("n");
      cp.gap = p.count("d");
      cp.mass = p.real("m");
      if (p.has("alpha")) {
        cp.alpha = p.real("alpha");
        cp.sites = p.count("N") ? p.count("N") : chain::default_ring_size(cp.block, cp.gap);
        append_unique(out, cp.violations());
      } else {
        cp = chain::ChainParams::from_physical(cp.mass, p.real("L"), cp.block, cp.gap, p.count("N"));
        append_unique(out, cp.violations());
      }
      break;
    }
    case Command::ContEps: {
      const continuum::ContinuumConfig c{p.real("s"), p.real("L"), p.real("D"), p.real("m")};
      append_unique(out, c.violations());
      break;
    }
    case Command::ContSweepLmin:
    case Command::ContSweepEpsmax:
    case Command::ContSweepSymmetric: {
      const auto grid = p.grid("D-grid");
      const double dmax = p.real("D-max");
      if (std::any_of(grid.begin(), grid.end(), [](double d) { return d < 0.0; }))
        out.push_back("supports overlap");
      if (std::any_of(grid.begin(), grid.end(), [&](double d) { return d >= dmax; }))
        out.push_back("D values must stay below D-max");
      if (!(p.real("L-min") < p.real("L-max"))) out.push_back("L-min must be below L-max");
      break;
    }
    case Command::SimonCheck: {
      std::ifstream in(p.raw("file"));
      if (!in) {
        out.push_back("cannot read variance matrix file " + p.raw("file"));
        break;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        const auto v = io::variance_from_json(ss.str());
        if (!v.all_finite()) out.push_back("variance matrix entries must be finite");
      } catch (const InputError& e) {
        out.push_back(e.what());
      }
      break;
    }
  }
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Unwritable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Unwritable("cannot write " + tmp);
    out << text;
    out.flush();
    if (!out) throw Unwritable("cannot write " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Unwritable("cannot move " + tmp + " to " + path + ": " + ec.message());
}

// Rows go to "<csv>.partial" line by line; the finished file is renamed into
// place so that a CSV at the final path is always complete.
class RowSink {
 public:
  RowSink(std::string path, std::string_view header, std::vector<std::string> kept)
      : path_(std::move(path)), partial_(path_ + ".partial") {
    out_.open(partial_, std::ios::binary | std::ios::trunc);
    if (!out_) throw Unwritable("cannot write " + partial_);
    line(std::string(header));
    for (auto& row : kept) line(row);
    reused_ = kept.size();
  }

  void line(const std::string& text) {
    out_ << text << '\n';
    out_.flush();
    if (!out_) throw Unwritable("write failed for " + partial_);
    text_ += text;
    text_ += '\n';
  }

  void row(const std::string& text, bool converged) {
    line(text);
    converged_.push_back(converged);
  }

  /// Flags of rows taken over from an interrupted run.
  void reused_flags(const std::vector<bool>& flags) { converged_ = flags; }

  std::string finish() {
    out_.close();
    std::error_code ec;
    fs::rename(partial_, path_, ec);
    if (ec) throw Unwritable("cannot move " + partial_ + " to " + path_ + ": " + ec.message());
    return text_;
  }

  const std::vector<bool>& converged() const { return converged_; }
  std::size_t reused() const { return reused_; }
  const std::string& partial_path() const { return partial_; }

 private:
  std::string path_, partial_;
  std::ofstream out_;
  std::string text_;
  std::vector<bool> converged_;
  std::size_t reused_ = 0;
};

struct Context {
  const ExperimentConfig& config;
  const Params& params;
  std::ostream& log;
  unsigned threads;
  Tolerances tol;
  continuum::QuadratureSettings quad;
  std::vector<std::vector<std::string>> previous_rows;  // split, header excluded
  ordered_json summary = ordered_json::object();
  std::vector<std::string> messages;
  bool not_converged = false;
};

struct Dispatch {
  std::string_view header;
  std::function<void(Context&, RowSink&)> body;
  bool resumable = false;
};

chain::OptimizerOptions optimizer_options(const Context& ctx) {
  chain::OptimizerOptions o;
  o.seed = ctx.config.seed;
  o.tol = ctx.tol;
  o.random_restarts = static_cast<int>(ctx.params.count("restarts"));
  return o;
}

void run_chain_ncrit(Context& ctx, RowSink& sink) {
  const auto& p = ctx.params;
  chain::NCritOptions opts;
  opts.n_ceiling = p.count("n-ceiling");
  opts.ring_size = p.count("N");
  opts.optimizer = optimizer_options(ctx);
  const double length = p.real("L"), mass = p.real("m");

  std::size_t n_start = 1;
  std::size_t d = p.count("d-min");
  chain::CriticalSizeTable table;
  table.length = length;
  table.mass = mass;
  for (const auto& cells : ctx.previous_rows) {
    chain::NCritRow r;
    r.gap = static_cast<std::size_t>(std::stoull(cells.at(0)));
    if (!cells.at(1).empty()) {
      r.n_crit = static_cast<std::size_t>(std::stoull(cells[1]));
      n_start = *r.n_crit;
    }
    table.rows.push_back(r);
    ++d;
  }
  for (; d <= p.count("d-max"); ++d) {
    auto row = chain::find_n_crit(length, mass, d, n_start, opts);
    if (row.n_crit) n_start = *row.n_crit;
    ctx.log << "d=" << d << " n_crit="
            << (row.n_crit ? std::to_string(*row.n_crit) : std::string("not found")) << '\n';
    if (!row.converged) ctx.not_converged = true;
    sink.row(io::csv::row(row), row.converged);
    table.rows.push_back(row);
  }
  try {
    const double c = chain::fit_C(table);
    ctx.summary["C"] = c;
    ctx.summary["slope"] = table.slope;
    ctx.summary["D"] = table.d_of_l;
    ctx.messages.push_back("C(L) = " + io::format_double(c) + ", D = C L = " +
                           io::format_double(table.d_of_l));
  } catch (const InputError& e) {
    ctx.summary["fit"] = e.what();
  }
}

void run_chain_optimize(Context& ctx, RowSink& sink) {
  const auto& p = ctx.params;
  chain::ChainParams cp;
  if (p.has("alpha")) {
    cp.block = p.count("n");
    cp.gap = p.count("d");
    cp.mass = p.real("m");
    cp.alpha = p.real("alpha");
    cp.sites = p.count("N") ? p.count("N") : chain::default_ring_size(cp.block, cp.gap);
  } else {
    cp = chain::ChainParams::from_physical(p.real("m"), p.real("L"), p.count("n"), p.count("d"),
                                           p.count("N"));
  }
  const bool mirrored = p.flag("mirrored");
  const auto res = chain::optimize_profile(cp, mirrored, optimizer_options(ctx));
  for (std::size_t j = 0; j < res.profile.size(); ++j) {
    sink.row(std::to_string(j + 1) + "," + io::format_double(res.profile.weights[j]) + "," +
                 io::format_double(res.profile_b.weights[j]),
             res.converged);
  }
  ctx.not_converged = !res.converged;
  ctx.summary["chain"] = ordered_json::parse(io::chain_params_to_json(cp));
  ctx.summary["mirrored"] = mirrored;
  ctx.summary["epsilon_max"] = res.epsilon_max;
  ctx.summary["entangled"] = res.entangled;
  ctx.summary["variance"] = ordered_json::parse(io::variance_to_json(res.variance));
  ctx.summary["profile_A"] = ordered_json::parse(io::profile_to_json(res.profile));
  ctx.summary["profile_B"] = ordered_json::parse(io::profile_to_json(res.profile_b));
  ctx.summary["iterations"] = res.iterations;
  ctx.summary["restart_epsilons"] = res.restart_epsilons;
  ctx.messages.push_back(std::string(res.entangled ? "entangled" : "separable") +
                         ", epsilon_max = " + io::format_double(res.epsilon_max));
}

void run_chain_cfit(Context& ctx, RowSink& sink) {
  const auto& p = ctx.params;
  chain::NCritOptions opts;
  opts.n_ceiling = p.count("n-ceiling");
  opts.optimizer = optimizer_options(ctx);
  ordered_json tables = ordered_json::array();
  for (double length : p.list("L")) {
    auto table = chain::build_critical_table(length, p.real("m"), p.count("d-min"),
                                             p.count("d-max"), opts);
    bool ok = std::all_of(table.rows.begin(), table.rows.end(),
                          [](const chain::NCritRow& r) { return r.converged; });
    ordered_json rows = ordered_json::array();
    for (const auto& r : table.rows) rows.push_back(io::csv::row(r));
    std::size_t used = 0;
    try {
      chain::fit_C(table);
      used = static_cast<std::size_t>(std::count_if(
          table.rows.begin(), table.rows.end(), [](const auto& r) { return r.n_crit.has_value(); }));
      sink.row(io::format_double(length) + "," + io::format_double(table.slope) + "," +
                   io::format_double(table.c_of_l) + "," + io::format_double(table.d_of_l) + "," +
                   std::to_string(used),
               ok);
    } catch (const InputError& e) {
      ok = false;
      sink.row(io::format_double(length) + ",,,,0", false);
      ctx.log << "L=" << length << ": " << e.what() << '\n';
    }
    if (!ok) ctx.not_converged = true;
    ctx.log << "L=" << length << " C=" << table.c_of_l << " D=" << table.d_of_l << '\n';
    tables.push_back({{"L", length}, {"rows", rows}});
  }
  ctx.summary["tables"] = tables;
}

continuum::SweepOptions sweep_options(const Context& ctx) {
  continuum::SweepOptions o;
  o.mass = ctx.params.real("m");
  o.box.length_min = ctx.params.real("L-min");
  o.box.length_max = ctx.params.real("L-max");
  o.quad = ctx.quad;
  o.tol = ctx.tol;
  o.threads = ctx.threads;
  return o;
}

void run_cont_eps(Context& ctx, RowSink& sink) {
  const auto& p = ctx.params;
  const continuum::ContinuumConfig c{p.real("s"), p.real("L"), p.real("D"), p.real("m")};
  const auto rep = continuum::correlation_report(c, ctx.quad, true);
  const auto verdict = epsilon_symmetric(rep.variance, ctx.tol);
  const auto& v = rep.variance;
  sink.row(io::format_double(c.tip) + "," + io::format_double(c.length) + "," +
               io::format_double(c.gap) + "," + io::format_double(c.mass) + "," +
               io::format_double(v.qq_a) + "," + io::format_double(v.pp_a) + "," +
               io::format_double(v.qq_ab) + "," + io::format_double(v.pp_ab) + "," +
               io::format_double(verdict.epsilon) + "," + (verdict.entangled ? "1" : "0") + "," +
               io::format_double(verdict.negativity) + "," + io::format_double(rep.error_estimate),
           true);
  ctx.summary["variance"] = ordered_json::parse(io::variance_to_json(v));
  ctx.summary["physical"] = check_physical(v, ctx.tol.physical_slack);
  ctx.summary["momentum_cutoff"] = rep.momentum_cutoff;
  ctx.summary["imag_max"] = rep.imag_max;
  ctx.summary["symmetry_mismatch"] = rep.symmetry_mismatch;
  ctx.messages.push_back(std::string(verdict.entangled ? "entangled" : "separable") +
                         ", epsilon = " + io::format_double(verdict.epsilon));
}

void run_cont_sweep(Context& ctx, RowSink& sink, bool symmetric) {
  auto opts = sweep_options(ctx);
  const auto grid = ctx.params.grid("D-grid");
  const std::size_t skip = std::min(ctx.previous_rows.size(), grid.size());
  if (skip > 0) {
    const auto& last = ctx.previous_rows[skip - 1];
    opts.initial_warm = std::array<double, 2>{std::stod(last.at(2)), std::stod(last.at(3))};
  }
  const std::span<const double> rest(grid.data() + skip, grid.size() - skip);
  auto on_point = [&](std::size_t, const continuum::OptimumPoint& pt) {
    ctx.log << "D=" << pt.gap << " eps_max=" << pt.eps_max << " L_opt=" << pt.length
            << " s_opt=" << pt.tip << '\n';
    if (!pt.converged) ctx.not_converged = true;
    sink.row(io::csv::row(pt), pt.converged);
  };
  const auto points = symmetric ? continuum::sweep_symmetric(rest, opts, on_point)
                                : continuum::sweep_epsmax(rest, opts, on_point);
  ordered_json flags = ordered_json::array();
  for (const auto& pt : points) flags.push_back(pt.at_length_bound);
  ctx.summary["at_length_bound"] = flags;
}

void run_cont_lmin(Context& ctx, RowSink& sink) {
  const auto opts = sweep_options(ctx);
  const auto grid = ctx.params.grid("D-grid");
  const std::size_t skip = std::min(ctx.previous_rows.size(), grid.size());
  const std::span<const double> rest(grid.data() + skip, grid.size() - skip);
  ordered_json warnings = ordered_json::array();
  continuum::sweep_Lmin(rest, opts, [&](std::size_t, const continuum::LminPoint& pt) {
    ctx.log << "D=" << pt.gap << " L_min="
            << (pt.length_min ? io::format_double(*pt.length_min) : std::string("not found"))
            << '\n';
    for (const auto& w : pt.warnings) {
      ctx.log << "warning: D=" << pt.gap << ": " << w << '\n';
      warnings.push_back({{"D", pt.gap}, {"message", w}});
    }
    sink.row(io::csv::row(pt), true);
  });
  ctx.summary["warnings"] = warnings;
}

void run_simon_check(Context& ctx, RowSink& sink) {
  std::ifstream in(ctx.params.raw("file"));
  std::stringstream ss;
  ss << in.rdbuf();
  const auto v = io::variance_from_json(ss.str());
  const bool physical = check_physical(v, ctx.tol.physical_slack);
  const double lhs = simon_lhs_general(v);
  const bool symmetric = is_symmetric(v, ctx.tol);
  EntanglementVerdict verdict;
  if (symmetric) {
    verdict = epsilon_symmetric(v, ctx.tol);
  } else {
    // With unequal local variances only the Simon sign decides; epsilon_general stands in for
    // the magnitude.
    verdict.epsilon = epsilon_general(v);
    verdict.entangled = lhs < 0.0 && verdict.epsilon > ctx.tol.eps_tol;
    verdict.negativity = verdict.entangled ? negativity_from_epsilon(verdict.epsilon) : 0.0;
  }
  std::string row;
  for (double x : {v.qq_a, v.pp_a, v.qq_b, v.pp_b, v.qq_ab, v.pp_ab}) row += io::format_double(x) + ",";
  row += std::string(physical ? "1" : "0") + "," + io::format_double(lhs) + "," +
         io::format_double(verdict.epsilon) + "," + (verdict.entangled ? "1" : "0") + "," +
         io::format_double(verdict.negativity) + "," + (symmetric ? "1" : "0");
  sink.row(row, true);
  ctx.summary["physical"] = physical;
  ctx.summary["simon_lhs"] = lhs;
  ctx.summary["epsilon"] = verdict.epsilon;
  ctx.summary["entangled"] = verdict.entangled;
  ctx.summary["negativity"] = verdict.negativity;
  if (!physical) ctx.messages.push_back("unphysical variance matrix");
  std::ostringstream msg;
  msg << (verdict.entangled ? "entangled" : "separable") << ", ε = " << verdict.epsilon;
  if (verdict.entangled) msg << ", negativity = " << verdict.negativity;
  ctx.messages.push_back(msg.str());
}

Dispatch dispatch(Command c) {
  switch (c) {
    case Command::ChainNcrit:
      return {io::csv::kCriticalTableHeader, run_chain_ncrit, true};
    case Command::ChainOptimize:
      return {io::csv::kProfileHeader, run_chain_optimize};
    case Command::ChainCfit:
      return {io::csv::kExtrapolationHeader, run_chain_cfit};
    case Command::ContEps:
      return {io::csv::kContinuumPointHeader, run_cont_eps};
    case Command::ContSweepLmin:
      return {io::csv::kLminHeader, run_cont_lmin, true};
    case Command::ContSweepEpsmax:
      return {io::csv::kSweepHeader, [](Context& c, RowSink& s) { run_cont_sweep(c, s, false); },
              true};
    case Command::ContSweepSymmetric:
      return {io::csv::kSweepHeader, [](Context& c, RowSink& s) { run_cont_sweep(c, s, true); },
              true};
    case Command::SimonCheck:
      return {io::csv::kSimonHeader, run_simon_check};
  }
  throw InputError("unknown command");
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("VACSEP_THREADS")) {
    if (auto v = to_integer(env); v && *v > 0) return static_cast<unsigned>(*v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Rows of an interrupted run whose manifest records this exact configuration.
std::vector<std::string> resumable_rows(const ExperimentConfig& config, const std::string& csv,
                                        const std::string& manifest, std::string_view header) {
  std::ifstream man(manifest);
  std::ifstream part(csv + ".partial", std::ios::binary);
  if (!man || !part) return {};
  try {
    // Key order is irrelevant here, so compare as unordered objects.
    const auto m = nlohmann::json::parse(man);
    if (m.value("status", "") != "running") return {};
    if (m.at("config") != nlohmann::json::parse(config.to_json())) return {};
  } catch (const std::exception&) {
    return {};
  }
  std::stringstream ss;
  ss << part.rdbuf();
  const std::string text = ss.str();
  std::vector<std::string> rows;
  std::size_t start = 0;
  bool first = true;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) break;  // an unterminated last line is discarded
    const std::string line = text.substr(start, nl - start);
    if (first) {
      if (line != header) return {};
      first = false;
    } else {
      rows.push_back(line);
    }
    start = nl + 1;
  }
  return rows;
}

}  // namespace

std::string_view command_name(Command c) {
  for (const auto& [cmd, name] : kCommands)
    if (cmd == c) return name;
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& [cmd, n] : kCommands)
    if (n == name) return cmd;
  return std::nullopt;
}

std::vector<std::string_view> command_names() {
  std::vector<std::string_view> out;
  for (const auto& entry : kCommands) out.push_back(entry.second);
  return out;
}

std::vector<std::string> parameter_names(Command c) {
  std::vector<std::string> out;
  for (const auto& s : specs(c)) out.emplace_back(s.name);
  return out;
}

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  j["command"] = std::string(command_name(command));
  j["parameters"] = ordered_json::object();
  for (const auto& [k, v] : parameters) j["parameters"][k] = v;
  j["seed"] = seed;
  j["tolerances"] = ordered_json::object();
  if (tol_eps) j["tolerances"]["eps"] = *tol_eps;
  if (tol_quad) j["tolerances"]["quad"] = *tol_quad;
  j["output_path"] = output_path;
  j["threads"] = threads;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw InputError(std::string("config JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config JSON must be an object");
  ExperimentConfig c;
  try {
    if (j.contains("command")) {
      const auto name = j.at("command").get<std::string>();
      auto cmd = parse_command(name);
      if (!cmd) throw InputError("unknown command '" + name + "'");
      c.command = *cmd;
    }
    if (j.contains("parameters")) {
      for (const auto& [k, v] : j.at("parameters").items()) {
        c.parameters[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      if (t.contains("eps")) c.tol_eps = t.at("eps").get<double>();
      if (t.contains("quad")) c.tol_quad = t.at("quad").get<double>();
    }
    if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
  } catch (const ordered_json::exception& e) {
    throw InputError(std::string("config JSON: ") + e.what());
  }
  return c;
}

std::vector<std::string> validate(const ExperimentConfig& config) {
  std::vector<std::string> out;
  const auto sp = specs(config.command);
  for (const auto& [key, value] : config.parameters) {
    const auto it = std::find_if(sp.begin(), sp.end(), [&](const ParamSpec& s) { return s.name == key; });
    if (it == sp.end()) {
      out.push_back("unknown parameter '" + key + "' for " + std::string(command_name(config.command)));
      continue;
    }
    check_kind(*it, value, out);
  }
  for (const auto& s : sp) {
    if (s.required && !config.parameters.contains(std::string(s.name)))
      out.push_back("missing required parameter " + std::string(s.name));
  }
  if (config.tol_eps && !(*config.tol_eps > 0.0)) out.push_back("tol-eps must be positive");
  if (config.tol_quad && !(*config.tol_quad > 0.0 && *config.tol_quad < 1.0))
    out.push_back("tol-quad must lie in (0,1)");
  if (out.empty()) check_command(config, out);
  return out;
}

std::string manifest_path_for(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() > ext.size() && csv_path.ends_with(ext))
    return csv_path.substr(0, csv_path.size() - ext.size()) + ".manifest.json";
  return csv_path + ".manifest.json";
}

std::string default_output_path(Command c) { return std::string(command_name(c)) + ".csv"; }

RunOutcome run(const ExperimentConfig& config_in, std::ostream& log) {
  RunOutcome outcome;
  ExperimentConfig config = config_in;
  if (config.output_path.empty()) config.output_path = default_output_path(config.command);
  outcome.csv_path = config.output_path;
  outcome.manifest_path = manifest_path_for(config.output_path);

  if (const auto problems = validate(config); !problems.empty()) {
    for (const auto& p : problems) log << "invalid: " << p << '\n';
    outcome.messages = problems;
    outcome.exit_code = kExitInvalid;
    return outcome;
  }

  const Params params(config);
  Context ctx{config, params, log, resolve_threads(config.threads), {}, {}, {}, {}, {}, false};
  if (config.tol_eps) ctx.tol.eps_tol = *config.tol_eps;
  if (config.tol_quad) {
    ctx.quad.rel_tol = *config.tol_quad;
    ctx.quad.abs_tol = 0.1 * *config.tol_quad;
  }
  const auto job = dispatch(config.command);

  ordered_json manifest;
  manifest["config"] = ordered_json::parse(config.to_json());
  manifest["resolved_parameters"] = params.resolved();
  manifest["tolerances"] = {{"eps", ctx.tol.eps_tol},
                            {"physical_slack", ctx.tol.physical_slack},
                            {"symmetry_rel", ctx.tol.symmetry_rel},
                            {"quad_rel", ctx.quad.rel_tol},
                            {"quad_abs", ctx.quad.abs_tol}};
  manifest["tool_version"] = VACSEP_VERSION;
  manifest["started"] = utc_now();
  manifest["status"] = "running";

  std::vector<std::string> kept;
  if (config.resume && job.resumable) {
    kept = resumable_rows(config, outcome.csv_path, outcome.manifest_path, job.header);
    if (!kept.empty()) log << "resuming after " << kept.size() << " completed rows\n";
  }

  std::optional<RowSink> sink;
  try {
    // The rows of the previous run sit in the file about to be truncated.
    sink.emplace(outcome.csv_path, job.header, kept);
    std::vector<bool> reused_flags;
    for (const auto& row : kept) {
      ctx.previous_rows.push_back(io::csv::split(row));
      const auto& cells = ctx.previous_rows.back();
      reused_flags.push_back(job.header == io::csv::kSweepHeader ? cells.back() == "1" : true);
    }
    sink->reused_flags(reused_flags);
    write_atomic(outcome.manifest_path, manifest.dump(2) + "\n");
  } catch (const Unwritable& e) {
    log << "error: " << e.what() << '\n';
    outcome.messages.push_back(e.what());
    outcome.exit_code = kExitUnwritable;
    return outcome;
  }

  std::string status = "complete";
  try {
    job.body(ctx, *sink);
    if (ctx.not_converged) {
      status = "not_converged";
      outcome.exit_code = kExitNotConverged;
    }
  } catch (const Unwritable& e) {
    log << "error: " << e.what() << '\n';
    outcome.exit_code = kExitUnwritable;
    return outcome;
  } catch (const InputError& e) {
    log << "invalid: " << e.what() << '\n';
    outcome.messages.push_back(e.what());
    status = "invalid";
    outcome.exit_code = kExitInvalid;
  } catch (const std::exception& e) {
    // Numerical failures: keep whatever rows were produced.
    log << "numerical failure: " << e.what() << '\n';
    outcome.messages.push_back(e.what());
    status = "failed";
    outcome.exit_code = kExitNotConverged;
  }

  try {
    const std::string csv = sink->finish();
    manifest["finished"] = utc_now();
    manifest["status"] = status;
    manifest["resumed_rows"] = sink->reused();
    manifest["converged"] = sink->converged();
    manifest["csv"] = {{"path", outcome.csv_path},
                       {"rows", sink->converged().size()},
                       {"crc32", io::crc32(csv)}};
    manifest["summary"] = ctx.summary;
    write_atomic(outcome.manifest_path, manifest.dump(2) + "\n");
  } catch (const Unwritable& e) {
    log << "error: " << e.what() << '\n';
    outcome.exit_code = kExitUnwritable;
    return outcome;
  }
  for (const auto& m : ctx.messages) outcome.messages.push_back(m);
  return outcome;
}

}  // namespace vacsep::experiment
