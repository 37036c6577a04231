// vacsep: command-line driver for the chain and continuum experiments.
//
//   vacsep chain-ncrit --L 1.41421356 --m 1 --d-max 16 --out ncrit.csv
//   vacsep cont-sweep-epsmax --D-grid 0:0.3:0.02 --threads 4
//   vacsep simon-check --file vac.json
//
// Each run writes a CSV and a "<name>.manifest.json" beside it. Flags
// override values read with --config.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vacsep/errors.hpp"
#include "vacsep/experiment.hpp"

namespace ex = vacsep::experiment;

namespace {

struct CommonFlags {
  std::map<std::string, std::string> params;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_eps, tol_quad;
  std::optional<std::string> out, config;
  std::optional<unsigned> threads;
  bool resume = false;
  bool validate_only = false;
};

const std::map<std::string, std::string, std::less<>> kDescriptions{
    {"chain-ncrit", "smallest entangled block size n_crit for each gap d, with the C(L) fit"},
    {"chain-optimize", "optimal detection profile for one chain configuration"},
    {"chain-cfit", "C(L) and D(L) = C(L) L for a list of lengths"},
    {"cont-eps", "correlations and epsilon for one triangle configuration"},
    {"cont-sweep-lmin", "minimal support length L_min(D) over a grid of D"},
    {"cont-sweep-epsmax", "epsilon maximised over (L, s) for a grid of D"},
    {"cont-sweep-symmetric", "epsilon maximised over L with s = 1/2 for a grid of D"},
    {"simon-check", "separability verdict for a variance matrix read from JSON"},
};

const std::vector<std::pair<std::string, std::string>> kParameterFlags{
    {"L", "block or support length in Compton wavelengths (chain-cfit: comma-separated list)"},
    {"m", "field mass"},
    {"d", "sites between the blocks"},
    {"n", "sites per block"},
    {"s", "tip position of the triangle, in (0,1)"},
    {"D", "distance between the supports"},
    {"D-grid", "separations as lo:hi:step"},
    {"d-min", "smallest gap in sites"},
    {"d-max", "largest gap in sites"},
    {"n-ceiling", "largest block size tried by the n_crit scan"},
    {"N", "ring size (0 = 10 (2n + d))"},
    {"alpha", "chain coupling, instead of L"},
    {"restarts", "random restarts of the profile optimiser"},
    {"mirrored", "restrict to mirrored profiles (true/false)"},
    {"file", "variance matrix JSON for simon-check"},
    {"L-min", "smallest support length searched"},
    {"L-max", "largest support length searched"},
    {"D-max", "upper bound on the separations of a sweep"},
};

void add_flags(CLI::App* sub, CommonFlags& f) {
  for (const auto& [name, help] : kParameterFlags) {
    sub->add_option_function<std::string>(
        "--" + name, [&f, name = name](const std::string& v) { f.params[name] = v; }, help);
  }
  sub->add_option("--seed", f.seed, "seed of the random restarts");
  sub->add_option("--tol-eps", f.tol_eps, "epsilon threshold for an entangled verdict");
  sub->add_option("--tol-quad", f.tol_quad, "relative quadrature tolerance");
  sub->add_option("--out", f.out, "CSV output path");
  sub->add_option("--threads", f.threads, "worker threads (default: VACSEP_THREADS, then all cores)");
  sub->add_option("--config", f.config, "JSON experiment config; flags override it");
  sub->add_flag("--resume", f.resume, "continue an interrupted run with the same config");
  sub->add_flag("--validate-only", f.validate_only, "report violations and exit");
}

ex::ExperimentConfig build_config(ex::Command cmd, const CommonFlags& f) {
  ex::ExperimentConfig c;
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw vacsep::InputError("cannot read config file " + *f.config);
    std::stringstream ss;
    ss << in.rdbuf();
    c = ex::ExperimentConfig::from_json(ss.str());
    if (ss.str().find("\"command\"") != std::string::npos && c.command != cmd) {
      throw vacsep::InputError("config file is for " + std::string(ex::command_name(c.command)));
    }
  }
  c.command = cmd;
  for (const auto& [k, v] : f.params) c.parameters[k] = v;
  if (f.seed) c.seed = *f.seed;
  if (f.tol_eps) c.tol_eps = f.tol_eps;
  if (f.tol_quad) c.tol_quad = f.tol_quad;
  if (f.out) c.output_path = *f.out;
  if (f.threads) c.threads = *f.threads;
  c.resume = f.resume;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement of collective vacuum modes: chain and continuum experiments"};
  app.set_version_flag("--version", VACSEP_VERSION);
  app.require_subcommand(1);

  CommonFlags flags;
  std::map<CLI::App*, ex::Command> subs;
  for (auto name : ex::command_names()) {
    auto* sub = app.add_subcommand(std::string(name), kDescriptions.find(name)->second);
    add_flags(sub, flags);
    subs[sub] = *ex::parse_command(name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ex::kExitInvalid;
  }

  CLI::App* chosen = app.get_subcommands().front();
  ex::ExperimentConfig config;
  try {
    config = build_config(subs.at(chosen), flags);
  } catch (const vacsep::InputError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return ex::kExitInvalid;
  }

  if (flags.validate_only) {
    const auto problems = ex::validate(config);
    for (const auto& p : problems) std::cout << p << '\n';
    return problems.empty() ? ex::kExitOk : ex::kExitInvalid;
  }

  const auto outcome = ex::run(config, std::cerr);
  for (const auto& m : outcome.messages) std::cout << m << '\n';
  if (outcome.exit_code != ex::kExitInvalid && outcome.exit_code != ex::kExitUnwritable) {
    std::cerr << "wrote " << outcome.csv_path << " and " << outcome.manifest_path << '\n';
  }
  return outcome.exit_code;
}
