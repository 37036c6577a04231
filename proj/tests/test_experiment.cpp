#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "vacsep/errors.hpp"
#include "vacsep/experiment.hpp"
#include "vacsep/serialize.hpp"

using namespace vacsep;
using namespace vacsep::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("vacsep_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig make(Command c, std::map<std::string, std::string> params, const fs::path& out) {
  ExperimentConfig cfg;
  cfg.command = c;
  cfg.parameters = std::move(params);
  cfg.output_path = out.string();
  cfg.threads = 1;
  return cfg;
}

bool mentions(const std::vector<std::string>& problems, const std::string& text) {
  for (const auto& p : problems)
    if (p.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("command names") {
  for (auto name : command_names()) {
    const auto c = parse_command(name);
    REQUIRE(c.has_value());
    CHECK(command_name(*c) == name);
  }
  CHECK_FALSE(parse_command("chain-nope").has_value());
  CHECK(manifest_path_for("out/x.csv") == "out/x.manifest.json");
  CHECK(manifest_path_for("x.dat") == "x.dat.manifest.json");
  CHECK(default_output_path(Command::ContEps) == "cont-eps.csv");
}

TEST_CASE("validation examples") {
  CHECK(mentions(validate(make(Command::ChainOptimize, {{"alpha", "1.2"}, {"n", "2"}, {"d", "1"}}, "x.csv")),
                 "alpha must lie in (0,1)"));
  CHECK(mentions(validate(make(Command::ContEps, {{"s", "0.5"}, {"L", "1"}, {"D", "-1"}}, "x.csv")),
                 "supports overlap"));
  CHECK(mentions(validate(make(Command::ContSweepEpsmax, {{"D-grid", "-0.1:0.1:0.1"}}, "x.csv")),
                 "supports overlap"));
  CHECK(mentions(validate(make(Command::ChainNcrit, {}, "x.csv")), "missing required parameter L"));
  CHECK(mentions(validate(make(Command::ChainNcrit, {{"L", "2"}, {"bogus", "1"}}, "x.csv")),
                 "unknown parameter 'bogus'"));
  CHECK(mentions(validate(make(Command::ChainNcrit, {{"L", "-2"}}, "x.csv")), "L must be positive"));
  CHECK(mentions(validate(make(Command::ChainCfit, {{"L", "2"}, {"d-max", "3"}}, "x.csv")),
                 "at least 4 values of d"));
  CHECK(mentions(validate(make(Command::ChainOptimize, {{"L", "2"}, {"alpha", "0.5"}, {"n", "2"}, {"d", "1"}}, "x.csv")),
                 "exactly one of L or alpha"));
  CHECK(mentions(validate(make(Command::SimonCheck, {{"file", "/nonexistent/v.json"}}, "x.csv")),
                 "cannot read"));
  auto tol = make(Command::ContEps, {{"s", "0.5"}, {"L", "1"}, {"D", "1"}}, "x.csv");
  CHECK(validate(tol).empty());
  tol.tol_quad = 2.0;
  CHECK(mentions(validate(tol), "tol-quad"));
}

TEST_CASE("config JSON round-trip") {
  auto cfg = make(Command::ContSweepLmin, {{"D-grid", "0:0.2:0.1"}, {"m", "2"}}, "a/b.csv");
  cfg.seed = 99;
  cfg.tol_eps = 1e-8;
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.command == cfg.command);
  CHECK(back.parameters == cfg.parameters);
  CHECK(back.seed == 99);
  CHECK(back.tol_eps == cfg.tol_eps);
  CHECK_FALSE(back.tol_quad.has_value());
  CHECK(back.output_path == "a/b.csv");
  CHECK(back.to_json() == cfg.to_json());
  CHECK_THROWS_AS(ExperimentConfig::from_json("[1]"), InputError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"command":"fly"})"), InputError);
}

TEST_CASE("simon-check run") {
  const auto dir = scratch_dir("simon");
  {
    std::ofstream f(dir / "tms.json");
    f << R"({"qq_A":0.77154083,"pp_A":0.77154083,"qq_B":0.77154083,"pp_B":0.77154083,"qq_AB":0.58760060,"pp_AB":-0.58760060})";
  }
  std::ostringstream log;
  const auto out = run(make(Command::SimonCheck, {{"file", (dir / "tms.json").string()}}, dir / "s.csv"), log);
  CHECK(out.exit_code == kExitOk);
  const auto csv = slurp(dir / "s.csv");
  CHECK(csv.rfind(std::string(io::csv::kSimonHeader) + "\n", 0) == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "s.manifest.json"));
  CHECK(manifest["status"] == "complete");
  CHECK(manifest["summary"]["entangled"] == true);
  CHECK(manifest["csv"]["crc32"].get<std::uint32_t>() == io::crc32(csv));
}

TEST_CASE("exit codes") {
  const auto dir = scratch_dir("codes");
  std::ostringstream log;
  auto bad = make(Command::ContEps, {{"s", "0.5"}, {"L", "1"}, {"D", "-1"}}, dir / "bad.csv");
  CHECK(run(bad, log).exit_code == kExitInvalid);
  CHECK_FALSE(fs::exists(dir / "bad.csv"));
  auto unwritable = make(Command::ContEps, {{"s", "0.5"}, {"L", "1"}, {"D", "1"}},
                         dir / "missing" / "deeper" / "x.csv");
  CHECK(run(unwritable, log).exit_code == kExitUnwritable);
}

TEST_CASE("property: reruns are byte-identical") {
  const auto dir = scratch_dir("rerun");
  const std::vector<ExperimentConfig> configs{
      make(Command::ContEps, {{"s", "0.84"}, {"L", "4.5"}, {"D", "0.2"}}, dir / "eps.csv"),
      make(Command::ChainNcrit, {{"L", "1.4142135623730951"}, {"d-max", "3"}}, dir / "ncrit.csv"),
      make(Command::ChainOptimize, {{"L", "2"}, {"n", "5"}, {"d", "1"}}, dir / "opt.csv"),
  };
  for (const auto& cfg : configs) {
    std::ostringstream log;
    REQUIRE(run(cfg, log).exit_code == kExitOk);
    const auto first = slurp(cfg.output_path);
    const auto m1 = nlohmann::json::parse(slurp(manifest_path_for(cfg.output_path)));
    REQUIRE(run(cfg, log).exit_code == kExitOk);
    CHECK(slurp(cfg.output_path) == first);
    const auto m2 = nlohmann::json::parse(slurp(manifest_path_for(cfg.output_path)));
    CHECK(m1["summary"] == m2["summary"]);
    CHECK(m1["csv"] == m2["csv"]);
  }
}

TEST_CASE("resume continues an interrupted chain-ncrit run") {
  const auto dir = scratch_dir("resume");
  auto cfg = make(Command::ChainNcrit, {{"L", "1.4142135623730951"}, {"d-max", "3"}}, dir / "n.csv");
  std::ostringstream log;
  REQUIRE(run(cfg, log).exit_code == kExitOk);
  const auto full = slurp(dir / "n.csv");

  // Fake an interruption after the first data row.
  const auto second_nl = full.find('\n', full.find('\n') + 1);
  {
    std::ofstream part(dir / "n.csv.partial", std::ios::binary);
    part << full.substr(0, second_nl + 1);
  }
  fs::remove(dir / "n.csv");
  auto manifest = nlohmann::json::parse(slurp(dir / "n.manifest.json"));
  manifest["status"] = "running";
  std::ofstream(dir / "n.manifest.json") << manifest.dump(2);

  cfg.resume = true;
  std::ostringstream log2;
  REQUIRE(run(cfg, log2).exit_code == kExitOk);
  CHECK(log2.str().find("resuming after 1") != std::string::npos);
  CHECK(slurp(dir / "n.csv") == full);
  const auto after = nlohmann::json::parse(slurp(dir / "n.manifest.json"));
  CHECK(after["resumed_rows"] == 1);
  CHECK(after["csv"]["crc32"].get<std::uint32_t>() == io::crc32(full));
}

#ifdef VACSEP_CLI_PATH
TEST_CASE("command-line driver") {
  const auto dir = scratch_dir("cli");
  const std::string cli = VACSEP_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  CHECK(status(cli + " --version") == 0);
  CHECK(status(cli + " chain-optimize --alpha 1.2 --n 2 --d 1 --out " + (dir / "a.csv").string()) == 2);
  CHECK(status(cli + " cont-eps --s 0.5 --L 1 --D -1 --out " + (dir / "b.csv").string()) == 2);
  CHECK(status(cli + " cont-eps --s 0.84 --L 4.5 --D 0.2 --out " + (dir / "c.csv").string()) == 0);
  CHECK(fs::exists(dir / "c.manifest.json"));
  CHECK(status(cli + " cont-eps --s 0.84 --L 4.5 --D 0.2 --out /proc/nowhere/c.csv") == 4);
  CHECK(status(cli + " no-such-command") == 2);
}
#endif
