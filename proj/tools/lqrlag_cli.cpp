#include "lqrlag/certificate.hpp"
#include "lqrlag/errors.hpp"
#include "lqrlag/pipeline.hpp"
#include "lqrlag/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Command {
  const char* name;
  const char* help;
  lqrlag::Stage stage;
  std::optional<lqrlag::ScenarioMode> mode;  // nullopt accepts both
  bool export_csv;
};

constexpr Command kCommands[] = {
    {"check-freq", "frequency condition and inverse-norm bound", lqrlag::Stage::Frequency,
     lqrlag::ScenarioMode::Stationary, false},
    {"build-lagrange", "stable Lagrange subspace and Schur oracle", lqrlag::Stage::Lagrange,
     lqrlag::ScenarioMode::Stationary, false},
    {"riccati", "nonoscillation and the Riccati equation", lqrlag::Stage::Riccati, lqrlag::ScenarioMode::Stationary,
     false},
    {"sa-search", "spectral gap search", lqrlag::Stage::Search, lqrlag::ScenarioMode::SpatialAveraging, false},
    {"sa-bundle", "stable Lagrange bundle over the phase samples", lqrlag::Stage::Full,
     lqrlag::ScenarioMode::SpatialAveraging, false},
    {"verify", "full pipeline for either mode", lqrlag::Stage::Full, std::nullopt, false},
    {"report", "full pipeline plus CSV tables", lqrlag::Stage::Full, std::nullopt, true},
};

int run(const Command& cmd, const std::string& scenario_path, const std::string& out_dir,
        std::optional<double> tol, unsigned seed) {
  lqrlag::Scenario sc;
  try {
    sc = lqrlag::load_scenario(scenario_path);
  } catch (const lqrlag::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (cmd.mode && *cmd.mode != sc.mode) {
    std::cerr << "error: " << cmd.name << " does not apply to a "
              << (sc.mode == lqrlag::ScenarioMode::Stationary ? "stationary" : "spatial-averaging") << " scenario\n";
    return 2;
  }
  if (tol && !(*tol > 0.0)) {
    std::cerr << "error: --tol must be positive\n";
    return 2;
  }

  const lqrlag::Certificate cert = lqrlag::run_pipeline(sc, {cmd.stage, seed, tol});
  nlohmann::json j = cert.to_json();
  j["command"] = cmd.name;
  j["scenario_echo"] = sc.echo;
  const std::string text = j.dump(2) + "\n";

  try {
    if (out_dir.empty()) {
      std::cout << text;
    } else {
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path path = std::filesystem::path(out_dir) / "certificate.json";
      std::ofstream os(path);
      if (!os) throw lqrlag::Error(lqrlag::ErrorCode::IoError, "cannot write " + path.string());
      os << text;
      if (cmd.export_csv) lqrlag::export_plots(cert, out_dir);
    }
  } catch (const lqrlag::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  for (const lqrlag::CheckRecord& r : cert.records)
    if (r.gating && !r.pass) std::cerr << "FAIL " << r.name << ": " << r.note << "\n";
  std::cerr << cert.scenario << ": " << (cert.all_pass() ? "pass" : "fail") << " (" << cert.records.size()
            << " records, " << cert.failed_count() << " failed)\n";
  return cert.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable Lagrange subspaces and bundles for frequency-domain quadratic forms"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir;
  double tol_value = 0.0;
  unsigned seed = 42;
  std::optional<const Command*> chosen;

  for (const Command& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sub->add_option("--out", out_dir, "output directory (certificate.json); stdout when omitted");
    sub->add_option("--tol", tol_value, "overrides the base tolerance");
    sub->add_option("--seed", seed, "seed for randomized samples")->capture_default_str();
    sub->callback([&chosen, &cmd] { chosen = &cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::optional<double> tol;
  for (CLI::App* sub : app.get_subcommands())
    if (sub->count("--tol") > 0) tol = tol_value;
  return run(**chosen, scenario_path, out_dir, tol, seed);
}
