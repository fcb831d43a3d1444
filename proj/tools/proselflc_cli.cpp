// Command-line entry point.
//
//   proselflc gen-data        --config cfg.json [--seed N] [--out DIR]
//   proselflc run             --config cfg.json [--seed N] [--out DIR]
//   proselflc sweep           --config cfg.json [--B 20,16,12,8] [--T 1,0.8,0.6,0.4] [--jobs N]
//   proselflc compare-schemes --config cfg.json [--jobs N] [--out DIR]
//   proselflc audit           --input logits.csv [--temps 1,2,4] [--bins 10] [--out DIR]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "proselflc/config.hpp"
#include "proselflc/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

using proselflc::ExperimentConfig;
namespace fs = std::filesystem;

ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw proselflc::ConfigError("<file>", "cannot open config '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw proselflc::ConfigError("<file>", std::string("parse error: ") + e.what());
  }
  if (seed) {
    if (!doc.is_object()) throw proselflc::ConfigError("<root>", "expected an object");
    doc["seed"] = *seed;
  }
  return proselflc::parse_config(doc);
}

fs::path out_dir(const ExperimentConfig& cfg, const std::string& flag) {
  return flag.empty() ? fs::path(cfg.output_dir) : fs::path(flag);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Target-modification losses, calibration metrics and noisy-label experiments"};
  app.require_subcommand(1);

  std::string config_path, out_flag, input_path;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::vector<double> growths{20, 16, 12, 8}, temps{1.0, 0.8, 0.6, 0.4};
  std::vector<double> audit_temps{1.0};
  std::size_t bins = 10;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override the top-level seed");
    sub->add_option("--out", out_flag, "output directory (default: config output_dir)");
  };
  auto* gen = app.add_subcommand("gen-data", "write data.csv and test.csv");
  add_common(gen);
  auto* run = app.add_subcommand("run", "run one experiment");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "grid over growth B and temperature T");
  add_common(sweep);
  sweep->add_option("--B", growths, "growth values")->delimiter(',');
  sweep->add_option("--T", temps, "temperatures")->delimiter(',');
  sweep->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);
  auto* schemes = app.add_subcommand("compare-schemes", "compare the four self-trust schemes");
  add_common(schemes);
  schemes->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);
  auto* aud = app.add_subcommand("audit", "ECE/GSCE of a logits file over temperatures");
  aud->add_option("--input", input_path, "CSV with z_0..z_{c-1},label")->required();
  aud->add_option("--temps", audit_temps, "temperatures")->delimiter(',');
  aud->add_option("--bins", bins, "ECE bin count")->check(CLI::PositiveNumber);
  aud->add_option("--out", out_flag, "output directory")->default_str("audit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      const auto cfg = load(config_path, seed);
      const fs::path dir = out_dir(cfg, out_flag);
      proselflc::gen_dataset(cfg.dataset.blobs, dir);
      std::cout << "wrote " << (dir / "data.csv").string() << " and "
                << (dir / "test.csv").string() << "\n";
    } else if (*run) {
      const auto cfg = load(config_path, seed);
      const fs::path dir = out_dir(cfg, out_flag);
      const auto outcome = proselflc::run_experiment(cfg);
      proselflc::write_run_artifacts(outcome, dir);
      std::cout << proselflc::to_json(outcome.final_metrics).dump(2) << "\n";
    } else if (*sweep) {
      const auto cfg = load(config_path, seed);
      const fs::path dir = out_dir(cfg, out_flag);
      const auto rows = proselflc::sweep(cfg, growths, temps, jobs, dir);
      proselflc::write_sweep_csv(std::cout, rows);
      for (const auto& r : rows) {
        if (!r.metrics) std::cerr << "cell B=" << r.growth << " T=" << r.temperature
                                  << " failed: " << r.error << "\n";
      }
    } else if (*schemes) {
      const auto cfg = load(config_path, seed);
      const fs::path dir = out_dir(cfg, out_flag);
      const auto rows = proselflc::compare_trust_schemes(cfg, jobs, dir);
      proselflc::write_schemes_csv(std::cout, rows);
    } else if (*aud) {
      std::ifstream in(input_path);
      if (!in) {
        std::cerr << "error: cannot open '" << input_path << "'\n";
        return kExitRuntime;
      }
      const auto rows = proselflc::read_logits_csv(in);
      const auto report = proselflc::audit(rows, audit_temps, bins);
      proselflc::write_audit(report, out_flag.empty() ? fs::path("audit") : fs::path(out_flag));
      proselflc::print_audit_summary(std::cout, report);
    }
  } catch (const proselflc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
