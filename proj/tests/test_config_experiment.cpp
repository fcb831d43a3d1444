#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "proselflc/config.hpp"
#include "proselflc/errors.hpp"
#include "proselflc/experiment.hpp"

using namespace proselflc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("proselflc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json tiny_doc() {
  return json::parse(R"({
    "seed": 7,
    "dataset": {"n": 150, "n_test": 60, "d": 4, "c": 3},
    "noise": {"kind": "symmetric", "rate": 0.3},
    "model": {"hidden_dim": 8},
    "optim": {"total_iters": 60, "batch_size": 16},
    "snapshot_every": 20
  })");
}

std::string config_error_path(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PROSELFLC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config defaults and derived fields") {
  const ExperimentConfig cfg = parse_config(json::object());
  CHECK(cfg.optim.total_iters == 4000);
  CHECK(cfg.optim.lr_decay_iters == std::vector<std::int64_t>{2000, 3000});
  CHECK(cfg.optim.momentum == 0.9);
  CHECK(cfg.optim.lr_decay_factor == 10.0);
  CHECK(cfg.method.trust.inflection == 0.5);
  CHECK(cfg.method.mod.kind == ModKind::proselflc);
  CHECK(cfg.model.input_dim == cfg.dataset.blobs.dim);
  CHECK(cfg.model.classes == cfg.dataset.blobs.classes);
  CHECK(cfg.dataset.blobs.seed != cfg.noise.seed);
  CHECK(cfg.model_seed != cfg.shuffle_seed);

  json doc = tiny_doc();
  doc["optim"]["total_iters"] = 400;
  CHECK(parse_config(doc).optim.lr_decay_iters == std::vector<std::int64_t>{200, 300});
  doc["optim"]["lr_decay_iters"] = json::array();
  CHECK(parse_config(doc).optim.lr_decay_iters.empty());

  // Derived seeds follow the top-level seed unless pinned.
  json a = tiny_doc(), b = tiny_doc();
  b["seed"] = 8;
  CHECK(parse_config(a).model_seed != parse_config(b).model_seed);
  a["model"]["seed"] = 99;
  b["model"]["seed"] = 99;
  CHECK(parse_config(a).model_seed == parse_config(b).model_seed);
}

TEST_CASE("config round trip") {
  std::vector<json> docs{json::object(), tiny_doc()};
  json full = tiny_doc();
  full["noise"] = json::parse(R"({"kind": "asymmetric", "rate": 0.25, "pairs": [[0, 1]], "seed": 3})");
  full["method"] = json::parse(R"({"kind": "ls", "epsilon": 0.125, "annealed": false,
                                   "local_scheme": "conf_top", "growth": 12, "temperature": 0.6,
                                   "local_trust_on_scaled": false})");
  full["model"] = json::parse(R"({"hidden_dim": 0, "activation": "tanh", "init_scale": 0.5})");
  full["optim"]["weight_decay"] = 5e-4;
  full["optim"]["lr0"] = 0.1 / 3.0;
  full["constant_trust"] = 0.3;
  docs.push_back(full);
  for (const json& d : docs) {
    const ExperimentConfig cfg = parse_config(d);
    const ExperimentConfig back = parse_config(to_json(cfg));
    CHECK(back == cfg);
    CHECK(to_json(back) == to_json(cfg));
    CHECK(parse_config(json::parse(to_json(cfg).dump())) == cfg);
  }
}

TEST_CASE("config errors name the field") {
  json doc = tiny_doc();
  doc["optim"]["lrr"] = 0.1;
  CHECK(config_error_path(doc) == "optim.lrr");

  doc = tiny_doc();
  doc["optim"]["lr0"] = "fast";
  CHECK(config_error_path(doc) == "optim.lr0");

  doc = tiny_doc();
  doc["method"]["temperature"] = 1.5;
  CHECK(config_error_path(doc).rfind("method", 0) == 0);

  doc = tiny_doc();
  doc["method"]["kind"] = "focal";
  CHECK(config_error_path(doc) == "method.kind");

  doc = tiny_doc();
  doc["noise"]["rate"] = 2.0;
  CHECK(config_error_path(doc).rfind("noise", 0) == 0);

  doc = tiny_doc();
  doc["noise"] = json::parse(R"({"kind": "asymmetric", "rate": 0.2, "pairs": [[0, 1], [1, 2]]})");
  CHECK(config_error_path(doc).rfind("noise", 0) == 0);

  CHECK(config_error_path(json::array()) == "<root>");
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("single runs") {
  json doc = tiny_doc();
  doc["noise"]["rate"] = 0.0;
  doc["method"] = {{"kind", "cce"}};
  const RunOutcome clean = run_experiment(parse_config(doc));
  const FinalMetrics& m = clean.final_metrics;
  CHECK(m.test_accuracy > 0.5);
  CHECK(std::abs(m.test_gsce_top - (m.test_conf_top - m.test_accuracy)) < 1e-12);
  CHECK(std::abs(m.test_gsce_all - (m.test_conf_all - m.test_accuracy)) < 1e-12);
  CHECK_FALSE(m.wrong_fitting.has_value());
  CHECK(clean.result.dynamics.size() == 3);

  const ExperimentConfig noisy = parse_config(tiny_doc());
  const fs::path d1 = scratch("run1"), d2 = scratch("run2");
  write_run_artifacts(run_experiment(noisy), d1);
  write_run_artifacts(run_experiment(noisy), d2);
  for (const char* f : {"corruption.csv", "dynamics.csv", "final_metrics.json",
                        "resolved_config.json"}) {
    INFO(f);
    CHECK(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  const json fm = json::parse(slurp(d1 / "final_metrics.json"));
  for (const char* key : {"test_accuracy", "test_conf_top", "test_conf_all", "test_gsce_top",
                          "test_gsce_all", "test_ece_top_m10", "test_ece_all_m10",
                          "wrong_fitting", "semantic_correction"}) {
    CHECK(fm.contains(key));
  }

  // The resolved config alone reproduces every artifact.
  const fs::path d3 = scratch("run3");
  write_run_artifacts(run_experiment(load_config((d1 / "resolved_config.json").string())), d3);
  CHECK(slurp(d1 / "dynamics.csv") == slurp(d3 / "dynamics.csv"));
  CHECK(slurp(d1 / "corruption.csv") == slurp(d3 / "corruption.csv"));
}

TEST_CASE("csv datasets") {
  const fs::path dir = scratch("gen");
  BlobSpec spec{100, 40, 3, 5, 1.0, 3.0, 4};
  gen_dataset(spec, dir);
  std::ifstream in(dir / "data.csv");
  const LabeledDataset ds = read_dataset_csv(in);
  CHECK(ds.size() == 100);
  std::vector<int> per_class(5, 0);
  for (auto y : ds.clean) ++per_class[y];
  CHECK(per_class == std::vector<int>(5, 20));

  json doc = tiny_doc();
  doc["dataset"] = {{"kind", "csv"},
                    {"csv_path", (dir / "data.csv").string()},
                    {"test_csv_path", (dir / "test.csv").string()}};
  const RunOutcome r = run_experiment(parse_config(doc));
  CHECK(r.config.model.input_dim == 3);
  CHECK(r.config.model.classes == 5);
  CHECK(r.final_metrics.test_accuracy > 0.0);
}

TEST_CASE("sweeps") {
  const ExperimentConfig base = parse_config(tiny_doc());
  const std::vector<double> b1{12}, t1{0.6};
  const auto one = sweep(base, b1, t1, 1, std::nullopt);
  REQUIRE(one.size() == 1);
  REQUIRE(one[0].metrics);
  const RunOutcome standalone = run_experiment(sweep_cell_config(base, 12, 0.6));
  CHECK(to_json(*one[0].metrics) == to_json(standalone.final_metrics));
  CHECK(sweep_cell_config(base, 12, 0.6).method.trust.growth == 12);
  CHECK(sweep_cell_config(base, 12, 0.6).method.trust.temperature == 0.6);
  CHECK(sweep_cell_config(base, 12, 0.6).dataset == base.dataset);
  CHECK(sweep_cell_config(base, 12, 0.6).noise == base.noise);
  CHECK(sweep_cell_config(base, 12, 0.6).model_seed != sweep_cell_config(base, 8, 0.6).model_seed);

  const std::vector<double> bs{20, 16, 12, 8}, ts{1.0, 0.8, 0.6, 0.4};
  const fs::path dir = scratch("sweep");
  const auto grid = sweep(base, bs, ts, 2, dir);
  REQUIRE(grid.size() == 16);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(grid[i].growth == bs[i / 4]);
    CHECK(grid[i].temperature == ts[i % 4]);
  }
  const auto serial = sweep(base, bs, ts, 1, std::nullopt);
  std::ostringstream a, b;
  write_sweep_csv(a, grid);
  write_sweep_csv(b, serial);
  CHECK(a.str() == b.str());
  CHECK(slurp(dir / "sweep.csv") == a.str());
  CHECK(a.str().rfind("B,T,final_test_acc,final_conf_all,gsce_all\n", 0) == 0);

  const std::vector<double> bad_t{0.5, 1.5};
  const auto failed = sweep(base, b1, bad_t, 2, std::nullopt);
  CHECK(failed[0].metrics.has_value());
  CHECK_FALSE(failed[1].metrics.has_value());
  CHECK_FALSE(failed[1].error.empty());
  std::ostringstream f;
  write_sweep_csv(f, failed);
  CHECK(f.str().find("ERROR") != std::string::npos);
}

TEST_CASE("trust scheme comparison") {
  ExperimentConfig base = parse_config(tiny_doc());
  base.constant_trust = 0.4;
  const auto rows = compare_trust_schemes(base, 2, std::nullopt);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].scheme == "constant");
  CHECK(rows[3].scheme == "global_conf_all");
  for (const auto& r : rows) CHECK(r.metrics.dataset_hash == rows[0].metrics.dataset_hash);

  ExperimentConfig boot = base;
  boot.method.mod = {ModKind::boot_soft, 0.4};
  boot.method.annealed = true;
  CHECK(to_json(run_experiment(boot).final_metrics) == to_json(rows[0].metrics));

  std::ostringstream os;
  write_schemes_csv(os, rows);
  CHECK(os.str().rfind("scheme,dataset_hash,fit_clean,fit_noisy,semantic_correction,test_acc\n", 0) == 0);
}

TEST_CASE("calibration audit") {
  std::istringstream good("z_0,z_1,label\n4.0,0.0,0\n4.0,0.0,1\n4.0,0.0,0\n4.0,0.0,0\n");
  const auto rows = read_logits_csv(good);
  REQUIRE(rows.size() == 4);
  const std::vector<double> one{1.0}, temps{1.0, 4.0};
  CHECK(audit(rows, one, 10).size() == 2);  // one row per confidence mode
  const auto a = audit(rows, temps, 10);
  auto ece_at = [&](double t) {
    for (const auto& r : a) {
      if (r.temperature == t && r.mode == ConfidenceMode::top) return r.ece.ece;
    }
    return -1.0;
  };
  CHECK(ece_at(4.0) < ece_at(1.0));

  std::istringstream sharp("z_0,z_1,z_2,label\n30,0,0,0\n");
  const auto s = audit(read_logits_csv(sharp), one, 10);
  for (const auto& r : s) CHECK(std::abs(r.gsce) < 1e-6);

  std::istringstream bad("z_0,z_1,label\n1,0,0\n1,x,0\n");
  try {
    read_logits_csv(bad);
    FAIL("expected an error");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  const fs::path dir = scratch("audit");
  write_audit(a, dir);
  CHECK(fs::exists(dir / "audit.csv"));
  CHECK(slurp(dir / "bins_T1_top.csv").rfind("bin,count,conf,accu,gap\n", 0) == 0);
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  {
    std::ofstream(dir / "cfg.json") << tiny_doc().dump(2);
    std::ofstream(dir / "bad.json") << R"({"optim": {"lr0": -1}})";
    std::ofstream(dir / "typo.json") << R"({"optimm": {}})";
    json missing = tiny_doc();
    missing["dataset"] = {{"kind", "csv"}, {"csv_path", (dir / "nope.csv").string()}};
    std::ofstream(dir / "missing.json") << missing.dump();
    std::ofstream(dir / "logits.csv") << "z_0,z_1,label\n2,0,0\n0,1,1\n";
  }
  const std::string d = dir.string();
  CHECK(run_cli("run --config " + d + "/cfg.json --out " + d + "/run") == 0);
  CHECK(fs::exists(dir / "run" / "dynamics.csv"));
  CHECK(run_cli("run --config " + d + "/cfg.json --seed 3 --out " + d + "/run3") == 0);
  CHECK(slurp(dir / "run" / "dynamics.csv") != slurp(dir / "run3" / "dynamics.csv"));
  CHECK(run_cli("gen-data --config " + d + "/cfg.json --out " + d + "/data") == 0);
  CHECK(fs::exists(dir / "data" / "data.csv"));
  CHECK(run_cli("audit --input " + d + "/logits.csv --temps 1,2 --out " + d + "/aud") == 0);
  CHECK(fs::exists(dir / "aud" / "audit.csv"));

  CHECK(run_cli("run --config " + d + "/bad.json") == 2);
  CHECK(run_cli("run --config " + d + "/typo.json") == 2);
  CHECK(run_cli("run --config " + d + "/absent.json") == 2);
  CHECK(run_cli("run --bogus-flag") == 2);
  CHECK(run_cli("run --config " + d + "/missing.json --out " + d + "/m") == 3);
}
