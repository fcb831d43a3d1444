#include "proselflc/experiment.hpp"

#include <atomic>
#include <bit>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "proselflc/errors.hpp"
#include "proselflc/format.hpp"
#include "proselflc/rng.hpp"

namespace proselflc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kTrainStream = 0;
constexpr std::uint64_t kTestStream = 1;

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

LabeledDataset read_csv_file(const std::string& path, std::size_t classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  return read_dataset_csv(in, classes);
}

std::string opt_string(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("NA");
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void gen_dataset(const BlobSpec& spec, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "data.csv");
    write_dataset_csv(os, make_blobs(spec, spec.n, kTrainStream));
  }
  auto os = open_out(dir / "test.csv");
  write_dataset_csv(os, make_blobs(spec, spec.n_test, kTestStream));
}

DatasetPair load_datasets(const DatasetConfig& cfg) {
  if (cfg.kind == DatasetKind::blobs) {
    return {make_blobs(cfg.blobs, cfg.blobs.n, kTrainStream),
            make_blobs(cfg.blobs, cfg.blobs.n_test, kTestStream)};
  }
  DatasetPair out{read_csv_file(cfg.csv_path, 0), {}};
  if (!cfg.test_csv_path.empty()) {
    out.test = read_csv_file(cfg.test_csv_path, out.train.classes);
    if (out.test.dim != out.train.dim) throw ShapeError("test csv has a different feature count");
  } else {
    out.test.dim = out.train.dim;
    out.test.classes = out.train.classes;
  }
  return out;
}

json to_json(const FinalMetrics& m) {
  return json{{"test_accuracy", m.test_accuracy},
              {"test_conf_top", m.test_conf_top},
              {"test_conf_all", m.test_conf_all},
              {"test_gsce_top", m.test_gsce_top},
              {"test_gsce_all", m.test_gsce_all},
              {"test_ece_top_m10", m.test_ece_top},
              {"test_ece_all_m10", m.test_ece_all},
              {"train_accuracy", m.train_accuracy},
              {"train_conf_all", m.train_conf_all},
              {"correct_fitting", opt_json(m.correct_fitting)},
              {"wrong_fitting", opt_json(m.wrong_fitting)},
              {"semantic_correction", opt_json(m.semantic_correction)},
              {"dataset_hash", m.dataset_hash}};
}

RunOutcome run_experiment(const ExperimentConfig& input) {
  validate(input);
  RunOutcome out;
  out.config = input;
  ExperimentConfig& cfg = out.config;
  DatasetPair data = load_datasets(cfg.dataset);
  if (cfg.dataset.kind == DatasetKind::csv) {
    cfg.dataset.blobs.dim = data.train.dim;
    cfg.dataset.blobs.classes = data.train.classes;
    cfg.dataset.blobs.n = data.train.size();
    cfg.dataset.blobs.n_test = data.test.size();
  }
  cfg.model.input_dim = data.train.dim;
  cfg.model.classes = data.train.classes;
  cfg.method.trust.total_iterations = std::max<std::int64_t>(cfg.optim.total_iters, 1);

  out.corruption = inject(data.train.clean, data.train.classes, cfg.noise);
  data.train.apply(out.corruption);

  RunSettings settings{cfg.method, cfg.optim, cfg.shuffle_seed, cfg.snapshot_every};
  out.result = train(init_model(cfg.model, cfg.model_seed), data.train, data.test, settings);

  FinalMetrics& fm = out.final_metrics;
  fm.dataset_hash = dataset_hash(data.train);
  const DynamicsRecord last = snapshot(out.result.model, data.train, data.test, 0);
  if (last.test) {
    fm.test_accuracy = last.test->accuracy;
    fm.test_conf_top = last.test->conf_top;
    fm.test_conf_all = last.test->conf_all;
    fm.test_gsce_top = last.test->gsce_top;
    fm.test_gsce_all = last.test->gsce_all;
    std::vector<PredictionRow> rows;
    const auto probs = predict_all(out.result.model, data.test);
    rows.reserve(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) rows.push_back({probs[i], data.test.clean[i]});
    const PredictionSet ps(std::move(rows));
    fm.test_ece_top = ece(ps, 10, ConfidenceMode::top).ece;
    fm.test_ece_all = ece(ps, 10, ConfidenceMode::all).ece;
  }
  if (last.train) {
    fm.train_accuracy = last.train->accuracy;
    fm.train_conf_all = last.train->conf_all;
  }
  fm.correct_fitting = last.correct_fitting;
  fm.wrong_fitting = last.wrong_fitting;
  fm.semantic_correction = last.semantic_correction;
  return out;
}

void write_run_artifacts(const RunOutcome& outcome, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "corruption.csv");
    write_corruption_csv(os, outcome.config.noise, outcome.corruption);
  }
  {
    auto os = open_out(dir / "dynamics.csv");
    write_dynamics_csv(os, outcome.result.dynamics);
  }
  {
    auto os = open_out(dir / "final_metrics.json");
    os << to_json(outcome.final_metrics).dump(2) << '\n';
  }
  auto os = open_out(dir / "resolved_config.json");
  os << to_json(outcome.config).dump(2) << '\n';
}

ExperimentConfig sweep_cell_config(const ExperimentConfig& base, double growth,
                                   double temperature) {
  ExperimentConfig cfg = base;
  cfg.method.trust.growth = growth;
  cfg.method.trust.temperature = temperature;
  const std::uint64_t cell_hash =
      derive_seed(std::bit_cast<std::uint64_t>(growth), std::bit_cast<std::uint64_t>(temperature));
  cfg.seed = base.seed ^ cell_hash;
  cfg.model_seed = derive_seed(cfg.seed, "model");
  cfg.shuffle_seed = derive_seed(cfg.seed, "shuffle");
  return cfg;
}

namespace {

// Runs fn(i) for i in [0, count) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

std::string cell_name(double growth, double temperature) {
  return "B" + format_double(growth) + "_T" + format_double(temperature);
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::vector<double>& growths,
                            const std::vector<double>& temps, unsigned jobs,
                            const std::optional<fs::path>& out_dir) {
  if (growths.empty() || temps.empty()) throw InvalidParameter("sweep grid is empty");
  std::vector<SweepRow> rows;
  for (double b : growths) {
    for (double t : temps) rows.push_back({b, t, std::nullopt, {}});
  }
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    SweepRow& row = rows[i];
    try {
      const RunOutcome outcome =
          run_experiment(sweep_cell_config(base, row.growth, row.temperature));
      if (out_dir) {
        write_run_artifacts(outcome, *out_dir / "cells" / cell_name(row.growth, row.temperature));
      }
      row.metrics = outcome.final_metrics;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  if (out_dir) {
    fs::create_directories(*out_dir);
    auto os = open_out(*out_dir / "sweep.csv");
    write_sweep_csv(os, rows);
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "B,T,final_test_acc,final_conf_all,gsce_all\n";
  for (const auto& r : rows) {
    os << format_double(r.growth) << ',' << format_double(r.temperature) << ',';
    if (r.metrics) {
      os << format_double(r.metrics->test_accuracy) << ','
         << format_double(r.metrics->test_conf_all) << ','
         << format_double(r.metrics->test_gsce_all) << '\n';
    } else {
      os << "ERROR,ERROR,ERROR\n";
    }
  }
}

std::vector<ExperimentConfig> scheme_configs(const ExperimentConfig& base) {
  std::vector<ExperimentConfig> out;
  ExperimentConfig constant = base;
  constant.method.mod = {ModKind::boot_soft, base.constant_trust};
  constant.method.annealed = true;
  out.push_back(constant);
  for (LocalTrustScheme s : {LocalTrustScheme::constant_one, LocalTrustScheme::conf_top,
                             LocalTrustScheme::conf_all}) {
    ExperimentConfig cfg = base;
    cfg.method.mod = {ModKind::proselflc, 0.0};
    cfg.method.annealed = true;
    cfg.method.trust.local_scheme = s;
    out.push_back(cfg);
  }
  return out;
}

std::vector<SchemeRow> compare_trust_schemes(const ExperimentConfig& base, unsigned jobs,
                                             const std::optional<fs::path>& out_dir) {
  static constexpr const char* kNames[] = {"constant", "global", "global_conf_top",
                                           "global_conf_all"};
  const auto configs = scheme_configs(base);
  std::vector<SchemeRow> rows(configs.size());
  parallel_for(configs.size(), jobs, [&](std::size_t i) {
    const RunOutcome outcome = run_experiment(configs[i]);
    if (out_dir) write_run_artifacts(outcome, *out_dir / "schemes" / kNames[i]);
    rows[i] = {kNames[i], outcome.final_metrics};
  });
  if (out_dir) {
    fs::create_directories(*out_dir);
    auto os = open_out(*out_dir / "schemes.csv");
    write_schemes_csv(os, rows);
  }
  return rows;
}

void write_schemes_csv(std::ostream& os, const std::vector<SchemeRow>& rows) {
  os << "scheme,dataset_hash,fit_clean,fit_noisy,semantic_correction,test_acc\n";
  for (const auto& r : rows) {
    os << r.scheme << ',' << r.metrics.dataset_hash << ',' << opt_string(r.metrics.correct_fitting)
       << ',' << opt_string(r.metrics.wrong_fitting) << ','
       << opt_string(r.metrics.semantic_correction) << ','
       << format_double(r.metrics.test_accuracy) << '\n';
  }
}

std::vector<LogitRow> read_logits_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("logits csv: missing header (line 1)");
  const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (cols < 3 || line.substr(line.rfind(',') + 1) != "label") {
    throw InvalidInput("logits csv: line 1: header must be z_0,...,z_{c-1},label");
  }
  const std::size_t c = cols - 1;
  std::vector<LogitRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "logits csv: line " + std::to_string(lineno) + ": ";
    std::istringstream ss(line);
    std::string cell;
    LogitRow row;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      if (col < c) {
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
          throw InvalidInput(where + "bad logit '" + cell + "'");
        }
        row.logits.push_back(v);
      } else {
        const long long y = std::strtoll(cell.c_str(), &end, 10);
        if (end == cell.c_str() || *end != '\0' || y < 0 || static_cast<std::size_t>(y) >= c) {
          throw InvalidInput(where + "bad label '" + cell + "'");
        }
        row.label = static_cast<std::size_t>(y);
      }
      ++col;
    }
    if (col != c + 1) throw InvalidInput(where + "expected " + std::to_string(c + 1) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("logits csv: no data rows");
  return rows;
}

std::vector<AuditRow> audit(const std::vector<LogitRow>& rows, const std::vector<double>& temps,
                            std::size_t m) {
  if (temps.empty()) throw InvalidParameter("audit: no temperatures");
  std::vector<AuditRow> out;
  for (double t : temps) {
    if (!(t > 0.0)) throw InvalidParameter("audit: temperatures must be positive");
    std::vector<PredictionRow> pred;
    pred.reserve(rows.size());
    for (const auto& r : rows) pred.push_back({softmax(r.logits, t), r.label});
    const PredictionSet ps(std::move(pred));
    for (ConfidenceMode mode : {ConfidenceMode::top, ConfidenceMode::all}) {
      out.push_back({t, mode, accuracy(ps), mean_confidence(ps, mode), gsce(ps, mode),
                     ece(ps, m, mode)});
    }
  }
  return out;
}

namespace {
const char* mode_name(ConfidenceMode mode) {
  return mode == ConfidenceMode::top ? "top" : "all";
}
}  // namespace

void write_audit(const std::vector<AuditRow>& rows, const fs::path& dir) {
  fs::create_directories(dir);
  auto table = open_out(dir / "audit.csv");
  table << "T,mode,accuracy,confidence,gsce,ece,m\n";
  for (const auto& r : rows) {
    table << format_double(r.temperature) << ',' << mode_name(r.mode) << ','
          << format_double(r.accuracy) << ',' << format_double(r.confidence) << ','
          << format_double(r.gsce) << ',' << format_double(r.ece.ece) << ',' << r.ece.m << '\n';
    auto bins = open_out(dir / ("bins_T" + format_double(r.temperature) + "_" +
                                mode_name(r.mode) + ".csv"));
    bins << "bin,count,conf,accu,gap\n";
    for (std::size_t i = 0; i < r.ece.bins.size(); ++i) {
      const EceBin& b = r.ece.bins[i];
      bins << i << ',' << b.count << ',' << format_double(b.conf_mean) << ','
           << format_double(b.accuracy) << ',' << format_double(b.signed_gap) << '\n';
    }
  }
}

void print_audit_summary(std::ostream& os, const std::vector<AuditRow>& rows) {
  for (const auto& r : rows) {
    os << "T=" << format_double(r.temperature) << " mode=" << mode_name(r.mode)
       << " accuracy=" << format_double(r.accuracy) << " conf=" << format_double(r.confidence)
       << " gsce=" << format_double(r.gsce) << " ece=" << format_double(r.ece.ece)
       << " (m=" << r.ece.m << ")\n";
  }
}

}  // namespace proselflc
