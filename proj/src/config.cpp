#include "proselflc/config.hpp"

#include <fstream>
#include <set>

#include "proselflc/rng.hpp"

namespace proselflc {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown fields.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(display(""), "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  const json& raw(const std::string& key) { return obj_.at(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(field(key), "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
            throw ConfigError(field(key), "expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  template <typename Parse>
  void get_enum(const std::string& key, Parse parse) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    try {
      parse(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown field");
    }
  }

 private:
  std::string display(const std::string& key) const {
    return field(key).empty() ? std::string("<root>") : field(key);
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void section(ObjectReader& parent, const std::string& key, Fn fn) {
  if (!parent.has(key)) return;
  ObjectReader child(parent.raw(key), parent.field(key));
  fn(child);
  child.finish();
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  const auto& ds = cfg.dataset;
  if (ds.kind == DatasetKind::blobs) {
    require(ds.blobs.n >= 1, "dataset.n", "must be >= 1");
    require(ds.blobs.dim >= 1, "dataset.d", "must be >= 1");
    require(ds.blobs.classes >= 2, "dataset.c", "must be >= 2");
    require(ds.blobs.cluster_spread >= 0.0, "dataset.cluster_spread", "must be >= 0");
  } else {
    require(!ds.csv_path.empty(), "dataset.csv_path", "required when kind is csv");
  }
  require(cfg.noise.rate >= 0.0 && cfg.noise.rate <= 1.0, "noise.rate", "must lie in [0, 1]");
  if (cfg.noise.kind == NoiseKind::asymmetric) {
    std::vector<bool> seen;
    for (const auto& [a, b] : cfg.noise.pairs) {
      require(a != b, "noise.pairs", "a pair must name two different classes");
      seen.resize(std::max({seen.size(), a + 1, b + 1}), false);
      require(!seen[a] && !seen[b], "noise.pairs", "pairs must be disjoint");
      seen[a] = seen[b] = true;
      if (ds.kind == DatasetKind::blobs) {
        require(a < ds.blobs.classes && b < ds.blobs.classes, "noise.pairs",
                "class out of range");
      }
    }
  }
  const auto& m = cfg.method;
  require(m.mod.epsilon >= 0.0 && m.mod.epsilon < 1.0, "method.epsilon", "must lie in [0, 1)");
  require(m.trust.temperature > 0.0 && m.trust.temperature <= 1.0, "method.temperature",
          "must lie in (0, 1]");
  require(m.trust.inflection >= 0.0 && m.trust.inflection <= 1.0, "method.inflection",
          "must lie in [0, 1]");
  require(m.trust.growth > 0.0, "method.growth", "must be > 0");
  require(cfg.model.init_scale >= 0.0, "model.init_scale", "must be >= 0");
  try {
    cfg.optim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("optim", e.what());
  }
  require(cfg.snapshot_every >= 0, "snapshot_every", "must be >= 0");
  require(cfg.constant_trust >= 0.0 && cfg.constant_trust < 1.0, "constant_trust",
          "must lie in [0, 1)");
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  ObjectReader root(doc, "");
  root.get("seed", cfg.seed);
  cfg.dataset.blobs.seed = derive_seed(cfg.seed, "dataset");
  cfg.noise.seed = derive_seed(cfg.seed, "noise");
  cfg.model_seed = derive_seed(cfg.seed, "model");
  cfg.shuffle_seed = derive_seed(cfg.seed, "shuffle");

  section(root, "dataset", [&](ObjectReader& r) {
    auto& ds = cfg.dataset;
    r.get_enum("kind", [&](const std::string& s) {
      if (s == "blobs") ds.kind = DatasetKind::blobs;
      else if (s == "csv") ds.kind = DatasetKind::csv;
      else throw std::invalid_argument("expected blobs or csv");
    });
    r.get("n", ds.blobs.n);
    r.get("n_test", ds.blobs.n_test);
    r.get("d", ds.blobs.dim);
    r.get("c", ds.blobs.classes);
    r.get("cluster_spread", ds.blobs.cluster_spread);
    r.get("mean_scale", ds.blobs.mean_scale);
    r.get("seed", ds.blobs.seed);
    r.get("csv_path", ds.csv_path);
    r.get("test_csv_path", ds.test_csv_path);
  });

  section(root, "noise", [&](ObjectReader& r) {
    auto& nz = cfg.noise;
    r.get_enum("kind", [&](const std::string& s) { nz.kind = parse_noise_kind(s); });
    r.get("rate", nz.rate);
    r.get("seed", nz.seed);
    r.get("exact_count", nz.exact_count);
    if (r.has("pairs")) {
      const json& pairs = r.raw("pairs");
      const std::string path = r.field("pairs");
      if (!pairs.is_array()) throw ConfigError(path, "expected an array of [A, B] pairs");
      nz.pairs.clear();
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const json& p = pairs[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_unsigned() ||
            !p[1].is_number_unsigned()) {
          throw ConfigError(path + "[" + std::to_string(i) + "]", "expected [A, B]");
        }
        nz.pairs.emplace_back(p[0].get<std::size_t>(), p[1].get<std::size_t>());
      }
    }
  });

  section(root, "method", [&](ObjectReader& r) {
    auto& m = cfg.method;
    r.get_enum("kind", [&](const std::string& s) { m.mod.kind = parse_mod_kind(s); });
    r.get("epsilon", m.mod.epsilon);
    r.get("annealed", m.annealed);
    r.get("temperature", m.trust.temperature);
    r.get("growth", m.trust.growth);
    r.get("inflection", m.trust.inflection);
    r.get_enum("local_scheme",
               [&](const std::string& s) { m.trust.local_scheme = parse_local_scheme(s); });
    r.get("local_trust_on_scaled", m.local_trust_on_scaled);
  });

  section(root, "model", [&](ObjectReader& r) {
    r.get("hidden_dim", cfg.model.hidden_dim);
    r.get("init_scale", cfg.model.init_scale);
    r.get_enum("activation",
               [&](const std::string& s) { cfg.model.activation = parse_activation(s); });
    r.get("seed", cfg.model_seed);
  });

  bool decay_given = false;
  section(root, "optim", [&](ObjectReader& r) {
    auto& o = cfg.optim;
    r.get("lr0", o.lr0);
    r.get("momentum", o.momentum);
    r.get("weight_decay", o.weight_decay);
    r.get("batch_size", o.batch_size);
    r.get("total_iters", o.total_iters);
    r.get("lr_decay_factor", o.lr_decay_factor);
    r.get("shuffle_seed", cfg.shuffle_seed);
    if (r.has("lr_decay_iters")) {
      decay_given = true;
      const json& v = r.raw("lr_decay_iters");
      if (!v.is_array()) throw ConfigError(r.field("lr_decay_iters"), "expected an array");
      o.lr_decay_iters.clear();
      for (const json& x : v) {
        if (!x.is_number_integer()) {
          throw ConfigError(r.field("lr_decay_iters"), "expected integers");
        }
        o.lr_decay_iters.push_back(x.get<std::int64_t>());
      }
    }
  });
  if (!decay_given) {
    auto& o = cfg.optim;
    o.lr_decay_iters.clear();
    for (std::int64_t at : {o.total_iters / 2, 3 * o.total_iters / 4}) {
      if (at > 0 && (o.lr_decay_iters.empty() || at > o.lr_decay_iters.back())) {
        o.lr_decay_iters.push_back(at);
      }
    }
  }

  root.get("snapshot_every", cfg.snapshot_every);
  root.get("output_dir", cfg.output_dir);
  root.get("constant_trust", cfg.constant_trust);
  root.finish();

  cfg.model.input_dim = cfg.dataset.blobs.dim;
  cfg.model.classes = cfg.dataset.blobs.classes;
  cfg.method.trust.total_iterations = std::max<std::int64_t>(cfg.optim.total_iters, 1);
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
  json pairs = json::array();
  for (const auto& [a, b] : cfg.noise.pairs) pairs.push_back({a, b});
  const auto& ds = cfg.dataset;
  const auto& m = cfg.method;
  return json{
      {"seed", cfg.seed},
      {"dataset",
       {{"kind", ds.kind == DatasetKind::blobs ? "blobs" : "csv"},
        {"n", ds.blobs.n},
        {"n_test", ds.blobs.n_test},
        {"d", ds.blobs.dim},
        {"c", ds.blobs.classes},
        {"cluster_spread", ds.blobs.cluster_spread},
        {"mean_scale", ds.blobs.mean_scale},
        {"seed", ds.blobs.seed},
        {"csv_path", ds.csv_path},
        {"test_csv_path", ds.test_csv_path}}},
      {"noise",
       {{"kind", to_string(cfg.noise.kind)},
        {"rate", cfg.noise.rate},
        {"pairs", pairs},
        {"seed", cfg.noise.seed},
        {"exact_count", cfg.noise.exact_count}}},
      {"method",
       {{"kind", to_string(m.mod.kind)},
        {"epsilon", m.mod.epsilon},
        {"annealed", m.annealed},
        {"temperature", m.trust.temperature},
        {"growth", m.trust.growth},
        {"inflection", m.trust.inflection},
        {"local_scheme", to_string(m.trust.local_scheme)},
        {"local_trust_on_scaled", m.local_trust_on_scaled}}},
      {"model",
       {{"hidden_dim", cfg.model.hidden_dim},
        {"init_scale", cfg.model.init_scale},
        {"activation", to_string(cfg.model.activation)},
        {"seed", cfg.model_seed}}},
      {"optim",
       {{"lr0", cfg.optim.lr0},
        {"momentum", cfg.optim.momentum},
        {"weight_decay", cfg.optim.weight_decay},
        {"batch_size", cfg.optim.batch_size},
        {"total_iters", cfg.optim.total_iters},
        {"lr_decay_iters", cfg.optim.lr_decay_iters},
        {"lr_decay_factor", cfg.optim.lr_decay_factor},
        {"shuffle_seed", cfg.shuffle_seed}}},
      {"snapshot_every", cfg.snapshot_every},
      {"output_dir", cfg.output_dir},
      {"constant_trust", cfg.constant_trust},
  };
}

}  // namespace proselflc
