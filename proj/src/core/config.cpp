#include "core/config.hpp"

#include <json.hpp>
#include <set>

using nlohmann::json;

namespace kronmtl {
namespace {

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrKind::config, std::string("config: ") + e.what());
  }
}

// Tracks which keys a section handler touched so everything else can be
// rejected by name.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j_.is_object(), ErrKind::config, path_ + ": expected an object");
  }

  bool has(const char* key) {
    known_.insert(key);
    return j_.contains(key);
  }

  const json* object(const char* key) {
    if (!has(key)) return nullptr;
    const json& v = j_.at(key);
    require(v.is_object(), ErrKind::config, at(key) + ": expected an object");
    return &v;
  }

  double number(const char* key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    require(v.is_number(), ErrKind::config, at(key) + ": expected a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const char* key) {
    if (!has(key) || j_.at(key).is_null()) return std::nullopt;
    const json& v = j_.at(key);
    require(v.is_number(), ErrKind::config, at(key) + ": expected a number");
    return v.get<double>();
  }

  int integer(const char* key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    require(v.is_number_integer() || v.is_number_unsigned(), ErrKind::config,
            at(key) + ": expected an integer");
    return v.get<int>();
  }

  std::uint64_t u64(const char* key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    require(v.is_number_integer() && v.get<std::int64_t>() >= 0, ErrKind::config,
            at(key) + ": expected a nonnegative integer");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }

  bool boolean(const char* key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    require(v.is_boolean(), ErrKind::config, at(key) + ": expected a boolean");
    return v.get<bool>();
  }

  std::string string(const char* key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    require(v.is_string(), ErrKind::config, at(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::optional<std::string> optional_string(const char* key) {
    if (!has(key) || j_.at(key).is_null()) return std::nullopt;
    const json& v = j_.at(key);
    require(v.is_string(), ErrKind::config, at(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> number_array(const char* key) {
    has(key);
    const json& v = j_.at(key);
    require(v.is_array(), ErrKind::config, at(key) + ": expected an array");
    std::vector<double> out;
    for (const json& e : v) {
      require(e.is_number(), ErrKind::config,
              at(key) + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::string> string_array(const char* key) {
    has(key);
    const json& v = j_.at(key);
    require(v.is_array(), ErrKind::config, at(key) + ": expected an array");
    std::vector<std::string> out;
    for (const json& e : v) {
      require(e.is_string(), ErrKind::config,
              at(key) + ": expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      require(known_.count(it.key()) > 0, ErrKind::config,
              path_ + ": unknown key \"" + it.key() + "\"");
  }

private:
  std::string at(const char* key) const { return path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

Sigma2Denominator denom_from_name(const std::string& name, const std::string& where) {
  if (name == "nd") return Sigma2Denominator::nd;
  if (name == "nk") return Sigma2Denominator::nk;
  fail(ErrKind::config, where + ": sigma2_denominator must be \"nd\" or \"nk\"");
}

TaskMode mode_from_name(const std::string& name, const std::string& where) {
  if (name == "regression") return TaskMode::regression;
  if (name == "classification") return TaskMode::classification;
  fail(ErrKind::config, where + ": mode must be \"regression\" or \"classification\"");
}

SimSpec read_sim(const json& j, const std::string& path) {
  Section s(j, path);
  SimSpec spec;
  spec.n = s.integer("n", spec.n);
  spec.d = s.integer("d", spec.d);
  spec.k = s.integer("k", spec.k);
  spec.rank = s.integer("rank", spec.rank);
  spec.snr = s.number("snr", spec.snr);
  spec.offdiag_density = s.number("offdiag_density", spec.offdiag_density);
  spec.laplacian_ridge = s.number("laplacian_ridge", spec.laplacian_ridge);
  spec.seed = s.u64("seed", spec.seed);
  s.finish();
  validate_spec(spec);
  return spec;
}

FitSettings read_fit(const json& j, const std::string& path) {
  Section s(j, path);
  FitSettings fs;
  fs.variant = variant_from_name(s.string("variant", "mvg-rank"));
  // The nuclear weight defaults per variant: only mvg-rank penalizes the mean.
  fs.hp.gamma =
      s.number("gamma", fs.variant == Variant::mvg_rank ? 1.0 : 0.0);
  fs.hp.lambda_r = s.number("lambda_r", fs.hp.lambda_r);
  fs.hp.lambda_c = s.number("lambda_c", fs.hp.lambda_c);
  fs.center = s.boolean("center", fs.center);
  fs.fixed_row_precision_path = s.optional_string("fixed_row_precision");
  fs.fixed_col_precision_path = s.optional_string("fixed_col_precision");
  fs.fit.sigma2_init = s.optional_number("sigma2_init");
  fs.fit.fix_sigma2 = s.boolean("fix_sigma2", fs.fit.fix_sigma2);
  fs.fit.sigma2_denominator =
      denom_from_name(s.string("sigma2_denominator", "nd"), path);
  fs.fit.outer_tol = s.number("outer_tol", fs.fit.outer_tol);
  fs.fit.outer_max_iter = s.integer("outer_max_iter", fs.fit.outer_max_iter);
  fs.fit.mean.tol = s.number("mean_tol", fs.fit.mean.tol);
  fs.fit.mean.max_iter = s.integer("mean_max_iter", fs.fit.mean.max_iter);
  fs.fit.cov.tol = s.number("cov_tol", fs.fit.cov.tol);
  fs.fit.cov.max_iter = s.integer("cov_max_iter", fs.fit.cov.max_iter);
  fs.fit.prec.tol = s.number("precision_tol", fs.fit.prec.tol);
  fs.fit.prec.max_sweeps = s.integer("precision_max_sweeps", fs.fit.prec.max_sweeps);
  fs.fit.prec.glasso.tol = s.number("glasso_tol", fs.fit.prec.glasso.tol);
  fs.fit.prec.glasso.max_iter =
      s.integer("glasso_max_iter", fs.fit.prec.glasso.max_iter);
  s.finish();
  fs.fit.variant = fs.variant;
  validate_hyperparams(fs.hp);
  require(fs.fit.outer_tol > 0.0, ErrKind::config, path + ": outer_tol must be positive");
  require(fs.fit.outer_max_iter >= 1, ErrKind::config,
          path + ": outer_max_iter must be at least 1");
  return fs;
}

ExperimentConfig read_experiment(const json& j, const std::string& path) {
  Section s(j, path);
  ExperimentConfig cfg;
  if (const json* sim = s.object("sim")) cfg.sim = read_sim(*sim, path + ".sim");
  cfg.reps = s.integer("reps", cfg.reps);
  if (s.has("lambda_grid")) cfg.lambda_grid = s.number_array("lambda_grid");
  if (s.has("models")) {
    cfg.models.clear();
    for (const auto& name : s.string_array("models"))
      cfg.models.push_back(model_from_name(name));
  }
  cfg.tie_lambdas = s.boolean("tie_lambdas", cfg.tie_lambdas);
  cfg.gamma = s.optional_number("gamma");
  cfg.edge_threshold = s.number("edge_threshold", cfg.edge_threshold);
  cfg.edge_stability_fraction =
      s.number("edge_stability_fraction", cfg.edge_stability_fraction);
  cfg.mode = mode_from_name(s.string("mode", "regression"), path);
  cfg.seed = s.u64("seed", cfg.seed);
  cfg.sigma2_denominator =
      denom_from_name(s.string("sigma2_denominator", "nd"), path);
  cfg.fit_outer_tol = s.number("fit_outer_tol", cfg.fit_outer_tol);
  cfg.fit_outer_max_iter = s.integer("fit_outer_max_iter", cfg.fit_outer_max_iter);
  s.finish();
  validate_experiment_config(cfg);
  return cfg;
}

Section top_section(const json& doc) {
  Section top(doc, "config");
  top.has("sim");
  top.has("fit");
  top.has("experiment");
  return top;
}

}  // namespace

SimSpec parse_sim_config(const std::string& json_text) {
  const json doc = parse_document(json_text);
  Section top = top_section(doc);
  top.finish();
  if (doc.contains("sim")) return read_sim(doc.at("sim"), "sim");
  SimSpec spec;
  validate_spec(spec);
  return spec;
}

FitSettings parse_fit_config(const std::string& json_text) {
  const json doc = parse_document(json_text);
  Section top = top_section(doc);
  top.finish();
  if (doc.contains("fit")) return read_fit(doc.at("fit"), "fit");
  return FitSettings{};
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json doc = parse_document(json_text);
  Section top = top_section(doc);
  top.finish();
  if (doc.contains("experiment")) return read_experiment(doc.at("experiment"), "experiment");
  ExperimentConfig cfg;
  validate_experiment_config(cfg);
  return cfg;
}

FitSettings parse_fit_section(const std::string& json_text) {
  const json doc = parse_document(json_text);
  return read_fit(doc, "fit");
}

}  // namespace kronmtl
