#include "core/model_io.hpp"

#include <filesystem>
#include <json.hpp>
#include <vector>

#include "core/csv.hpp"
#include "core/linalg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kronmtl {

ModelBundle make_bundle(const Dataset& train, const FitResult& fit, Variant variant) {
  ModelBundle b;
  b.variant = variant;
  b.n = train.n();
  b.d = train.d();
  b.k = train.k();
  b.post = fit.post;
  b.prior = fit.prior;
  b.hp = fit.hp;
  b.centered = train.centered;
  b.column_means = train.centered ? train.column_means : Vector::Zero(train.k());
  b.converged = fit.report.converged;
  b.objective_final = fit.report.objective_trace.empty()
                          ? 0.0
                          : fit.report.objective_trace.back();
  return b;
}

void save_model(const std::string& dir, const ModelBundle& b) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrKind::io, "cannot create model directory: " + dir);

  std::vector<fs::path> written;
  const auto emit = [&](const std::string& name, const Matrix& m) {
    const fs::path p = fs::path(dir) / name;
    write_csv_matrix(p.string(), m);
    written.push_back(p);
  };

  try {
    emit("M.csv", b.post.M);
    emit("G.csv", b.post.G);
    emit("H.csv", b.post.H);
    emit("R_inv.csv", b.prior.R_inv);
    emit("C_inv.csv", b.prior.C_inv);

    json meta;
    meta["format_version"] = 1;
    meta["variant"] = variant_name(b.variant);
    meta["N"] = b.n;
    meta["D"] = b.d;
    meta["K"] = b.k;
    meta["sigma2"] = b.hp.sigma2;
    meta["gamma"] = b.hp.gamma;
    meta["lambda_r"] = b.hp.lambda_r;
    meta["lambda_c"] = b.hp.lambda_c;
    meta["centered"] = b.centered;
    meta["column_means"] = std::vector<double>(
        b.column_means.data(), b.column_means.data() + b.column_means.size());
    meta["converged"] = b.converged;
    meta["objective_final"] = b.objective_final;
    const fs::path mp = fs::path(dir) / "meta.json";
    written.push_back(mp);
    write_text_file(mp.string(), meta.dump(2) + "\n");
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

ModelBundle load_model(const std::string& dir) {
  ModelBundle b;
  const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };

  json meta;
  try {
    meta = json::parse(read_text_file(path("meta.json")));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrKind::config, std::string("meta.json: ") + e.what());
  }

  try {
    require(meta.at("format_version").get<int>() == 1, ErrKind::config,
            "meta.json: unsupported format_version");
    b.variant = variant_from_name(meta.at("variant").get<std::string>());
    b.n = meta.at("N").get<int>();
    b.d = meta.at("D").get<int>();
    b.k = meta.at("K").get<int>();
    b.hp.sigma2 = meta.at("sigma2").get<double>();
    b.hp.gamma = meta.at("gamma").get<double>();
    b.hp.lambda_r = meta.at("lambda_r").get<double>();
    b.hp.lambda_c = meta.at("lambda_c").get<double>();
    b.centered = meta.at("centered").get<bool>();
    const auto means = meta.at("column_means").get<std::vector<double>>();
    b.column_means = Eigen::Map<const Vector>(means.data(),
                                              static_cast<Eigen::Index>(means.size()));
    b.converged = meta.at("converged").get<bool>();
    b.objective_final = meta.at("objective_final").get<double>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrKind::config, std::string("meta.json: missing or mistyped field: ") + e.what());
  }

  b.post.M = read_csv_matrix(path("M.csv"));
  b.post.G = read_csv_matrix(path("G.csv"));
  b.post.H = read_csv_matrix(path("H.csv"));
  b.prior.R_inv = read_csv_matrix(path("R_inv.csv"));
  b.prior.C_inv = read_csv_matrix(path("C_inv.csv"));

  require(b.post.M.rows() == b.d && b.post.M.cols() == b.k, ErrKind::config,
          "model: M does not match meta dimensions");
  require(b.post.G.rows() == b.d && b.post.G.cols() == b.d, ErrKind::config,
          "model: G does not match meta dimensions");
  require(b.post.H.rows() == b.k && b.post.H.cols() == b.k, ErrKind::config,
          "model: H does not match meta dimensions");
  require(b.prior.R_inv.rows() == b.d && b.prior.C_inv.rows() == b.k,
          ErrKind::config, "model: precision dimensions do not match meta");
  require(b.column_means.size() == b.k, ErrKind::config,
          "model: column_means does not match K");
  require(b.hp.sigma2 > 0.0, ErrKind::config, "model: sigma2 must be positive");
  return b;
}

}  // namespace kronmtl
