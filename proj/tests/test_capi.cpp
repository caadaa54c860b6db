#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "kronmtl/kronmtl.h"

namespace {

// Row-major helpers over plain buffers.
std::vector<double> rand_buffer(int rows, int cols, unsigned seed) {
  std::vector<double> v(static_cast<size_t>(rows) * cols);
  unsigned state = seed;
  for (auto& x : v) {
    state = state * 1664525u + 1013904223u;
    x = (state >> 8) / static_cast<double>(1u << 24) - 0.5;
  }
  return v;
}

}  // namespace

TEST_CASE("version and error strings are always available") {
  CHECK(std::string(kmtl_version()) == "1.0.0");
  CHECK(kmtl_last_error() != nullptr);
}

TEST_CASE("fit, inspect, predict and free through the buffer api") {
  const int n = 30, d = 5, k = 3;
  auto X = rand_buffer(n, d, 1);
  auto Y = rand_buffer(n, k, 2);

  kmtl_model* model = nullptr;
  kmtl_status st = kmtl_fit(X.data(), Y.data(), n, d, k,
                            R"({"variant": "mvg-rank", "gamma": 0.5,
                                "lambda_c": 0.1})",
                            &model);
  REQUIRE(st == KMTL_OK);
  REQUIRE(model != nullptr);

  int dd = 0, kk = 0;
  CHECK(kmtl_model_dims(model, &dd, &kk) == KMTL_OK);
  CHECK(dd == d);
  CHECK(kk == k);

  std::vector<double> M(static_cast<size_t>(d) * k);
  CHECK(kmtl_model_mean(model, M.data()) == KMTL_OK);

  std::vector<double> G(static_cast<size_t>(d) * d), H(static_cast<size_t>(k) * k);
  CHECK(kmtl_model_row_cov(model, G.data()) == KMTL_OK);
  CHECK(kmtl_model_col_cov(model, H.data()) == KMTL_OK);

  char* info = nullptr;
  CHECK(kmtl_model_info(model, &info) == KMTL_OK);
  REQUIRE(info != nullptr);
  auto j = nlohmann::json::parse(info);
  CHECK(j.at("variant").get<std::string>() == "mvg-rank");
  CHECK(j.at("d").get<int>() == d);
  CHECK(j.at("sigma2").get<double>() > 0.0);
  kmtl_string_free(info);

  // Prediction equals X M plus a per-column shift (the stored response
  // means). Recover the shift from the first row, then check the rest.
  std::vector<double> pred(static_cast<size_t>(n) * k);
  CHECK(kmtl_predict(model, X.data(), n, pred.data()) == KMTL_OK);
  CHECK(j.at("centered").get<bool>());
  auto xm = [&](int i, int c) {
    double s = 0.0;
    for (int f = 0; f < d; ++f) s += X[i * d + f] * M[f * k + c];
    return s;
  };
  for (int c = 0; c < k; ++c) {
    const double shift = pred[c] - xm(0, c);
    for (int i = 1; i < n; ++i)
      CHECK(pred[i * k + c] == doctest::Approx(xm(i, c) + shift).epsilon(1e-9));
  }

  kmtl_model_free(model);
}

TEST_CASE("round trip through model_save and model_load") {
  const int n = 20, d = 4, k = 2;
  auto X = rand_buffer(n, d, 3);
  auto Y = rand_buffer(n, k, 4);
  kmtl_model* model = nullptr;
  REQUIRE(kmtl_fit(X.data(), Y.data(), n, d, k, nullptr, &model) == KMTL_OK);

  char dir[] = "/tmp/kronmtl_capi_model_XXXXXX";
  REQUIRE(mkdtemp(dir) != nullptr);
  CHECK(kmtl_model_save(model, dir) == KMTL_OK);

  kmtl_model* back = nullptr;
  CHECK(kmtl_model_load(dir, &back) == KMTL_OK);
  std::vector<double> m1(static_cast<size_t>(d) * k), m2(m1);
  CHECK(kmtl_model_mean(model, m1.data()) == KMTL_OK);
  CHECK(kmtl_model_mean(back, m2.data()) == KMTL_OK);
  CHECK(std::memcmp(m1.data(), m2.data(), m1.size() * sizeof(double)) == 0);

  kmtl_model_free(model);
  kmtl_model_free(back);
  std::string cleanup = std::string("rm -rf ") + dir;
  CHECK(std::system(cleanup.c_str()) == 0);
}

TEST_CASE("status codes classify the failure") {
  kmtl_model* model = nullptr;

  // Null buffer: invalid argument.
  CHECK(kmtl_fit(nullptr, nullptr, 5, 2, 2, nullptr, &model) == KMTL_ERR_INVALID);
  CHECK(std::string(kmtl_last_error()).size() > 0);

  // Malformed options document: config.
  auto X = rand_buffer(5, 2, 7);
  auto Y = rand_buffer(5, 2, 8);
  CHECK(kmtl_fit(X.data(), Y.data(), 5, 2, 2, "{oops", &model) == KMTL_ERR_CONFIG);
  CHECK(kmtl_fit(X.data(), Y.data(), 5, 2, 2, R"({"variant": "zzz"})", &model) ==
        KMTL_ERR_CONFIG);

  // Missing model directory: io.
  CHECK(kmtl_model_load("/no/such/dir", &model) == KMTL_ERR_IO);

  // Null handle: invalid argument.
  CHECK(kmtl_model_mean(nullptr, nullptr) == KMTL_ERR_INVALID);
}

TEST_CASE("standalone glasso through the buffer api") {
  // Diagonal covariance has the analytic answer 1 / (s_ii + lambda).
  const int p = 3;
  std::vector<double> S = {2.0, 0.0, 0.0,
                           0.0, 1.0, 0.0,
                           0.0, 0.0, 0.5};
  std::vector<double> theta(9);
  double kkt = -1.0;
  int converged = 0;
  CHECK(kmtl_glasso(S.data(), p, 0.5, 1e-10, 0, theta.data(), &kkt, &converged) ==
        KMTL_OK);
  CHECK(converged == 1);
  CHECK(kkt >= 0.0);
  CHECK(theta[0] == doctest::Approx(1.0 / 2.5).epsilon(1e-8));
  CHECK(theta[4] == doctest::Approx(1.0 / 1.5).epsilon(1e-8));
  CHECK(theta[8] == doctest::Approx(1.0 / 1.0).epsilon(1e-8));
  CHECK(theta[1] == 0.0);

  // Asymmetric input is a config failure.
  std::vector<double> bad = {1.0, 0.3, 0.0, 1.0};
  std::vector<double> out(4);
  CHECK(kmtl_glasso(bad.data(), 2, 0.1, 0.0, 0, out.data(), nullptr, nullptr) ==
        KMTL_ERR_CONFIG);
}
