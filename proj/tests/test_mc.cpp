#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ctev/csv.hpp"
#include "ctev/mc.hpp"

namespace {

ctev::MCStudy small_pareto_study() {
  ctev::MCStudy st;
  st.spec.model = ctev::SimModel::cond_pareto;
  st.spec.n = 400;
  st.spec.ar_coeff = 0.0;
  st.x0 = 0.6;
  st.k_fracs = {0.05, 0.1, 0.2, 0.4};
  st.replications = 40;
  st.base_seed = 77;
  return st;
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "ctev_mc_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("single replication moments", "[mc]") {
  auto st = small_pareto_study();
  st.replications = 1;
  const auto r = ctev::run_mc(st);
  for (const auto& row : r.rows) {
    CHECK(row.mse == row.bias * row.bias);  // one-sample moments
    CHECK(row.n_missing == 0);
  }
}

TEST_CASE("MSE decomposition", "[mc]") {
  const auto st = small_pareto_study();
  const auto r = ctev::run_mc(st);

  // recompute the variance from an independent pass over the replications
  for (std::size_t i = 0; i < st.k_fracs.size(); ++i) {
    std::vector<double> gs;
    for (std::size_t rep = 0; rep < st.replications; ++rep) {
      ctev::SimSpec sp = st.spec;
      sp.seed = st.base_seed ^ (rep + 1);
      const auto series = ctev::build_sim(sp);
      const std::size_t k = static_cast<std::size_t>(std::floor(st.k_fracs[i] * 400.0));
      const double h = ctev::bw_fixed(400, k);
      gs.push_back(ctev::cond_hill(series, {0.6, k, h, st.kernel, 0.95}).gamma_hat);
    }
    double m = 0.0;
    for (double g : gs) m += g;
    m /= gs.size();
    double var = 0.0;
    for (double g : gs) var += (g - m) * (g - m);
    var /= gs.size();
    CHECK(r.rows[i].mse == Catch::Approx(r.rows[i].bias * r.rows[i].bias + var).margin(1e-12));
    CHECK(r.rows[i].mse >= r.rows[i].bias * r.rows[i].bias - 1e-12);
    CHECK(r.rows[i].coverage >= 0.0);
    CHECK(r.rows[i].coverage <= 1.0);
  }
}

TEST_CASE("worker count never changes the result", "[mc]") {
  const auto st = small_pareto_study();
  const auto a = ctev::run_mc(st, 1);
  const auto b = ctev::run_mc(st, 4);
  const auto c = ctev::run_mc(st, 3);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].bias == b.rows[i].bias);
    CHECK(a.rows[i].mse == b.rows[i].mse);
    CHECK(a.rows[i].mean_se == b.rows[i].mean_se);
    CHECK(a.rows[i].coverage == b.rows[i].coverage);
    CHECK(a.rows[i].bias == c.rows[i].bias);
  }
}

TEST_CASE("mean plug-in standard error decreases in k_frac", "[mc]") {
  ctev::MCStudy st = small_pareto_study();
  st.spec.n = 1000;
  st.k_fracs = {0.02, 0.05, 0.1, 0.2, 0.3, 0.5};  // the default grid
  st.replications = 50;
  const auto r = ctev::run_mc(st);
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    CHECK(r.rows[i].mean_se < r.rows[i - 1].mean_se);
}

TEST_CASE("boundary conditioning point yields partial missingness", "[mc]") {
  ctev::MCStudy st = small_pareto_study();
  st.x0 = 1.08;  // window only clips the edge of the covariate support
  st.k_fracs = {0.05};
  st.replications = 200;
  st.kernel = {ctev::KernelFamily::uniform};
  const auto r = ctev::run_mc(st, 4);
  CHECK(r.rows[0].n_missing > 0);
  CHECK(r.rows[0].n_missing < 200);
  CHECK(std::isfinite(r.rows[0].bias));
  CHECK(std::isfinite(r.rows[0].mse));
}

TEST_CASE("constant tail index: centred bias and calibrated coverage", "[mc]") {
  ctev::MCStudy st;
  st.spec.model = ctev::SimModel::cond_pareto;
  st.spec.n = 10000;
  st.spec.ar_coeff = 0.0;
  st.x0 = 0.6;
  st.k_fracs = {0.1};
  st.replications = 200;
  st.base_seed = 1234;
  const auto r = ctev::run_mc(st, 4, [](double) { return 0.5; });
  CHECK(r.gamma_true == 0.5);
  CHECK(std::fabs(r.rows[0].bias) < 0.05);
  CHECK(r.rows[0].coverage >= 0.90);
  CHECK(r.rows[0].coverage <= 0.99);
}

TEST_CASE("degenerate conditioning point reports all replications missing", "[mc]") {
  auto st = small_pareto_study();
  st.x0 = 50.0;  // far outside the covariate support with a compact kernel
  st.kernel = {ctev::KernelFamily::uniform};
  CHECK_THROWS_AS(ctev::run_mc(st), ctev::all_missing_error);
}

TEST_CASE("study validation", "[mc]") {
  auto st = small_pareto_study();
  st.k_fracs = {};
  CHECK_THROWS_AS(ctev::run_mc(st), ctev::config_error);
  st = small_pareto_study();
  st.k_fracs = {0.2, 0.1};
  CHECK_THROWS_AS(ctev::run_mc(st), ctev::config_error);
  st = small_pareto_study();
  st.k_fracs = {0.001};  // floor(k_frac n) < 2
  CHECK_THROWS_AS(ctev::run_mc(st), ctev::config_error);
  st = small_pareto_study();
  st.replications = 0;
  CHECK_THROWS_AS(ctev::run_mc(st), ctev::config_error);
}

TEST_CASE("CSV emission round-trips exactly", "[mc]") {
  const auto st = small_pareto_study();
  const auto r = ctev::run_mc(st);
  const auto path = temp_file("roundtrip.csv");
  ctev::emit_mc_csv(r, path.string(), {{"command", "mc"}, {"n", "400"}});

  SECTION("header line is pinned") {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
    }
    CHECK(line == "k_frac,k,bias,mse,mean_se,coverage,n_missing");
  }

  SECTION("re-parse reproduces every field bit for bit") {
    const auto rows = ctev::parse_mc_rows(path.string());
    REQUIRE(rows.size() == r.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].k_frac == r.rows[i].k_frac);
      CHECK(rows[i].k == r.rows[i].k);
      CHECK(rows[i].bias == r.rows[i].bias);
      CHECK(rows[i].mse == r.rows[i].mse);
      CHECK(rows[i].mean_se == r.rows[i].mean_se);
      CHECK(rows[i].coverage == r.rows[i].coverage);
      CHECK(rows[i].n_missing == r.rows[i].n_missing);
    }
  }

  SECTION("sidecar plot script references only the CSV") {
    std::ifstream plot(path.string() + ".plot.py");
    REQUIRE(plot.good());
    std::string content((std::istreambuf_iterator<char>(plot)), std::istreambuf_iterator<char>());
    CHECK(content.find("roundtrip.csv") != std::string::npos);
    CHECK(content.find(path.parent_path().string()) == std::string::npos);
  }
}
