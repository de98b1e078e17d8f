#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bcfb/config.hpp"
#include "bcfb/selection.hpp"
#include "bcfb/simharness.hpp"

using namespace bcfb;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  std::filesystem::path path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

ExperimentSpec small_spec(int R, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.L = 4;
  spec.m = 4;
  spec.snr_grid_db = {20.0};
  spec.gamma = {1.0, 1.0, 1.0, 1.0};
  spec.rate_bits = {R, R, R, R};
  spec.schemes = {SchemeTag::parse("main_order")};
  spec.trials = 400;
  spec.codebook_redraws = 3;
  spec.master_seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("scheme tags round-trip") {
  CHECK(SchemeTag::parse("main_order").str() == "main_order");
  CHECK(SchemeTag::parse("oracle").str() == "oracle");
  CHECK(SchemeTag::parse("random_beams_stat").str() == "random_beams_stat");
  CHECK(SchemeTag::parse("fixed_s(3)").str() == "fixed_s(3)");
  CHECK(SchemeTag::parse("fixed_s(3)").fixed_s == 3);
  CHECK_THROWS_AS(SchemeTag::parse("fixed_s(x)"), std::invalid_argument);
  CHECK_THROWS_AS(SchemeTag::parse("bogus"), std::invalid_argument);
}

TEST_CASE("run_block with a codebook containing the true direction") {
  SystemConfig config(4, 12.0, {{1.5, 0}});
  const std::uint64_t seed = 99;
  Rng probe = Rng::stream(seed, {1});
  std::vector<ChannelVector> channels = draw_channels(config, probe);

  CMatrix entry(4, 1);
  entry.col(0) = channels[0].direction;
  std::vector<Codebook> books;
  books.emplace_back(entry, 0);
  for (int u = 1; u < config.num_users(); ++u) {
    Rng fill(static_cast<std::uint64_t>(u));
    books.push_back(random_codebook(4, 0, fill));
  }

  Rng rng = Rng::stream(seed, {1});
  BlockOutcome out = run_block(config, {0}, books, rng);
  CHECK_FALSE(out.degenerate);
  Real expect = std::log2(1.0 + 12.0 * 1.5 * channels[0].h.squaredNorm());
  CHECK(out.sum_rate == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("run_block with zero gamma produces zero rate") {
  SystemConfig config(2, 8.0, {{0.0, 2}, {0.0, 2}});
  Rng book_rng(4);
  std::vector<Codebook> books;
  books.push_back(random_codebook(2, 2, book_rng));
  books.push_back(random_codebook(2, 2, book_rng));
  Rng rng(5);
  BlockOutcome out = run_block(config, {0, 1}, books, rng);
  CHECK_FALSE(out.degenerate);
  CHECK(out.sum_rate == 0.0);
}

TEST_CASE("run_experiment emits one deterministic row per point") {
  ExperimentSpec spec = small_spec(6, 123);
  std::vector<ResultRow> rows = run_experiment(spec);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].scheme == "main_order");
  CHECK(rows[0].s_used == 1);  // R=6, 20 dB
  CHECK(rows[0].trials_effective == 3 * 400);
  CHECK(rows[0].mc_throughput_bits > 0.0);
  CHECK(rows[0].theory_i_main_bits > 0.0);

  std::ostringstream a, b;
  write_csv(run_experiment(spec), a);
  write_csv(run_experiment(spec), b);
  CHECK(a.str() == b.str());
  CHECK(a.str().substr(0, a.str().find('\n')) == std::string(kCsvHeader));

  ExperimentSpec other = small_spec(6, 124);
  std::ostringstream c;
  write_csv(run_experiment(other), c);
  CHECK(a.str() != c.str());
}

TEST_CASE("main_order dominates fixed_s(4) at high SNR with low feedback") {
  ExperimentSpec spec = small_spec(6, 2024);
  spec.schemes = {SchemeTag::parse("main_order"), SchemeTag::parse("fixed_s(4)")};
  spec.trials = 2000;
  spec.codebook_redraws = 5;
  std::vector<ResultRow> rows = run_experiment(spec);
  REQUIRE(rows.size() == 2);
  Real allowance = 2.0 * std::sqrt(rows[0].mc_stderr * rows[0].mc_stderr +
                                   rows[1].mc_stderr * rows[1].mc_stderr);
  CHECK(rows[0].mc_throughput_bits > rows[1].mc_throughput_bits + allowance);
}

TEST_CASE("random_beams_stat rows carry the statistic") {
  ExperimentSpec spec = small_spec(6, 7);
  spec.schemes = {SchemeTag::parse("random_beams_stat")};
  spec.trials = 200;
  std::vector<ResultRow> rows = run_experiment(spec);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].s_used == 0);
  CHECK(rows[0].theory_i_main_bits == 0.0);
  CHECK(rows[0].mc_throughput_bits > 0.0);
  CHECK(rows[0].mc_throughput_bits < 1.0);
}

TEST_CASE("csv and json writers") {
  ResultRow row;
  row.snr_db = 7.5;
  row.scheme = "fixed_s(2)";
  row.s_used = 2;
  row.mc_throughput_bits = 1.25;
  row.mc_stderr = 0.5;
  row.theory_i_main_bits = 1.5;
  row.trials_effective = 10;
  std::ostringstream csv;
  write_csv(std::vector<ResultRow>{row}, csv);
  CHECK(csv.str() ==
        "snr_db,scheme,s_used,mc_throughput_bits,mc_stderr,theory_i_main_bits,"
        "trials_effective\n7.5,fixed_s(2),2,1.250000000,0.500000000,1.500000000,10\n");

  std::ostringstream js;
  write_json(std::vector<ResultRow>{row}, js);
  CHECK(js.str().find("\"scheme\": \"fixed_s(2)\"") != std::string::npos);
}

TEST_CASE("experiment config loading") {
  auto path = write_temp("bcfb_cfg_ok.json", R"json({
    "L": 4, "m": 4,
    "rho_db": {"start": 0, "stop": 20, "step": 5},
    "gamma": 1.0,
    "rate_bits": [6, 6, 6, 6],
    "schemes": ["main_order", "fixed_s(4)"],
    "trials": 100,
    "codebook_redraws": 2,
    "seed": 17
  })json");
  ExperimentSpec spec = load_experiment_config(path);
  CHECK(spec.snr_grid_db == std::vector<Real>{0.0, 5.0, 10.0, 15.0, 20.0});
  CHECK(spec.gamma == std::vector<Real>(4, 1.0));
  CHECK(spec.rate_bits == std::vector<int>(4, 6));
  CHECK(spec.schemes.size() == 2);
  CHECK(spec.trials == 100);
  CHECK(spec.codebook_redraws == 2);
  CHECK(spec.master_seed == 17);

  auto unknown = write_temp("bcfb_cfg_unknown.json", R"json({"L": 2, "m": 2, "rho_db": 5, "spam": 1})json");
  CHECK_THROWS_AS(load_experiment_config(unknown), ConfigError);

  auto badlen = write_temp("bcfb_cfg_len.json",
                           R"json({"L": 2, "m": 2, "rho_db": 5, "gamma": [1.0, 1.0, 1.0]})json");
  CHECK_THROWS_AS(load_experiment_config(badlen), ConfigError);

  auto badscheme = write_temp("bcfb_cfg_scheme.json",
                              R"json({"L": 2, "m": 2, "rho_db": 5, "schemes": ["fixed_s(9)"]})json");
  CHECK_THROWS_AS(load_experiment_config(badscheme), ConfigError);

  CHECK_THROWS_AS(load_experiment_config("/nonexistent/bcfb.json"), ConfigError);
}

TEST_CASE("eta class file loading") {
  auto path = write_temp("bcfb_classes.json", R"json({
    "rho_db": 10.0,
    "classes": [
      {"fraction": 0.5, "gamma": 1.0, "rbar": 1.0},
      {"fraction": 0.5, "gamma": 1.0, "rbar": "inf"}
    ]
  })json");
  EtaClassFile file = load_eta_classes(path);
  CHECK(file.rho == doctest::Approx(10.0));
  REQUIRE(file.classes.size() == 2);
  CHECK(std::isinf(file.classes[1].rbar));

  auto bad = write_temp("bcfb_classes_bad.json", R"json({"rho_db": 3, "classes": [], "junk": 0})json");
  CHECK_THROWS_AS(load_eta_classes(bad), ConfigError);
}
