// bcfb: simulation and analysis tools for finite-rate-feedback broadcast
// channels with zero-forcing beamforming and power on/off user selection.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bcfb/asymptotic.hpp"
#include "bcfb/config.hpp"
#include "bcfb/quantization.hpp"
#include "bcfb/selection.hpp"
#include "bcfb/simharness.hpp"
#include "bcfb/verify.hpp"

namespace {

using bcfb::Real;
using json = nlohmann::ordered_json;

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& format, std::optional<std::uint64_t> seed) {
  bcfb::ExperimentSpec spec = bcfb::load_experiment_config(config_path);
  if (seed) spec.master_seed = *seed;
  std::vector<bcfb::ResultRow> rows = bcfb::run_experiment(spec);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw bcfb::ConfigError(out_path + ": cannot open for writing");
  if (format == "csv")
    bcfb::write_csv(rows, out);
  else
    bcfb::write_json(rows, out);
  if (!out) throw bcfb::ConfigError(out_path + ": write failed");
  std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  return 0;
}

int cmd_select_s(const std::string& config_path) {
  bcfb::ExperimentSpec spec = bcfb::load_experiment_config(config_path);
  if (spec.snr_grid_db.size() != 1)
    throw bcfb::ConfigError(config_path + ": select-s requires a scalar rho_db");
  bcfb::SchemeReport report = bcfb::choose_s_main(spec.config_at(spec.snr_grid_db[0]));
  json doc;
  doc["s_star"] = report.s_star;
  doc["on_users"] = report.on_users;
  doc["i_main_per_user"] = report.i_main_per_user;
  doc["i_main_total"] = report.i_main_total;
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_asymptotic(const std::string& classes_path, Real mbar, std::optional<Real> sbar,
                   bool optimize) {
  bcfb::EtaClassFile file = bcfb::load_eta_classes(classes_path);
  bcfb::EtaDistribution dist = bcfb::build_eta_distribution(file.classes, file.rho);
  json doc;
  if (optimize) {
    bcfb::SbarOptimum opt = bcfb::optimal_sbar(dist, mbar);
    doc["sbar_star"] = opt.sbar;
    doc["value"] = opt.value;
    doc["eta_threshold"] = bcfb::eta_threshold(dist, mbar, opt.sbar);
    doc["stationary"] = opt.stationary;
  } else {
    doc["sbar"] = *sbar;
    doc["eta_threshold"] =
        *sbar > 0.0 ? bcfb::eta_threshold(dist, mbar, *sbar) : 0.0;
    doc["spatial_efficiency"] = bcfb::spatial_efficiency(dist, mbar, *sbar);
  }
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_distortion(int L, int R, bool empirical, long trials, std::uint64_t seed) {
  json doc;
  doc["L"] = L;
  doc["R"] = R;
  if (L >= 2) {
    bcfb::DistortionBounds bounds = bcfb::distortion_rate_bounds(L, R);
    doc["lower"] = bounds.lower;
    doc["upper"] = bounds.upper;
  } else {
    doc["lower"] = nullptr;  // dimension-1 direction feedback is lossless
    doc["upper"] = nullptr;
  }
  doc["estimate_d"] = bcfb::estimate_distortion(L, R);
  if (empirical) {
    bcfb::Rng rng = bcfb::Rng::stream(seed, {0xD157});
    bcfb::Codebook book = bcfb::random_codebook(L, R, rng);
    doc["empirical"] = bcfb::empirical_distortion(book, trials, rng);
    doc["trials"] = trials;
  }
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_verify(std::uint64_t seed) {
  bcfb::VerifyReport report = bcfb::verify_suite(seed);
  bcfb::print_report(report, std::cout);
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-rate-feedback broadcast channel toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, classes_path;
  std::string format = "csv";
  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed = 0;
  Real mbar = 1.0;
  std::optional<Real> sbar;
  bool optimize = false;
  bool empirical = false;
  int L = 0, R = 0;
  long trials = 100000;

  CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo throughput sweep");
  simulate->add_option("--config", config_path, "experiment config file (JSON)")->required();
  simulate->add_option("--out", out_path, "output path")->required();
  simulate->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--seed", seed_override, "override the config master seed");

  CLI::App* select = app.add_subcommand("select-s", "report s*_main and the on-user set");
  select->add_option("--config", config_path, "experiment config file (JSON)")->required();

  CLI::App* asym = app.add_subcommand("asymptotic", "spatial efficiency of a class mix");
  asym->add_option("--classes", classes_path, "class file (JSON)")->required();
  asym->add_option("--mbar", mbar, "limit of m/L")->required();
  CLI::Option* sbar_opt = asym->add_option("--sbar", sbar, "evaluate at this s/L");
  CLI::Option* opt_opt = asym->add_flag("--optimize", optimize, "search for the maximizing sbar");
  sbar_opt->excludes(opt_opt);

  CLI::App* dist = app.add_subcommand("distortion", "distortion-rate bounds and estimates");
  dist->add_option("--L", L, "antenna count")->required();
  dist->add_option("--R", R, "feedback bits")->required();
  dist->add_flag("--empirical", empirical, "add a Monte Carlo estimate for a random codebook");
  dist->add_option("--trials", trials, "Monte Carlo trials");
  dist->add_option("--seed", seed, "codebook / trial seed");

  CLI::App* verify = app.add_subcommand("verify", "run the statistical verification suite");
  verify->add_option("--seed", seed, "master seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_path, format, seed_override);
    if (select->parsed()) return cmd_select_s(config_path);
    if (asym->parsed()) {
      if (!optimize && !sbar) throw bcfb::ConfigError("asymptotic: need --sbar or --optimize");
      return cmd_asymptotic(classes_path, mbar, sbar, optimize);
    }
    if (dist->parsed()) return cmd_distortion(L, R, empirical, trials, seed);
    if (verify->parsed()) return cmd_verify(seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
