#include "bcfb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "bcfb/asymptotic.hpp"
#include "bcfb/beamforming.hpp"
#include "bcfb/channel.hpp"
#include "bcfb/config.hpp"
#include "bcfb/quantization.hpp"
#include "bcfb/selection.hpp"
#include "bcfb/simharness.hpp"
#include "bcfb/util.hpp"

namespace bcfb {
namespace {

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

std::uint64_t check_master(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, {0xC0DEull, index});
  return rng.next_u64();
}

// ---- channel ----------------------------------------------------------

CheckResult channel_recomposition(std::uint64_t seed) {
  Rng rng(check_master(seed, 1));
  Real worst_norm = 0.0;
  Real worst_recompose = 0.0;
  for (int L : {1, 2, 4, 8}) {
    SystemConfig config(L, 1.0, std::vector<UserProfile>(static_cast<std::size_t>(L)));
    for (int t = 0; t < 250; ++t) {
      for (const ChannelVector& c : draw_channels(config, rng)) {
        worst_norm = std::max(worst_norm, std::abs(c.direction.norm() - 1.0));
        worst_recompose = std::max(
            worst_recompose,
            (c.h - c.h.norm() * c.direction).cwiseAbs().maxCoeff());
      }
    }
  }
  bool pass = worst_norm <= 1e-12 && worst_recompose <= 1e-10;
  return {"channel_recomposition",
          pass,
          fmt("max |norm(v)-1| = %.3e (<= 1e-12), max |h - |h|v| = %.3e (<= 1e-10)", worst_norm,
              worst_recompose)};
}

CheckResult channel_moments(std::uint64_t seed) {
  const int L = 4;
  const int m = 4;
  const long draws = 100000;
  Rng rng(check_master(seed, 2));
  std::vector<Complex> coord_sum(L, Complex{0.0, 0.0});
  std::vector<Real> re_sq(L, 0.0);
  std::vector<Real> im_sq(L, 0.0);
  CompensatedSum g_sum;
  for (long t = 0; t < draws; ++t) {
    CMatrix h = draw_channel_matrix(L, m, rng);
    for (int r = 0; r < L; ++r) {
      Complex z = h(r, 0);  // user 0 feeds the coordinate statistics
      coord_sum[r] += z;
      re_sq[r] += z.real() * z.real();
      im_sq[r] += z.imag() * z.imag();
    }
    for (int u = 0; u < m; ++u) g_sum.add(h.col(u).squaredNorm() / L);
  }
  const Real n = static_cast<Real>(draws);
  Real worst_mean = 0.0;
  Real worst_var = 0.0;
  for (int r = 0; r < L; ++r) {
    Complex mean = coord_sum[r] / n;
    worst_mean = std::max(worst_mean, std::abs(mean));
    Real var_re = re_sq[r] / n - mean.real() * mean.real();
    Real var_im = im_sq[r] / n - mean.imag() * mean.imag();
    worst_var = std::max({worst_var, std::abs(var_re - 0.5), std::abs(var_im - 0.5)});
  }
  Real g_mean = g_sum.value() / (n * m);
  bool pass = worst_mean <= 3.0 / std::sqrt(n) && worst_var <= 0.01 &&
              std::abs(g_mean - 1.0) <= 0.01;
  return {"channel_moments",
          pass,
          fmt("max |coord mean| = %.2e (<= %.2e), max |var - 0.5| = %.2e (<= 0.01), "
              "mean g = %.5f (within 1%% of 1)",
              worst_mean, 3.0 / std::sqrt(n), worst_var, g_mean)};
}

CheckResult channel_concentration_trend_impl(std::uint64_t seed) {
  const int sizes[4][2] = {{8, 16}, {16, 32}, {32, 64}, {64, 128}};
  const int num_seeds = 500;
  Real prob[4];
  for (int k = 0; k < 4; ++k) {
    const int L = sizes[k][0];
    const int m = sizes[k][1];
    int hits = 0;
    for (int s = 0; s < num_seeds; ++s) {
      Rng rng = Rng::stream(check_master(seed, 3), {static_cast<std::uint64_t>(k),
                                                    static_cast<std::uint64_t>(s)});
      CMatrix h = draw_channel_matrix(L, m, rng);
      Real max_g = 0.0;
      for (int u = 0; u < m; ++u) max_g = std::max(max_g, h.col(u).squaredNorm() / L);
      if (max_g >= 1.5) ++hits;
    }
    prob[k] = static_cast<Real>(hits) / num_seeds;
  }
  bool nonincreasing = prob[1] <= prob[0] && prob[2] <= prob[1] && prob[3] <= prob[2];
  bool strict_ends = prob[3] < prob[0];
  return {"channel_concentration_trend",
          nonincreasing && strict_ends,
          fmt("Pr(max g >= 1.5) = %.3f, %.3f, %.3f, %.3f for L = 8, 16, 32, 64 "
              "(non-increasing, strictly lower at 64)",
              prob[0], prob[1], prob[2], prob[3])};
}

// ---- quantization -----------------------------------------------------

CheckResult quant_single_codeword_impl(std::uint64_t seed) {
  Rng rng(check_master(seed, 4));
  Codebook book = random_codebook(4, 0, rng);
  Real d = empirical_distortion(book, 100000, rng);
  bool pass = std::abs(d - 0.75) <= 0.01;
  return {"quant_single_codeword", pass,
          fmt("empirical D = %.4f (0.75 +- 0.01 at L=4, R=0)", d)};
}

CheckResult quant_sandwich_impl(std::uint64_t seed) {
  Rng rng(check_master(seed, 5));
  bool pass = true;
  std::string details;
  for (int R : {4, 8, 12}) {
    Codebook book = random_codebook(4, R, rng);
    Real d = empirical_distortion(book, 100000, rng);
    DistortionBounds b = distortion_rate_bounds(4, R);
    bool ok = d >= 0.85 * b.lower && d <= 1.15 * b.upper;
    pass = pass && ok;
    details += fmt("R=%d: D=%.4f in [%.4f, %.4f]%s ", R, d, 0.85 * b.lower, 1.15 * b.upper,
                   ok ? "" : " VIOLATED");
  }
  return {"quant_sandwich_main_order", pass, details};
}

CheckResult quant_monotone_rate(std::uint64_t seed) {
  const int rates[4] = {2, 4, 6, 8};
  Real avg[4];
  for (int k = 0; k < 4; ++k) {
    CompensatedSum sum;
    for (int s = 0; s < 20; ++s) {
      Rng rng = Rng::stream(check_master(seed, 6), {static_cast<std::uint64_t>(k),
                                                    static_cast<std::uint64_t>(s)});
      Codebook book = random_codebook(4, rates[k], rng);
      sum.add(empirical_distortion(book, 10000, rng));
    }
    avg[k] = sum.value() / 20.0;
  }
  bool pass = avg[1] <= avg[0] && avg[2] <= avg[1] && avg[3] <= avg[2];
  return {"quant_monotone_in_rate", pass,
          fmt("mean D = %.4f, %.4f, %.4f, %.4f for R = 2, 4, 6, 8 (non-increasing)", avg[0],
              avg[1], avg[2], avg[3])};
}

// ---- beamforming ------------------------------------------------------

CheckResult beams_orthogonality(std::uint64_t seed) {
  Rng rng(check_master(seed, 7));
  Real worst_cross = 0.0;
  Real worst_norm = 0.0;
  const int dims[3] = {2, 4, 8};
  for (int i = 0; i < 10000; ++i) {
    const int L = dims[i % 3];
    const int s = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
    CMatrix dirs = draw_channel_matrix(L, s, rng);
    dirs.colwise().normalize();
    std::vector<int> users(static_cast<std::size_t>(s));
    std::iota(users.begin(), users.end(), 0);
    TransmissionPlan plan = zero_forcing_beams(dirs, users);
    for (int a = 0; a < s; ++a) {
      worst_norm = std::max(worst_norm, std::abs(plan.beams.col(a).norm() - 1.0));
      for (int b = 0; b < s; ++b)
        if (a != b)
          worst_cross = std::max(worst_cross, std::abs(plan.beams.col(a).dot(dirs.col(b))));
    }
  }
  bool pass = worst_cross <= 1e-8 && worst_norm <= 1e-10;
  return {"beams_zero_forcing_orthogonality", pass,
          fmt("max |q_i^H hhat_j| = %.2e (<= 1e-8), max norm dev = %.2e (<= 1e-10) "
              "over 10^4 instances",
              worst_cross, worst_norm)};
}

CheckResult beams_perfect_feedback(std::uint64_t seed) {
  Rng rng(check_master(seed, 8));
  const Real rho = 10.0;
  Real worst_ratio = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const int L = 4;
    const int s = 1 + static_cast<int>(rng.below(4));
    SystemConfig config(L, rho, std::vector<UserProfile>(4, UserProfile{1.0, 0}));
    std::vector<ChannelVector> channels = draw_channels(config, rng);
    CMatrix dirs(L, s);
    std::vector<int> users(static_cast<std::size_t>(s));
    std::iota(users.begin(), users.end(), 0);
    for (int j = 0; j < s; ++j) dirs.col(j) = channels[static_cast<std::size_t>(j)].direction;
    TransmissionPlan plan = zero_forcing_beams(dirs, users);
    plan.per_user_power = rho / s;
    for (int u : users) {
      LinkMetrics lm = link_metrics(channels[static_cast<std::size_t>(u)], 1.0, plan, u);
      Real scale = plan.per_user_power * channels[static_cast<std::size_t>(u)].h.squaredNorm();
      if (scale > 0.0) worst_ratio = std::max(worst_ratio, lm.p_int / scale);
    }
  }
  bool pass = worst_ratio <= 1e-8;
  return {"beams_perfect_feedback_nulls_interference", pass,
          fmt("max p_int / ((rho/s) gamma |h|^2) = %.2e (<= 1e-8)", worst_ratio)};
}

CheckResult beams_interference_per_term(std::uint64_t seed) {
  const int L = 4;
  const int redraws = 20;
  const long blocks = 5000;
  std::vector<double> cross =
      parallel_map<double>(redraws, [&](std::size_t r) -> double {
        Rng rng = Rng::stream(check_master(seed, 9), {1, r});
        Codebook b0 = random_codebook(L, 6, rng);
        Codebook b1 = random_codebook(L, 6, rng);
        CompensatedSum acc;
        for (long t = 0; t < blocks; ++t) {
          CMatrix h = draw_channel_matrix(L, 2, rng);
          CMatrix dirs = h;
          dirs.colwise().normalize();
          CMatrix quantized(L, 2);
          quantized.col(0) = quantize(dirs.col(0), b0).codeword;
          quantized.col(1) = quantize(dirs.col(1), b1).codeword;
          TransmissionPlan plan = zero_forcing_beams(quantized, {0, 1});
          acc.add(std::norm(plan.beams.col(1).dot(dirs.col(0))));
          acc.add(std::norm(plan.beams.col(0).dot(dirs.col(1))));
        }
        return acc.value() / (2.0 * blocks);
      });
  std::vector<double> dist =
      parallel_map<double>(redraws, [&](std::size_t r) -> double {
        Rng rng = Rng::stream(check_master(seed, 9), {2, r});
        Rng book_rng = Rng::stream(check_master(seed, 9), {1, r});
        Codebook b0 = random_codebook(L, 6, book_rng);
        Codebook b1 = random_codebook(L, 6, book_rng);
        return 0.5 * (empirical_distortion(b0, 5000, rng) + empirical_distortion(b1, 5000, rng));
      });
  Real mc = std::accumulate(cross.begin(), cross.end(), 0.0) / redraws;
  Real d_hat = std::accumulate(dist.begin(), dist.end(), 0.0) / redraws;
  Real expect = d_hat / (L - 1);
  Real rel = std::abs(mc - expect) / expect;
  return {"beams_interference_per_term", rel <= 0.02,
          fmt("E|v_i^H q_j|^2 = %.5f vs D/(L-1) = %.5f (rel err %.2f%%, <= 2%%)", mc, expect,
              100.0 * rel)};
}

// ---- average powers under random on-sets -------------------------------

struct PowerMoments {
  double sig_sum = 0.0;
  double int_sum = 0.0;
  long samples = 0;
};

// Mean on-user |h^H q|^2 moments under random A_on, one codebook redraw.
PowerMoments average_power_unit(std::uint64_t master, int s, int redraw, long blocks) {
  const int L = 4;
  const int m = 4;
  Rng book_rng = Rng::stream(master, {1, static_cast<std::uint64_t>(redraw)});
  std::vector<Codebook> books;
  for (int u = 0; u < m; ++u) books.push_back(random_codebook(L, 6, book_rng));

  PowerMoments out;
  CompensatedSum sig, intf;
  Rng rng = Rng::stream(master, {2, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(redraw)});
  std::vector<int> pool(m);
  for (long t = 0; t < blocks; ++t) {
    CMatrix h = draw_channel_matrix(L, m, rng);
    std::iota(pool.begin(), pool.end(), 0);
    for (int k = 0; k < s; ++k)
      std::swap(pool[k], pool[k + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - k)))]);
    std::vector<int> on(pool.begin(), pool.begin() + s);
    std::sort(on.begin(), on.end());

    CMatrix quantized(L, s);
    CMatrix truth(L, s);
    for (int j = 0; j < s; ++j) {
      CVector dir = h.col(on[static_cast<std::size_t>(j)]).normalized();
      quantized.col(j) = quantize(dir, books[static_cast<std::size_t>(on[static_cast<std::size_t>(j)])]).codeword;
      truth.col(j) = h.col(on[static_cast<std::size_t>(j)]);
    }
    try {
      TransmissionPlan plan = zero_forcing_beams(quantized, on);
      CMatrix crossm = plan.beams.adjoint() * truth;
      for (int j = 0; j < s; ++j) {
        Real own = std::norm(crossm(j, j));
        sig.add(own);
        intf.add(crossm.col(j).squaredNorm() - own);
        ++out.samples;
      }
    } catch (const DegenerateGeometryError&) {
    }
  }
  out.sig_sum = sig.value();
  out.int_sum = intf.value();
  return out;
}

CheckResult average_powers_impl(std::uint64_t seed, Real rho, long blocks_per_redraw) {
  const int L = 4;
  const int redraws = 10;
  const std::uint64_t master = check_master(seed, 10 + static_cast<std::uint64_t>(rho));

  std::vector<double> dists = parallel_map<double>(redraws, [&](std::size_t r) -> double {
    Rng book_rng = Rng::stream(master, {1, r});
    std::vector<Codebook> books;
    for (int u = 0; u < 4; ++u) books.push_back(random_codebook(L, 6, book_rng));
    Rng d_rng = Rng::stream(master, {3, r});
    double acc = 0.0;
    for (const Codebook& b : books) acc += empirical_distortion(b, 5000, d_rng);
    return acc / 4.0;
  });
  const Real d_hat = std::accumulate(dists.begin(), dists.end(), 0.0) / redraws;

  bool pass = true;
  std::string details = fmt("gamma*rho=%g, D=%.4f: ", rho, d_hat);
  for (int s = 1; s <= 4; ++s) {
    std::vector<PowerMoments> parts = parallel_map<PowerMoments>(
        redraws, [&](std::size_t r) {
          return average_power_unit(master, s, static_cast<int>(r), blocks_per_redraw);
        });
    double sig = 0.0, intf = 0.0;
    long n = 0;
    for (const PowerMoments& p : parts) {
      sig += p.sig_sum;
      intf += p.int_sum;
      n += p.samples;
    }
    const Real scale = rho / s;  // gamma = 1
    const Real mc_sig = scale * sig / n;
    const Real mc_int = scale * intf / n;
    ExpectedPowers want = expected_powers(L, s, 1.0, rho, d_hat);
    Real sig_err = std::abs(mc_sig - want.signal) / want.signal;
    bool ok;
    if (s == 1) {
      ok = sig_err <= 0.02 && mc_int <= 1e-12;
      details += fmt("s=1: sig %.2f%% int %.1e; ", 100.0 * sig_err, mc_int);
    } else {
      Real int_err = std::abs(mc_int - want.interference) / want.interference;
      ok = sig_err <= 0.02 && int_err <= 0.02;
      details += fmt("s=%d: sig %.2f%% int %.2f%%; ", s, 100.0 * sig_err, 100.0 * int_err);
    }
    pass = pass && ok;
  }
  return {fmt("average_power_closed_form_rho_%g", rho), pass, details + "(each <= 2%)"};
}

// ---- asymptotic limits -------------------------------------------------

CheckResult asymptotic_power_limits_impl(std::uint64_t) {
  const Real rho = 10.0;
  const Real sig_limit = (rho / 0.5) * (1.0 - 0.5) * (1.0 - 0.5);  // 5
  const Real int_limit = rho * 0.5;                                 // 5
  Real sig_err[3], int_err[3];
  const int dims[3] = {50, 100, 200};
  for (int k = 0; k < 3; ++k) {
    const int L = dims[k];
    ExpectedPowers p = expected_powers(L, L / 2, 1.0, rho, estimate_distortion(L, L));
    sig_err[k] = std::abs(p.signal - sig_limit) / sig_limit;
    int_err[k] = std::abs(p.interference - int_limit) / int_limit;
  }
  bool pass = sig_err[2] <= 0.05 && int_err[2] <= 0.05 && sig_err[1] < sig_err[0] &&
              sig_err[2] < sig_err[1] && int_err[1] < int_err[0] && int_err[2] < int_err[1];
  return {"asymptotic_power_limits", pass,
          fmt("sig rel err %.2f%% -> %.2f%% -> %.2f%%, int %.2f%% -> %.2f%% -> %.2f%% "
              "at L = 50, 100, 200 (decreasing, <= 5%% at 200)",
              100 * sig_err[0], 100 * sig_err[1], 100 * sig_err[2], 100 * int_err[0],
              100 * int_err[1], 100 * int_err[2])};
}

CheckResult eta_monotonicity(std::uint64_t) {
  bool pass = true;
  for (Real gamma : {0.2, 1.0, 2.5}) {
    for (Real rho : {0.5, 5.0, 20.0}) {
      for (Real d : {0.0, 0.3, 0.7, 1.0}) {
        Real base = eta(rho, gamma, d);
        if (d < 1.0) {
          pass = pass && eta(rho * 1.1, gamma, d) > base && eta(rho, gamma * 1.1, d) > base;
        }
        if (d > 0.0) pass = pass && eta(rho, gamma, d * 0.9) > base;
        pass = pass && base >= 0.0 && base <= rho * gamma + 1e-15;
      }
    }
  }
  return {"eta_monotonicity", pass, "eta increasing in gamma, rho; decreasing in d; in [0, rho*gamma]"};
}

// ---- selection --------------------------------------------------------

CheckResult selection_tie_uniformity(std::uint64_t seed) {
  std::vector<EtaValue> etas = {{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}};
  int counts[4] = {0, 0, 0, 0};
  for (int t = 0; t < 10000; ++t) {
    Rng tie = Rng::stream(check_master(seed, 12), {static_cast<std::uint64_t>(t)});
    for (int u : select_on_users_by_eta(etas, 2, tie)) ++counts[u];
  }
  // Each user enters with probability 1/2: Bin(1e4, 1/2), 3 sigma = 150.
  bool pass = true;
  for (int c : counts) pass = pass && std::abs(c - 5000) <= 150;
  return {"selection_tie_uniformity", pass,
          fmt("counts = %d, %d, %d, %d (each within 5000 +- 150)", counts[0], counts[1],
              counts[2], counts[3])};
}

SchemeReport brute_force_scheme(const SystemConfig& config) {
  SchemeReport best;
  bool first = true;
  for (int s = 1; s <= config.antennas(); ++s) {
    const int m = config.num_users();
    std::vector<Real> value(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const UserProfile& u = config.user(i);
      ExpectedPowers p = expected_powers(config.antennas(), s, u.gamma, config.rho(),
                                         estimate_distortion(config.antennas(), u.rate_bits));
      value[static_cast<std::size_t>(i)] = i_main(p.signal, p.interference);
    }
    std::vector<int> subset(static_cast<std::size_t>(s));
    std::iota(subset.begin(), subset.end(), 0);
    for (;;) {
      Real total = 0.0;
      for (int u : subset) total += value[static_cast<std::size_t>(u)];
      if (first || total > best.i_main_total) {
        first = false;
        best.s_star = s;
        best.on_users = subset;
        best.i_main_total = total;
      }
      int k = s - 1;
      while (k >= 0 && subset[static_cast<std::size_t>(k)] == m - s + k) --k;
      if (k < 0) break;
      ++subset[static_cast<std::size_t>(k)];
      for (int j = k + 1; j < s; ++j)
        subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return best;
}

SystemConfig random_config(Rng& rng, int max_m) {
  const int L = 1 + static_cast<int>(rng.below(4));
  const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_m)));
  std::vector<UserProfile> users;
  for (int i = 0; i < m; ++i)
    users.push_back({0.05 + 3.0 * rng.uniform(), static_cast<int>(rng.below(13))});
  return SystemConfig(L, 0.1 + 100.0 * rng.uniform(), users);
}

CheckResult selection_matches_bruteforce(std::uint64_t seed) {
  Rng rng(check_master(seed, 13));
  for (int trial = 0; trial < 60; ++trial) {
    SystemConfig config = random_config(rng, 4);
    SchemeReport got = choose_s_main(config);
    SchemeReport want = brute_force_scheme(config);
    if (got.s_star != want.s_star || got.on_users != want.on_users ||
        std::abs(got.i_main_total - want.i_main_total) > 1e-12)
      return {"selection_matches_bruteforce", false,
              fmt("mismatch at trial %d: got s=%d total=%.12f, brute s=%d total=%.12f", trial,
                  got.s_star, got.i_main_total, want.s_star, want.i_main_total)};
  }
  return {"selection_matches_bruteforce", true,
          "60 random configs (m <= 4) match exhaustive (s, A_on) enumeration"};
}

CheckResult selection_permutation_invariance(std::uint64_t seed) {
  Rng rng(check_master(seed, 14));
  for (int trial = 0; trial < 40; ++trial) {
    SystemConfig config = random_config(rng, 6);
    const int m = config.num_users();
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = m - 1; k > 0; --k)
      std::swap(perm[static_cast<std::size_t>(k)],
                perm[rng.below(static_cast<std::uint64_t>(k + 1))]);
    std::vector<UserProfile> shuffled(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      shuffled[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = config.user(i);

    SchemeReport base = choose_s_main(config);
    SchemeReport moved = choose_s_main(SystemConfig(config.antennas(), config.rho(), shuffled));
    std::set<int> expect;
    for (int u : base.on_users) expect.insert(perm[static_cast<std::size_t>(u)]);
    std::set<int> got(moved.on_users.begin(), moved.on_users.end());
    if (moved.s_star != base.s_star || got != expect ||
        std::abs(moved.i_main_total - base.i_main_total) > 1e-12)
      return {"selection_permutation_invariance", false, fmt("mismatch at trial %d", trial)};
  }
  return {"selection_permutation_invariance", true, "40 random relabelings permute the report"};
}

CheckResult selection_equal_rate_largest_gamma(std::uint64_t seed) {
  Rng rng(check_master(seed, 15));
  for (int trial = 0; trial < 40; ++trial) {
    const int L = 2 + static_cast<int>(rng.below(3));
    const int m = L + static_cast<int>(rng.below(4));
    const int R = static_cast<int>(rng.below(13));
    std::vector<UserProfile> users;
    for (int i = 0; i < m; ++i) users.push_back({0.05 + 4.0 * rng.uniform(), R});
    SystemConfig config(L, 0.5 + 50.0 * rng.uniform(), users);
    SchemeReport report = choose_s_main(config);

    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return config.user(a).gamma > config.user(b).gamma; });
    std::set<int> want(order.begin(), order.begin() + report.s_star);
    std::set<int> got(report.on_users.begin(), report.on_users.end());
    if (want != got)
      return {"selection_equal_rate_largest_gamma", false, fmt("mismatch at trial %d", trial)};
  }
  return {"selection_equal_rate_largest_gamma", true,
          "equal-rate on-set equals the s largest-gamma users (40 configs)"};
}

CheckResult fairness_coverage(std::uint64_t seed) {
  Rng rng(check_master(seed, 16));
  for (int trial = 0; trial < 40; ++trial) {
    const int L = 1 + static_cast<int>(rng.below(4));
    const int m = 1 + static_cast<int>(rng.below(8));
    std::vector<UserProfile> users;
    for (int i = 0; i < m; ++i)
      users.push_back({4.0 * rng.uniform(), static_cast<int>(rng.below(13))});
    SystemConfig config(L, 0.1 + 30.0 * rng.uniform(), users);
    auto rounds = fairness_schedule(config);
    std::set<int> seen;
    std::size_t total = 0;
    for (const auto& [round, on] : rounds) {
      total += on.size();
      seen.insert(on.begin(), on.end());
    }
    if (total != static_cast<std::size_t>(m) || seen.size() != static_cast<std::size_t>(m))
      return {"fairness_coverage", false, fmt("cycle missed or repeated users at trial %d", trial)};
  }
  return {"fairness_coverage", true, "every user served exactly once per cycle (40 configs)"};
}

// ---- asymptotic module -------------------------------------------------

EtaDistribution homogeneous_dist() { return EtaDistribution({{1.0, 1.0}}); }
EtaDistribution two_atom_dist() { return EtaDistribution({{3.0, 0.5}, {1.0, 0.5}}); }

CheckResult asymptotic_boundary_mass(std::uint64_t) {
  struct Case {
    EtaDistribution dist;
    Real mbar;
  };
  const Case cases[2] = {{homogeneous_dist(), 1.0}, {two_atom_dist(), 2.0}};
  for (const Case& c : cases) {
    for (int k = 1; k < 1000; ++k) {
      const Real sbar = k / 1000.0;
      const Real t = eta_threshold(c.dist, c.mbar, sbar);
      const Real coeff = sbar - c.mbar * c.dist.tail_above(t);
      if (coeff < -1e-15 || coeff > c.mbar * c.dist.mass_at(t) + 1e-12)
        return {"asymptotic_boundary_mass", false,
                fmt("coefficient %.3e out of range at sbar=%.3f", coeff, sbar)};
    }
  }
  return {"asymptotic_boundary_mass", true,
          "boundary coefficient in [0, mbar * mass_at(eta_sbar)] on a 1e-3 grid"};
}

CheckResult asymptotic_continuity(std::uint64_t) {
  struct Case {
    EtaDistribution dist;
    Real mbar;
    Real eta_max;
  };
  const Case cases[2] = {{homogeneous_dist(), 1.0, 1.0}, {two_atom_dist(), 2.0, 3.0}};
  const Real delta = 0.01;
  const Real step = 1e-4;
  for (const Case& c : cases) {
    // slope bound on [delta, 1-delta]: pieces differentiable with
    // |dI/dsbar| <= 2 mbar eta_max / (delta^2 ln2) + log2(1 + eta_max/delta)
    const Real bound =
        (2.0 * c.mbar * c.eta_max / (delta * delta) / std::numbers::ln2 +
         std::log2(1.0 + c.eta_max / delta)) *
        step;
    Real prev = spatial_efficiency(c.dist, c.mbar, delta);
    for (Real s = delta + step; s <= 1.0 - delta + 1e-12; s += step) {
      Real cur = spatial_efficiency(c.dist, c.mbar, s);
      if (std::abs(cur - prev) > bound)
        return {"asymptotic_continuity", false,
                fmt("jump %.3e > %.3e at sbar=%.4f", std::abs(cur - prev), bound, s)};
      prev = cur;
    }
  }
  return {"asymptotic_continuity", true, "successive 1e-4 grid values differ by <= C * 1e-4"};
}

CheckResult asymptotic_unique_plateau(std::uint64_t) {
  struct Case {
    EtaDistribution dist;
    Real mbar;
  };
  const Case cases[2] = {{homogeneous_dist(), 1.0}, {two_atom_dist(), 2.0}};
  for (const Case& c : cases) {
    const long n = 100000;
    std::vector<Real> profile(n - 1);
    Real peak = 0.0;
    for (long k = 1; k < n; ++k) {
      profile[static_cast<std::size_t>(k - 1)] =
          spatial_efficiency(c.dist, c.mbar, static_cast<Real>(k) / n);
      peak = std::max(peak, profile[static_cast<std::size_t>(k - 1)]);
    }
    long first = -1, last = -1;
    for (long k = 0; k < n - 1; ++k) {
      if (profile[static_cast<std::size_t>(k)] >= peak - 1e-9) {
        if (first < 0) first = k;
        last = k;
      }
    }
    for (long k = first; k <= last; ++k)
      if (profile[static_cast<std::size_t>(k)] < peak - 1e-9)
        return {"asymptotic_unique_plateau", false, "argmax plateau is disconnected"};
  }
  return {"asymptotic_unique_plateau", true,
          "argmax plateau is a single connected component (1e-5 grid, both instances)"};
}

CheckResult asymptotic_finite_convergence(std::uint64_t) {
  // Homogeneous system, gamma*rho = 10, rbar = 2, sbar = 1/2, mbar = 1.
  const Real rho = 10.0;
  EtaDistribution dist({{eta(rho, 1.0, std::exp2(-2.0)), 1.0}});
  const Real limit = spatial_efficiency(dist, 1.0, 0.5);
  Real gap[3];
  const int dims[3] = {50, 100, 200};
  for (int k = 0; k < 3; ++k) {
    const int L = dims[k];
    const int s = L / 2;
    ExpectedPowers p = expected_powers(L, s, 1.0, rho, estimate_distortion(L, 2 * L));
    const Real per_antenna = (static_cast<Real>(s) / L) * i_main(p.signal, p.interference);
    gap[k] = std::abs(per_antenna - limit) / limit;
  }
  bool pass = gap[1] < gap[0] && gap[2] < gap[1] && gap[2] <= 0.02;
  return {"asymptotic_finite_convergence", pass,
          fmt("per-antenna I_main gap to Ibar: %.2f%% -> %.2f%% -> %.2f%% at L = 50, 100, 200 "
              "(decreasing, <= 2%% at 200)",
              100 * gap[0], 100 * gap[1], 100 * gap[2])};
}

CheckResult random_beams_trend_impl(std::uint64_t seed) {
  const int sizes[3][2] = {{8, 16}, {32, 64}, {64, 128}};
  const int num_seeds = 500;
  Real median[3];
  for (int k = 0; k < 3; ++k) {
    const int L = sizes[k][0];
    const int m = sizes[k][1];
    std::vector<double> stats = parallel_map<double>(num_seeds, [&](std::size_t s) -> double {
      Rng rng = Rng::stream(check_master(seed, 17),
                            {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(s)});
      CMatrix beams = random_orthonormal_beams(L, rng);
      CMatrix h = draw_channel_matrix(L, m, rng);
      return (beams.adjoint() * h).cwiseAbs().maxCoeff() / L;
    });
    std::sort(stats.begin(), stats.end());
    median[k] = stats[num_seeds / 2];
  }
  bool pass = median[1] < median[0] && median[2] < median[1];
  return {"random_beams_trend", pass,
          fmt("median max (1/L)|h^H b| = %.4f, %.4f, %.4f at (L,m) = (8,16), (32,64), (64,128) "
              "(strictly decreasing)",
              median[0], median[1], median[2])};
}

// ---- simulation harness ------------------------------------------------

ExperimentSpec base_spec(std::uint64_t master, int R) {
  ExperimentSpec spec;
  spec.L = 4;
  spec.m = 4;
  spec.gamma = {1.0, 1.0, 1.0, 1.0};
  spec.rate_bits = {R, R, R, R};
  spec.master_seed = master;
  return spec;
}

CheckResult simulate_determinism(std::uint64_t seed) {
  ExperimentSpec spec = base_spec(check_master(seed, 18), 6);
  spec.snr_grid_db = {0.0, 10.0};
  spec.schemes = {SchemeTag::parse("main_order"), SchemeTag::parse("fixed_s(2)")};
  spec.trials = 500;
  spec.codebook_redraws = 3;
  std::ostringstream a, b;
  write_csv(run_experiment(spec), a);
  write_csv(run_experiment(spec), b);
  bool pass = a.str() == b.str();
  return {"simulate_determinism", pass,
          pass ? "two runs produced byte-identical CSV" : "CSV outputs differ"};
}

CheckResult scheme_dominance(std::uint64_t seed) {
  bool pass = true;
  std::string details;
  for (auto [snr, R] : {std::pair{15.0, 6}, {20.0, 6}, {15.0, 12}, {20.0, 12}}) {
    ExperimentSpec spec = base_spec(check_master(seed, 19), R);
    spec.snr_grid_db = {snr};
    spec.schemes = {SchemeTag::parse("main_order"), SchemeTag::parse("fixed_s(1)"),
                    SchemeTag::parse("fixed_s(2)"), SchemeTag::parse("fixed_s(3)"),
                    SchemeTag::parse("fixed_s(4)")};
    spec.trials = 4000;
    spec.codebook_redraws = 8;
    std::vector<ResultRow> rows = run_experiment(spec);
    const ResultRow& main = rows[0];
    Real worst_margin = 1e9;
    for (std::size_t k = 1; k < rows.size(); ++k) {
      Real allowance = 2.0 * std::sqrt(main.mc_stderr * main.mc_stderr +
                                       rows[k].mc_stderr * rows[k].mc_stderr);
      worst_margin = std::min(worst_margin,
                              main.mc_throughput_bits - rows[k].mc_throughput_bits + allowance);
    }
    bool ok = worst_margin >= 0.0;
    pass = pass && ok;
    details += fmt("(%.0fdB,R=%d): margin %.3f; ", snr, R, worst_margin);
  }
  return {"scheme_dominance", pass,
          details + "(main_order >= every fixed_s(k) - 2 pooled SE)"};
}

CheckResult oracle_gap(std::uint64_t seed) {
  bool pass = true;
  std::string details;
  for (auto [snr, R] : {std::pair{20.0, 6}, {15.0, 12}}) {
    ExperimentSpec spec = base_spec(check_master(seed, 20), R);
    spec.snr_grid_db = {snr};
    spec.schemes = {SchemeTag::parse("main_order"), SchemeTag::parse("oracle")};
    spec.trials = 4000;
    spec.codebook_redraws = 8;
    std::vector<ResultRow> rows = run_experiment(spec);
    Real allowance = 2.0 * std::sqrt(rows[0].mc_stderr * rows[0].mc_stderr +
                                     rows[1].mc_stderr * rows[1].mc_stderr);
    Real margin = rows[1].mc_throughput_bits - rows[0].mc_throughput_bits + allowance;
    pass = pass && margin >= 0.0;
    details += fmt("(%.0fdB,R=%d): oracle %.4f vs main %.4f; ", snr, R,
                   rows[1].mc_throughput_bits, rows[0].mc_throughput_bits);
  }
  return {"oracle_gap", pass, details + "(oracle >= main_order - 2 pooled SE)"};
}

CheckResult throughput_rho_monotone(std::uint64_t seed) {
  ExperimentSpec spec = base_spec(check_master(seed, 21), 6);
  spec.snr_grid_db = {0.0, 5.0, 10.0, 15.0, 20.0};
  spec.schemes = {SchemeTag::parse("fixed_s(2)"), SchemeTag::parse("fixed_s(4)")};
  spec.trials = 3000;
  spec.codebook_redraws = 5;
  std::vector<ResultRow> rows = run_experiment(spec);
  bool pass = true;
  for (std::size_t k = 2; k < rows.size(); ++k) {
    const ResultRow& prev = rows[k - 2];  // same scheme, previous SNR
    const ResultRow& cur = rows[k];
    Real allowance =
        2.0 * std::sqrt(prev.mc_stderr * prev.mc_stderr + cur.mc_stderr * cur.mc_stderr);
    if (cur.mc_throughput_bits < prev.mc_throughput_bits - allowance) pass = false;
  }
  return {"throughput_rho_monotone", pass,
          "fixed-s mean throughput non-decreasing along the SNR grid (2 SE per pair)"};
}

CheckResult run_block_theory_gap(std::uint64_t seed) {
  SystemConfig config = SystemConfig::from_db(4, 20.0, std::vector<UserProfile>(4, {1.0, 6}));
  SchemeReport report = choose_s_main(config);
  CompensatedSum sum;
  long effective = 0;
  const std::uint64_t master = check_master(seed, 22);
  for (int redraw = 0; redraw < 5; ++redraw) {
    Rng book_rng = Rng::stream(master, {1, static_cast<std::uint64_t>(redraw)});
    std::vector<Codebook> books;
    for (int u = 0; u < 4; ++u) books.push_back(random_codebook(4, 6, book_rng));
    for (long t = 0; t < 2000; ++t) {
      Rng rng = Rng::stream(master, {2, static_cast<std::uint64_t>(redraw),
                                     static_cast<std::uint64_t>(t)});
      BlockOutcome out = run_block(config, report.on_users, books, rng);
      if (!out.degenerate) {
        sum.add(out.sum_rate);
        ++effective;
      }
    }
  }
  const Real mc = sum.value() / effective;
  const Real rel = std::abs(mc - report.i_main_total) / report.i_main_total;
  return {"run_block_theory_gap", rel <= 0.15,
          fmt("MC mean %.4f vs I_main %.4f (rel gap %.2f%%, <= 15%%)", mc, report.i_main_total,
              100.0 * rel)};
}

}  // namespace

CheckResult check_concentration_trend(std::uint64_t seed) {
  return channel_concentration_trend_impl(seed);
}
CheckResult check_quant_single_codeword(std::uint64_t seed) {
  return quant_single_codeword_impl(seed);
}
CheckResult check_quant_sandwich(std::uint64_t seed) { return quant_sandwich_impl(seed); }
CheckResult check_average_powers(std::uint64_t seed, double rho, long blocks_per_redraw) {
  return average_powers_impl(seed, rho, blocks_per_redraw);
}
CheckResult check_random_beams_trend(std::uint64_t seed) {
  return random_beams_trend_impl(seed);
}
CheckResult check_asymptotic_power_limits(std::uint64_t seed) {
  return asymptotic_power_limits_impl(seed);
}

VerifyReport verify_suite(std::uint64_t seed) {
  VerifyReport report;
  auto run = [&](CheckResult (*check)(std::uint64_t)) {
    try {
      report.checks.push_back(check(seed));
    } catch (const std::exception& e) {
      report.checks.push_back({"<exception>", false, e.what()});
    }
  };
  run(channel_recomposition);
  run(channel_moments);
  run(check_concentration_trend);
  run(check_quant_single_codeword);
  run(check_quant_sandwich);
  run(quant_monotone_rate);
  run(beams_orthogonality);
  run(beams_perfect_feedback);
  run(beams_interference_per_term);
  try {
    report.checks.push_back(check_average_powers(seed, 1.0, 10000));
    report.checks.push_back(check_average_powers(seed, 10.0, 10000));
  } catch (const std::exception& e) {
    report.checks.push_back({"average_powers", false, e.what()});
  }
  run(check_asymptotic_power_limits);
  run(eta_monotonicity);
  run(selection_tie_uniformity);
  run(selection_matches_bruteforce);
  run(selection_permutation_invariance);
  run(selection_equal_rate_largest_gamma);
  run(fairness_coverage);
  run(asymptotic_boundary_mass);
  run(asymptotic_continuity);
  run(asymptotic_unique_plateau);
  run(asymptotic_finite_convergence);
  run(check_random_beams_trend);
  run(simulate_determinism);
  run(scheme_dominance);
  run(oracle_gap);
  run(throughput_rho_monotone);
  run(run_block_theory_gap);
  return report;
}

void print_report(const VerifyReport& report, std::ostream& out) {
  for (const CheckResult& c : report.checks)
    out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.details << "\n";
  int failed = 0;
  for (const CheckResult& c : report.checks)
    if (!c.pass) ++failed;
  out << report.checks.size() << " checks, " << (report.checks.size() - failed) << " passed, "
      << failed << " failed\n";
}

}  // namespace bcfb
