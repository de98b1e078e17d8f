#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bcfb/beamforming.hpp"
#include "bcfb/quantization.hpp"
#include "bcfb/rng.hpp"
#include "bcfb/types.hpp"

namespace bcfb {

// Effective SINR surrogate eta = rho*gamma*(1-d) / (1 + rho*gamma*d) for a
// distortion surrogate d in [0,1].
inline Real eta(Real rho, Real gamma, Real d) {
  if (!(rho >= 0.0) || !(gamma >= 0.0)) throw std::invalid_argument("eta: rho, gamma must be >= 0");
  if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("eta: d must be in [0,1]");
  const Real rg = rho * gamma;
  return rg * (1.0 - d) / (1.0 + rg * d);
}

struct EtaValue {
  int user = 0;
  Real eta = 0.0;
};

// On/off selection by eta ordering: every selected eta >= every unselected
// eta; candidates tied at the boundary value fill the remaining slots
// uniformly at random. Returns sorted user ids.
inline std::vector<int> select_on_users_by_eta(std::span<const EtaValue> etas, int s,
                                               Rng& tie_rng) {
  const int m = static_cast<int>(etas.size());
  if (s < 1 || s > m) throw std::invalid_argument("select_on_users_by_eta: need 1 <= s <= m");
  std::vector<EtaValue> sorted(etas.begin(), etas.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const EtaValue& a, const EtaValue& b) { return a.eta > b.eta; });
  const Real boundary = sorted[static_cast<std::size_t>(s - 1)].eta;

  std::vector<int> chosen;
  std::vector<int> tied;
  for (const EtaValue& e : etas) {
    if (e.eta > boundary)
      chosen.push_back(e.user);
    else if (e.eta == boundary)
      tied.push_back(e.user);
  }
  std::size_t need = static_cast<std::size_t>(s) - chosen.size();
  for (std::size_t k = 0; k < need; ++k) {
    std::size_t pick = k + static_cast<std::size_t>(tie_rng.below(tied.size() - k));
    std::swap(tied[k], tied[pick]);
    chosen.push_back(tied[k]);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

struct ExpectedPowers {
  Real signal = 0.0;
  Real interference = 0.0;
};

// Average received signal/interference power for an on-user under random
// codebooks with mean distortion D and a channel-independent on-set:
//   E[P_sig] = gamma rho (L/s) [ (1-D)(1-(s-1)/L) + D (s-1)/(L(L-1)) ]
//   E[P_int] = gamma rho (L/s) ((s-1)/(L-1)) D
// and E[P_sig] = 0 when s > L.
inline ExpectedPowers expected_powers(int L, int s, Real gamma, Real rho, Real D) {
  if (s < 1) throw std::invalid_argument("expected_powers: s must be >= 1");
  if (L < 1 || (s >= 2 && L < 2))
    throw std::invalid_argument("expected_powers: L must be >= 2 when s >= 2");
  if (!(D >= 0.0 && D <= 1.0)) throw std::invalid_argument("expected_powers: D must be in [0,1]");
  const Real lf = static_cast<Real>(L);
  const Real sf = static_cast<Real>(s);
  if (s == 1) return {gamma * rho * lf * (1.0 - D), 0.0};

  const Real scale = gamma * rho * lf / sf;
  ExpectedPowers out;
  out.interference = scale * ((sf - 1.0) / (lf - 1.0)) * D;
  if (s <= L)
    out.signal =
        scale * ((1.0 - D) * (1.0 - (sf - 1.0) / lf) + D * (sf - 1.0) / (lf * (lf - 1.0)));
  return out;
}

// Main-order throughput term log2(1 + E[P_sig] / (1 + E[P_int])).
inline Real i_main(Real e_sig, Real e_int) {
  if (!(e_sig >= 0.0) || !(e_int >= 0.0)) throw std::invalid_argument("i_main: powers must be >= 0");
  return std::log2(1.0 + e_sig / (1.0 + e_int));
}

struct SchemeReport {
  int s_star = 0;
  std::vector<int> on_users;           // sorted user ids, size s_star
  std::vector<Real> i_main_per_user;   // aligned with on_users
  Real i_main_total = 0.0;
};

namespace detail {

// Top-s users by I_main at a fixed s; exact ties go to the lower index.
inline SchemeReport select_for_s(const SystemConfig& config, int s) {
  const int L = config.antennas();
  const int m = config.num_users();
  std::vector<Real> value(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const UserProfile& u = config.user(i);
    const Real d = estimate_distortion(L, u.rate_bits);
    ExpectedPowers p = expected_powers(L, s, u.gamma, config.rho(), d);
    value[static_cast<std::size_t>(i)] = i_main(p.signal, p.interference);
  }
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return value[static_cast<std::size_t>(a)] > value[static_cast<std::size_t>(b)];
  });

  SchemeReport report;
  report.s_star = s;
  report.on_users.assign(order.begin(), order.begin() + s);
  std::sort(report.on_users.begin(), report.on_users.end());
  for (int user : report.on_users) {
    report.i_main_per_user.push_back(value[static_cast<std::size_t>(user)]);
    report.i_main_total += value[static_cast<std::size_t>(user)];
  }
  return report;
}

}  // namespace detail

// The finite-dimensional scheme: for each s in 1..L pick the s users with
// the largest I_main,i and keep the s maximizing the total. Ties in the
// total go to the smaller s.
inline SchemeReport choose_s_main(const SystemConfig& config) {
  SchemeReport best;
  for (int s = 1; s <= config.antennas(); ++s) {
    SchemeReport candidate = detail::select_for_s(config, s);
    if (s == 1 || candidate.i_main_total > best.i_main_total) best = std::move(candidate);
  }
  return best;
}

// Exhaustive on-set search over all size-s subsets, ranking by the sum rate
// the base station can estimate from quantized directions alone. Degenerate
// subsets are skipped. quantized holds one unit direction per user (L x m).
inline std::vector<int> oracle_on_users(const CMatrix& quantized, const SystemConfig& config,
                                        int s) {
  const int m = config.num_users();
  if (quantized.cols() != m) throw std::invalid_argument("oracle_on_users: need one direction per user");
  if (m > 16) throw std::invalid_argument("oracle_on_users: enumeration capped at m <= 16");
  if (s < 1 || s > config.antennas())
    throw std::invalid_argument("oracle_on_users: need 1 <= s <= L");

  std::vector<int> subset(static_cast<std::size_t>(s));
  std::iota(subset.begin(), subset.end(), 0);
  const Real p_on = config.rho() / static_cast<Real>(s);

  std::vector<int> best;
  Real best_rate = 0.0;
  for (;;) {
    bool feasible = true;
    Real rate = 0.0;
    try {
      CMatrix dirs(quantized.rows(), s);
      for (int j = 0; j < s; ++j) dirs.col(j) = quantized.col(subset[static_cast<std::size_t>(j)]);
      TransmissionPlan plan = zero_forcing_beams(dirs, subset);
      for (int j = 0; j < s; ++j) {
        const int user = subset[static_cast<std::size_t>(j)];
        RVector amps = (plan.beams.adjoint() * quantized.col(user)).cwiseAbs2();
        const Real gain = config.user(user).gamma * p_on;
        const Real est_sig = gain * amps(j);
        const Real est_int = gain * (amps.sum() - amps(j));
        rate += std::log2(1.0 + est_sig / (1.0 + est_int));
      }
    } catch (const DegenerateGeometryError&) {
      feasible = false;
    }
    if (feasible && (best.empty() || rate > best_rate)) {
      best = subset;
      best_rate = rate;
    }
    // next lexicographic combination of {0..m-1}
    int k = s - 1;
    while (k >= 0 && subset[static_cast<std::size_t>(k)] == m - s + k) --k;
    if (k < 0) break;
    ++subset[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < s; ++j)
      subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
  }
  if (best.empty()) throw std::runtime_error("oracle_on_users: every subset was degenerate");
  return best;
}

// L orthonormal beams from the QR of an isotropic Gaussian matrix.
inline CMatrix random_orthonormal_beams(int L, Rng& rng) {
  CMatrix g = draw_channel_matrix(L, L, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(L, L);
}

// max_{i,k} (1/L) |h_i^H b_k| over users i and orthonormal beams b_k.
inline Real random_beams_statistic(std::span<const ChannelVector> channels, const CMatrix& beams) {
  if (channels.empty()) throw std::invalid_argument("random_beams_statistic: no channels");
  const Eigen::Index L = beams.rows();
  CMatrix gram = beams.adjoint() * beams;
  gram -= CMatrix::Identity(beams.cols(), beams.cols());
  if (gram.cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("random_beams_statistic: beams are not orthonormal");

  Real best = 0.0;
  for (const ChannelVector& c : channels)
    best = std::max(best, (beams.adjoint() * c.h).cwiseAbs().maxCoeff());
  return best / static_cast<Real>(L);
}

// Round-robin fairness cycle: run the scheme, remove the served users,
// rerun on the remainder until every (real) user has been on exactly once.
inline std::vector<std::pair<int, std::vector<int>>> fairness_schedule(const SystemConfig& config) {
  std::vector<int> remaining(static_cast<std::size_t>(config.original_users()));
  std::iota(remaining.begin(), remaining.end(), 0);

  std::vector<std::pair<int, std::vector<int>>> rounds;
  int round = 1;
  while (!remaining.empty()) {
    std::vector<UserProfile> profiles;
    profiles.reserve(remaining.size());
    for (int id : remaining) profiles.push_back(config.user(id));
    SchemeReport report = choose_s_main(SystemConfig(config.antennas(), config.rho(), profiles));

    std::vector<int> served;
    for (int local : report.on_users)
      if (local < static_cast<int>(remaining.size()))  // ignore zero-gamma padding
        served.push_back(remaining[static_cast<std::size_t>(local)]);
    if (served.empty()) served.push_back(remaining.front());

    std::erase_if(remaining, [&](int id) {
      return std::find(served.begin(), served.end(), id) != served.end();
    });
    rounds.emplace_back(round++, std::move(served));
  }
  return rounds;
}

}  // namespace bcfb
