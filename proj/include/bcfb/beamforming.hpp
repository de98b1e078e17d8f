#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bcfb/types.hpp"

namespace bcfb {

// Zero-forcing transmission plan for the on-user set A_on. Keeps the
// quantized directions it was built from so the zero-forcing property
// |q_i^H hhat_j| ~ 0 (i != j) stays checkable after the fact.
struct TransmissionPlan {
  std::vector<int> on_users;  // size s, distinct user indices
  CMatrix beams;              // L x s, column j serves on_users[j]
  CMatrix quantized_dirs;     // L x s, direction column j fed the construction
  Real per_user_power = 0.0;  // P_on = rho / s, filled by the caller

  int s() const { return static_cast<int>(on_users.size()); }

  int slot_of(int user) const {
    auto it = std::find(on_users.begin(), on_users.end(), user);
    if (it == on_users.end()) throw std::invalid_argument("user is not in the on-set");
    return static_cast<int>(it - on_users.begin());
  }
};

// Beamforming vectors from quantized directions: q_i is the normalized
// unitary projection of hhat_i onto the orthogonal complement of
// span{hhat_j : j in A_on \ {i}}. Per-user power is left at 0 for the
// caller to fill. Throws DegenerateGeometryError when hhat_i lies in the
// others' span, and std::invalid_argument when s > L.
inline TransmissionPlan zero_forcing_beams(const CMatrix& quantized_dirs,
                                           std::vector<int> on_users) {
  const Eigen::Index L = quantized_dirs.rows();
  const Eigen::Index s = quantized_dirs.cols();
  if (s < 1) throw std::invalid_argument("zero_forcing_beams: empty on-set");
  if (static_cast<Eigen::Index>(on_users.size()) != s)
    throw std::invalid_argument("zero_forcing_beams: on_users/direction count mismatch");
  if (s > L) throw std::invalid_argument("zero_forcing_beams: more on-users than antennas");
  {
    std::vector<int> sorted = on_users;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("zero_forcing_beams: duplicate on-user");
  }

  TransmissionPlan plan;
  plan.on_users = std::move(on_users);
  plan.quantized_dirs = quantized_dirs;
  plan.beams.resize(L, s);

  if (s == 1) {
    Real norm = quantized_dirs.col(0).norm();
    if (norm < 1e-10) throw DegenerateGeometryError(plan.on_users[0]);
    plan.beams.col(0) = quantized_dirs.col(0) / norm;
    return plan;
  }

  CMatrix others(L, s - 1);
  for (Eigen::Index i = 0; i < s; ++i) {
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < s; ++j)
      if (j != i) others.col(k++) = quantized_dirs.col(j);

    Eigen::ColPivHouseholderQR<CMatrix> qr(others);
    qr.setThreshold(1e-10);
    Eigen::Index rank = qr.rank();
    CMatrix basis = qr.householderQ() * CMatrix::Identity(L, rank);

    CVector residual = quantized_dirs.col(i) - basis * (basis.adjoint() * quantized_dirs.col(i));
    Real norm = residual.norm();
    if (norm < 1e-10) throw DegenerateGeometryError(plan.on_users[static_cast<std::size_t>(i)]);
    plan.beams.col(i) = residual / norm;
  }
  return plan;
}

struct LinkMetrics {
  Real p_sig = 0.0;
  Real p_int = 0.0;
  Real rate_bits = 0.0;  // log2(1 + p_sig / (1 + p_int))
};

// Signal power, interference power and instantaneous rate for one on-user,
// evaluated against the true channel.
inline LinkMetrics link_metrics(const ChannelVector& true_channel, Real gamma,
                                const TransmissionPlan& plan, int user) {
  const int slot = plan.slot_of(user);
  RVector amps = (plan.beams.adjoint() * true_channel.h).cwiseAbs2();
  LinkMetrics out;
  out.p_sig = plan.per_user_power * gamma * amps(slot);
  out.p_int = plan.per_user_power * gamma * (amps.sum() - amps(slot));
  out.rate_bits = std::log2(1.0 + out.p_sig / (1.0 + out.p_int));
  return out;
}

// Sum of on-user rates; channels and gammas are indexed by user id.
inline Real sum_rate(std::span<const ChannelVector> channels, std::span<const Real> gammas,
                     const TransmissionPlan& plan) {
  Real total = 0.0;
  for (int user : plan.on_users)
    total += link_metrics(channels[static_cast<std::size_t>(user)],
                          gammas[static_cast<std::size_t>(user)], plan, user)
                 .rate_bits;
  return total;
}

}  // namespace bcfb
