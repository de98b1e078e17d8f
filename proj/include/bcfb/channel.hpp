#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bcfb/rng.hpp"
#include "bcfb/types.hpp"

namespace bcfb {

// L x n matrix of i.i.d. CN(0,1) entries, drawn column-major so a column is
// one user's (or one trial's) channel vector.
inline CMatrix draw_channel_matrix(int rows, int cols, Rng& rng) {
  CMatrix h(rows, cols);
  for (Eigen::Index c = 0; c < h.cols(); ++c)
    for (Eigen::Index r = 0; r < h.rows(); ++r) h(r, c) = rng.complex_normal();
  return h;
}

// Rayleigh block-fading realization for every user in the system, users in
// index order. Deterministic given the rng state.
inline std::vector<ChannelVector> draw_channels(const SystemConfig& config, Rng& rng) {
  std::vector<ChannelVector> out;
  out.reserve(static_cast<std::size_t>(config.num_users()));
  for (int i = 0; i < config.num_users(); ++i) {
    CVector h(config.antennas());
    for (Eigen::Index r = 0; r < h.size(); ++r) h(r) = rng.complex_normal();
    out.emplace_back(std::move(h));
  }
  return out;
}

// (max_i g_i, min_i g_i) over per-antenna squared magnitudes g_i = |h_i|^2/L.
inline std::pair<Real, Real> concentration_stats(std::span<const ChannelVector> channels) {
  if (channels.empty()) throw std::invalid_argument("concentration_stats: empty channel list");
  Real max_g = channels[0].magnitude_per_antenna;
  Real min_g = max_g;
  for (const ChannelVector& c : channels) {
    max_g = std::max(max_g, c.magnitude_per_antenna);
    min_g = std::min(min_g, c.magnitude_per_antenna);
  }
  return {max_g, min_g};
}

}  // namespace bcfb
