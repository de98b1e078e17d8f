#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "bcfb/quantization.hpp"
#include "bcfb/selection.hpp"
#include "bcfb/types.hpp"

namespace bcfb {

struct EtaAtom {
  Real eta = 0.0;
  Real mass = 0.0;
};

// Limiting distribution mu_eta of the per-user eta statistic, as a finite
// atom list sorted by descending eta. Atoms with equal eta are merged;
// masses must be positive and sum to 1 within 1e-12.
class EtaDistribution {
 public:
  explicit EtaDistribution(std::vector<EtaAtom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("EtaDistribution: no atoms");
    Real total = 0.0;
    for (const EtaAtom& a : atoms) {
      if (!(a.eta >= 0.0) || !std::isfinite(a.eta))
        throw std::invalid_argument("EtaDistribution: eta values must be finite and >= 0");
      if (!(a.mass > 0.0)) throw std::invalid_argument("EtaDistribution: masses must be > 0");
      total += a.mass;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("EtaDistribution: masses must sum to 1");
    std::sort(atoms.begin(), atoms.end(),
              [](const EtaAtom& a, const EtaAtom& b) { return a.eta > b.eta; });
    for (const EtaAtom& a : atoms) {
      if (!atoms_.empty() && atoms_.back().eta == a.eta)
        atoms_.back().mass += a.mass;
      else
        atoms_.push_back(a);
    }
  }

  std::span<const EtaAtom> atoms() const { return atoms_; }

  // Strict right tail mu((x, inf)).
  Real tail_above(Real x) const {
    Real tail = 0.0;
    for (const EtaAtom& a : atoms_) {
      if (a.eta > x)
        tail += a.mass;
      else
        break;
    }
    return tail;
  }

  Real mass_at(Real x) const {
    for (const EtaAtom& a : atoms_) {
      if (a.eta == x) return a.mass;
      if (a.eta < x) break;
    }
    return 0.0;
  }

 private:
  std::vector<EtaAtom> atoms_;
};

struct AsymptoticParams {
  Real mbar = 1.0;  // lim m/L
  Real sbar = 0.0;  // lim s/L
};

// eta_{sbar} = sup{ eta : mbar * mu((eta, inf)) > sbar }, evaluated exactly
// on the atom list. The sup over an empty set (sbar >= mbar) is defined as 0.
inline Real eta_threshold(const EtaDistribution& dist, Real mbar, Real sbar) {
  if (!(mbar > 0.0)) throw std::invalid_argument("eta_threshold: mbar must be > 0");
  if (!(sbar > 0.0)) throw std::invalid_argument("eta_threshold: sbar must be > 0");
  // Just below atom k the tail includes atoms 0..k, so the sup is the first
  // atom whose inclusive cumulative mass pushes mbar * tail above sbar.
  Real cumulative = 0.0;
  for (const EtaAtom& a : dist.atoms()) {
    cumulative += a.mass;
    if (mbar * cumulative > sbar) return a.eta;
  }
  return 0.0;
}

// Spatial efficiency (bits/sec/Hz/antenna):
//   Ibar(sbar) = mbar * sum_{eta > eta_sbar} mass * log2(1 + eta (1-sbar)/sbar)
//              + (sbar - mbar * mu((eta_sbar, inf))) * log2(1 + eta_sbar (1-sbar)/sbar),
// and 0 whenever sbar is outside (0, 1).
inline Real spatial_efficiency(const EtaDistribution& dist, Real mbar, Real sbar) {
  if (!(mbar > 0.0)) throw std::invalid_argument("spatial_efficiency: mbar must be > 0");
  if (!(sbar > 0.0 && sbar < 1.0)) return 0.0;

  const Real threshold = eta_threshold(dist, mbar, sbar);
  const Real gain = (1.0 - sbar) / sbar;
  Real total = 0.0;
  for (const EtaAtom& a : dist.atoms()) {
    if (a.eta <= threshold) break;
    total += mbar * a.mass * std::log2(1.0 + a.eta * gain);
  }
  const Real boundary_mass = sbar - mbar * dist.tail_above(threshold);
  total += boundary_mass * std::log2(1.0 + threshold * gain);
  return total;
}

struct SbarOptimum {
  Real sbar = 0.0;
  Real value = 0.0;
  // One-sided difference quotients at the optimum bracket 0 at grid
  // tolerance (the subgradient optimality condition, checked a posteriori).
  bool stationary = false;
};

// Maximizes the spatial efficiency over sbar in (0,1) by dense grid scan
// seeded with the tail-mass breakpoints sbar = mbar * mu((eta_k, inf))
// (the kinks of the objective), then local refinement around the best point.
inline SbarOptimum optimal_sbar(const EtaDistribution& dist, Real mbar, Real resolution = 1e-4) {
  if (!(resolution > 0.0 && resolution <= 1e-4))
    throw std::invalid_argument("optimal_sbar: resolution must be in (0, 1e-4]");

  auto value_at = [&](Real s) { return spatial_efficiency(dist, mbar, s); };

  Real best_s = 0.5;
  Real best_v = value_at(best_s);
  auto consider = [&](Real s) {
    if (!(s > 0.0 && s < 1.0)) return;
    Real v = value_at(s);
    if (v > best_v) {
      best_v = v;
      best_s = s;
    }
  };

  const auto n = static_cast<long>(std::ceil(1.0 / resolution));
  for (long k = 1; k < n; ++k) consider(static_cast<Real>(k) / static_cast<Real>(n));
  Real cumulative = 0.0;
  for (const EtaAtom& a : dist.atoms()) {
    cumulative += a.mass;
    const Real breakpoint = mbar * cumulative;
    consider(breakpoint - resolution);
    consider(breakpoint - 0.5 * resolution);
    consider(breakpoint);
    consider(breakpoint + 0.5 * resolution);
    consider(breakpoint + resolution);
  }

  Real half_width = resolution;
  while (half_width > 1e-10) {
    const Real lo = std::max(best_s - half_width, 0.0);
    const Real hi = std::min(best_s + half_width, 1.0);
    constexpr int kPoints = 32;
    for (int k = 0; k <= kPoints; ++k)
      consider(lo + (hi - lo) * static_cast<Real>(k) / kPoints);
    half_width *= 0.25;
  }

  SbarOptimum out;
  out.sbar = best_s;
  out.value = best_v;
  const Real step = resolution;
  const Real left = best_s - step > 0.0 ? value_at(best_s - step) : best_v;
  const Real right = best_s + step < 1.0 ? value_at(best_s + step) : best_v;
  out.stationary = best_v + 1e-12 >= left && best_v + 1e-12 >= right;
  return out;
}

struct EtaClass {
  Real fraction = 0.0;
  Real gamma = 0.0;
  Real rbar = 0.0;  // may be +inf for perfect feedback
};

// Atom list for a class-structured system: one atom per class at
// eta(rho, gamma_k, 2^{-rbar_k}); equal etas merge.
inline EtaDistribution build_eta_distribution(std::span<const EtaClass> classes, Real rho) {
  if (classes.empty()) throw std::invalid_argument("build_eta_distribution: no classes");
  std::vector<EtaAtom> atoms;
  atoms.reserve(classes.size());
  for (const EtaClass& c : classes) {
    if (!(c.fraction > 0.0)) throw std::invalid_argument("build_eta_distribution: fractions must be > 0");
    if (!(c.rbar >= 0.0)) throw std::invalid_argument("build_eta_distribution: rbar must be >= 0");
    atoms.push_back({eta(rho, c.gamma, std::exp2(-c.rbar)), c.fraction});
  }
  return EtaDistribution(std::move(atoms));
}

}  // namespace bcfb
