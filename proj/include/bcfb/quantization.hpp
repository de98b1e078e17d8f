#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bcfb/channel.hpp"
#include "bcfb/rng.hpp"
#include "bcfb/types.hpp"
#include "bcfb/util.hpp"

namespace bcfb {

// Direction codebook: 2^rate_bits unit-norm columns of dimension L.
class Codebook {
 public:
  Codebook(CMatrix entries, int rate_bits) : entries_(std::move(entries)), rate_bits_(rate_bits) {
    if (rate_bits_ < 0) throw std::invalid_argument("codebook rate must be >= 0");
    if (entries_.cols() != (Eigen::Index{1} << rate_bits_))
      throw std::invalid_argument("codebook size must be exactly 2^rate");
  }

  const CMatrix& entries() const { return entries_; }
  int rate_bits() const { return rate_bits_; }
  int dimension() const { return static_cast<int>(entries_.rows()); }
  Eigen::Index size() const { return entries_.cols(); }

 private:
  CMatrix entries_;
  int rate_bits_;
};

inline constexpr std::uint64_t kDefaultCodebookCap = std::uint64_t{1} << 24;

// 2^R independent isotropic unit vectors (normalized complex Gaussians).
inline Codebook random_codebook(int L, int R, Rng& rng,
                                std::uint64_t max_entries = kDefaultCodebookCap) {
  if (L < 1) throw std::invalid_argument("codebook dimension must be >= 1");
  if (R < 0) throw std::invalid_argument("codebook rate must be >= 0");
  if (R >= 63 || (std::uint64_t{1} << R) > max_entries)
    throw std::length_error("codebook size 2^" + std::to_string(R) + " exceeds entry cap");
  CMatrix entries = draw_channel_matrix(L, static_cast<int>(std::uint64_t{1} << R), rng);
  entries.colwise().normalize();
  return Codebook(std::move(entries), R);
}

struct QuantizationResult {
  CVector codeword;
  Eigen::Index index = 0;
  Real alignment = 0.0;     // |v^H p|^2
  Real chordal_loss = 0.0;  // 1 - alignment
};

// Index of the codeword maximizing |v^H p|; ties go to the lowest index.
inline Eigen::Index quantize_index(const CVector& v, const Codebook& book) {
  if (v.size() != book.entries().rows())
    throw std::invalid_argument("quantize: direction/codebook dimension mismatch");
  Real norm = v.norm();
  if (std::abs(norm - 1.0) > 1e-9)
    throw std::invalid_argument("quantize: direction must be unit norm");
  RVector scores = (book.entries().adjoint() * v).cwiseAbs2();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i)
    if (scores(i) > scores(best)) best = i;
  return best;
}

inline QuantizationResult quantize(const CVector& v, const Codebook& book) {
  Eigen::Index best = quantize_index(v, book);
  Real alignment = std::norm(book.entries().col(best).dot(v));
  alignment = std::min(alignment, 1.0);
  return {book.entries().col(best), best, alignment, 1.0 - alignment};
}

// Monte Carlo estimate of D(B) = 1 - E[max_p |v^H p|^2] over isotropic v.
// Trials are processed in fixed-size chunks with per-chunk derived streams,
// so the estimate is independent of the parallel execution order.
inline Real empirical_distortion(const Codebook& book, long trials, Rng& rng) {
  if (trials < 1) throw std::invalid_argument("empirical_distortion: trials must be >= 1");
  constexpr long kChunk = 256;
  const long num_chunks = (trials + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> chunk_seeds(static_cast<std::size_t>(num_chunks));
  for (auto& s : chunk_seeds) s = rng.next_u64();

  const int L = book.dimension();
  auto chunk_sum = [&](std::size_t c) -> double {
    Rng local(chunk_seeds[c]);
    long count = std::min<long>(kChunk, trials - static_cast<long>(c) * kChunk);
    CMatrix dirs = draw_channel_matrix(L, static_cast<int>(count), local);
    dirs.colwise().normalize();
    RVector best = (book.entries().adjoint() * dirs).cwiseAbs2().colwise().maxCoeff();
    CompensatedSum sum;
    for (Eigen::Index i = 0; i < best.size(); ++i) sum.add(1.0 - std::min(best(i), 1.0));
    return sum.value();
  };

  std::vector<double> sums =
      parallel_map<double>(static_cast<std::size_t>(num_chunks), chunk_sum);
  CompensatedSum total;
  for (double s : sums) total.add(s);
  return total.value() / static_cast<Real>(trials);
}

struct DistortionBounds {
  Real lower = 0.0;
  Real upper = 0.0;
};

// Main-order terms of the distortion-rate sandwich:
//   lower = ((L-1)/L) 2^{-R/(L-1)},  upper = (Gamma(1/(L-1))/(L-1)) 2^{-R/(L-1)}.
inline DistortionBounds distortion_rate_bounds(int L, int R) {
  if (L < 2) throw std::invalid_argument("distortion_rate_bounds: requires L >= 2");
  if (R < 0) throw std::invalid_argument("distortion_rate_bounds: requires R >= 0");
  const Real lm1 = static_cast<Real>(L - 1);
  const Real decay = std::exp2(-static_cast<Real>(R) / lm1);
  return {lm1 / static_cast<Real>(L) * decay, std::tgamma(1.0 / lm1) / lm1 * decay};
}

// Limiting distortion 2^{-rbar} as L, R grow linearly with R/L -> rbar.
inline Real asymptotic_distortion(Real rbar) {
  if (!(rbar >= 0.0)) throw std::invalid_argument("asymptotic_distortion: rbar must be >= 0");
  return std::exp2(-rbar);
}

// Finite-dimensional distortion estimate: the main-order term of the random
// codebook average, clamped to [0,1]. Dimension 1 carries no direction
// information beyond phase, so its distortion is 0.
inline Real estimate_distortion(int L, int R) {
  if (L < 1) throw std::invalid_argument("estimate_distortion: requires L >= 1");
  if (R < 0) throw std::invalid_argument("estimate_distortion: requires R >= 0");
  if (L == 1) return 0.0;
  return std::min(distortion_rate_bounds(L, R).upper, 1.0);
}

}  // namespace bcfb
