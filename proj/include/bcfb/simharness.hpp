#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bcfb/quantization.hpp"
#include "bcfb/types.hpp"

namespace bcfb {

enum class SchemeKind { MainOrder, FixedS, Oracle, RandomBeamsStat };

// Scheme tag as it appears in config files and result rows: "main_order",
// "fixed_s(k)", "oracle", "random_beams_stat".
struct SchemeTag {
  SchemeKind kind = SchemeKind::MainOrder;
  int fixed_s = 0;

  std::string str() const;
  static SchemeTag parse(const std::string& text);
  friend bool operator==(const SchemeTag&, const SchemeTag&) = default;
};

struct ExperimentSpec {
  int L = 0;
  int m = 0;
  std::vector<Real> snr_grid_db;
  std::vector<Real> gamma;      // per user, size m
  std::vector<int> rate_bits;   // per user, size m
  std::vector<SchemeTag> schemes;
  long trials = 1000;           // fading blocks per (snr, scheme, redraw)
  int codebook_redraws = 10;
  std::uint64_t master_seed = 0;

  void validate() const;
  SystemConfig config_at(Real snr_db) const;
};

struct ResultRow {
  Real snr_db = 0.0;
  std::string scheme;
  int s_used = 0;
  Real mc_throughput_bits = 0.0;
  Real mc_stderr = 0.0;
  Real theory_i_main_bits = 0.0;
  long trials_effective = 0;
};

struct BlockOutcome {
  Real sum_rate = 0.0;
  bool degenerate = false;
};

// One fading block of the scheme: draw every user's channel, quantize the
// on-users' directions with their codebooks, build zero-forcing beams from
// the quantized directions, and evaluate the true-channel sum rate at
// per-user power rho/s. Degenerate beamforming geometry flags the block
// instead of throwing. `books` is indexed by user id; only on-users' books
// are consulted.
BlockOutcome run_block(const SystemConfig& config, const std::vector<int>& on_users,
                       const std::vector<Codebook>& books, Rng& rng);

// Full sweep: one row per (snr, scheme), in config order. Deterministic given
// master_seed, independent of the parallelism degree.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

inline constexpr const char* kCsvHeader =
    "snr_db,scheme,s_used,mc_throughput_bits,mc_stderr,theory_i_main_bits,trials_effective";

void write_csv(std::span<const ResultRow> rows, std::ostream& out);
void write_json(std::span<const ResultRow> rows, std::ostream& out);

}  // namespace bcfb
