#include "bcfb/simharness.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "bcfb/beamforming.hpp"
#include "bcfb/channel.hpp"
#include "bcfb/selection.hpp"
#include "bcfb/util.hpp"

namespace bcfb {
namespace {

constexpr long kChunkBlocks = 256;

// Counter-scheme stream purposes; combined with (point, redraw, chunk, user)
// so every unit of work owns an independent stream.
enum StreamPurpose : std::uint64_t {
  kCodebookStream = 1,
  kChannelStream = 2,
  kBeamsStream = 3,
};

struct PointSetup {
  Real snr_db = 0.0;
  SchemeTag tag;
  std::vector<int> on_users;  // fixed on-set; empty for oracle / beams-stat
  int s_used = 0;
  Real theory = 0.0;
};

struct UnitStats {
  double sum = 0.0;       // compensated block-value sum
  long effective = 0;     // blocks included
  long total = 0;         // blocks attempted
};

// Per-chunk channel draw for one user: independent stream per
// (redraw, chunk, user). The point index is not part of the key, so schemes
// and SNR points share fading blocks (common random numbers): every row is
// still an unbiased estimate, and cross-scheme comparisons are paired.
CMatrix chunk_channels(const ExperimentSpec& spec, int redraw, long chunk, int user, int L,
                       long count) {
  Rng rng = Rng::stream(spec.master_seed,
                        {kChannelStream, static_cast<std::uint64_t>(redraw),
                         static_cast<std::uint64_t>(chunk), static_cast<std::uint64_t>(user)});
  return draw_channel_matrix(L, static_cast<int>(count), rng);
}

// Batched quantization: codeword index per column of `channels`.
std::vector<Eigen::Index> quantize_columns(const Codebook& book, const CMatrix& channels) {
  CMatrix dirs = channels;
  dirs.colwise().normalize();
  Eigen::MatrixXd scores = (book.entries().adjoint() * dirs).cwiseAbs2();
  std::vector<Eigen::Index> out(static_cast<std::size_t>(channels.cols()));
  for (Eigen::Index c = 0; c < scores.cols(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < scores.rows(); ++r)
      if (scores(r, c) > scores(best, c)) best = r;
    out[static_cast<std::size_t>(c)] = best;
  }
  return out;
}

// Sum rate of one block given true channels (columns of `truth` follow
// `users`) and the already-built plan.
Real block_sum_rate(const SystemConfig& config, const TransmissionPlan& plan,
                    const CMatrix& truth, const std::vector<int>& users) {
  CMatrix cross = plan.beams.adjoint() * truth;  // (s_beams x s_users), here square
  Real total = 0.0;
  for (Eigen::Index j = 0; j < cross.cols(); ++j) {
    const Real gain = plan.per_user_power * config.user(users[static_cast<std::size_t>(j)]).gamma;
    const Real own = std::norm(cross(j, j));
    const Real all = cross.col(j).squaredNorm();
    const Real p_sig = gain * own;
    const Real p_int = gain * (all - own);
    total += std::log2(1.0 + p_sig / (1.0 + p_int));
  }
  return total;
}

UnitStats run_fixed_set_unit(const ExperimentSpec& spec, const SystemConfig& config,
                             const PointSetup& setup, int redraw) {
  const int L = config.antennas();
  const int s = static_cast<int>(setup.on_users.size());
  std::vector<Codebook> books;
  books.reserve(setup.on_users.size());
  for (int user : setup.on_users) {
    Rng rng = Rng::stream(spec.master_seed,
                          {kCodebookStream, static_cast<std::uint64_t>(redraw),
                           static_cast<std::uint64_t>(user)});
    books.push_back(random_codebook(L, config.user(user).rate_bits, rng));
  }

  UnitStats stats;
  CompensatedSum sum;
  const long chunks = (spec.trials + kChunkBlocks - 1) / kChunkBlocks;
  CMatrix quantized(L, s);
  CMatrix truth(L, s);
  for (long c = 0; c < chunks; ++c) {
    const long count = std::min(kChunkBlocks, spec.trials - c * kChunkBlocks);
    std::vector<CMatrix> channels(static_cast<std::size_t>(s));
    std::vector<std::vector<Eigen::Index>> indices(static_cast<std::size_t>(s));
    for (int j = 0; j < s; ++j) {
      channels[j] = chunk_channels(spec, redraw, c, setup.on_users[j], L, count);
      indices[j] = quantize_columns(books[j], channels[j]);
    }
    for (long b = 0; b < count; ++b) {
      for (int j = 0; j < s; ++j) {
        quantized.col(j) = books[j].entries().col(indices[j][static_cast<std::size_t>(b)]);
        truth.col(j) = channels[j].col(b);
      }
      ++stats.total;
      try {
        TransmissionPlan plan = zero_forcing_beams(quantized, setup.on_users);
        plan.per_user_power = config.rho() / static_cast<Real>(s);
        sum.add(block_sum_rate(config, plan, truth, setup.on_users));
        ++stats.effective;
      } catch (const DegenerateGeometryError&) {
      }
    }
  }
  stats.sum = sum.value();
  return stats;
}

UnitStats run_oracle_unit(const ExperimentSpec& spec, const SystemConfig& config,
                          const PointSetup& setup, int redraw) {
  const int L = config.antennas();
  const int m = config.num_users();
  std::vector<Codebook> books;
  books.reserve(static_cast<std::size_t>(m));
  for (int user = 0; user < m; ++user) {
    Rng rng = Rng::stream(spec.master_seed,
                          {kCodebookStream, static_cast<std::uint64_t>(redraw),
                           static_cast<std::uint64_t>(user)});
    books.push_back(random_codebook(L, config.user(user).rate_bits, rng));
  }

  UnitStats stats;
  CompensatedSum sum;
  const long chunks = (spec.trials + kChunkBlocks - 1) / kChunkBlocks;
  CMatrix quantized(L, m);
  for (long c = 0; c < chunks; ++c) {
    const long count = std::min(kChunkBlocks, spec.trials - c * kChunkBlocks);
    std::vector<CMatrix> channels(static_cast<std::size_t>(m));
    std::vector<std::vector<Eigen::Index>> indices(static_cast<std::size_t>(m));
    for (int u = 0; u < m; ++u) {
      channels[u] = chunk_channels(spec, redraw, c, u, L, count);
      indices[u] = quantize_columns(books[u], channels[u]);
    }
    for (long b = 0; b < count; ++b) {
      for (int u = 0; u < m; ++u)
        quantized.col(u) = books[u].entries().col(indices[u][static_cast<std::size_t>(b)]);
      ++stats.total;
      try {
        std::vector<int> chosen = oracle_on_users(quantized, config, setup.s_used);
        CMatrix dirs(L, setup.s_used);
        CMatrix truth(L, setup.s_used);
        for (int j = 0; j < setup.s_used; ++j) {
          dirs.col(j) = quantized.col(chosen[static_cast<std::size_t>(j)]);
          truth.col(j) = channels[chosen[static_cast<std::size_t>(j)]].col(b);
        }
        TransmissionPlan plan = zero_forcing_beams(dirs, chosen);
        plan.per_user_power = config.rho() / static_cast<Real>(setup.s_used);
        sum.add(block_sum_rate(config, plan, truth, chosen));
        ++stats.effective;
      } catch (const std::runtime_error&) {
        // degenerate block (every subset collapsed, or the chosen one did)
      }
    }
  }
  stats.sum = sum.value();
  return stats;
}

UnitStats run_beams_stat_unit(const ExperimentSpec& spec, const SystemConfig& config,
                              int redraw) {
  const int L = config.antennas();
  const int m = config.num_users();
  Rng beams_rng = Rng::stream(spec.master_seed,
                              {kBeamsStream, static_cast<std::uint64_t>(redraw)});
  CMatrix beams = random_orthonormal_beams(L, beams_rng);

  UnitStats stats;
  CompensatedSum sum;
  const long chunks = (spec.trials + kChunkBlocks - 1) / kChunkBlocks;
  for (long c = 0; c < chunks; ++c) {
    const long count = std::min(kChunkBlocks, spec.trials - c * kChunkBlocks);
    std::vector<Eigen::MatrixXd> amps(static_cast<std::size_t>(m));
    for (int u = 0; u < m; ++u) {
      CMatrix channels = chunk_channels(spec, redraw, c, u, L, count);
      amps[u] = (beams.adjoint() * channels).cwiseAbs();
    }
    for (long b = 0; b < count; ++b) {
      Real best = 0.0;
      for (int u = 0; u < m; ++u) best = std::max(best, amps[u].col(b).maxCoeff());
      sum.add(best / static_cast<Real>(L));
      ++stats.total;
      ++stats.effective;
    }
  }
  stats.sum = sum.value();
  return stats;
}

}  // namespace

std::string SchemeTag::str() const {
  switch (kind) {
    case SchemeKind::MainOrder: return "main_order";
    case SchemeKind::FixedS: return "fixed_s(" + std::to_string(fixed_s) + ")";
    case SchemeKind::Oracle: return "oracle";
    case SchemeKind::RandomBeamsStat: return "random_beams_stat";
  }
  throw std::logic_error("unreachable scheme kind");
}

SchemeTag SchemeTag::parse(const std::string& text) {
  if (text == "main_order") return {SchemeKind::MainOrder, 0};
  if (text == "oracle") return {SchemeKind::Oracle, 0};
  if (text == "random_beams_stat") return {SchemeKind::RandomBeamsStat, 0};
  int k = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "fixed_s(%d%c", &k, &tail) == 2 && tail == ')' &&
      text.back() == ')')
    return {SchemeKind::FixedS, k};
  throw std::invalid_argument("unknown scheme tag '" + text + "'");
}

void ExperimentSpec::validate() const {
  if (L < 1) throw std::invalid_argument("experiment: L must be >= 1");
  if (m < 1) throw std::invalid_argument("experiment: m must be >= 1");
  if (snr_grid_db.empty()) throw std::invalid_argument("experiment: empty SNR grid");
  if (gamma.size() != static_cast<std::size_t>(m))
    throw std::invalid_argument("experiment: gamma list must have m entries");
  if (rate_bits.size() != static_cast<std::size_t>(m))
    throw std::invalid_argument("experiment: rate_bits list must have m entries");
  if (schemes.empty()) throw std::invalid_argument("experiment: no schemes");
  if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (codebook_redraws < 1) throw std::invalid_argument("experiment: codebook_redraws must be >= 1");
  for (const SchemeTag& tag : schemes) {
    if (tag.kind == SchemeKind::FixedS && (tag.fixed_s < 1 || tag.fixed_s > L))
      throw std::invalid_argument("experiment: fixed_s(k) requires 1 <= k <= L");
    if (tag.kind == SchemeKind::Oracle && std::max(L, m) > 16)
      throw std::invalid_argument("experiment: oracle scheme capped at m <= 16");
  }
}

SystemConfig ExperimentSpec::config_at(Real snr_db) const {
  std::vector<UserProfile> users(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    users[static_cast<std::size_t>(i)] = {gamma[static_cast<std::size_t>(i)],
                                          rate_bits[static_cast<std::size_t>(i)]};
  return SystemConfig::from_db(L, snr_db, std::move(users));
}

BlockOutcome run_block(const SystemConfig& config, const std::vector<int>& on_users,
                       const std::vector<Codebook>& books, Rng& rng) {
  if (on_users.empty()) throw std::invalid_argument("run_block: empty on-set");
  std::vector<ChannelVector> channels = draw_channels(config, rng);
  const int s = static_cast<int>(on_users.size());

  CMatrix quantized(config.antennas(), s);
  for (int j = 0; j < s; ++j) {
    const int user = on_users[static_cast<std::size_t>(j)];
    quantized.col(j) =
        quantize(channels[static_cast<std::size_t>(user)].direction,
                 books.at(static_cast<std::size_t>(user)))
            .codeword;
  }
  try {
    TransmissionPlan plan = zero_forcing_beams(quantized, on_users);
    plan.per_user_power = config.rho() / static_cast<Real>(s);
    Real total = 0.0;
    for (int user : on_users)
      total += link_metrics(channels[static_cast<std::size_t>(user)], config.user(user).gamma,
                            plan, user)
                   .rate_bits;
    return {total, false};
  } catch (const DegenerateGeometryError&) {
    return {0.0, true};
  }
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  std::vector<PointSetup> points;
  for (Real snr_db : spec.snr_grid_db) {
    SystemConfig config = spec.config_at(snr_db);
    for (const SchemeTag& tag : spec.schemes) {
      PointSetup setup;
      setup.snr_db = snr_db;
      setup.tag = tag;
      switch (tag.kind) {
        case SchemeKind::MainOrder: {
          SchemeReport report = choose_s_main(config);
          setup.on_users = report.on_users;
          setup.s_used = report.s_star;
          setup.theory = report.i_main_total;
          break;
        }
        case SchemeKind::FixedS: {
          SchemeReport report = detail::select_for_s(config, tag.fixed_s);
          setup.on_users = report.on_users;
          setup.s_used = tag.fixed_s;
          setup.theory = report.i_main_total;
          break;
        }
        case SchemeKind::Oracle: {
          SchemeReport report = choose_s_main(config);
          setup.s_used = report.s_star;
          setup.theory = report.i_main_total;
          break;
        }
        case SchemeKind::RandomBeamsStat:
          setup.s_used = 0;
          setup.theory = 0.0;
          break;
      }
      points.push_back(std::move(setup));
    }
  }

  const std::size_t num_points = points.size();
  const auto redraws = static_cast<std::size_t>(spec.codebook_redraws);
  auto unit_fn = [&](std::size_t flat) -> UnitStats {
    const std::size_t point = flat / redraws;
    const int redraw = static_cast<int>(flat % redraws);
    const PointSetup& setup = points[point];
    SystemConfig config = spec.config_at(setup.snr_db);
    switch (setup.tag.kind) {
      case SchemeKind::Oracle: return run_oracle_unit(spec, config, setup, redraw);
      case SchemeKind::RandomBeamsStat: return run_beams_stat_unit(spec, config, redraw);
      default: return run_fixed_set_unit(spec, config, setup, redraw);
    }
  };
  std::vector<UnitStats> units = parallel_map<UnitStats>(num_points * redraws, unit_fn);

  std::vector<ResultRow> rows;
  rows.reserve(num_points);
  for (std::size_t p = 0; p < num_points; ++p) {
    CompensatedSum total;
    long effective = 0;
    std::vector<Real> redraw_means;
    for (std::size_t r = 0; r < redraws; ++r) {
      const UnitStats& u = units[p * redraws + r];
      total.add(u.sum);
      effective += u.effective;
      if (u.effective > 0) redraw_means.push_back(u.sum / static_cast<Real>(u.effective));
    }
    ResultRow row;
    row.snr_db = points[p].snr_db;
    row.scheme = points[p].tag.str();
    row.s_used = points[p].s_used;
    row.theory_i_main_bits = points[p].theory;
    row.trials_effective = effective;
    row.mc_throughput_bits = effective > 0 ? total.value() / static_cast<Real>(effective) : 0.0;
    if (redraw_means.size() >= 2) {
      Real mean = 0.0;
      for (Real v : redraw_means) mean += v;
      mean /= static_cast<Real>(redraw_means.size());
      Real var = 0.0;
      for (Real v : redraw_means) var += (v - mean) * (v - mean);
      var /= static_cast<Real>(redraw_means.size() - 1);
      row.mc_stderr = std::sqrt(var / static_cast<Real>(redraw_means.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string format_real(Real value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", value);
  return buf;
}

std::string format_snr(Real value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", value);
  return buf;
}

}  // namespace

void write_csv(std::span<const ResultRow> rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const ResultRow& row : rows) {
    out << format_snr(row.snr_db) << ',' << row.scheme << ',' << row.s_used << ','
        << format_real(row.mc_throughput_bits) << ',' << format_real(row.mc_stderr) << ','
        << format_real(row.theory_i_main_bits) << ',' << row.trials_effective << '\n';
  }
}

void write_json(std::span<const ResultRow> rows, std::ostream& out) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ResultRow& row : rows) {
    nlohmann::ordered_json obj;
    obj["snr_db"] = row.snr_db;
    obj["scheme"] = row.scheme;
    obj["s_used"] = row.s_used;
    obj["mc_throughput_bits"] = row.mc_throughput_bits;
    obj["mc_stderr"] = row.mc_stderr;
    obj["theory_i_main_bits"] = row.theory_i_main_bits;
    obj["trials_effective"] = row.trials_effective;
    arr.push_back(std::move(obj));
  }
  out << arr.dump(2) << '\n';
}

}  // namespace bcfb
