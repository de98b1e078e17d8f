#include "doctest.h"

#include <cmath>
#include <numeric>

#include "bcfb/beamforming.hpp"
#include "bcfb/channel.hpp"

using namespace bcfb;

namespace {

CMatrix random_unit_dirs(int L, int s, Rng& rng) {
  CMatrix dirs = draw_channel_matrix(L, s, rng);
  dirs.colwise().normalize();
  return dirs;
}

std::vector<int> iota_users(int s) {
  std::vector<int> users(static_cast<std::size_t>(s));
  std::iota(users.begin(), users.end(), 0);
  return users;
}

}  // namespace

TEST_CASE("single on-user beam equals its quantized direction") {
  Rng rng(1);
  CMatrix dir = random_unit_dirs(4, 1, rng);
  TransmissionPlan plan = zero_forcing_beams(dir, {7});
  CHECK(plan.on_users == std::vector<int>{7});
  CHECK((plan.beams.col(0) - dir.col(0)).norm() <= 1e-12);
}

TEST_CASE("two-user zero forcing matches hand Gram-Schmidt") {
  CMatrix dirs(2, 2);
  dirs.col(0) << Complex{1.0, 0.0}, Complex{0.0, 0.0};
  dirs.col(1) << Complex{1.0 / std::sqrt(2.0), 0.0}, Complex{1.0 / std::sqrt(2.0), 0.0};
  TransmissionPlan plan = zero_forcing_beams(dirs, {0, 1});

  // q_0 = (1,-1)/sqrt(2) up to a global phase
  CVector expect(2);
  expect << Complex{1.0 / std::sqrt(2.0), 0.0}, Complex{-1.0 / std::sqrt(2.0), 0.0};
  CHECK(std::abs(std::abs(plan.beams.col(0).dot(expect)) - 1.0) <= 1e-10);
  CHECK(std::abs(plan.beams.col(0).dot(dirs.col(1))) <= 1e-8);
  CHECK(std::abs(plan.beams.col(1).dot(dirs.col(0))) <= 1e-8);
}

TEST_CASE("orthonormal quantized directions are kept as beams") {
  Rng rng(2);
  CMatrix g = draw_channel_matrix(4, 4, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix dirs = qr.householderQ() * CMatrix::Identity(4, 3);
  TransmissionPlan plan = zero_forcing_beams(dirs, iota_users(3));
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(std::abs(plan.beams.col(j).dot(dirs.col(j))) - 1.0) <= 1e-10);
}

TEST_CASE("degenerate geometry and infeasible sizes are rejected") {
  CMatrix dirs(2, 2);
  dirs.col(0) << Complex{1.0, 0.0}, Complex{0.0, 0.0};
  dirs.col(1) = dirs.col(0) * std::polar(1.0, 1.3);  // same line
  try {
    zero_forcing_beams(dirs, {4, 9});
    FAIL("expected DegenerateGeometryError");
  } catch (const DegenerateGeometryError& e) {
    CHECK((e.user() == 4 || e.user() == 9));
  }

  Rng rng(3);
  CHECK_THROWS_AS(zero_forcing_beams(random_unit_dirs(2, 3, rng), iota_users(3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(zero_forcing_beams(random_unit_dirs(2, 2, rng), {1, 1}),
                  std::invalid_argument);
}

TEST_CASE("zero-forcing invariants under fuzzing") {
  Rng rng(4);
  Real worst_cross = 0.0;
  Real worst_norm = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int L = 2 << rng.below(3);  // 2, 4, 8
    const int s = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
    CMatrix dirs = random_unit_dirs(L, s, rng);
    TransmissionPlan plan = zero_forcing_beams(dirs, iota_users(s));
    for (int a = 0; a < s; ++a) {
      worst_norm = std::max(worst_norm, std::abs(plan.beams.col(a).norm() - 1.0));
      for (int b = 0; b < s; ++b)
        if (a != b)
          worst_cross = std::max(worst_cross, std::abs(plan.beams.col(a).dot(dirs.col(b))));
    }
  }
  CHECK(worst_cross <= 1e-8);
  CHECK(worst_norm <= 1e-10);
}

TEST_CASE("beams are phase covariant") {
  Rng rng(5);
  CMatrix dirs = random_unit_dirs(4, 3, rng);
  CVector h = draw_channel_matrix(4, 1, rng).col(0);
  TransmissionPlan base = zero_forcing_beams(dirs, iota_users(3));

  CMatrix rotated = dirs;
  rotated.col(1) *= std::polar(1.0, 2.1);
  TransmissionPlan moved = zero_forcing_beams(rotated, iota_users(3));
  for (int j = 0; j < 3; ++j) {
    Real a = std::norm(h.dot(base.beams.col(j)));
    Real b = std::norm(h.dot(moved.beams.col(j)));
    CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, a));
  }
}

TEST_CASE("link metrics") {
  // gamma = 0 silences the link
  Rng rng(6);
  CMatrix dirs = random_unit_dirs(2, 2, rng);
  TransmissionPlan plan = zero_forcing_beams(dirs, {0, 1});
  plan.per_user_power = 1.0;
  ChannelVector ch{draw_channel_matrix(2, 1, rng).col(0)};
  LinkMetrics silent = link_metrics(ch, 0.0, plan, 0);
  CHECK(silent.p_sig == 0.0);
  CHECK(silent.p_int == 0.0);
  CHECK(silent.rate_bits == 0.0);

  // L=2, rho=2, s=2, gamma=1, h=(1,0), q_user=(1,0), q_other=(0,1)
  CMatrix basis = CMatrix::Identity(2, 2);
  TransmissionPlan manual;
  manual.on_users = {0, 1};
  manual.beams = basis;
  manual.quantized_dirs = basis;
  manual.per_user_power = 1.0;  // rho/s = 2/2
  CVector e1(2);
  e1 << Complex{1.0, 0.0}, Complex{0.0, 0.0};
  LinkMetrics lm = link_metrics(ChannelVector{e1}, 1.0, manual, 0);
  CHECK(lm.p_sig == doctest::Approx(1.0));
  CHECK(lm.p_int == doctest::Approx(0.0));
  CHECK(lm.rate_bits == doctest::Approx(1.0));

  CHECK_THROWS_AS(link_metrics(ChannelVector{e1}, 1.0, manual, 5), std::invalid_argument);
}

TEST_CASE("perfect feedback leaves no interference at s=1") {
  Rng rng(7);
  SystemConfig config(4, 10.0, std::vector<UserProfile>(1, {2.0, 0}));
  std::vector<ChannelVector> channels = draw_channels(config, rng);
  CMatrix dirs(4, 1);
  dirs.col(0) = channels[0].direction;
  TransmissionPlan plan = zero_forcing_beams(dirs, {0});
  plan.per_user_power = config.rho();
  LinkMetrics lm = link_metrics(channels[0], 2.0, plan, 0);
  CHECK(lm.p_sig == doctest::Approx(10.0 * 2.0 * channels[0].h.squaredNorm()).epsilon(1e-10));
  CHECK(lm.p_int == 0.0);
}

TEST_CASE("sum_rate aggregates per-user rates") {
  TransmissionPlan empty;
  CHECK(sum_rate({}, {}, empty) == 0.0);

  Rng rng(8);
  std::vector<ChannelVector> channels;
  channels.emplace_back(draw_channel_matrix(2, 1, rng).col(0));
  std::vector<Real> gammas = {1.5};
  CMatrix dirs(2, 1);
  dirs.col(0) = channels[0].direction;
  TransmissionPlan plan = zero_forcing_beams(dirs, {0});
  plan.per_user_power = 4.0;
  CHECK(sum_rate(channels, gammas, plan) ==
        doctest::Approx(link_metrics(channels[0], 1.5, plan, 0).rate_bits));

  // two symmetric users: identical channels and beams double the single rate
  CMatrix basis = CMatrix::Identity(2, 2);
  TransmissionPlan sym;
  sym.on_users = {0, 1};
  sym.beams = basis;
  sym.quantized_dirs = basis;
  sym.per_user_power = 3.0;
  CVector flat(2);
  flat << Complex{1.0, 0.0}, Complex{1.0, 0.0};
  std::vector<ChannelVector> twins{ChannelVector{flat}, ChannelVector{flat}};
  std::vector<Real> ones = {1.0, 1.0};
  Real both = sum_rate(twins, ones, sym);
  Real solo = link_metrics(twins[0], 1.0, sym, 0).rate_bits;
  CHECK(both == doctest::Approx(2.0 * solo));
}
