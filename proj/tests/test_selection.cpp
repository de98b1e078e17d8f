#include "doctest.h"

#include <cmath>
#include <numeric>
#include <set>

#include "bcfb/selection.hpp"

using namespace bcfb;

TEST_CASE("eta formula") {
  CHECK(eta(3.0, 2.0, 0.0) == doctest::Approx(6.0));
  CHECK(eta(3.0, 2.0, 1.0) == doctest::Approx(0.0));
  CHECK(eta(10.0, 1.0, 0.5) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK_THROWS_AS(eta(1.0, 1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(eta(-1.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("select_on_users_by_eta ordering and ties") {
  Rng tie(1);
  std::vector<EtaValue> etas = {{0, 3.0}, {1, 2.0}, {2, 1.0}};
  CHECK(select_on_users_by_eta(etas, 2, tie) == std::vector<int>{0, 1});
  CHECK(select_on_users_by_eta(etas, 3, tie) == std::vector<int>{0, 1, 2});
  CHECK_THROWS_AS(select_on_users_by_eta(etas, 4, tie), std::invalid_argument);
  CHECK_THROWS_AS(select_on_users_by_eta(etas, 0, tie), std::invalid_argument);

  // boundary tie: eta > boundary always kept
  std::vector<EtaValue> mixed = {{0, 5.0}, {1, 2.0}, {2, 2.0}, {3, 2.0}};
  for (int t = 0; t < 50; ++t) {
    Rng rng = Rng::stream(9, {static_cast<std::uint64_t>(t)});
    std::vector<int> on = select_on_users_by_eta(mixed, 2, rng);
    REQUIRE(on.size() == 2);
    CHECK(on[0] == 0);
    CHECK(on[1] >= 1);
  }
}

TEST_CASE("expected_powers closed forms") {
  ExpectedPowers single = expected_powers(4, 1, 2.0, 3.0, 0.25);
  CHECK(single.signal == doctest::Approx(2.0 * 3.0 * 4.0 * 0.75));
  CHECK(single.interference == 0.0);

  ExpectedPowers overload = expected_powers(4, 5, 1.0, 2.0, 0.3);
  CHECK(overload.signal == 0.0);
  CHECK(overload.interference ==
        doctest::Approx(1.0 * 2.0 * (4.0 / 5.0) * (4.0 / 3.0) * 0.3));

  ExpectedPowers hand = expected_powers(4, 2, 1.0, 1.0, 0.1);
  CHECK(hand.signal == doctest::Approx(1.366667).epsilon(1e-6));
  CHECK(hand.interference == doctest::Approx(0.066667).epsilon(1e-5));

  CHECK_THROWS_AS(expected_powers(1, 2, 1.0, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(expected_powers(4, 0, 1.0, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(expected_powers(4, 2, 1.0, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("i_main closed form") {
  CHECK(i_main(3.0, 0.0) == doctest::Approx(2.0));
  CHECK(i_main(0.0, 17.0) == doctest::Approx(0.0));
  CHECK(i_main(1.366667, 0.066667) == doctest::Approx(1.1898245).epsilon(1e-6));
}

TEST_CASE("choose_s_main reproduces the reported optima") {
  // R = 6: one on-user is optimal at 15 and 20 dB
  for (Real snr : {15.0, 20.0}) {
    SystemConfig config = SystemConfig::from_db(4, snr, std::vector<UserProfile>(4, {1.0, 6}));
    CHECK(choose_s_main(config).s_star == 1);
  }
  // R = 12: three on-users are optimal in the same range
  for (Real snr : {15.0, 18.0, 20.0}) {
    SystemConfig config = SystemConfig::from_db(4, snr, std::vector<UserProfile>(4, {1.0, 12}));
    CHECK(choose_s_main(config).s_star == 3);
  }
}

TEST_CASE("choose_s_main report is internally consistent") {
  SystemConfig config = SystemConfig::from_db(4, 10.0, {{2.0, 6}, {1.0, 6}, {0.5, 6}, {0.1, 6}});
  SchemeReport report = choose_s_main(config);
  REQUIRE(report.s_star >= 1);
  REQUIRE(report.on_users.size() == static_cast<std::size_t>(report.s_star));
  REQUIRE(report.i_main_per_user.size() == report.on_users.size());
  Real total = 0.0;
  for (Real v : report.i_main_per_user) total += v;
  CHECK(report.i_main_total == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("oracle_on_users") {
  Rng rng(12);
  SystemConfig config(4, 10.0, std::vector<UserProfile>(4, {1.0, 6}));
  CMatrix dirs = draw_channel_matrix(4, 4, rng);
  dirs.colwise().normalize();

  // s = m: the unique full subset
  CHECK(oracle_on_users(dirs, config, 4) == std::vector<int>{0, 1, 2, 3});

  // s = 1 with equal gammas: |p^H q| = 1 for every user, so any single user ties
  std::vector<int> solo = oracle_on_users(dirs, config, 1);
  REQUIRE(solo.size() == 1);
  CHECK(solo[0] >= 0);
  CHECK(solo[0] < 4);

  // m = 3, s = 2: matches an independent re-enumeration
  SystemConfig small(4, 7.0, {{1.3, 6}, {0.8, 6}, {2.0, 6}});
  CMatrix three = draw_channel_matrix(4, 4, rng);
  three.colwise().normalize();
  std::vector<int> got = oracle_on_users(three, small, 2);

  Real best = -1.0;
  std::vector<int> want;
  const std::vector<std::vector<int>> subsets = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (const auto& subset : subsets) {
    CMatrix cols(4, 2);
    cols.col(0) = three.col(subset[0]);
    cols.col(1) = three.col(subset[1]);
    TransmissionPlan plan = zero_forcing_beams(cols, subset);
    Real rate = 0.0;
    for (int j = 0; j < 2; ++j) {
      Real gain = small.user(subset[static_cast<std::size_t>(j)]).gamma * small.rho() / 2.0;
      Real sig = gain * std::norm(plan.beams.col(j).dot(cols.col(j)));
      Real other = gain * std::norm(plan.beams.col(1 - j).dot(cols.col(j)));
      rate += std::log2(1.0 + sig / (1.0 + other));
    }
    if (rate > best) {
      best = rate;
      want = subset;
    }
  }
  CHECK(got == want);

  CHECK_THROWS_AS(oracle_on_users(dirs, config, 5), std::invalid_argument);
}

TEST_CASE("random beams statistic") {
  Rng rng(13);
  const int L = 4;
  CMatrix beams = random_orthonormal_beams(L, rng);
  CMatrix gram = beams.adjoint() * beams - CMatrix::Identity(L, L);
  CHECK(gram.cwiseAbs().maxCoeff() <= 1e-12);

  // h = b_1 * c with |c| = L -> statistic 1
  std::vector<ChannelVector> aligned;
  aligned.emplace_back(CVector(Complex{0.0, static_cast<Real>(L)} * beams.col(0)));
  CHECK(random_beams_statistic(aligned, beams) == doctest::Approx(1.0).epsilon(1e-12));

  // h = b_1 -> statistic 1/L
  std::vector<ChannelVector> unit;
  unit.emplace_back(CVector(beams.col(0)));
  CHECK(random_beams_statistic(unit, beams) == doctest::Approx(1.0 / L).epsilon(1e-12));

  CMatrix skewed = beams;
  skewed.col(0) *= 2.0;
  CHECK_THROWS_AS(random_beams_statistic(unit, skewed), std::invalid_argument);
}

TEST_CASE("fairness schedule covers everyone once") {
  // m = 1
  SystemConfig solo(2, 5.0, {{1.0, 4}});
  auto rounds = fairness_schedule(solo);
  REQUIRE(rounds.size() == 1);
  CHECK(rounds[0].second == std::vector<int>{0});

  // identical users partition into ceil(m/s) rounds
  SystemConfig same(4, db_to_linear(10.0), std::vector<UserProfile>(6, {1.0, 6}));
  int s1 = choose_s_main(same).s_star;
  auto cycle = fairness_schedule(same);
  std::set<int> seen;
  std::size_t total = 0;
  for (const auto& [round, on] : cycle) {
    total += on.size();
    seen.insert(on.begin(), on.end());
    CHECK(static_cast<int>(on.size()) <= s1);
  }
  CHECK(total == 6);
  CHECK(seen.size() == 6);

  // descending gammas: round 1 serves the largest-gamma prefix
  SystemConfig sloped(4, db_to_linear(10.0), {{4.0, 6}, {3.0, 6}, {2.0, 6}, {1.0, 6}});
  SchemeReport first = choose_s_main(sloped);
  auto sched = fairness_schedule(sloped);
  std::vector<int> prefix(static_cast<std::size_t>(first.s_star));
  std::iota(prefix.begin(), prefix.end(), 0);
  CHECK(sched[0].second == prefix);
  std::set<int> all;
  for (const auto& [round, on] : sched) all.insert(on.begin(), on.end());
  CHECK(all.size() == 4);
}
