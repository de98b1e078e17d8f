#include "doctest.h"

#include <cmath>

#include "bcfb/channel.hpp"

using namespace bcfb;

namespace {

SystemConfig homogeneous(int L, int m, Real rho = 1.0) {
  return SystemConfig(L, rho, std::vector<UserProfile>(static_cast<std::size_t>(m), {1.0, 0}));
}

}  // namespace

TEST_CASE("config validation and zero-gamma padding") {
  CHECK_THROWS_AS(SystemConfig(0, 1.0, {{1.0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(SystemConfig(2, -1.0, {{1.0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(SystemConfig(2, 1.0, {{-0.5, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(SystemConfig(2, 1.0, {{1.0, -3}}), std::invalid_argument);
  CHECK_THROWS_AS(SystemConfig(2, 1.0, {}), std::invalid_argument);

  SystemConfig padded(4, 1.0, {{2.0, 5}});
  CHECK(padded.num_users() == 4);
  CHECK(padded.original_users() == 1);
  CHECK(padded.user(0).gamma == 2.0);
  for (int i = 1; i < 4; ++i) {
    CHECK(padded.user(i).gamma == 0.0);
    CHECK(padded.user(i).rate_bits == 0);
  }

  CHECK(SystemConfig::from_db(2, 20.0, {{1.0, 0}, {1.0, 0}}).rho() == doctest::Approx(100.0));
}

TEST_CASE("draw_channels is deterministic and seed-sensitive") {
  SystemConfig config = homogeneous(4, 3);
  Rng a = Rng::stream(42, {1, 2});
  Rng b = Rng::stream(42, {1, 2});
  Rng c = Rng::stream(42, {1, 3});
  auto ca = draw_channels(config, a);
  auto cb = draw_channels(config, b);
  auto cc = draw_channels(config, c);
  REQUIRE(ca.size() == 4);  // m = 3 padded to L = 4 with zero-gamma users
  for (std::size_t i = 0; i < ca.size(); ++i) {
    CHECK((ca[i].h - cb[i].h).norm() == 0.0);
  }
  CHECK((ca[0].h - cc[0].h).norm() > 0.0);
}

TEST_CASE("single-antenna draws have unit mean power") {
  SystemConfig config = homogeneous(1, 1);
  Rng rng(7);
  const int n = 10000;
  Real sum = 0.0;
  for (int t = 0; t < n; ++t) sum += draw_channels(config, rng)[0].h.squaredNorm();
  Real mean = sum / n;
  // E|h|^2 = 1, var |h|^2 = 1 -> 3 standard errors
  CHECK(std::abs(mean - 1.0) <= 3.0 / std::sqrt(static_cast<Real>(n)));
}

TEST_CASE("mean per-antenna magnitude is 1 (L=4, m=4, 1e5 draws)") {
  SystemConfig config = homogeneous(4, 4);
  Rng rng(11);
  const int n = 100000;
  Real sum = 0.0;
  for (int t = 0; t < n; ++t)
    for (const ChannelVector& c : draw_channels(config, rng)) sum += c.magnitude_per_antenna;
  CHECK(sum / (4.0 * n) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("direction decomposition invariants") {
  SystemConfig config = homogeneous(4, 4);
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    for (const ChannelVector& c : draw_channels(config, rng)) {
      CHECK(std::abs(c.direction.norm() - 1.0) <= 1e-12);
      CHECK((c.h - c.h.norm() * c.direction).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(c.magnitude_per_antenna >= 0.0);
    }
  }
}

TEST_CASE("concentration_stats on hand-built channels") {
  CHECK_THROWS_AS(concentration_stats({}), std::invalid_argument);

  const int L = 4;
  ChannelVector ones{CVector::Constant(L, Complex{1.0, 0.0})};
  auto [max1, min1] = concentration_stats(std::vector<ChannelVector>{ones});
  CHECK(max1 == doctest::Approx(1.0));
  CHECK(min1 == doctest::Approx(1.0));

  CVector e1 = CVector::Zero(L);
  e1(0) = Complex{1.0, 0.0};
  std::vector<ChannelVector> pair{ChannelVector{e1}, ones};
  auto [max2, min2] = concentration_stats(pair);
  CHECK(max2 == doctest::Approx(1.0));
  CHECK(min2 == doctest::Approx(0.25));
}
