#include <gtest/gtest.h>

#include <random>

#include "aqaoa/schedule.hpp"
#include "oracles.hpp"

using namespace aqaoa;

TEST(Schedule, EmptyInteriorIsExactlyLinear) {
  const Schedule s;
  EXPECT_EQ(s.segments(), 1u);
  for (double x : {0.0, 0.1, 0.37, 0.5, 0.999, 1.0}) {
    EXPECT_EQ(s.eval(x), x);
    EXPECT_EQ(s.eval_derivative(x), 1.0);
  }
}

TEST(Schedule, CollinearKnotsReproduceTheLine) {
  const Schedule s(std::vector<double>{0.25, 0.5, 0.75});
  EXPECT_EQ(s.segments(), 4u);
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    EXPECT_NEAR(s.eval(x), x, 1e-12);
    EXPECT_NEAR(s.eval_derivative(x), 1.0, 1e-12);
  }
}

TEST(Schedule, SingleInteriorKnotMatchesHermiteHandOracle) {
  // Knots (0,0), (0.5,0.8), (1,1): secants 1.6 and 0.4. The interior tangent is
  // their harmonic mean 0.64; the left end is (3*1.6 - 0.4)/2 = 2.2; the right
  // end (3*0.4 - 1.6)/2 = -0.2 has the wrong sign and is zeroed.
  const Schedule s(std::vector<double>{0.8});
  ASSERT_EQ(s.tangents().size(), 3u);
  EXPECT_NEAR(s.tangents()[0], 2.2, 1e-15);
  EXPECT_NEAR(s.tangents()[1], 0.64, 1e-15);
  EXPECT_EQ(s.tangents()[2], 0.0);

  const double expected = oracle::hermite(0.25, 0.0, 0.5, 0.0, 0.8, 2.2, 0.64);
  EXPECT_NEAR(expected, 0.4975, 1e-15);
  EXPECT_NEAR(s.eval(0.25), 0.4975, 1e-15);
  EXPECT_NEAR(s.eval(0.75), oracle::hermite(0.75, 0.5, 1.0, 0.8, 1.0, 0.64, 0.0), 1e-15);

  // One-sided derivatives at the interior knot.
  EXPECT_NEAR(s.segment_derivative(0, 1.0), 0.64, 1e-12);
  EXPECT_NEAR(s.segment_derivative(1, 0.0), 0.64, 1e-12);
  EXPECT_NEAR(s.segment_derivative(0, 1.0), s.segment_derivative(1, 0.0), 1e-10);
}

TEST(Schedule, FlatTangentAtSignChange) {
  const Schedule s(std::vector<double>{1.5, -0.5});
  EXPECT_EQ(s.tangents()[1], 0.0);
  EXPECT_EQ(s.tangents()[2], 0.0);
  EXPECT_NEAR(s.eval_derivative(1.0 / 3.0), 0.0, 1e-12);
}

TEST(Schedule, UnboundedInteriorValues) {
  const Schedule s(std::vector<double>{2.5, -1.5});
  EXPECT_NEAR(s.eval(1.0 / 3.0), 2.5, 1e-12);
  EXPECT_NEAR(s.eval(2.0 / 3.0), -1.5, 1e-12);
  EXPECT_EQ(s.eval(0.0), 0.0);
  EXPECT_EQ(s.eval(1.0), 1.0);
}

TEST(Schedule, RejectsBadInput) {
  EXPECT_THROW(Schedule(std::vector<double>{std::nan("")}), ConfigError);
  EXPECT_THROW(Schedule(std::vector<double>{INFINITY}), ConfigError);
  const Schedule s;
  EXPECT_THROW(s.eval(-1e-12), ConfigError);
  EXPECT_THROW(s.eval(1.0 + 1e-12), ConfigError);
  EXPECT_THROW(s.eval(std::nan("")), ConfigError);
  EXPECT_THROW(s.eval_derivative(2.0), ConfigError);
}

TEST(Schedule, RandomPropertySuite) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> value(-1.0, 2.0);
  std::uniform_int_distribution<int> count(0, 9);
  for (int rep = 0; rep < 2000; ++rep) {
    std::vector<double> interior(static_cast<std::size_t>(count(rng)));
    for (auto& v : interior) v = value(rng);
    const Schedule s(interior);
    const auto& p = s.knot_values();
    const std::size_t n = s.segments();
    EXPECT_EQ(s.eval(0.0), 0.0);
    EXPECT_EQ(s.eval(1.0), 1.0);
    for (std::size_t k = 0; k <= n; ++k) EXPECT_NEAR(s.eval(s.knot_position(k)), p[k], 1e-12);
    for (std::size_t k = 0; k < n; ++k) {
      const double lo = std::min(p[k], p[k + 1]), hi = std::max(p[k], p[k + 1]);
      for (int i = 0; i <= 100; ++i) {
        const double x = (static_cast<double>(k) + i / 100.0) / static_cast<double>(n);
        if (x > 1.0) continue;
        const double v = s.eval(x);
        ASSERT_GE(v, lo);
        ASSERT_LE(v, hi);
      }
      if (k + 1 < n) {
        EXPECT_NEAR(s.segment_derivative(k, 1.0), s.segment_derivative(k + 1, 0.0), 1e-10);
      }
    }
  }
}

TEST(Schedule, SamplesIncludeEndpoints) {
  const Schedule s(std::vector<double>{0.3, 1.2});
  const auto samples = s.sample(11);
  ASSERT_EQ(samples.size(), 11u);
  EXPECT_EQ(samples.front(), std::make_pair(0.0, 0.0));
  EXPECT_EQ(samples.back(), std::make_pair(1.0, 1.0));
}

TEST(Schedule, JsonIsTheInteriorArray) {
  const Schedule s(std::vector<double>{0.3, 1.2});
  const auto j = to_json(s);
  EXPECT_EQ(j, nlohmann::json::parse("[0.3, 1.2]"));
  EXPECT_EQ(schedule_from_json(j).knot_values(), s.knot_values());
  EXPECT_THROW(schedule_from_json(nlohmann::json::parse(R"({"a": 1})")), ConfigError);
  EXPECT_THROW(schedule_from_json(nlohmann::json::parse(R"(["x"])")), ConfigError);
}
