#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bubblelab/martingale.hpp"
#include "bubblelab/sim.hpp"
#include "doctest.h"

using namespace bubblelab;
using martingale::MartingaleClass;

namespace {

// Log-spaced tabulation of b(x) = scale * x^exponent on [lo, hi].
std::vector<std::pair<double, double>> tabulate_power(double scale, double exponent,
                                                      double lo, double hi, int n) {
  std::vector<std::pair<double, double>> xy;
  const double step = (std::log(hi) - std::log(lo)) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double x = std::exp(std::log(lo) + step * i);
    xy.emplace_back(x, scale * std::pow(x, exponent));
  }
  return xy;
}

}  // namespace

TEST_SUITE("martingale") {

TEST_CASE("exponent classification boundary") {
  CHECK_EQ(martingale::classify_power_exponent(0.6), MartingaleClass::TrueMartingale);
  CHECK_EQ(martingale::classify_power_exponent(0.9), MartingaleClass::TrueMartingale);
  CHECK_EQ(martingale::classify_power_exponent(1.0), MartingaleClass::TrueMartingale);
  CHECK_EQ(martingale::classify_power_exponent(1.0 + 1e-12),
           MartingaleClass::StrictLocalMartingale);
  CHECK_EQ(martingale::classify_power_exponent(1.2),
           MartingaleClass::StrictLocalMartingale);
  CHECK_EQ(martingale::classify_power_exponent(5.0),
           MartingaleClass::StrictLocalMartingale);
}

TEST_CASE("exponent classification domain") {
  CHECK_THROWS_AS(martingale::classify_power_exponent(0.5), std::domain_error);
  CHECK_THROWS_AS(martingale::classify_power_exponent(0.3), std::domain_error);
  CHECK_THROWS_AS(martingale::classify_power_exponent(-1.0), std::domain_error);
  CHECK_THROWS_AS(martingale::classify_power_exponent(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(martingale::classify_power_exponent(INFINITY), std::domain_error);
}

TEST_CASE("tail test recovers power-law exponents") {
  // The fitted tail exponent must agree with the direct classification of
  // the generating exponent across the boundary.
  for (const double exponent : {0.6, 0.8, 1.0, 1.2, 1.5}) {
    CAPTURE(exponent);
    const auto xy = tabulate_power(0.3, exponent, 0.5, 500.0, 64);
    const auto result = martingale::integral_tail_test(xy, 1.0);
    CHECK_EQ(result.fitted_exponent, doctest::Approx(exponent).epsilon(1e-6));
    CHECK_EQ(result.cls, martingale::classify_power_exponent(exponent));
  }
}

TEST_CASE("tail test sits on the divergence boundary at p = 1") {
  // x / b(x)^2 ~ x^(1-2p): p = 1 gives 1/x whose integral diverges, so the
  // process is still a true martingale there.
  const auto xy = tabulate_power(1.0, 1.0, 1.0, 1000.0, 48);
  const auto result = martingale::integral_tail_test(xy, 1.0);
  CHECK_EQ(result.cls, MartingaleClass::TrueMartingale);
  CHECK_EQ(result.fitted_exponent, doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("only the upper tail drives the fit") {
  // Kinked coefficient: slope 0.7 below the midpoint, 1.4 above it. The
  // class is decided by the large-x behavior.
  std::vector<std::pair<double, double>> xy;
  const auto low = tabulate_power(0.3, 0.7, 1.0, 30.0, 24);
  const double join = 0.3 * std::pow(30.0, 0.7) / (0.3 * std::pow(30.0, 1.4));
  const auto high = tabulate_power(0.3 * join, 1.4, 31.0, 5000.0, 40);
  xy.insert(xy.end(), low.begin(), low.end());
  xy.insert(xy.end(), high.begin(), high.end());

  const auto result = martingale::integral_tail_test(xy, 1.0);
  CHECK_EQ(result.cls, MartingaleClass::StrictLocalMartingale);
  CHECK_EQ(result.fitted_exponent, doctest::Approx(1.4).epsilon(1e-3));
}

TEST_CASE("points below epsilon are ignored") {
  auto xy = tabulate_power(0.3, 1.3, 2.0, 800.0, 40);
  auto with_junk = xy;
  // Garbage below the cutoff must not change the verdict or the fit.
  with_junk.insert(with_junk.begin(), {{0.1, 7.0}, {0.5, 0.001}, {1.5, 3.0}});
  const auto clean = martingale::integral_tail_test(xy, 2.0);
  const auto noisy = martingale::integral_tail_test(with_junk, 2.0);
  CHECK_EQ(clean.fitted_exponent, noisy.fitted_exponent);
  CHECK_EQ(clean.cls, noisy.cls);
}

TEST_CASE("tail test validates its inputs") {
  const auto good = tabulate_power(0.3, 1.2, 0.5, 500.0, 64);

  CHECK_THROWS_AS(martingale::integral_tail_test(good, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(martingale::integral_tail_test(good, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(martingale::integral_tail_test(good, std::nan("")),
                  std::invalid_argument);

  SUBCASE("too few points above epsilon") {
    const auto xy = tabulate_power(0.3, 1.2, 1.0, 500.0, 15);
    CHECK_THROWS_AS(martingale::integral_tail_test(xy, 1.0), std::invalid_argument);
  }
  SUBCASE("span under two decades") {
    const auto xy = tabulate_power(0.3, 1.2, 1.0, 99.0, 64);
    CHECK_THROWS_AS(martingale::integral_tail_test(xy, 1.0), std::invalid_argument);
  }
  SUBCASE("non-increasing x") {
    auto xy = good;
    xy[5].first = xy[4].first;
    CHECK_THROWS_AS(martingale::integral_tail_test(xy, 1.0), std::invalid_argument);
  }
  SUBCASE("non-finite entry") {
    auto xy = good;
    xy[5].second = std::nan("");
    CHECK_THROWS_AS(martingale::integral_tail_test(xy, 1.0), std::invalid_argument);
  }
  SUBCASE("non-positive coefficient") {
    auto xy = good;
    xy[5].second = 0.0;
    CHECK_THROWS_AS(martingale::integral_tail_test(xy, 1.0), std::domain_error);
  }
}

TEST_CASE("labels follow the regime exponents") {
  const auto spec = sim::RegimeChainSpec::two_state({0.5, 0.9}, {0.5, 1.3}, 0.98, 0.95);
  sim::PricePath path;
  path.dt = 120.0;
  path.prices = {1.0, 1.1, 1.2, 1.1};
  path.regime_ids = std::vector<int>{0, 1, 1, 0};

  const auto labels = martingale::labels_from_regimes(path, spec);
  CHECK_EQ(labels, martingale::LabelSeries{1, 0, 0, 1});
}

TEST_CASE("labels_from_regimes validates") {
  const auto spec = sim::RegimeChainSpec::two_state({0.5, 0.9}, {0.5, 1.3}, 0.98, 0.95);
  sim::PricePath path;
  path.dt = 120.0;
  path.prices = {1.0, 1.1};

  SUBCASE("missing regimes") {
    CHECK_THROWS_AS(martingale::labels_from_regimes(path, spec), std::invalid_argument);
  }
  SUBCASE("length mismatch") {
    path.regime_ids = std::vector<int>{0};
    CHECK_THROWS_AS(martingale::labels_from_regimes(path, spec), std::invalid_argument);
  }
  SUBCASE("regime id out of range") {
    path.regime_ids = std::vector<int>{0, 2};
    CHECK_THROWS_AS(martingale::labels_from_regimes(path, spec), std::invalid_argument);
  }
}

}  // TEST_SUITE
