#include "doctest.h"
#include "test_support.hpp"

#include <nlohmann/json.hpp>

using namespace ratio;
using doctest::Approx;

TEST_CASE("ece examples") {
  SUBCASE("confident and correct") {
    const std::vector<double> c{1.0, 1.0, 1.0};
    CHECK(ece(c, {true, true, true}, {15, 10}) == 0.0);
  }
  SUBCASE("four-sample golden case") {
    const std::vector<double> c{0.6, 0.7, 0.9, 0.8};
    const EceBreakdown b = ece_breakdown(c, {true, false, true, true}, {2, 2});
    // exact ECE of the binary64 inputs, one ulp below the double nearest 0.15
    CHECK(b.ece == 0.14999999999999997);
    CHECK(std::abs(b.ece - 0.15) <= 1e-12);
    REQUIRE(b.bins.size() == 2);
    CHECK(b.bins[0].lo == 0.5);
    CHECK(b.bins[0].hi == 0.75);
    CHECK(b.bins[0].count == 2);
    CHECK(b.bins[0].acc == 0.5);
    CHECK(b.bins[0].conf == Approx(0.65).epsilon(1e-15));
    CHECK(b.bins[1].count == 2);
    CHECK(b.bins[1].acc == 1.0);
    CHECK(b.bins[1].conf == Approx(0.85).epsilon(1e-15));
  }
  SUBCASE("calibrated chance level") {
    const std::vector<double> c(8, 0.25);
    CHECK(ece(c, {true, false, false, false, false, true, false, false}, {15, 4}) == 0.0);
  }
  SUBCASE("errors") {
    const std::vector<double> none;
    CHECK_THROWS_AS(ece(none, {}, {15, 2}), InvalidArgument);
    const std::vector<double> c{0.6, 0.7};
    CHECK_THROWS_AS(ece(c, {true}, {15, 2}), InvalidArgument);
    const std::vector<double> low{0.4};
    CHECK_THROWS_AS(ece(low, {true}, {15, 2}), InvalidArgument);
    const std::vector<double> high{1.1};
    CHECK_THROWS_AS(ece(high, {true}, {15, 2}), InvalidArgument);
    CHECK_THROWS_AS(BinningConfig({0, 2}).validate(), InvalidArgument);
    CHECK_THROWS_AS(BinningConfig({10, 1}).validate(), InvalidArgument);
  }
}

TEST_CASE("bin edges are half-open with the last bin closed") {
  const BinningConfig b{2, 2};
  CHECK(b.bin_of(0.5) == 0);
  CHECK(b.bin_of(0.7499) == 0);
  CHECK(b.bin_of(0.75) == 1);
  CHECK(b.bin_of(1.0) == 1);
}

TEST_CASE("ece invariants") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.below(8);
    const std::size_t n = 1 + rng.below(60);
    std::vector<double> c(n);
    std::vector<bool> ok(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = rng.uniform(1.0 / static_cast<double>(k), 1.0);
      ok[i] = rng.uniform() < 0.5;
    }
    const BinningConfig b{1 + rng.below(20), k};
    const double e = ece(c, ok, b);
    CHECK(e >= 0.0);
    CHECK(e <= 1.0 - 1.0 / static_cast<double>(k) + 1e-12);

    const std::vector<std::size_t> perm = rng.permutation(n);
    std::vector<double> c2(n);
    std::vector<bool> ok2(n);
    for (std::size_t i = 0; i < n; ++i) {
      c2[i] = c[perm[i]];
      ok2[i] = ok[perm[i]];
    }
    CHECK(ece(c2, ok2, b) == Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("temperature grid") {
  const std::vector<double> g = TemperatureGrid{}.values();
  REQUIRE(g.size() == 500);
  CHECK(g.front() == 0.05);
  CHECK(g.back() == 2.71);
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] > g[i - 1]);
    CHECK(g[i] / g[i - 1] == Approx(std::pow(2.71 / 0.05, 1.0 / 499.0)).epsilon(1e-12));
  }
}

TEST_CASE("fit_temperature examples") {
  SUBCASE("single confident sample") {
    // Every T below ~0.2705 rounds the confidence to exactly 1.0 (ECE 0);
    // the tie-break toward T = 1 picks the largest of them.
    Matrix logits(1, 2);
    logits(0, 0) = 10.0;
    const std::vector<std::size_t> y{0};
    const TemperatureFit fit = fit_temperature(logits, y, {15, 2});
    CHECK(fit.ece_after == 0.0);
    CHECK(fit.temperature == Approx(0.2705105027299577).epsilon(1e-12));
    const std::vector<double> g = TemperatureGrid{}.values();
    const auto it = std::find(g.begin(), g.end(), fit.temperature);
    REQUIRE(it != g.end());
    CHECK(softmax(std::vector<double>{10.0, 0.0}, *std::next(it))[0] < 1.0);
  }
  SUBCASE("fit never worsens the T=1 ECE") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      Matrix logits(50, 3);
      std::vector<std::size_t> y(50);
      for (std::size_t i = 0; i < 50; ++i) {
        for (std::size_t k = 0; k < 3; ++k) logits(i, k) = 3.0 * rng.normal();
        y[i] = rng.below(3);
      }
      const TemperatureFit fit = fit_temperature(logits, y, {10, 3});
      CHECK(fit.ece_after <= fit.ece_before);
      std::vector<double> c;
      std::vector<bool> ok;
      confidences_at(logits, y, 1.0, c, ok);
      CHECK(fit.ece_before == ece(c, ok, {10, 3}));
      confidences_at(logits, y, fit.temperature, c, ok);
      CHECK(fit.ece_after == ece(c, ok, {10, 3}));
    }
  }
  SUBCASE("scaling logits keeps predictions") {
    Rng rng(6);
    Matrix logits(30, 4), scaled(30, 4);
    std::vector<std::size_t> y(30);
    for (std::size_t i = 0; i < 30; ++i) {
      for (std::size_t k = 0; k < 4; ++k) {
        logits(i, k) = rng.normal();
        scaled(i, k) = 2.5 * logits(i, k);
      }
      y[i] = rng.below(4);
    }
    const TemperatureFit a = fit_temperature(logits, y, {10, 4});
    const TemperatureFit b = fit_temperature(scaled, y, {10, 4});
    const auto pa = apply_temperature(logits, a.temperature);
    const auto pb = apply_temperature(scaled, b.temperature);
    for (std::size_t i = 0; i < 30; ++i) CHECK(pa[i].argmax() == pb[i].argmax());
  }
  SUBCASE("empty validation set") {
    CHECK_THROWS_AS(fit_temperature(Matrix(0, 2), {}, {15, 2}), InvalidArgument);
  }
}

TEST_CASE("apply_temperature") {
  Matrix logits(2, 3);
  logits(0, 0) = 3;
  logits(0, 1) = 1;
  logits(1, 2) = -2;
  const auto p = apply_temperature(logits, 1.0);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto q = softmax(logits.row(i));
    CHECK(std::equal(p[i].probs().begin(), p[i].probs().end(), q.probs().begin()));
  }
  const auto flat = apply_temperature(logits, 1e6);
  for (double v : flat[0].probs()) CHECK(v == Approx(1.0 / 3.0).epsilon(1e-5));
  CHECK_THROWS_AS(apply_temperature(logits, 0.0), InvalidArgument);
  CHECK_THROWS_AS(apply_temperature(logits, -1.0), InvalidArgument);
}

TEST_CASE("temperature preserves argmax across the grid") {
  Rng rng(2024);
  const std::vector<double> grid = TemperatureGrid{}.values();
  Matrix logits(1000, 10);
  for (std::size_t i = 0; i < 1000; ++i)
    for (std::size_t k = 0; k < 10; ++k) logits(i, k) = 4.0 * rng.normal();
  std::size_t mismatches = 0;
  for (double t : grid) {
    const auto p = apply_temperature(logits, t);
    for (std::size_t i = 0; i < 1000; ++i) mismatches += p[i].argmax() != argmax(logits.row(i));
  }
  CHECK(mismatches == 0);
}

TEST_CASE("calibration report") {
  const std::vector<double> c{0.6, 0.7, 0.9, 0.8};
  TemperatureFit fit;
  fit.temperature = 0.8;
  fit.ece_before = 0.2;
  fit.ece_after = 0.15;
  fit.bins_after = ece_breakdown(c, {true, false, true, true}, {2, 2});
  const nlohmann::json j = calibration_report(fit);
  CHECK(j.at("temperature") == 0.8);
  CHECK(j.at("ece_before") == 0.2);
  CHECK(j.at("ece_after") == 0.15);
  REQUIRE(j.at("bins").size() == 2);
  CHECK(j.at("bins")[0].at("lo") == 0.5);
  CHECK(j.at("bins")[0].at("hi") == 0.75);
  CHECK(j.at("bins")[1].at("count") == 2);
  CHECK(j.at("bins")[1].at("acc") == 1.0);
  CHECK(j.at("bins")[0].contains("conf"));
}
