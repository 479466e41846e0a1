#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "advpol/bias_reduction/br_controller.hpp"
#include "advpol/common.hpp"

using namespace advpol;

namespace {

BrController armed(double eta, double lambda0) {
  return BrController(BrConfig{.enabled = true, .eta = eta, .lambda0 = lambda0}, 0.0);
}

}  // namespace

TEST_SUITE("bias_reduction") {
  TEST_CASE("dual step worked examples") {
    auto a = armed(10.0, 0.0);
    a.update(0.1);
    CHECK(a.lambda() == 0.0);
    CHECK(a.temperature() == 1.0);

    auto b = armed(1.0, 2.0);
    b.update(0.5);
    CHECK(b.lambda() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(b.temperature() == doctest::Approx(0.4).epsilon(1e-15));

    auto c = armed(10.0, 0.0);
    c.update(-0.3);
    CHECK(c.lambda() == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(c.temperature() == doctest::Approx(0.25).epsilon(1e-15));
  }

  TEST_CASE("temperature readout") {
    CHECK(BrController(BrConfig{.enabled = true}).temperature() == 1.0);
    CHECK(BrController(BrConfig{.enabled = true, .lambda0 = 1.0}).temperature() == 0.5);
    const BrController off(BrConfig{.enabled = false, .constant_tau = 0.3});
    CHECK(off.temperature() == 0.3);
  }

  TEST_CASE("the first estimate only sets the reference") {
    BrController br(BrConfig{.enabled = true});
    br.update(-1.0);
    CHECK(br.lambda() == 0.0);
    CHECK(br.reference() == -1.0);
    br.update(-1.2);
    CHECK(br.lambda() == doctest::Approx(2.0));
  }

  TEST_CASE("bounds hold along random sequences") {
    auto rng = make_rng(41);
    std::normal_distribution<double> step(0.0, 0.5);
    std::uniform_real_distribution<double> eta(0.1, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
      BrController br(BrConfig{.enabled = true, .eta = eta(rng)});
      double j = 0.0;
      for (int k = 0; k < 100; ++k) {
        j += step(rng);
        br.update(j);
        REQUIRE(br.lambda() >= 0.0);
        REQUIRE(br.temperature() > 0.0);
        REQUIRE(br.temperature() <= 1.0);
        REQUIRE(br.temperature() == 1.0 / (1.0 + br.lambda()));
      }
    }
  }

  TEST_CASE("a worse objective change means a larger multiplier") {
    double last_lambda = -1.0, last_tau = 2.0;
    for (double dj : {0.1, 0.0, -0.05, -0.2, -1.0}) {
      auto br = armed(5.0, 1.0);
      br.update(dj);
      CHECK(br.lambda() > last_lambda);
      CHECK(br.temperature() < last_tau);
      last_lambda = br.lambda();
      last_tau = br.temperature();
    }
  }

  TEST_CASE("trajectories depend only on the estimates, step size and initial multiplier") {
    const std::vector<double> js = {-1.0, -0.9, -0.95, -0.5, -0.7, -0.7, 0.0};
    auto run = [&](BrConfig cfg) {
      BrController br(cfg);
      std::vector<double> out;
      for (double j : js) {
        br.update(j);
        out.push_back(br.lambda());
        out.push_back(br.temperature());
      }
      return out;
    };
    const BrConfig cfg{.enabled = true, .eta = 7.0, .lambda0 = 0.5};
    CHECK(run(cfg) == run(cfg));
    BrConfig shifted = cfg;
    shifted.lambda0 = 0.6;
    CHECK(run(cfg) != run(shifted));
  }

  TEST_CASE("rejected inputs") {
    BrController br(BrConfig{.enabled = true});
    CHECK_THROWS_AS(br.update(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    CHECK_THROWS_AS(br.update(std::numeric_limits<double>::infinity()), std::invalid_argument);
    BrController off{};
    CHECK_THROWS_AS(off.update(0.0), std::logic_error);
    CHECK_THROWS_AS(BrController(BrConfig{.eta = 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(BrController(BrConfig{.constant_tau = 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(BrController(BrConfig{.lambda0 = -1.0}), std::invalid_argument);
  }
}
