/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ktram/device.hpp"
#include "ktram/errors.hpp"
#include "ktram/rng.hpp"

using namespace ktram;

namespace {

constexpr double kPulseWidth = 50e-9;

DeviceParams steep_params() {
  // beta * v_on and beta * v_off both >= 20: transition probabilities vanish
  // at zero bias.
  DeviceParams params;
  params.v_on = 0.3;
  params.v_off = 0.3;
  params.beta = 100.0;
  params.tau = 100e-9;
  return params;
}

} // namespace

TEST_CASE("presets are valid, deterministic and pairwise distinct") {
  const DeviceParams w = preset_params(DeviceVariant::W);
  const DeviceParams sn = preset_params(DeviceVariant::Sn);
  const DeviceParams cr = preset_params(DeviceVariant::Cr);
  for (const DeviceParams& params : {w, sn, cr}) {
    CHECK_NOTHROW(validate(params));
    CHECK(params.v_on < 1.0);
    CHECK(params.v_off < 1.0);
  }

  // determinism
  const DeviceParams cr_again = preset_params(DeviceVariant::Cr);
  CHECK(cr.v_on == cr_again.v_on);
  CHECK(cr.tau == cr_again.tau);
  CHECK(cr.beta == cr_again.beta);

  // pairwise distinct in v_on and tau
  CHECK(w.v_on != sn.v_on);
  CHECK(w.v_on != cr.v_on);
  CHECK(sn.v_on != cr.v_on);
  CHECK(w.tau != sn.tau);
  CHECK(w.tau != cr.tau);
  CHECK(sn.tau != cr.tau);
}

TEST_CASE("variant names parse and reject unknowns") {
  CHECK(variant_from_name("W") == DeviceVariant::W);
  CHECK(variant_from_name("Sn") == DeviceVariant::Sn);
  CHECK(variant_from_name("Cr") == DeviceVariant::Cr);
  CHECK_THROWS_WITH_AS(variant_from_name("Cu"),
                       "unknown device variant 'Cu', valid names: W, Sn, Cr",
                       std::invalid_argument);
}

TEST_CASE("invalid parameter records are rejected with the violated constraint") {
  DeviceParams params;
  params.w_off = 0.0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  params = DeviceParams{};
  params.w_on = params.w_off;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  params = DeviceParams{};
  params.v_on = 1.0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  params = DeviceParams{};
  params.tau = 0.0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  params = DeviceParams{};
  params.n_switches = 0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
}

TEST_CASE("transition probabilities hit the logistic midpoint at threshold") {
  const DeviceParams params = preset_params(DeviceVariant::W);
  // v = v_on and dt = tau: rate clamps to 1 and the logistic sits at 1/2.
  const auto [p_on, p_off] = transition_probabilities(params, params.v_on, params.tau);
  CHECK(p_on == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p_off >= 0.0);
}

TEST_CASE("zero bias is symmetric when thresholds match") {
  DeviceParams params;
  params.v_on = 0.4;
  params.v_off = 0.4;
  const auto [p_on, p_off] = transition_probabilities(params, 0.0, kPulseWidth);
  CHECK(p_on == doctest::Approx(p_off).epsilon(1e-15));
}

TEST_CASE("transition probabilities stay in [0,1] and reject junk") {
  const DeviceParams params = preset_params(DeviceVariant::Sn);
  for (double v : {-1.5, -0.8, -0.2, 0.0, 0.2, 0.8, 1.5}) {
    for (double dt : {1e-9, 50e-9, 1e-6, 1e-3}) {
      const auto [p_on, p_off] = transition_probabilities(params, v, dt);
      CHECK(p_on >= 0.0);
      CHECK(p_on <= 1.0);
      CHECK(p_off >= 0.0);
      CHECK(p_off <= 1.0);
    }
  }
  CHECK_THROWS_AS(transition_probabilities(params, std::nan(""), kPulseWidth),
                  std::invalid_argument);
  CHECK_THROWS_AS(transition_probabilities(params, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("p_on matches a per-switch Bernoulli simulation within 3 standard errors") {
  const DeviceParams params = preset_params(DeviceVariant::W);
  const auto [p_on, p_off] = transition_probabilities(params, 0.8, kPulseWidth);

  constexpr std::uint32_t kTrials = 1'000'000;
  RandomStream rng(20260808);
  std::uint32_t flips = 0;
  for (std::uint32_t i = 0; i < kTrials; ++i) {
    flips += rng.bernoulli(p_on) ? 1u : 0u;
  }
  const double estimate = static_cast<double>(flips) / kTrials;
  const double standard_error = std::sqrt(p_on * (1.0 - p_on) / kTrials);
  CHECK(std::abs(estimate - p_on) <= 3.0 * standard_error);
}

TEST_CASE("zero-bias pulse leaves a steep device in place") {
  const DeviceParams params = steep_params();
  REQUIRE(params.beta * params.v_on >= 20.0);
  const DeviceState state = DeviceState::mean_field(0.5);
  const DeviceState after = apply_pulse(state, params, 0.0, kPulseWidth);
  CHECK(std::abs(after.on_fraction - 0.5) < 1e-8);
}

TEST_CASE("forward pulse train rises monotonically with shrinking increments") {
  const DeviceParams params = preset_params(DeviceVariant::W);
  DeviceState state = DeviceState::mean_field(0.5);
  double previous_increment = 1.0;
  for (int i = 0; i < 20; ++i) {
    const double before = state.on_fraction;
    state = apply_pulse(state, params, 0.8, kPulseWidth);
    const double increment = state.on_fraction - before;
    CHECK(increment > 0.0);
    CHECK(increment < previous_increment);
    CHECK(state.on_fraction < 1.0);
    previous_increment = increment;
  }
}

TEST_CASE("stochastic pulses are deterministic under a fixed seed") {
  const DeviceParams params = preset_params(DeviceVariant::W);
  const DeviceState state = DeviceState::stochastic(500);
  RandomStream rng_a(7);
  RandomStream rng_b(7);
  const DeviceState a = apply_pulse(state, params, 0.8, kPulseWidth, &rng_a);
  const DeviceState b = apply_pulse(state, params, 0.8, kPulseWidth, &rng_b);
  CHECK(a.on_count == b.on_count);
  CHECK(rng_a.position() == rng_b.position());

  CHECK_THROWS_AS(apply_pulse(state, params, 0.8, kPulseWidth), std::invalid_argument);
}

TEST_CASE("mean-field matches the mean of stochastic trajectories") {
  DeviceParams params = preset_params(DeviceVariant::W);
  params.n_switches = 10'000;

  DeviceState mean_field = DeviceState::mean_field(0.5);
  constexpr int kPulses = 6;
  const double volts[kPulses] = {0.8, 0.8, -0.8, 0.8, 0.2, -0.8};

  std::vector<double> mf_trace;
  for (double v : volts) {
    mean_field = apply_pulse(mean_field, params, v, kPulseWidth);
    mf_trace.push_back(mean_field.on_fraction);
  }

  RandomStream rng(99);
  std::vector<double> mc_trace(kPulses, 0.0);
  constexpr int kTrials = 100;
  for (int trial = 0; trial < kTrials; ++trial) {
    DeviceState state = DeviceState::stochastic(5000);
    for (int step = 0; step < kPulses; ++step) {
      state = apply_pulse(state, params, volts[step], kPulseWidth, &rng);
      mc_trace[step] += state.fraction(params);
    }
  }
  for (int step = 0; step < kPulses; ++step) {
    CHECK(std::abs(mf_trace[step] - mc_trace[step] / kTrials) <= 0.01);
  }
}

TEST_CASE("pulses outside the operating regime are rejected") {
  const DeviceParams params = preset_params(DeviceVariant::W);
  const DeviceState state = DeviceState::mean_field(0.5);
  CHECK_THROWS_AS(apply_pulse(state, params, 1.6, kPulseWidth), PulseRangeError);
  CHECK_THROWS_AS(apply_pulse(state, params, -1.6, kPulseWidth), PulseRangeError);
  CHECK_THROWS_AS(apply_pulse(state, params, 0.5, 2e-6), PulseRangeError);
  CHECK_THROWS_AS(apply_pulse(state, params, 0.5, 0.0), PulseRangeError);

  PulseLimits loose;
  loose.max_abs_volts = 2.0;
  CHECK_NOTHROW(apply_pulse(state, params, 1.6, kPulseWidth, nullptr, loose));
}

TEST_CASE("conductance interpolates linearly between the ensemble bounds") {
  const DeviceParams params = preset_params(DeviceVariant::W);
  const double total = static_cast<double>(params.n_switches);
  CHECK(conductance(DeviceState::mean_field(0.0), params) ==
        doctest::Approx(total * params.w_off).epsilon(1e-15));
  CHECK(conductance(DeviceState::mean_field(1.0), params) ==
        doctest::Approx(total * params.w_on).epsilon(1e-15));
  const double midpoint = 0.5 * (total * params.w_off + total * params.w_on);
  CHECK(conductance(DeviceState::mean_field(0.5), params) ==
        doctest::Approx(midpoint).epsilon(1e-15));
}

TEST_CASE("any admissible pulse train keeps state and conductance bounded") {
  const DeviceParams params = preset_params(DeviceVariant::Cr);
  const double g_lo = params.n_switches * params.w_off;
  const double g_hi = params.n_switches * params.w_on;

  RandomStream rng(4242);
  for (int mode = 0; mode < 2; ++mode) {
    DeviceState state = mode == 0 ? DeviceState::mean_field(0.5)
                                  : DeviceState::stochastic(params.n_switches / 2);
    for (int i = 0; i < 500; ++i) {
      const double v = rng.next_uniform(-1.5, 1.5);
      const double dt = rng.next_uniform(1e-9, 1e-6);
      state = apply_pulse(state, params, v, dt, &rng);
      const double n = state.fraction(params);
      CHECK(n >= 0.0);
      CHECK(n <= 1.0);
      const double g = conductance(state, params);
      CHECK(g >= g_lo - 1e-18);
      CHECK(g <= g_hi + 1e-18);
    }
  }
}

TEST_CASE("steep devices never lose ON fraction at or above threshold") {
  const DeviceParams params = steep_params();
  REQUIRE(params.beta * (params.v_on + params.v_off) >= 20.0);
  for (double n0 : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    for (double v : {params.v_on, 0.5, 0.8, 1.2}) {
      DeviceState state = DeviceState::mean_field(n0);
      state = apply_pulse(state, params, v, kPulseWidth);
      CHECK(state.on_fraction >= n0 - 1e-15);
    }
  }
}

TEST_CASE("no preset switches fully on one 0.8 V pulse") {
  for (DeviceVariant variant : {DeviceVariant::W, DeviceVariant::Sn, DeviceVariant::Cr}) {
    const DeviceParams params = preset_params(variant);
    // Worst cases: all switches available to flip.
    DeviceState empty = DeviceState::mean_field(0.0);
    const double up = apply_pulse(empty, params, 0.8, kPulseWidth).on_fraction;
    CHECK(up < 0.5);
    DeviceState full = DeviceState::mean_field(1.0);
    const double down = 1.0 - apply_pulse(full, params, -0.8, kPulseWidth).on_fraction;
    CHECK(down < 0.5);
  }
}

TEST_CASE("mc oracle handles the trivial traces") {
  const DeviceParams params = steep_params();
  CHECK(mc_trace_oracle(params, {}, 10, 1).empty());

  const Pulse zero{0.0, kPulseWidth};
  const auto trace = mc_trace_oracle(params, std::span<const Pulse>(&zero, 1), 50, 3);
  REQUIRE(trace.size() == 1);
  // No drift at zero bias under a steep logistic; allow 3 binomial standard
  // errors of the trial mean.
  const double standard_error =
      std::sqrt(0.25 / (static_cast<double>(params.n_switches) * 50.0));
  CHECK(std::abs(trace[0] - 0.5) <= 3.0 * standard_error);

  CHECK_THROWS_AS(mc_trace_oracle(params, {}, 0, 1), std::invalid_argument);
  const Pulse hot{2.0, kPulseWidth};
  CHECK_THROWS_AS(mc_trace_oracle(params, std::span<const Pulse>(&hot, 1), 10, 1),
                  PulseRangeError);
}

TEST_CASE("mc oracle tracks the mean-field trace on an alternating train") {
  DeviceParams params = preset_params(DeviceVariant::W);
  params.n_switches = 10'000;

  std::vector<Pulse> train;
  for (int i = 0; i < 20; ++i) {
    train.push_back({0.8, kPulseWidth});
    train.push_back({0.2, kPulseWidth});
  }
  for (int i = 0; i < 20; ++i) {
    train.push_back({-0.8, kPulseWidth});
    train.push_back({0.2, kPulseWidth});
  }

  const auto oracle = mc_trace_oracle(params, train, 40, 17);
  DeviceState state = DeviceState::mean_field(0.5);
  for (std::size_t step = 0; step < train.size(); ++step) {
    state = apply_pulse(state, params, train[step].volts, train[step].seconds);
    CHECK(std::abs(state.on_fraction - oracle[step]) <= 0.01);
  }
}
