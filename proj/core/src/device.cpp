/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "ktram/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ktram/errors.hpp"

namespace ktram {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_pulse(double volts, double dt, const PulseLimits& limits) {
  if (!std::isfinite(volts) || !std::isfinite(dt)) {
    throw std::invalid_argument("pulse voltage and width must be finite");
  }
  if (std::abs(volts) > limits.max_abs_volts) {
    std::ostringstream msg;
    msg << "pulse amplitude " << volts << " V outside emulated operating regime (|v| <= "
        << limits.max_abs_volts << " V)";
    throw PulseRangeError(msg.str());
  }
  if (dt <= 0.0 || dt > limits.max_dt) {
    std::ostringstream msg;
    msg << "pulse width " << dt << " s outside emulated operating regime (0 < dt <= "
        << limits.max_dt << " s)";
    throw PulseRangeError(msg.str());
  }
}

} // namespace

void validate(const DeviceParams& params) {
  if (params.n_switches < 1) {
    throw std::invalid_argument("n_switches must be >= 1");
  }
  if (!(params.w_off > 0.0)) {
    throw std::invalid_argument("w_off must be > 0");
  }
  if (!(params.w_on > params.w_off)) {
    throw std::invalid_argument("w_on must be > w_off");
  }
  if (!(params.v_on > 0.0 && params.v_on < 1.0)) {
    throw std::invalid_argument("v_on must be in (0, 1.0) V");
  }
  if (!(params.v_off > 0.0 && params.v_off < 1.0)) {
    throw std::invalid_argument("v_off must be in (0, 1.0) V");
  }
  if (!(params.tau > 0.0) || !std::isfinite(params.tau)) {
    throw std::invalid_argument("tau must be > 0");
  }
  if (!(params.beta > 0.0) || !std::isfinite(params.beta)) {
    throw std::invalid_argument("beta must be > 0");
  }
}

DeviceParams preset_params(DeviceVariant variant) {
  // Frozen by the calibration search in tools/calibrate. All three variants
  // share the ensemble geometry and differ in threshold, steepness and the
  // switching time constant.
  DeviceParams params;
  switch (variant) {
  case DeviceVariant::W:
    params.v_on = 0.80;
    params.v_off = 0.80;
    params.tau = 200e-9;
    params.beta = 7.5;
    break;
  case DeviceVariant::Sn:
    params.v_on = 0.77;
    params.v_off = 0.77;
    params.tau = 250e-9;
    params.beta = 7.5;
    break;
  case DeviceVariant::Cr:
    params.v_on = 0.82;
    params.v_off = 0.82;
    params.tau = 160e-9;
    params.beta = 7.5;
    break;
  }
  return params;
}

DeviceVariant variant_from_name(std::string_view name) {
  if (name == "W") return DeviceVariant::W;
  if (name == "Sn") return DeviceVariant::Sn;
  if (name == "Cr") return DeviceVariant::Cr;
  throw std::invalid_argument("unknown device variant '" + std::string(name) +
                              "', valid names: W, Sn, Cr");
}

std::string_view variant_name(DeviceVariant variant) {
  switch (variant) {
  case DeviceVariant::W: return "W";
  case DeviceVariant::Sn: return "Sn";
  case DeviceVariant::Cr: return "Cr";
  }
  return "?";
}

TransitionProbabilities transition_probabilities(const DeviceParams& params, double volts,
                                                 double dt) {
  if (!std::isfinite(volts)) {
    throw std::invalid_argument("pulse voltage must be finite");
  }
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw std::invalid_argument("pulse width must be finite and > 0");
  }
  const double rate = std::clamp(dt / params.tau, 0.0, 1.0);
  return TransitionProbabilities{
      rate * sigmoid(params.beta * (volts - params.v_on)),
      rate * sigmoid(params.beta * (-volts - params.v_off)),
  };
}

DeviceState DeviceState::mean_field(double on_fraction) {
  DeviceState state;
  state.mode = UpdateMode::MeanField;
  state.on_fraction = std::clamp(on_fraction, 0.0, 1.0);
  return state;
}

DeviceState DeviceState::stochastic(std::uint32_t on_count) {
  DeviceState state;
  state.mode = UpdateMode::Stochastic;
  state.on_count = on_count;
  return state;
}

double DeviceState::fraction(const DeviceParams& params) const {
  if (mode == UpdateMode::MeanField) {
    return on_fraction;
  }
  return static_cast<double>(on_count) / static_cast<double>(params.n_switches);
}

double conductance(const DeviceState& state, const DeviceParams& params) {
  const double n = state.fraction(params);
  const double total = static_cast<double>(params.n_switches);
  return n * total * params.w_on + (1.0 - n) * total * params.w_off;
}

DeviceState apply_pulse(const DeviceState& state, const DeviceParams& params, double volts,
                        double dt, RandomStream* rng, const PulseLimits& limits) {
  check_pulse(volts, dt, limits);
  auto [p_on, p_off] = transition_probabilities(params, volts, dt);
  // A pulse recruits only its own polarity's transition: the opposing
  // logistic tail is suppressed so positive pulses strictly move mass toward
  // ON and negative ones toward OFF. Zero bias keeps both (symmetric drift).
  if (volts > 0.0) {
    p_off = 0.0;
  } else if (volts < 0.0) {
    p_on = 0.0;
  }

  if (state.mode == UpdateMode::MeanField) {
    const double n = state.on_fraction;
    const double next = n + (1.0 - n) * p_on - n * p_off;
    return DeviceState::mean_field(std::clamp(next, 0.0, 1.0));
  }

  if (rng == nullptr) {
    throw std::invalid_argument("stochastic pulse requires a RandomStream");
  }
  const std::uint32_t total = params.n_switches;
  const std::uint32_t on = std::min(state.on_count, total);
  const std::uint32_t up = rng->binomial(total - on, p_on);
  const std::uint32_t down = rng->binomial(on, p_off);
  return DeviceState::stochastic(on + up - down);
}

std::vector<double> mc_trace_oracle(const DeviceParams& params, std::span<const Pulse> pulses,
                                    std::uint32_t trials, std::uint64_t seed,
                                    const PulseLimits& limits) {
  if (trials < 1) {
    throw std::invalid_argument("trials must be >= 1");
  }
  for (const Pulse& pulse : pulses) {
    check_pulse(pulse.volts, pulse.seconds, limits);
  }

  std::vector<double> mean_trace(pulses.size(), 0.0);
  const std::uint32_t total = params.n_switches;
  RandomStream rng(seed);

  for (std::uint32_t trial = 0; trial < trials; ++trial) {
    // Every switch is its own Bernoulli coin; only the flip probabilities are
    // shared with the implementation under test.
    std::uint32_t on = (total + 1) / 2;
    for (std::size_t step = 0; step < pulses.size(); ++step) {
      auto [p_on, p_off] =
          transition_probabilities(params, pulses[step].volts, pulses[step].seconds);
      // Same polarity gating as apply_pulse (part of the pulse semantics).
      if (pulses[step].volts > 0.0) {
        p_off = 0.0;
      } else if (pulses[step].volts < 0.0) {
        p_on = 0.0;
      }
      std::uint32_t up = 0;
      for (std::uint32_t sw = on; sw < total; ++sw) {
        up += rng.bernoulli(p_on) ? 1u : 0u;
      }
      std::uint32_t down = 0;
      for (std::uint32_t sw = 0; sw < on; ++sw) {
        down += rng.bernoulli(p_off) ? 1u : 0u;
      }
      on = on + up - down;
      mean_trace[step] += static_cast<double>(on) / static_cast<double>(total);
    }
  }

  for (double& value : mean_trace) {
    value /= static_cast<double>(trials);
  }
  return mean_trace;
}

} // namespace ktram
