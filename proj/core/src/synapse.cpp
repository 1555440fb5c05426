/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "ktram/synapse.hpp"

#include <stdexcept>

namespace ktram {

double weight(const Synapse& synapse, const DeviceParams& params) {
  const double g_a = conductance(synapse.dev_a, params);
  const double g_b = conductance(synapse.dev_b, params);
  return (g_a - g_b) / (g_a + g_b);
}

ReadResult read(Synapse& synapse, const DeviceParams& params, ReadPolarity polarity,
                double v_read, double dt, RandomStream* rng, const PulseLimits& limits) {
  if (!(v_read > 0.0)) {
    throw std::invalid_argument("v_read must be > 0");
  }
  const double g_a = conductance(synapse.dev_a, params);
  const double g_b = conductance(synapse.dev_b, params);
  const double g_sum = g_a + g_b;
  // Series divider: each device drops a share proportional to the other's
  // conductance, so the weaker device gets the larger share.
  const double v_a = v_read * g_b / g_sum;
  const double v_b = v_read * g_a / g_sum;
  const double w_before = (g_a - g_b) / g_sum;

  const double sign = (polarity == ReadPolarity::Forward) ? 1.0 : -1.0;
  synapse.dev_a = apply_pulse(synapse.dev_a, params, sign * v_a, dt, rng, limits);
  synapse.dev_b = apply_pulse(synapse.dev_b, params, sign * v_b, dt, rng, limits);

  return ReadResult{w_before, v_a, v_b};
}

void write(Synapse& synapse, const DeviceParams& params, WriteDirection direction,
           double v_write, double dt, RandomStream* rng, const PulseLimits& limits) {
  if (direction == WriteDirection::Up) {
    synapse.dev_a = apply_pulse(synapse.dev_a, params, v_write, dt, rng, limits);
  } else {
    synapse.dev_b = apply_pulse(synapse.dev_b, params, v_write, dt, rng, limits);
  }
}

} // namespace ktram
