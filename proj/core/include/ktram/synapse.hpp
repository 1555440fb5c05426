/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef KTRAM_SYNAPSE_HPP
#define KTRAM_SYNAPSE_HPP

#include "ktram/device.hpp"
#include "ktram/rng.hpp"

namespace ktram {

/**
 * Two serially connected memristors forming a voltage divider.
 *
 * The synaptic weight is the normalized conductance imbalance
 * w = (G_a - G_b) / (G_a + G_b), always inside (-1, 1) because the per-switch
 * OFF conductance is strictly positive.
 */
struct Synapse {
  DeviceState dev_a;
  DeviceState dev_b;

  static Synapse mean_field(double n_a, double n_b) {
    return Synapse{DeviceState::mean_field(n_a), DeviceState::mean_field(n_b)};
  }
  static Synapse stochastic(std::uint32_t count_a, std::uint32_t count_b) {
    return Synapse{DeviceState::stochastic(count_a), DeviceState::stochastic(count_b)};
  }
};

/// Non-mutating weight inspection (the physical read below disturbs state).
double weight(const Synapse& synapse, const DeviceParams& params);

enum class ReadPolarity : std::uint8_t { Forward, Reverse };

/// Feedback direction for write pulses.
enum class WriteDirection : std::uint8_t { Up, Down };

struct ReadResult {
  double weight; ///< weight before the read disturbed the pair
  double v_a;    ///< voltage share dropped across device A [V]
  double v_b;    ///< voltage share dropped across device B [V]
};

/**
 * One read pulse across the divider.
 *
 * The pair splits v_read according to series-divider physics: device A drops
 * v_read * G_b / (G_a + G_b) and device B drops the complement, so the weaker
 * device always receives the larger share. Forward polarity drives both
 * devices toward ON, which equalizes the pair (|w| decays toward the
 * forgetful state) and raises total conductance. Reverse polarity drives both
 * toward OFF and lowers total conductance.
 *
 * Returns the pre-read weight along with the shares, and mutates the pair.
 */
ReadResult read(Synapse& synapse, const DeviceParams& params, ReadPolarity polarity,
                double v_read, double dt, RandomStream* rng = nullptr,
                const PulseLimits& limits = PulseLimits{});

/**
 * One write pulse across a single memristor of the pair.
 *
 * Up applies the full v_write across device A in its ON direction (weight
 * rises); Down applies it across device B (weight falls). The other device is
 * untouched.
 */
void write(Synapse& synapse, const DeviceParams& params, WriteDirection direction,
           double v_write, double dt, RandomStream* rng = nullptr,
           const PulseLimits& limits = PulseLimits{});

} // namespace ktram

#endif // KTRAM_SYNAPSE_HPP
