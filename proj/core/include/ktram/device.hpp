/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef KTRAM_DEVICE_HPP
#define KTRAM_DEVICE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ktram/rng.hpp"

namespace ktram {

/**
 * Metastable-switch ensemble parameters of one memristor.
 *
 * A device is modeled as n_switches two-state switches. Each switch flips
 * OFF->ON with probability p_on and ON->OFF with probability p_off per pulse
 * (see transition_probabilities). Conductance is the ensemble sum, so it is
 * bounded by [n_switches*w_off, n_switches*w_on].
 */
struct DeviceParams {
  std::uint32_t n_switches = 1000; ///< switches per device
  double w_on = 500e-9;            ///< ON conductance per switch [S]
  double w_off = 50e-9;            ///< OFF conductance per switch [S]
  double v_on = 0.77;              ///< forward switching threshold [V]
  double v_off = 0.77;             ///< reverse switching threshold [V]
  double tau = 200e-9;             ///< characteristic switching time [s]
  double beta = 8.0;               ///< logistic steepness [1/V]
};

/// Throws std::invalid_argument naming the first violated constraint.
void validate(const DeviceParams& params);

/// Commercial device variants, distinguished by the metal in the active layer.
enum class DeviceVariant { W, Sn, Cr };

/**
 * Fixed parameter record for a device variant.
 *
 * Values are frozen outputs of the calibration search in tools/calibrate
 * (see data/presets.conf for the file form). They reproduce the qualitative
 * pulse-response shape -- bounded, bidirectional, incremental -- and carry
 * no claim of being measured device data.
 */
DeviceParams preset_params(DeviceVariant variant);

/// Parses "W", "Sn" or "Cr"; throws std::invalid_argument listing the valid names.
DeviceVariant variant_from_name(std::string_view name);
std::string_view variant_name(DeviceVariant variant);

struct TransitionProbabilities {
  double p_on;  ///< OFF->ON probability for one switch, this pulse
  double p_off; ///< ON->OFF probability for one switch, this pulse
};

/**
 * Per-switch flip probabilities for a pulse of amplitude `volts` and width `dt`:
 *
 *   r     = clamp(dt / tau, 0, 1)
 *   p_on  = r * sigmoid(beta * ( volts - v_on ))
 *   p_off = r * sigmoid(beta * (-volts - v_off))
 *
 * Positive voltage drives switches ON, negative drives them OFF. Throws
 * std::invalid_argument on non-finite volts or non-positive/non-finite dt.
 */
TransitionProbabilities transition_probabilities(const DeviceParams& params, double volts,
                                                 double dt);

enum class UpdateMode : std::uint8_t { MeanField = 0, Stochastic = 1 };

/// Guard rails against unit mistakes (e.g. ms passed where ns was meant).
struct PulseLimits {
  double max_abs_volts = 1.5; ///< [V]
  double max_dt = 1.0e-6;     ///< [s]
};

/**
 * State of one memristor. MeanField tracks the expected ON fraction as a
 * continuous value; Stochastic tracks the integer ON switch count and needs
 * a RandomStream on every pulse.
 */
struct DeviceState {
  UpdateMode mode = UpdateMode::MeanField;
  double on_fraction = 0.5;     ///< valid in MeanField mode, in [0,1]
  std::uint32_t on_count = 0;   ///< valid in Stochastic mode, in [0,n_switches]

  static DeviceState mean_field(double on_fraction);
  static DeviceState stochastic(std::uint32_t on_count);

  /// ON fraction regardless of mode.
  double fraction(const DeviceParams& params) const;
};

/// G = n*N*w_on + (1-n)*N*w_off, always in [N*w_off, N*w_on].
double conductance(const DeviceState& state, const DeviceParams& params);

/**
 * Applies one voltage pulse and returns the new state.
 *
 * MeanField: n' = n + (1-n)*p_on - n*p_off, clamped to [0,1].
 * Stochastic: OFF->ON flips ~ Binomial(N-k, p_on), ON->OFF ~ Binomial(k, p_off),
 * drawn from `rng` (required in this mode).
 *
 * A pulse recruits only its own polarity's transition: positive volts use
 * p_on alone, negative volts p_off alone, zero bias both. A positive pulse
 * therefore never lowers the ON fraction, and a write on a saturated device
 * is an exact no-op.
 *
 * Throws PulseRangeError when |volts| or dt falls outside `limits`.
 */
DeviceState apply_pulse(const DeviceState& state, const DeviceParams& params, double volts,
                        double dt, RandomStream* rng = nullptr,
                        const PulseLimits& limits = PulseLimits{});

/// One entry of a pulse train.
struct Pulse {
  double volts;
  double seconds;
};

/**
 * Independent Monte Carlo oracle.
 *
 * Runs `trials` stochastic trajectories from an ON fraction of 0.5 and returns
 * the per-step trial-mean ON fraction. Each trajectory simulates every switch
 * as its own Bernoulli coin; the only code shared with the mean-field update
 * path is transition_probabilities. Intended for cross-checking apply_pulse,
 * not for speed.
 */
std::vector<double> mc_trace_oracle(const DeviceParams& params, std::span<const Pulse> pulses,
                                    std::uint32_t trials, std::uint64_t seed,
                                    const PulseLimits& limits = PulseLimits{});

} // namespace ktram

#endif // KTRAM_DEVICE_HPP
