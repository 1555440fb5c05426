/**
 * (C) Copyright 2026 the ktram-emu authors.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

// Preset calibration: searches (v_on, v_off, tau, beta) for parameter records
// that pass the pulse-sweep shape requirements with margin, and renders the
// frozen records as preset-file text. The numbers committed in
// preset_params() and data/presets.conf are outputs of this search; re-run
// with --search to reproduce or extend them.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ktram/config.hpp"
#include "ktram/device.hpp"
#include "ktram/synapse.hpp"

using namespace ktram;

namespace {

struct SweepReport {
  bool forward_strictly_up = true;
  bool reverse_strictly_down = true;
  double max_single_step = 0.0;      // largest |dn| from one activation pulse
  double max_read_step = 0.0;        // largest |dn| from one read pulse
  double mean_activation_step = 0.0; // mean |dn| over all activation pulses
  double read_to_act_ratio = 0.0;    // max_read_step / mean_activation_step
};

// The default trace: 20 forward and 20 reverse 0.8 V activation pulses at
// 50 ns, each followed by a 0.2 V read pulse.
SweepReport run_sweep(const DeviceParams& params) {
  SweepReport report;
  DeviceState state = DeviceState::mean_field(0.5);
  double activation_sum = 0.0;
  int activation_count = 0;

  auto pulse = [&](double volts) {
    const double before = state.on_fraction;
    state = apply_pulse(state, params, volts, 50e-9);
    return state.on_fraction - before;
  };

  for (int phase = 0; phase < 2; ++phase) {
    const double v_act = phase == 0 ? 0.8 : -0.8;
    for (int i = 0; i < 20; ++i) {
      const double dn_act = pulse(v_act);
      if (phase == 0 && dn_act <= 0.0) report.forward_strictly_up = false;
      if (phase == 1 && dn_act >= 0.0) report.reverse_strictly_down = false;
      activation_sum += std::abs(dn_act);
      ++activation_count;
      report.max_single_step = std::max(report.max_single_step, std::abs(dn_act));

      const double dn_read = pulse(0.2);
      report.max_read_step = std::max(report.max_read_step, std::abs(dn_read));
    }
  }
  report.mean_activation_step = activation_sum / activation_count;
  report.read_to_act_ratio = report.max_read_step / report.mean_activation_step;
  return report;
}

// Forgetful-state decay: |w| after 1000 forward reads at 0.2 V from w = 0.5.
double run_decay(const DeviceParams& params) {
  // w = 0.5 with mid-range total conductance (see weight docs): solve
  // n_a - n_b from the divider formula with n_a + n_b = 0.7.
  const double ratio = params.w_on / params.w_off;
  const double sum_n = 0.7;
  const double diff_n = (2.0 + (ratio - 1.0) * sum_n) * 0.5 / (ratio - 1.0);
  Synapse synapse = Synapse::mean_field((sum_n + diff_n) / 2.0, (sum_n - diff_n) / 2.0);
  for (int i = 0; i < 1000; ++i) {
    read(synapse, params, ReadPolarity::Forward, 0.2, 50e-9);
  }
  return std::abs(weight(synapse, params));
}

// Largest single-pulse |dn| over all start states (worst case n = 0 or 1).
double worst_single_pulse(const DeviceParams& params) {
  const auto fwd = transition_probabilities(params, 0.8, 50e-9);
  const auto rev = transition_probabilities(params, -0.8, 50e-9);
  return std::max(fwd.p_on, rev.p_off);
}

struct Scored {
  DeviceParams params;
  SweepReport sweep;
  double decay;
  double single;
  bool pass;
};

Scored score(const DeviceParams& params) {
  Scored s;
  s.params = params;
  s.sweep = run_sweep(params);
  s.decay = run_decay(params);
  s.single = worst_single_pulse(params);
  s.pass = s.sweep.forward_strictly_up && s.sweep.reverse_strictly_down &&
           s.sweep.read_to_act_ratio < 0.08 && // headroom under the 0.10 gate
           s.decay < 0.04 &&                   // headroom under the 0.05 gate
           s.single < 0.45;                    // headroom under the 0.5 gate
  return s;
}

void print_scored(const Scored& s) {
  std::printf("v_on=%.3f v_off=%.3f tau=%.0fns beta=%.2f | fwd_up=%d rev_down=%d "
              "read/act=%.4f decay=%.4f single=%.3f %s\n",
              s.params.v_on, s.params.v_off, s.params.tau * 1e9, s.params.beta,
              s.sweep.forward_strictly_up, s.sweep.reverse_strictly_down,
              s.sweep.read_to_act_ratio, s.decay, s.single, s.pass ? "PASS" : "fail");
}

void search() {
  std::printf("grid search over (v_on = v_off, tau, beta), requiring margin on every gate\n");
  for (double beta : {6.0, 6.5, 7.0, 7.25, 7.5, 8.0, 9.0, 10.0}) {
    for (double v_on : {0.68, 0.72, 0.74, 0.75, 0.77, 0.79, 0.80, 0.82, 0.86}) {
      for (double tau_ns : {140.0, 160.0, 200.0, 250.0, 280.0, 320.0, 360.0}) {
        DeviceParams params;
        params.v_on = v_on;
        params.v_off = v_on;
        params.tau = tau_ns * 1e-9;
        params.beta = beta;
        const Scored s = score(params);
        if (s.pass) {
          print_scored(s);
        }
      }
    }
  }
}

void check_presets() {
  for (DeviceVariant variant : {DeviceVariant::W, DeviceVariant::Sn, DeviceVariant::Cr}) {
    std::printf("[%s] ", std::string(variant_name(variant)).c_str());
    print_scored(score(preset_params(variant)));
  }
}

void emit_preset_file() {
  KeyValueFile file;
  for (DeviceVariant variant : {DeviceVariant::W, DeviceVariant::Sn, DeviceVariant::Cr}) {
    params_to_config(file, variant_name(variant), preset_params(variant));
  }
  std::printf("%s", file.serialize().c_str());
}

} // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "--emit";
  if (mode == "--search") {
    search();
  } else if (mode == "--check") {
    check_presets();
  } else if (mode == "--emit") {
    emit_preset_file();
  } else {
    std::fprintf(stderr, "usage: ktram-calibrate [--search | --check | --emit]\n");
    return 1;
  }
  return 0;
}
