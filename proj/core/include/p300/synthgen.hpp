#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "p300/data_model.hpp"

namespace p300 {

enum class NoiseModel { White, PinkApprox };

std::string to_string(NoiseModel model);
NoiseModel parse_noise_model(std::string_view name);

// Synthetic oddball session. Target onsets carry a Gaussian bump
// amplitude * weight_c * exp(-(t - latency - jitter)^2 / (2 width^2)) on each
// channel c; non-target onsets carry nothing. Onsets are isi_s apart in a
// seeded random order, starting lead_s into the recording.
struct SynthConfig {
  int n_channels = 8;
  double sampling_rate_hz = 256.0;
  int n_target = 20;
  int n_nontarget = 60;
  double p300_amplitude = 1.0;
  double p300_latency_s = 0.3;
  double p300_width_s = 0.1;
  // Empty selects the default profile (parietal-heavy for 8 channels, flat
  // otherwise).
  std::vector<double> channel_weights;
  // Standard deviation of the per-channel, per-trial latency jitter.
  double latency_jitter_s = 0.02;
  NoiseModel noise = NoiseModel::White;
  double noise_std = 1.0;
  double isi_s = 1.0;
  double window_s = 1.0;
  double lead_s = 1.0;
  std::uint64_t seed = 0;

  // ConfigError on an invalid combination.
  void validate() const;
  std::vector<double> resolved_weights() const;
  std::vector<std::string> channel_names() const;
};

struct SyntheticSession {
  Recording recording;
  StimulusLog log;
};

SyntheticSession generate_oddball(const SynthConfig& config);

}  // namespace p300
