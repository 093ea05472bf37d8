#include "p300/synthgen.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "p300/errors.hpp"
#include "p300/rng.hpp"

namespace p300 {

namespace {

const std::array<const char*, 8> kEightChannelNames = {"Fz", "Cz", "Pz", "Oz",
                                                        "P3", "P4", "O1", "O2"};
const std::array<double, 8> kEightChannelWeights = {0.5, 0.8, 1.0, 0.6, 0.8, 0.8, 0.6, 0.6};

// Poles of the first-order stages summed into the pink-like background.
const std::array<double, 3> kPinkPoles = {0.9, 0.99, 0.999};

}  // namespace

std::string to_string(NoiseModel model) {
  return model == NoiseModel::White ? "white" : "pink";
}

NoiseModel parse_noise_model(std::string_view name) {
  if (name == "white") return NoiseModel::White;
  if (name == "pink") return NoiseModel::PinkApprox;
  throw ConfigError("unknown noise model '" + std::string(name) + "' (expected white or pink)");
}

void SynthConfig::validate() const {
  if (n_channels < 1) throw ConfigError("need at least one channel");
  if (!(sampling_rate_hz > 0.0)) throw ConfigError("sampling rate must be positive");
  if (n_target < 0 || n_nontarget < 0 || n_target + n_nontarget < 1) {
    throw ConfigError("need at least one stimulus");
  }
  if (!(p300_width_s > 0.0) || !(p300_latency_s >= 0.0)) {
    throw ConfigError("P300 width must be positive and latency non-negative");
  }
  if (!(p300_latency_s + 3.0 * p300_width_s < window_s)) {
    throw ConfigError("latency + 3 * width must fall inside the window");
  }
  if (!channel_weights.empty() &&
      static_cast<int>(channel_weights.size()) != n_channels) {
    throw ConfigError("channel weight count must match channel count");
  }
  for (const double w : channel_weights) {
    if (!std::isfinite(w)) throw ConfigError("channel weights must be finite");
  }
  if (!std::isfinite(p300_amplitude)) throw ConfigError("amplitude must be finite");
  if (!(noise_std >= 0.0) || !(latency_jitter_s >= 0.0)) {
    throw ConfigError("noise and jitter must be non-negative");
  }
  if (!(isi_s > 0.0) || !(lead_s >= 0.0)) {
    throw ConfigError("ISI must be positive and lead non-negative");
  }
  window_samples(sampling_rate_hz, window_s);
}

std::vector<double> SynthConfig::resolved_weights() const {
  if (!channel_weights.empty()) return channel_weights;
  if (n_channels == 8) return {kEightChannelWeights.begin(), kEightChannelWeights.end()};
  return std::vector<double>(static_cast<std::size_t>(n_channels), 1.0);
}

std::vector<std::string> SynthConfig::channel_names() const {
  if (n_channels == 8) return {kEightChannelNames.begin(), kEightChannelNames.end()};
  std::vector<std::string> names;
  for (int c = 0; c < n_channels; ++c) names.push_back("ch" + std::to_string(c + 1));
  return names;
}

SyntheticSession generate_oddball(const SynthConfig& config) {
  config.validate();
  const double fs = config.sampling_rate_hz;
  const Index width = window_samples(fs, config.window_s);
  const int n_stimuli = config.n_target + config.n_nontarget;

  SyntheticSession out;
  auto& log = out.log;
  log.labels.assign(static_cast<std::size_t>(config.n_target), kTarget);
  log.labels.insert(log.labels.end(), static_cast<std::size_t>(config.n_nontarget), kNonTarget);
  Rng order_rng(derive_seed(config.seed, "order"));
  order_rng.shuffle(std::span<int>(log.labels));
  for (int i = 0; i < n_stimuli; ++i) {
    log.onsets.push_back(std::llround((config.lead_s + i * config.isi_s) * fs));
  }
  const Index n_samples = log.onsets.back() + width + std::llround(config.lead_s * fs);

  auto& rec = out.recording;
  rec.sampling_rate_hz = fs;
  rec.channel_names = config.channel_names();
  rec.samples = Matrix::Zero(config.n_channels, n_samples);

  for (int c = 0; c < config.n_channels; ++c) {
    Rng noise_rng(derive_seed(config.seed, "noise", static_cast<std::uint64_t>(c)));
    auto row = rec.samples.row(c);
    if (config.noise == NoiseModel::White) {
      for (Index t = 0; t < n_samples; ++t) row(t) = config.noise_std * noise_rng.normal();
    } else {
      // White plus three unit-variance AR(1) stages started from stationarity.
      std::array<double, kPinkPoles.size()> state{};
      for (auto& s : state) s = noise_rng.normal();
      const double scale = config.noise_std / std::sqrt(1.0 + kPinkPoles.size());
      for (Index t = 0; t < n_samples; ++t) {
        double value = noise_rng.normal();
        for (std::size_t k = 0; k < kPinkPoles.size(); ++k) {
          const double a = kPinkPoles[k];
          if (t > 0) state[k] = a * state[k] + std::sqrt(1.0 - a * a) * noise_rng.normal();
          value += state[k];
        }
        row(t) = scale * value;
      }
    }
  }

  const auto weights = config.resolved_weights();
  Rng jitter_rng(derive_seed(config.seed, "jitter"));
  const double two_var = 2.0 * config.p300_width_s * config.p300_width_s;
  const auto reach = static_cast<Index>(std::ceil(5.0 * config.p300_width_s * fs));
  for (int i = 0; i < n_stimuli; ++i) {
    if (log.labels[static_cast<std::size_t>(i)] != kTarget) continue;
    const auto onset = log.onsets[static_cast<std::size_t>(i)];
    for (int c = 0; c < config.n_channels; ++c) {
      const double jitter = config.latency_jitter_s * jitter_rng.normal();
      const double peak_s = config.p300_latency_s + jitter;
      const double amplitude = config.p300_amplitude * weights[static_cast<std::size_t>(c)];
      const auto centre = onset + static_cast<Index>(std::llround(peak_s * fs));
      const Index first = std::max<Index>(0, centre - reach);
      const Index last = std::min<Index>(n_samples - 1, centre + reach);
      for (Index t = first; t <= last; ++t) {
        const double dt = static_cast<double>(t - onset) / fs - peak_s;
        rec.samples(c, t) += amplitude * std::exp(-dt * dt / two_var);
      }
    }
  }
  return out;
}

}  // namespace p300
