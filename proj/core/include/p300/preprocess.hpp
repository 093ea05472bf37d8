#pragma once

#include <complex>
#include <span>
#include <vector>

#include "p300/data_model.hpp"

namespace p300 {

inline constexpr double kDefaultBandLowHz = 0.23;
inline constexpr double kDefaultBandHighHz = 30.0;
inline constexpr int kDefaultBandOrder = 4;

// Transposed direct-form II biquad, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct FilterCoefficients {
  std::vector<Biquad> sections;
  double low_cut_hz = 0.0;
  double high_cut_hz = 0.0;
  int order = 0;
  double sampling_rate_hz = 0.0;

  // Complex frequency response of the cascade at f Hz.
  std::complex<double> response(double frequency_hz) const;
  double magnitude(double frequency_hz) const { return std::abs(response(frequency_hz)); }
};

// Digital Butterworth bandpass: analog lowpass prototype of the given order,
// lowpass-to-bandpass transform, bilinear transform with pre-warped band
// edges. The result has 2*order poles in `order` second-order sections, each
// with one zero at DC and one at Nyquist. Gain is 1 at the warped band centre.
FilterCoefficients design_bandpass(double low_hz, double high_hz, int order,
                                   double sampling_rate_hz);

// Single-channel filtering. The causal path starts from rest. The zero-phase
// path pads both ends by odd reflection of 3 * (2 * sections + 1) samples,
// starts each pass from the steady state of its first sample, and runs the
// cascade forward then backward.
std::vector<double> filter_signal(const FilterCoefficients& coeffs,
                                  std::span<const double> signal, bool zero_phase);

// Filters every channel independently. RateError if the rates differ.
Recording apply_filter(const FilterCoefficients& coeffs, const Recording& rec,
                       bool zero_phase = true);

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct NormalizedDataset {
  ChannelSubtrialDataset dataset;
  NormStats stats;
};

// Per-row zero mean, unit population variance. DegenerateRowError on a
// constant row.
NormalizedDataset zscore_normalize(const ChannelSubtrialDataset& ds);

// Alternative scope: normalize each channel of the continuous recording.
Recording zscore_channels(const Recording& rec);

}  // namespace p300
