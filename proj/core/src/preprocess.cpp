#include "p300/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "p300/errors.hpp"

namespace p300 {

namespace {

using Complex = std::complex<double>;

void run_cascade(const std::vector<Biquad>& sections, std::vector<double>& x,
                 bool steady_start) {
  if (x.empty()) return;
  double stage_input = x.front();
  for (const auto& s : sections) {
    double z1 = 0.0;
    double z2 = 0.0;
    if (steady_start) {
      const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
      const double out = gain * stage_input;
      z2 = s.b2 * stage_input - s.a2 * out;
      z1 = s.b1 * stage_input - s.a1 * out + z2;
      stage_input = out;
    }
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

}  // namespace

std::complex<double> FilterCoefficients::response(double frequency_hz) const {
  const double omega = 2.0 * std::numbers::pi * frequency_hz / sampling_rate_hz;
  const Complex z1 = std::polar(1.0, -omega);
  const Complex z2 = z1 * z1;
  Complex h(1.0, 0.0);
  for (const auto& s : sections) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

FilterCoefficients design_bandpass(double low_hz, double high_hz, int order,
                                   double sampling_rate_hz) {
  if (!(sampling_rate_hz > 0.0)) throw DesignError("sampling rate must be positive");
  const double nyquist = sampling_rate_hz / 2.0;
  if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < nyquist)) {
    throw DesignError("band edges must satisfy 0 < low < high < fs/2");
  }
  if (order < 2 || order % 2 != 0) {
    throw DesignError("order must be an even integer >= 2, got " + std::to_string(order));
  }

  const double fs2 = 2.0 * sampling_rate_hz;
  const double warped_low = fs2 * std::tan(std::numbers::pi * low_hz / sampling_rate_hz);
  const double warped_high = fs2 * std::tan(std::numbers::pi * high_hz / sampling_rate_hz);
  const double centre_sq = warped_low * warped_high;
  const double bandwidth = warped_high - warped_low;

  std::vector<Complex> upper_poles;
  for (int k = 1; k <= order; ++k) {
    const double angle = std::numbers::pi * (2.0 * k + order - 1.0) / (2.0 * order);
    const Complex prototype = std::polar(1.0, angle);
    const Complex half = prototype * bandwidth / 2.0;
    const Complex root = std::sqrt(half * half - centre_sq);
    for (const Complex s : {half + root, half - root}) {
      const Complex z = (fs2 + s) / (fs2 - s);
      if (std::abs(z) >= 1.0) throw DesignError("designed pole is not stable");
      if (z.imag() > 0.0) upper_poles.push_back(z);
    }
  }
  if (static_cast<int>(upper_poles.size()) != order) {
    throw DesignError("unexpected pole configuration");
  }
  std::sort(upper_poles.begin(), upper_poles.end(),
            [](const Complex& a, const Complex& b) { return std::abs(a) < std::abs(b); });

  FilterCoefficients out;
  out.low_cut_hz = low_hz;
  out.high_cut_hz = high_hz;
  out.order = order;
  out.sampling_rate_hz = sampling_rate_hz;
  for (const Complex& p : upper_poles) {
    out.sections.push_back({1.0, 0.0, -1.0, -2.0 * p.real(), std::norm(p)});
  }

  const double centre_hz =
      sampling_rate_hz / std::numbers::pi * std::atan(std::sqrt(centre_sq) / fs2);
  const double section_gain = std::pow(1.0 / out.magnitude(centre_hz), 1.0 / order);
  for (auto& s : out.sections) {
    s.b0 *= section_gain;
    s.b2 *= section_gain;
  }
  return out;
}

std::vector<double> filter_signal(const FilterCoefficients& coeffs,
                                  std::span<const double> signal, bool zero_phase) {
  std::vector<double> x(signal.begin(), signal.end());
  if (!zero_phase) {
    run_cascade(coeffs.sections, x, false);
    return x;
  }
  const std::size_t n = x.size();
  if (n == 0) return x;
  const std::size_t pad =
      std::min<std::size_t>(3 * (2 * coeffs.sections.size() + 1), n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

  run_cascade(coeffs.sections, ext, true);
  std::reverse(ext.begin(), ext.end());
  run_cascade(coeffs.sections, ext, true);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Recording apply_filter(const FilterCoefficients& coeffs, const Recording& rec,
                       bool zero_phase) {
  if (std::abs(coeffs.sampling_rate_hz - rec.sampling_rate_hz) >
      1e-9 * rec.sampling_rate_hz) {
    throw RateError("filter designed for " + std::to_string(coeffs.sampling_rate_hz) +
                    " Hz applied to a " + std::to_string(rec.sampling_rate_hz) +
                    " Hz recording");
  }
  Recording out = rec;
  std::vector<double> channel(static_cast<std::size_t>(rec.n_timepoints()));
  for (Index c = 0; c < rec.n_channels(); ++c) {
    for (Index t = 0; t < rec.n_timepoints(); ++t) {
      channel[static_cast<std::size_t>(t)] = rec.samples(c, t);
    }
    const auto filtered = filter_signal(coeffs, channel, zero_phase);
    for (Index t = 0; t < rec.n_timepoints(); ++t) {
      out.samples(c, t) = filtered[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

namespace {

// Population mean and standard deviation of a row.
std::pair<double, double> row_moments(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double mean = row.mean();
  const double var = (row.array() - mean).square().mean();
  return {mean, std::sqrt(var)};
}

bool is_degenerate(double mean, double sd) {
  return !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
}

}  // namespace

NormalizedDataset zscore_normalize(const ChannelSubtrialDataset& ds) {
  NormalizedDataset out{ds, {}};
  out.stats.mean.reserve(static_cast<std::size_t>(ds.rows()));
  out.stats.stddev.reserve(static_cast<std::size_t>(ds.rows()));
  for (Index r = 0; r < ds.rows(); ++r) {
    const auto [mean, sd] = row_moments(ds.X.row(r));
    if (is_degenerate(mean, sd)) {
      throw DegenerateRowError("row " + std::to_string(r) + " has zero variance");
    }
    out.dataset.X.row(r) = (ds.X.row(r).array() - mean) / sd;
    out.stats.mean.push_back(mean);
    out.stats.stddev.push_back(sd);
  }
  return out;
}

Recording zscore_channels(const Recording& rec) {
  Recording out = rec;
  for (Index c = 0; c < rec.n_channels(); ++c) {
    const auto [mean, sd] = row_moments(rec.samples.row(c));
    if (is_degenerate(mean, sd)) {
      throw DegenerateRowError("channel '" + rec.channel_names[static_cast<std::size_t>(c)] +
                               "' has zero variance");
    }
    out.samples.row(c) = (rec.samples.row(c).array() - mean) / sd;
  }
  return out;
}

}  // namespace p300
