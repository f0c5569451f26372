#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace badkit {

// HTK-style mel scale.
inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular mel filter bank over one-sided FFT bins. Each row rises
/// linearly in bin index from the previous band center to its own (apex
/// exactly 1) and falls to the next, so rows have a single apex of value 1
/// and contiguous support.
struct FilterBank {
  std::size_t n_mels = 0;
  std::size_t bins = 0;
  double fmin = 0.0, fmax = 0.0;
  std::uint32_t sample_rate = 0;
  std::vector<double> matrix;  // n_mels x bins, row-major

  struct Band {
    double low_hz, center_hz, high_hz;
  };
  std::vector<Band> bands;

  // support of row m: bins [begin, end)
  std::vector<std::size_t> support_begin, support_end;

  double weight(std::size_t m, std::size_t k) const { return matrix[m * bins + k]; }
  std::size_t frame_len() const { return 2 * (bins - 1); }
  double bin_hz(std::size_t k) const {
    return static_cast<double>(k) * sample_rate / static_cast<double>(frame_len());
  }
};

inline FilterBank mel_filterbank_matrix(std::size_t bins, std::size_t n_mels, double fmin,
                                        double fmax, std::uint32_t sample_rate) {
  if (n_mels < 1) throw std::invalid_argument("mel_filterbank_matrix: n_mels must be >= 1");
  if (bins < 3) throw std::invalid_argument("mel_filterbank_matrix: too few bins");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0))
    throw std::invalid_argument("mel_filterbank_matrix: invalid frequency range");

  FilterBank fb;
  fb.n_mels = n_mels;
  fb.bins = bins;
  fb.fmin = fmin;
  fb.fmax = fmax;
  fb.sample_rate = sample_rate;
  fb.matrix.assign(n_mels * bins, 0.0);
  fb.bands.resize(n_mels);
  fb.support_begin.resize(n_mels);
  fb.support_end.resize(n_mels);

  // n_mels + 2 points uniformly spaced in mel; centers are points 1..n_mels.
  const double mel_lo = hz_to_mel(fmin), mel_hi = hz_to_mel(fmax);
  std::vector<double> point_hz(n_mels + 2);
  for (std::size_t i = 0; i < point_hz.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_mels + 1);
    point_hz[i] = mel_to_hz(mel);
  }

  const double frame_len = static_cast<double>(2 * (bins - 1));
  auto bin_of = [&](double hz) {
    long k = std::lround(hz * frame_len / sample_rate);
    if (k < 0) k = 0;
    if (k > static_cast<long>(bins - 1)) k = static_cast<long>(bins - 1);
    return static_cast<std::size_t>(k);
  };

  for (std::size_t m = 0; m < n_mels; ++m) {
    fb.bands[m] = {point_hz[m], point_hz[m + 1], point_hz[m + 2]};
    const std::size_t left = bin_of(point_hz[m]);
    const std::size_t center = bin_of(point_hz[m + 1]);
    const std::size_t right = bin_of(point_hz[m + 2]);
    if (!(left < center && center < right))
      throw std::invalid_argument(
          "mel_filterbank_matrix: FFT resolution too coarse for band " + std::to_string(m));
    double* row = fb.matrix.data() + m * bins;
    for (std::size_t k = left + 1; k < center; ++k)
      row[k] = static_cast<double>(k - left) / static_cast<double>(center - left);
    row[center] = 1.0;
    for (std::size_t k = center + 1; k < right; ++k)
      row[k] = static_cast<double>(right - k) / static_cast<double>(right - center);
    fb.support_begin[m] = left + 1;
    fb.support_end[m] = right;
  }
  return fb;
}

}  // namespace badkit
