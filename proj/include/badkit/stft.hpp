#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "badkit/fft.hpp"
#include "badkit/wave.hpp"

namespace badkit {

enum class WindowKind { Sine, Hann };

/// Analysis/synthesis taper. The half-cycle sine window is the default: it is
/// strictly positive and its square satisfies constant overlap-add at 50%
/// hop, so analysis + overlap-add synthesis reconstructs every sample.
inline std::vector<double> make_window(WindowKind kind, std::size_t n) {
  constexpr double pi = 3.141592653589793238462643383279502884;
  std::vector<double> w(n);
  switch (kind) {
    case WindowKind::Sine:
      for (std::size_t i = 0; i < n; ++i)
        w[i] = std::sin(pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
      break;
    case WindowKind::Hann:
      for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n)));
      break;
  }
  return w;
}

/// One-sided complex spectrogram: frames every hop = frame_len/2 samples,
/// 100 ms frames (4410 samples at 44.1 kHz -> 2206 bins).
struct ComplexSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  std::uint32_t sample_rate = 0;
  std::size_t source_len = 0;  // original sample count, for synthesis truncation
  std::string item_id;
  std::vector<double> window;
  std::vector<std::complex<double>> data;  // frames x bins, row-major

  std::complex<double>& at(std::size_t t, std::size_t k) { return data[t * bins + k]; }
  const std::complex<double>& at(std::size_t t, std::size_t k) const { return data[t * bins + k]; }
};

struct StftParams {
  double frame_seconds = 0.1;  // 100 ms frames, 50 ms hop
  WindowKind window = WindowKind::Sine;
};

/// STFT with end-padding so that frame count = ceil(len / hop).
inline ComplexSpectrogram stft(const WaveBuffer& wave, const StftParams& params = {}) {
  if (wave.samples.empty()) throw std::invalid_argument("stft: empty signal");
  if (wave.sample_rate == 0) throw std::invalid_argument("stft: zero sample rate");

  std::size_t frame_len =
      static_cast<std::size_t>(std::llround(params.frame_seconds * wave.sample_rate));
  if (frame_len < 2) frame_len = 2;
  frame_len += frame_len % 2;  // even, so hop = frame_len/2 is exact
  const std::size_t hop = frame_len / 2;

  ComplexSpectrogram spec;
  spec.frame_len = frame_len;
  spec.hop = hop;
  spec.sample_rate = wave.sample_rate;
  spec.source_len = wave.samples.size();
  spec.item_id = wave.item_id;
  spec.frames = (wave.samples.size() + hop - 1) / hop;
  spec.bins = frame_len / 2 + 1;
  spec.window = make_window(params.window, frame_len);
  spec.data.resize(spec.frames * spec.bins);

  fft::Plan plan(frame_len);
  std::vector<std::complex<double>> buf(frame_len);
  const std::size_t n = wave.samples.size();
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const std::size_t start = t * hop;
    for (std::size_t j = 0; j < frame_len; ++j) {
      const std::size_t idx = start + j;
      const double s = idx < n ? wave.samples[idx] : 0.0;
      buf[j] = {s * spec.window[j], 0.0};
    }
    plan.forward(buf);
    for (std::size_t k = 0; k < spec.bins; ++k) spec.at(t, k) = buf[k];
  }
  return spec;
}

/// Overlap-add synthesis. Each frame's one-sided spectrum is multiplied by
/// the (real, nonnegative) mask, mirrored by conjugate symmetry, inverse
/// transformed, windowed again and accumulated; the result is divided by the
/// accumulated squared-window envelope and truncated to the original length.
inline WaveBuffer istft_overlap_add(const ComplexSpectrogram& spec,
                                    const std::vector<double>& mask) {
  if (mask.size() != spec.frames * spec.bins)
    throw std::invalid_argument("istft_overlap_add: mask shape mismatch");
  if (spec.frames == 0) throw std::invalid_argument("istft_overlap_add: empty spectrogram");

  const std::size_t frame_len = spec.frame_len;
  const std::size_t span = (spec.frames - 1) * spec.hop + frame_len;
  std::vector<double> acc(span, 0.0), env(span, 0.0);

  fft::Plan plan(frame_len);
  std::vector<std::complex<double>> full(frame_len);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t k = 0; k < spec.bins; ++k) full[k] = spec.at(t, k) * mask[t * spec.bins + k];
    for (std::size_t k = 1; k + 1 < spec.bins; ++k) full[frame_len - k] = std::conj(full[k]);
    plan.inverse(full);
    const std::size_t start = t * spec.hop;
    for (std::size_t j = 0; j < frame_len; ++j) {
      acc[start + j] += full[j].real() * spec.window[j];
      env[start + j] += spec.window[j] * spec.window[j];
    }
  }

  WaveBuffer out;
  out.sample_rate = spec.sample_rate;
  out.item_id = spec.item_id;
  out.samples.resize(spec.source_len);
  for (std::size_t i = 0; i < spec.source_len && i < span; ++i)
    out.samples[i] = env[i] > 0.0 ? acc[i] / env[i] : 0.0;
  return out;
}

/// Identity-mask synthesis.
inline WaveBuffer istft_overlap_add(const ComplexSpectrogram& spec) {
  return istft_overlap_add(spec, std::vector<double>(spec.frames * spec.bins, 1.0));
}

/// Reconstruction quality in dB, 10*log10(signal power / error power).
inline double snr_db(const std::vector<double>& reference, const std::vector<double>& test) {
  if (reference.size() != test.size()) throw std::invalid_argument("snr_db: length mismatch");
  double sig = 0.0, err = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    sig += reference[i] * reference[i];
    const double d = reference[i] - test[i];
    err += d * d;
  }
  if (err == 0.0) return 300.0;  // numerically exact
  if (sig == 0.0) return 0.0;
  return 10.0 * std::log10(sig / err);
}

}  // namespace badkit
