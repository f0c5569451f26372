#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "badkit/fbank.hpp"
#include "badkit/mel.hpp"
#include "badkit/rng.hpp"
#include "badkit/stft.hpp"
#include "badkit/trainer.hpp"
#include "badkit/wave.hpp"

// Synthetic chirp-over-noise corpus for demos and end-to-end tests:
// negatives are white noise, positives add a linear chirp with a known
// time-frequency support, at a configurable local SNR.
namespace badkit::synth {

struct SynthParams {
  std::uint32_t sample_rate = 8000;
  double duration_s = 1.0;
  double noise_rms = 0.05;
  double chirp_snr_db = 0.0;  // chirp RMS vs noise RMS inside the chirp window
  double f_start_min = 900.0, f_start_max = 1500.0;  // Hz
  double sweep_min = 400.0, sweep_max = 900.0;       // Hz swept upward
  double onset_min_s = 0.15, onset_max_s = 0.35;
  double chirp_dur_min_s = 0.35, chirp_dur_max_s = 0.55;
  std::size_t n_mels = 56;
  double fmin = 50.0;  // fmax defaults to Nyquist
};

/// Ground-truth chirp box; meaningful for positives only.
struct ChirpInfo {
  bool positive = false;
  double t0 = 0.0, t1 = 0.0;  // seconds
  double f0 = 0.0, f1 = 0.0;  // Hz, f0 < f1
};

struct SynthItem {
  WaveBuffer wave;
  int label = 0;
  ChirpInfo info;
};

inline SynthItem synth_item(std::uint64_t seed, std::uint64_t index, bool positive,
                            const SynthParams& p = {}) {
  rng::Engine gen = rng::make_engine(seed, 0x51000000ull + index);
  const std::size_t n = static_cast<std::size_t>(p.duration_s * p.sample_rate);
  SynthItem item;
  item.label = positive ? 1 : 0;
  item.wave.sample_rate = p.sample_rate;
  item.wave.item_id = (positive ? "pos" : "neg") + std::to_string(index);
  item.wave.samples.resize(n);
  for (auto& s : item.wave.samples) s = p.noise_rms * rng::normal(gen);

  if (positive) {
    const double f0 = rng::uniform_range(gen, p.f_start_min, p.f_start_max);
    const double sweep = rng::uniform_range(gen, p.sweep_min, p.sweep_max);
    const double t0 = rng::uniform_range(gen, p.onset_min_s, p.onset_max_s);
    const double dur = rng::uniform_range(gen, p.chirp_dur_min_s, p.chirp_dur_max_s);
    const double t1 = std::min(t0 + dur, p.duration_s);
    item.info = {true, t0, t1, f0, f0 + sweep};

    const std::size_t i0 = static_cast<std::size_t>(t0 * p.sample_rate);
    const std::size_t i1 = std::min(n, static_cast<std::size_t>(t1 * p.sample_rate));
    const double rate = sweep / (t1 - t0);
    std::vector<double> chirp(i1 - i0);
    double energy = 0.0;
    constexpr double pi = 3.141592653589793238462643383279502884;
    for (std::size_t i = i0; i < i1; ++i) {
      const double t = static_cast<double>(i) / p.sample_rate - t0;
      const double phase = 2.0 * pi * (f0 * t + 0.5 * rate * t * t);
      const double env = 0.5 * (1.0 - std::cos(2.0 * pi * t / (t1 - t0)));  // Hann envelope
      chirp[i - i0] = env * std::sin(phase);
      energy += chirp[i - i0] * chirp[i - i0];
    }
    const double rms = std::sqrt(energy / static_cast<double>(chirp.size()));
    const double target = p.noise_rms * std::pow(10.0, p.chirp_snr_db / 20.0);
    const double scale = rms > 0.0 ? target / rms : 0.0;
    for (std::size_t i = i0; i < i1; ++i) item.wave.samples[i] += scale * chirp[i - i0];
  }
  return item;
}

inline FbankImage features_for(const WaveBuffer& wave, const SynthParams& p = {}) {
  const ComplexSpectrogram spec = stft(wave);
  const FilterBank fb =
      mel_filterbank_matrix(spec.bins, p.n_mels, p.fmin, wave.sample_rate / 2.0, wave.sample_rate);
  FbankImage img = fbank(spec, fb);
  img.item_id = wave.item_id;
  return img;
}

struct SynthDataset {
  DataSet data;
  std::vector<ChirpInfo> info;  // aligned with data
};

/// n items, alternating positive/negative, shuffled by the seed, with
/// features extracted through the real DSP front end.
inline SynthDataset synth_dataset(std::uint64_t seed, std::size_t n, const SynthParams& p = {}) {
  SynthDataset out;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng::Engine gen = rng::make_engine(seed, 0x5d5d);
  rng::shuffle(order, gen);
  out.data.resize(n);
  out.info.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = order[i] % 2 == 0;
    SynthItem item = synth_item(seed, i, positive, p);
    out.info[i] = item.info;
    LabeledImage li;
    li.item_id = item.wave.item_id;
    li.label = item.label;
    li.image = features_for(item.wave, p);
    out.data[i] = std::move(li);
  }
  return out;
}

/// Image-space support box of an item's chirp, for saliency checks:
/// frames whose window overlaps [t0,t1], bands whose (low,high) range
/// intersects [f0,f1].
struct SupportBox {
  std::size_t t_begin = 0, t_end = 0;  // frame range [begin, end)
  std::size_t m_begin = 0, m_end = 0;  // band range [begin, end)
};

inline SupportBox support_box(const ChirpInfo& info, const FbankImage& image,
                              const FilterBank& fb, double hop_seconds = 0.05) {
  SupportBox box;
  const auto clamp_frame = [&](double t) {
    const long f = static_cast<long>(t / hop_seconds);
    return static_cast<std::size_t>(std::clamp<long>(f, 0, static_cast<long>(image.frames)));
  };
  box.t_begin = clamp_frame(info.t0);
  box.t_end = std::max(box.t_begin + 1, clamp_frame(info.t1));
  box.m_begin = image.bands;
  box.m_end = 0;
  for (std::size_t m = 0; m < fb.n_mels; ++m) {
    if (fb.bands[m].high_hz >= info.f0 && fb.bands[m].low_hz <= info.f1) {
      box.m_begin = std::min(box.m_begin, m);
      box.m_end = std::max(box.m_end, m + 1);
    }
  }
  if (box.m_begin >= box.m_end) {
    box.m_begin = 0;
    box.m_end = image.bands;
  }
  return box;
}

}  // namespace badkit::synth
