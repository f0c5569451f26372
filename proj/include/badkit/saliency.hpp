#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "badkit/fbank.hpp"
#include "badkit/mel.hpp"
#include "badkit/model.hpp"
#include "badkit/stft.hpp"
#include "badkit/wave.hpp"

namespace badkit {

/// Per-pixel input relevance in [0,1], same shape as the feature image.
struct SaliencyMap {
  std::size_t frames = 0;
  std::size_t bands = 0;
  std::vector<float> values;  // frames x bands
  int target_class = 1;
  std::string item_id;

  float at(std::size_t t, std::size_t m) const { return values[t * bands + m]; }
};

/// Saliency expanded from mel bands to FFT bins; multiplies a spectrogram.
struct BinMask {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> values;  // frames x bins
};

/// Gradient of the target-class pre-softmax logit w.r.t. the input image,
/// taken in inference mode with the chosen ReLU backward rule (guided by
/// default). The map is |gradient| scaled so its maximum is 1; an all-zero
/// gradient stays zero. Read-only on the model.
inline SaliencyMap saliency_map(const Model<float>& model, const FbankImage& image,
                                int target_class, ReluMode relu_mode = ReluMode::Guided) {
  if (image.frames != model.config.input_frames || image.bands != model.config.input_bands)
    throw std::invalid_argument("saliency_map: image shape does not match the model");
  if (target_class < 0 || static_cast<std::size_t>(target_class) >= model.config.n_classes)
    throw std::invalid_argument("saliency_map: target class out of range");

  Tensor<float> batch({1, 1, image.frames, image.bands});
  std::copy(image.values.begin(), image.values.end(), batch.data.begin());
  ModelTape<float> tape;
  model.forward_infer(batch, &tape);
  Tensor<float> dlogits({1, model.config.n_classes});
  dlogits.at2(0, static_cast<std::size_t>(target_class)) = 1.0f;
  const Tensor<float> grad = model.input_gradient(tape, dlogits, relu_mode);

  SaliencyMap map;
  map.frames = image.frames;
  map.bands = image.bands;
  map.target_class = target_class;
  map.item_id = image.item_id;
  map.values.resize(grad.size());
  float peak = 0.0f;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    map.values[i] = std::abs(grad[i]);
    peak = std::max(peak, map.values[i]);
  }
  if (peak > 0.0f)
    for (auto& v : map.values) v /= peak;
  return map;
}

/// Assign each band's saliency to every FFT bin whose center frequency lies
/// strictly inside that band's (low, high) range; bins covered by several
/// overlapping triangles take the maximum, uncovered bins stay 0.
inline BinMask expand_to_bins(const SaliencyMap& map, const FilterBank& fb) {
  if (map.bands != fb.n_mels)
    throw std::invalid_argument("expand_to_bins: band count does not match the filter bank");
  BinMask mask;
  mask.frames = map.frames;
  mask.bins = fb.bins;
  mask.values.assign(map.frames * fb.bins, 0.0);

  // per-bin list of covering bands
  std::vector<std::vector<std::size_t>> covering(fb.bins);
  for (std::size_t m = 0; m < fb.n_mels; ++m) {
    for (std::size_t k = 0; k < fb.bins; ++k) {
      const double f = fb.bin_hz(k);
      if (f > fb.bands[m].low_hz && f < fb.bands[m].high_hz) covering[k].push_back(m);
    }
  }
  for (std::size_t t = 0; t < map.frames; ++t) {
    double* row = mask.values.data() + t * fb.bins;
    for (std::size_t k = 0; k < fb.bins; ++k) {
      double v = 0.0;
      for (std::size_t m : covering[k]) v = std::max(v, static_cast<double>(map.at(t, m)));
      row[k] = v;
    }
  }
  return mask;
}

/// Mask the signal's spectrogram and overlap-add it back to audio.
inline WaveBuffer resynthesize(const WaveBuffer& wave, const BinMask& mask,
                               const StftParams& params = {}) {
  const ComplexSpectrogram spec = stft(wave, params);
  if (mask.frames != spec.frames || mask.bins != spec.bins)
    throw std::invalid_argument("resynthesize: mask shape does not match the spectrogram");
  return istft_overlap_add(spec, mask.values);
}

/// Saliency maps reuse the feature-cache container on disk.
inline void write_saliency_cache(const std::string& path, const SaliencyMap& map) {
  FbankImage img;
  img.frames = map.frames;
  img.bands = map.bands;
  img.values = map.values;
  img.item_id = map.item_id;
  write_feature_cache(path, img);
}

/// Grayscale PGM for quick inspection: one column per frame, lowest band at
/// the bottom row.
inline void write_pgm(const std::string& path, const SaliencyMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write PGM: " + path);
  os << "P5\n" << map.frames << " " << map.bands << "\n255\n";
  for (std::size_t row = 0; row < map.bands; ++row) {
    const std::size_t m = map.bands - 1 - row;
    for (std::size_t t = 0; t < map.frames; ++t) {
      const float v = std::clamp(map.at(t, m), 0.0f, 1.0f);
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
    }
  }
  if (!os) throw std::runtime_error("failed writing PGM: " + path);
}

}  // namespace badkit
