#pragma once

#include <stdexcept>

#include "badkit/fbank.hpp"
#include "badkit/rng.hpp"

namespace badkit {

/// Training-time transforms: random time/frequency shift by pad-and-crop,
/// and random time reversal. Applied during training only.
struct AugmentConfig {
  bool crop_enabled = true;
  bool reverse_enabled = false;
  std::size_t pad = 2;         // zero pixels added at both extremities of each axis
  std::size_t max_offset = 2;  // window start offsets drawn uniformly from {0..max_offset}
  double reverse_prob = 0.5;

  void validate() const {
    if (max_offset > 2 * pad)
      throw std::invalid_argument("AugmentConfig: max_offset must be <= 2*pad");
    if (reverse_prob < 0.0 || reverse_prob > 1.0)
      throw std::invalid_argument("AugmentConfig: reverse_prob must be in [0,1]");
  }
};

/// Deterministic pad-and-crop: zero-pad by `pad` on both ends of both axes,
/// then take the original-size window starting at (row_off, col_off) in the
/// padded image. (pad, pad) is the identity.
inline FbankImage crop_shift(const FbankImage& img, std::size_t row_off, std::size_t col_off,
                             std::size_t pad) {
  if (row_off > 2 * pad || col_off > 2 * pad)
    throw std::invalid_argument("crop_shift: offset exceeds padding");
  FbankImage out;
  out.frames = img.frames;
  out.bands = img.bands;
  out.item_id = img.item_id;
  out.values.assign(img.frames * img.bands, 0.0f);
  // out[t][m] = padded[t + row_off][m + col_off], padded[r][c] = img[r-pad][c-pad]
  for (std::size_t t = 0; t < img.frames; ++t) {
    const long src_t = static_cast<long>(t + row_off) - static_cast<long>(pad);
    if (src_t < 0 || src_t >= static_cast<long>(img.frames)) continue;
    for (std::size_t m = 0; m < img.bands; ++m) {
      const long src_m = static_cast<long>(m + col_off) - static_cast<long>(pad);
      if (src_m < 0 || src_m >= static_cast<long>(img.bands)) continue;
      out.at(t, m) = img.at(static_cast<std::size_t>(src_t), static_cast<std::size_t>(src_m));
    }
  }
  return out;
}

inline FbankImage random_crop_shift(const FbankImage& img, const AugmentConfig& cfg,
                                    rng::Engine& gen) {
  const std::size_t r = rng::uniform_index(gen, cfg.max_offset + 1);
  const std::size_t c = rng::uniform_index(gen, cfg.max_offset + 1);
  return crop_shift(img, r, c, cfg.pad);
}

/// Deterministic time reversal: out[t][m] = in[T-1-t][m].
inline FbankImage reverse_time(const FbankImage& img) {
  FbankImage out;
  out.frames = img.frames;
  out.bands = img.bands;
  out.item_id = img.item_id;
  out.values.resize(img.values.size());
  for (std::size_t t = 0; t < img.frames; ++t)
    for (std::size_t m = 0; m < img.bands; ++m) out.at(t, m) = img.at(img.frames - 1 - t, m);
  return out;
}

inline FbankImage time_reverse(const FbankImage& img, const AugmentConfig& cfg,
                               rng::Engine& gen) {
  if (rng::bernoulli(gen, cfg.reverse_prob)) return reverse_time(img);
  return img;
}

/// Full per-sample training transform in the order crop, then reverse.
inline FbankImage augment_image(const FbankImage& img, const AugmentConfig& cfg,
                                rng::Engine& gen) {
  FbankImage out = cfg.crop_enabled ? random_crop_shift(img, cfg, gen) : img;
  if (cfg.reverse_enabled) out = time_reverse(out, cfg, gen);
  return out;
}

}  // namespace badkit
