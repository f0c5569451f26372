#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "badkit/binio.hpp"
#include "badkit/mel.hpp"
#include "badkit/stft.hpp"

namespace badkit {

constexpr double kFbankFloorEps = 1e-10;
constexpr char kFeatureMagic[] = "BADFBK1";  // 7 bytes on disk

/// Log mel-energy image, time x band. 200x56 for a 10 s 44.1 kHz file.
struct FbankImage {
  std::size_t frames = 0;
  std::size_t bands = 0;
  std::vector<float> values;  // frames x bands, row-major
  std::string item_id;

  float& at(std::size_t t, std::size_t m) { return values[t * bands + m]; }
  float at(std::size_t t, std::size_t m) const { return values[t * bands + m]; }
};

/// values[t][m] = ln(sum_k fb[m][k] * |spec[t][k]|^2 + floor_eps).
/// Raw features: no normalization of any kind afterwards.
inline FbankImage fbank(const ComplexSpectrogram& spec, const FilterBank& fb,
                        double floor_eps = kFbankFloorEps) {
  if (fb.bins != spec.bins)
    throw std::invalid_argument("fbank: filter bank bins != spectrogram bins");

  FbankImage img;
  img.frames = spec.frames;
  img.bands = fb.n_mels;
  img.item_id = spec.item_id;
  img.values.resize(img.frames * img.bands);

  std::vector<double> power(spec.bins);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t k = 0; k < spec.bins; ++k) power[k] = std::norm(spec.at(t, k));
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      const double* row = fb.matrix.data() + m * fb.bins;
      double acc = 0.0;
      for (std::size_t k = fb.support_begin[m]; k < fb.support_end[m]; ++k)
        acc += row[k] * power[k];
      img.at(t, m) = static_cast<float>(std::log(acc + floor_eps));
    }
  }
  return img;
}

/// Feature cache: "BADFBK1", frame count and band count as u32 LE, then
/// row-major f32 LE values.
inline void write_feature_cache(const std::string& path, const FbankImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write feature cache: " + path);
  binio::write_tag(os, kFeatureMagic, 7);
  binio::write_u32(os, static_cast<std::uint32_t>(img.frames));
  binio::write_u32(os, static_cast<std::uint32_t>(img.bands));
  for (float v : img.values) binio::write_f32(os, v);
  if (!os) throw std::runtime_error("failed writing feature cache: " + path);
}

inline FbankImage read_feature_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open feature cache: " + path);
  if (binio::read_tag(is, 7) != kFeatureMagic)
    throw std::runtime_error("not a feature cache file: " + path);
  FbankImage img;
  img.frames = binio::read_u32(is);
  img.bands = binio::read_u32(is);
  img.values.resize(img.frames * img.bands);
  for (auto& v : img.values) v = binio::read_f32(is);
  return img;
}

}  // namespace badkit
