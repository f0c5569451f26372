#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "badkit/binio.hpp"

namespace badkit {

constexpr std::uint32_t kExpectedSampleRate = 44100;

/// Mono audio in [-1, 1].
struct WaveBuffer {
  std::vector<double> samples;
  std::uint32_t sample_rate = kExpectedSampleRate;
  std::string item_id;

  double duration() const {
    return sample_rate ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Linear-interpolation resampler.
inline WaveBuffer resample_linear(const WaveBuffer& in, std::uint32_t target_rate) {
  if (target_rate == 0) throw std::invalid_argument("resample_linear: zero target rate");
  if (in.sample_rate == target_rate || in.samples.empty()) {
    WaveBuffer out = in;
    out.sample_rate = target_rate;
    return out;
  }
  const double ratio = static_cast<double>(in.sample_rate) / target_rate;
  const std::size_t out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(in.samples.size()) * target_rate / in.sample_rate));
  WaveBuffer out;
  out.sample_rate = target_rate;
  out.item_id = in.item_id;
  out.samples.resize(out_len);
  const std::size_t last = in.samples.size() - 1;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = i * ratio;
    const std::size_t i0 = std::min(static_cast<std::size_t>(pos), last);
    const std::size_t i1 = std::min(i0 + 1, last);
    const double frac = pos - static_cast<double>(i0);
    out.samples[i] = in.samples[i0] * (1.0 - frac) + in.samples[i1] * frac;
  }
  return out;
}

/// Read a RIFF/WAVE file, PCM 16-bit, mono or stereo. Stereo is downmixed by
/// channel mean; samples are scaled by 1/32768. A sample rate other than
/// 44100 Hz is an error unless force_resample is set, in which case the
/// signal is linearly resampled.
inline WaveBuffer load_wav(const std::string& path, bool force_resample = false) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open WAV file: " + path);

  if (binio::read_tag(is, 4) != "RIFF") throw std::runtime_error("not a RIFF file: " + path);
  binio::read_u32(is);  // overall size, unused
  if (binio::read_tag(is, 4) != "WAVE") throw std::runtime_error("not a WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::vector<std::int16_t> raw;
  bool have_data = false;

  while (is.peek() != EOF) {
    std::string chunk_id;
    try {
      chunk_id = binio::read_tag(is, 4);
    } catch (const std::runtime_error&) {
      break;  // clean EOF between chunks
    }
    const std::uint32_t chunk_size = binio::read_u32(is);
    if (chunk_id == "fmt ") {
      format = binio::read_u16(is);
      channels = binio::read_u16(is);
      rate = binio::read_u32(is);
      binio::read_u32(is);  // byte rate
      binio::read_u16(is);  // block align
      bits = binio::read_u16(is);
      if (chunk_size > 16) is.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (chunk_id == "data") {
      if (!have_fmt) throw std::runtime_error("WAV data chunk before fmt chunk: " + path);
      const std::size_t n = chunk_size / 2;
      raw.resize(n);
      for (std::size_t i = 0; i < n; ++i) raw[i] = binio::read_i16(is);
      have_data = true;
      if (chunk_size % 2) is.seekg(1, std::ios::cur);
    } else {
      is.seekg(chunk_size + (chunk_size % 2), std::ios::cur);
    }
    if (!is && !have_data) throw std::runtime_error("truncated WAV file: " + path);
  }

  if (!have_fmt || !have_data) throw std::runtime_error("missing fmt or data chunk: " + path);
  if (format != 1 || bits != 16)
    throw std::runtime_error("unsupported WAV encoding (need PCM 16-bit): " + path);
  if (channels < 1 || channels > 2)
    throw std::runtime_error("unsupported channel count " + std::to_string(channels) + ": " + path);

  WaveBuffer wave;
  wave.sample_rate = rate;
  const std::size_t frames = raw.size() / channels;
  wave.samples.resize(frames);
  constexpr double scale = 1.0 / 32768.0;
  if (channels == 1) {
    for (std::size_t i = 0; i < frames; ++i) wave.samples[i] = raw[i] * scale;
  } else {
    for (std::size_t i = 0; i < frames; ++i)
      wave.samples[i] = 0.5 * (raw[2 * i] + raw[2 * i + 1]) * scale;
  }

  if (rate != kExpectedSampleRate) {
    if (!force_resample)
      throw std::runtime_error("sample rate " + std::to_string(rate) + " != 44100 (pass the resample flag to convert): " + path);
    wave = resample_linear(wave, kExpectedSampleRate);
  }
  return wave;
}

/// Write 16-bit PCM mono. Peak-normalizes first when the signal would clip.
inline void save_wav(const std::string& path, const WaveBuffer& wave) {
  double peak = 0.0;
  for (double s : wave.samples) peak = std::max(peak, std::abs(s));
  const double scale = peak > 1.0 ? 1.0 / peak : 1.0;

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write WAV file: " + path);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  binio::write_tag(os, "RIFF", 4);
  binio::write_u32(os, 36 + data_bytes);
  binio::write_tag(os, "WAVE", 4);
  binio::write_tag(os, "fmt ", 4);
  binio::write_u32(os, 16);
  binio::write_u16(os, 1);  // PCM
  binio::write_u16(os, 1);  // mono
  binio::write_u32(os, wave.sample_rate);
  binio::write_u32(os, wave.sample_rate * 2);
  binio::write_u16(os, 2);
  binio::write_u16(os, 16);
  binio::write_tag(os, "data", 4);
  binio::write_u32(os, data_bytes);
  for (double s : wave.samples) {
    const double v = std::clamp(s * scale, -1.0, 1.0);
    const long q = std::lround(v * 32767.0);
    binio::write_i16(os, static_cast<std::int16_t>(std::clamp(q, -32768l, 32767l)));
  }
  if (!os) throw std::runtime_error("failed writing WAV file: " + path);
}

}  // namespace badkit
