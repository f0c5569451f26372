#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace badkit {

/// Dense n-dimensional array, row-major. Float for training, double for
/// gradient checking; conversions are explicit via cast<>().
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s, T fill_value = T{})
      : shape(std::move(s)), data(numel(shape), fill_value) {}

  static std::size_t numel(const std::vector<std::size_t>& s) {
    if (s.empty()) return 0;
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }

  T& at2(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  const T& at2(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

  T& at4(std::size_t b, std::size_t c, std::size_t h, std::size_t w) {
    return data[((b * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }
  const T& at4(std::size_t b, std::size_t c, std::size_t h, std::size_t w) const {
    return data[((b * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape);
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

namespace detail {
inline std::string shape_str(const std::vector<std::size_t>& s) {
  std::string r = "(";
  for (std::size_t i = 0; i < s.size(); ++i) r += (i ? "," : "") + std::to_string(s[i]);
  return r + ")";
}
}  // namespace detail

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("shape mismatch: " + what);
}

/// Concatenate 4-d tensors along the channel axis. All inputs must agree on
/// batch and spatial dims.
template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
  const auto& first = *parts.front();
  require_shape(first.rank() == 4, "concat_channels expects rank-4 tensors");
  const std::size_t b = first.dim(0), h = first.dim(2), w = first.dim(3);
  std::size_t total_c = 0;
  for (const auto* p : parts) {
    require_shape(p->rank() == 4 && p->dim(0) == b && p->dim(2) == h && p->dim(3) == w,
                  "concat_channels inputs disagree");
    total_c += p->dim(1);
  }
  Tensor<T> out({b, total_c, h, w});
  const std::size_t plane = h * w;
  for (std::size_t bi = 0; bi < b; ++bi) {
    std::size_t c_off = 0;
    for (const auto* p : parts) {
      const std::size_t pc = p->dim(1);
      const T* src = p->data.data() + bi * pc * plane;
      T* dst = out.data.data() + (bi * total_c + c_off) * plane;
      std::copy(src, src + pc * plane, dst);
      c_off += pc;
    }
  }
  return out;
}

/// Inverse of concat_channels: slice a rank-4 tensor into channel groups.
template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& x, const std::vector<std::size_t>& sizes) {
  require_shape(x.rank() == 4, "split_channels expects rank-4 tensor");
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  require_shape(total == x.dim(1), "split_channels sizes do not cover tensor");
  const std::size_t b = x.dim(0), h = x.dim(2), w = x.dim(3), plane = h * w;
  std::vector<Tensor<T>> out;
  out.reserve(sizes.size());
  std::size_t c_off = 0;
  for (std::size_t s : sizes) {
    Tensor<T> part({b, s, h, w});
    for (std::size_t bi = 0; bi < b; ++bi) {
      const T* src = x.data.data() + (bi * x.dim(1) + c_off) * plane;
      std::copy(src, src + s * plane, part.data.data() + bi * s * plane);
    }
    out.push_back(std::move(part));
    c_off += s;
  }
  return out;
}

template <typename T>
void add_inplace(Tensor<T>& dst, const Tensor<T>& src) {
  require_shape(dst.same_shape(src), "add_inplace");
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

}  // namespace badkit
