#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "badkit/rng.hpp"
#include "badkit/tensor.hpp"

namespace badkit {

enum class Phase { Train, Infer };
enum class ConvMode { Same, Valid };
enum class ReluMode { Standard, Guided };

/// Learnable tensor with its gradient and momentum velocity.
template <typename T>
struct ParamTensor {
  Tensor<T> value, grad, velocity;

  void init(std::vector<std::size_t> shape, T fill_value = T{}) {
    value = Tensor<T>(shape, fill_value);
    grad = Tensor<T>(shape);
    velocity = Tensor<T>(std::move(shape));
  }
  void zero_grad() { grad.fill(T{}); }
  std::size_t size() const { return value.size(); }
};

template <typename T>
void glorot_uniform(Tensor<T>& w, std::size_t fan_in, std::size_t fan_out, rng::Engine& gen) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : w.data) v = static_cast<T>(rng::uniform_range(gen, -bound, bound));
}

// ---------------------------------------------------------------- conv2d

template <typename T>
struct Conv2DCache {
  Tensor<T> input;
};

/// 2-d cross-correlation over [batch, channel, H, W], no bias (batch norm
/// absorbs it). 'same' zero-pads odd kernels so stride-1 output keeps the
/// spatial shape.
template <typename T>
struct Conv2D {
  std::size_t in_ch = 0, out_ch = 0, kh = 3, kw = 3;
  ConvMode mode = ConvMode::Same;
  std::size_t stride = 1;
  ParamTensor<T> kernel;  // [out_ch, in_ch, kh, kw]

  void init(std::size_t ic, std::size_t oc, std::size_t k_h, std::size_t k_w, ConvMode m,
            std::size_t s, rng::Engine& gen) {
    if (m == ConvMode::Same && (k_h % 2 == 0 || k_w % 2 == 0))
      throw std::invalid_argument("conv2d: 'same' mode requires odd kernel dims");
    if (s != 1 && s != 2) throw std::invalid_argument("conv2d: stride must be 1 or 2");
    in_ch = ic;
    out_ch = oc;
    kh = k_h;
    kw = k_w;
    mode = m;
    stride = s;
    kernel.init({oc, ic, k_h, k_w});
    glorot_uniform(kernel.value, ic * k_h * k_w, oc * k_h * k_w, gen);
  }

  std::size_t pad_h() const { return mode == ConvMode::Same ? (kh - 1) / 2 : 0; }
  std::size_t pad_w() const { return mode == ConvMode::Same ? (kw - 1) / 2 : 0; }

  std::array<std::size_t, 2> out_hw(std::size_t h, std::size_t w) const {
    const std::size_t ph = pad_h(), pw = pad_w();
    if (h + 2 * ph < kh || w + 2 * pw < kw)
      throw std::invalid_argument("conv2d: input smaller than kernel");
    return {(h + 2 * ph - kh) / stride + 1, (w + 2 * pw - kw) / stride + 1};
  }

  Tensor<T> forward(const Tensor<T>& x, Conv2DCache<T>* cache) const {
    require_shape(x.rank() == 4 && x.dim(1) == in_ch, "conv2d input");
    const std::size_t b = x.dim(0), h = x.dim(2), w = x.dim(3);
    const auto [oh, ow] = out_hw(h, w);
    const std::size_t ph = pad_h(), pw = pad_w();
    const std::size_t padded_h = h + 2 * ph, padded_w = w + 2 * pw;

    Tensor<T> out({b, out_ch, oh, ow});
    std::vector<T> padded(padded_h * padded_w);
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t ci = 0; ci < in_ch; ++ci) {
        std::fill(padded.begin(), padded.end(), T{});
        for (std::size_t r = 0; r < h; ++r) {
          const T* src = &x.at4(bi, ci, r, 0);
          std::copy(src, src + w, padded.data() + (r + ph) * padded_w + pw);
        }
        for (std::size_t co = 0; co < out_ch; ++co) {
          const T* kbase = &kernel.value.at4(co, ci, 0, 0);
          for (std::size_t r = 0; r < kh; ++r) {
            for (std::size_t s = 0; s < kw; ++s) {
              const T kv = kbase[r * kw + s];
              for (std::size_t y = 0; y < oh; ++y) {
                const T* prow = padded.data() + (y * stride + r) * padded_w + s;
                T* orow = &out.at4(bi, co, y, 0);
                if (stride == 1) {
                  for (std::size_t z = 0; z < ow; ++z) orow[z] += kv * prow[z];
                } else {
                  for (std::size_t z = 0; z < ow; ++z) orow[z] += kv * prow[z * stride];
                }
              }
            }
          }
        }
      }
    }
    if (cache) cache->input = x;
    return out;
  }

  /// Returns d(input); accumulates d(kernel) into *dkernel when given.
  Tensor<T> backward(const Conv2DCache<T>& cache, const Tensor<T>& dy, Tensor<T>* dkernel) const {
    const Tensor<T>& x = cache.input;
    require_shape(x.rank() == 4 && x.dim(1) == in_ch, "conv2d backward input");
    const std::size_t b = x.dim(0), h = x.dim(2), w = x.dim(3);
    const auto [oh, ow] = out_hw(h, w);
    require_shape(dy.rank() == 4 && dy.dim(0) == b && dy.dim(1) == out_ch && dy.dim(2) == oh &&
                      dy.dim(3) == ow,
                  "conv2d backward upstream");
    const std::size_t ph = pad_h(), pw = pad_w();
    const std::size_t padded_h = h + 2 * ph, padded_w = w + 2 * pw;

    Tensor<T> dx({b, in_ch, h, w});
    std::vector<T> padded(padded_h * padded_w), dpadded(padded_h * padded_w);
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t ci = 0; ci < in_ch; ++ci) {
        std::fill(padded.begin(), padded.end(), T{});
        std::fill(dpadded.begin(), dpadded.end(), T{});
        for (std::size_t r = 0; r < h; ++r) {
          const T* src = &x.at4(bi, ci, r, 0);
          std::copy(src, src + w, padded.data() + (r + ph) * padded_w + pw);
        }
        for (std::size_t co = 0; co < out_ch; ++co) {
          const T* kbase = &kernel.value.at4(co, ci, 0, 0);
          for (std::size_t r = 0; r < kh; ++r) {
            for (std::size_t s = 0; s < kw; ++s) {
              const T kv = kbase[r * kw + s];
              T acc = T{};
              for (std::size_t y = 0; y < oh; ++y) {
                const T* dyrow = &dy.at4(bi, co, y, 0);
                const std::size_t off = (y * stride + r) * padded_w + s;
                const T* prow = padded.data() + off;
                T* dprow = dpadded.data() + off;
                if (stride == 1) {
                  for (std::size_t z = 0; z < ow; ++z) {
                    dprow[z] += kv * dyrow[z];
                    acc += prow[z] * dyrow[z];
                  }
                } else {
                  for (std::size_t z = 0; z < ow; ++z) {
                    dprow[z * stride] += kv * dyrow[z];
                    acc += prow[z * stride] * dyrow[z];
                  }
                }
              }
              if (dkernel) dkernel->at4(co, ci, r, s) += acc;
            }
          }
        }
        for (std::size_t r = 0; r < h; ++r) {
          const T* src = dpadded.data() + (r + ph) * padded_w + pw;
          std::copy(src, src + w, &dx.at4(bi, ci, r, 0));
        }
      }
    }
    return dx;
  }
};

// ------------------------------------------------------------- batch norm

template <typename T>
struct BatchNormCache {
  Phase phase = Phase::Train;
  Tensor<T> xhat;              // train mode only
  std::vector<T> inv_std;      // per channel
  std::vector<std::size_t> in_shape;
};

/// Per-channel batch normalization over (batch, H, W). Train mode uses batch
/// statistics (biased variance) and folds them into the running estimates by
/// exponential average; inference uses the running estimates.
template <typename T>
struct BatchNorm2D {
  std::size_t channels = 0;
  T eps = static_cast<T>(1e-4);
  T stat_momentum = static_cast<T>(0.1);
  ParamTensor<T> gamma, beta;
  Tensor<T> running_mean, running_var;
  long train_steps = 0;

  void init(std::size_t ch) {
    channels = ch;
    gamma.init({ch}, static_cast<T>(1));
    beta.init({ch});
    running_mean = Tensor<T>({ch});
    running_var = Tensor<T>({ch}, static_cast<T>(1));
    train_steps = 0;
  }

  Tensor<T> forward_train(const Tensor<T>& x, BatchNormCache<T>& cache) {
    require_shape(x.rank() == 4 && x.dim(1) == channels, "batchnorm input");
    const std::size_t b = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t n = b * h * w;
    const std::size_t plane = h * w;

    cache.phase = Phase::Train;
    cache.in_shape = x.shape;
    cache.xhat = Tensor<T>(x.shape);
    cache.inv_std.assign(channels, T{});

    Tensor<T> out(x.shape);
    for (std::size_t c = 0; c < channels; ++c) {
      double mean = 0.0;
      for (std::size_t bi = 0; bi < b; ++bi) {
        const T* src = &x.at4(bi, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) mean += src[i];
      }
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t bi = 0; bi < b; ++bi) {
        const T* src = &x.at4(bi, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = src[i] - mean;
          var += d * d;
        }
      }
      var /= static_cast<double>(n);
      const T inv_std = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
      cache.inv_std[c] = inv_std;
      const T g = gamma.value[c], bta = beta.value[c], mu = static_cast<T>(mean);
      for (std::size_t bi = 0; bi < b; ++bi) {
        const T* src = &x.at4(bi, c, 0, 0);
        T* xh = &cache.xhat.at4(bi, c, 0, 0);
        T* dst = &out.at4(bi, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          xh[i] = (src[i] - mu) * inv_std;
          dst[i] = g * xh[i] + bta;
        }
      }
      running_mean[c] = (static_cast<T>(1) - stat_momentum) * running_mean[c] +
                        stat_momentum * static_cast<T>(mean);
      running_var[c] = (static_cast<T>(1) - stat_momentum) * running_var[c] +
                       stat_momentum * static_cast<T>(var);
    }
    ++train_steps;
    return out;
  }

  Tensor<T> forward_infer(const Tensor<T>& x, BatchNormCache<T>* cache) const {
    require_shape(x.rank() == 4 && x.dim(1) == channels, "batchnorm input");
    if (train_steps == 0)
      throw std::runtime_error("batchnorm: inference before any running statistics recorded");
    const std::size_t b = x.dim(0), h = x.dim(2), w = x.dim(3), plane = h * w;
    if (cache) {
      cache->phase = Phase::Infer;
      cache->in_shape = x.shape;
      cache->inv_std.assign(channels, T{});
      cache->xhat = Tensor<T>();
    }
    Tensor<T> out(x.shape);
    for (std::size_t c = 0; c < channels; ++c) {
      const T inv_std =
          static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var[c]) + static_cast<double>(eps)));
      if (cache) cache->inv_std[c] = inv_std;
      const T g = gamma.value[c], bta = beta.value[c], mu = running_mean[c];
      for (std::size_t bi = 0; bi < b; ++bi) {
        const T* src = &x.at4(bi, c, 0, 0);
        T* dst = &out.at4(bi, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) dst[i] = g * (src[i] - mu) * inv_std + bta;
      }
    }
    return out;
  }

  /// Exact backward through the batch statistics in train mode; affine
  /// backward (running stats are constants) in inference mode. dgamma/dbeta
  /// are accumulated in train mode only.
  Tensor<T> backward(const BatchNormCache<T>& cache, const Tensor<T>& dy, Tensor<T>* dgamma,
                     Tensor<T>* dbeta) const {
    require_shape(dy.shape == cache.in_shape, "batchnorm backward upstream");
    const std::size_t b = dy.dim(0), h = dy.dim(2), w = dy.dim(3), plane = h * w;
    Tensor<T> dx(dy.shape);

    if (cache.phase == Phase::Infer) {
      for (std::size_t c = 0; c < channels; ++c) {
        const T scale = gamma.value[c] * cache.inv_std[c];
        for (std::size_t bi = 0; bi < b; ++bi) {
          const T* src = &dy.at4(bi, c, 0, 0);
          T* dst = &dx.at4(bi, c, 0, 0);
          for (std::size_t i = 0; i < plane; ++i) dst[i] = scale * src[i];
        }
      }
      return dx;
    }

    const double n = static_cast<double>(b * plane);
    for (std::size_t c = 0; c < channels; ++c) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t bi = 0; bi < b; ++bi) {
        const T* dsrc = &dy.at4(bi, c, 0, 0);
        const T* xh = &cache.xhat.at4(bi, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          sum_dy += dsrc[i];
          sum_dy_xhat += static_cast<double>(dsrc[i]) * xh[i];
        }
      }
      if (dgamma) (*dgamma)[c] += static_cast<T>(sum_dy_xhat);
      if (dbeta) (*dbeta)[c] += static_cast<T>(sum_dy);
      const double g = gamma.value[c];
      const double inv_std = cache.inv_std[c];
      for (std::size_t bi = 0; bi < b; ++bi) {
        const T* dsrc = &dy.at4(bi, c, 0, 0);
        const T* xh = &cache.xhat.at4(bi, c, 0, 0);
        T* dst = &dx.at4(bi, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          const double t = n * dsrc[i] - sum_dy - xh[i] * sum_dy_xhat;
          dst[i] = static_cast<T>(g * inv_std / n * t);
        }
      }
    }
    return dx;
  }
};

// ------------------------------------------------------------------ relu

template <typename T>
struct ReluCache {
  Tensor<T> input;
};

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x, ReluCache<T>* cache) {
  Tensor<T> out(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T{} ? x[i] : T{};
  if (cache) cache->input = x;
  return out;
}

/// Standard: pass gradient where the input was positive. Guided: additionally
/// require the upstream gradient itself to be positive.
template <typename T>
Tensor<T> relu_backward(const ReluCache<T>& cache, const Tensor<T>& dy, ReluMode mode) {
  require_shape(dy.same_shape(cache.input), "relu backward");
  Tensor<T> dx(dy.shape);
  const Tensor<T>& x = cache.input;
  if (mode == ReluMode::Standard) {
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = x[i] > T{} ? dy[i] : T{};
  } else {
    for (std::size_t i = 0; i < dy.size(); ++i)
      dx[i] = (x[i] > T{} && dy[i] > T{}) ? dy[i] : T{};
  }
  return dx;
}

// -------------------------------------------------------------- max pool

template <typename T>
struct MaxPoolCache {
  std::vector<std::size_t> in_shape;
  // flat index into the input per output cell; npos when a zero-pad cell won
  std::vector<std::size_t> argmax;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Non-overlapping 2x2 max pooling; odd spatial dims are zero-padded by one
/// row/column. Ties pick the first candidate in row-major window order.
template <typename T>
Tensor<T> maxpool2x2_forward(const Tensor<T>& x, MaxPoolCache<T>* cache) {
  require_shape(x.rank() == 4, "maxpool input");
  const std::size_t b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
  Tensor<T> out({b, c, oh, ow});
  if (cache) {
    cache->in_shape = x.shape;
    cache->argmax.assign(out.size(), MaxPoolCache<T>::npos);
  }
  std::size_t oi = 0;
  for (std::size_t bi = 0; bi < b; ++bi) {
    for (std::size_t ci = 0; ci < c; ++ci) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t z = 0; z < ow; ++z, ++oi) {
          T best{};
          std::size_t best_idx = MaxPoolCache<T>::npos;
          bool first = true;
          for (std::size_t dy = 0; dy < 2; ++dy) {
            for (std::size_t dz = 0; dz < 2; ++dz) {
              const std::size_t r = 2 * y + dy, s = 2 * z + dz;
              T v{};
              std::size_t idx = MaxPoolCache<T>::npos;
              if (r < h && s < w) {
                v = x.at4(bi, ci, r, s);
                idx = ((bi * c + ci) * h + r) * w + s;
              }
              if (first || v > best) {
                best = v;
                best_idx = idx;
                first = false;
              }
            }
          }
          out[oi] = best;
          if (cache) cache->argmax[oi] = best_idx;
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> maxpool2x2_backward(const MaxPoolCache<T>& cache, const Tensor<T>& dy) {
  require_shape(dy.size() == cache.argmax.size(), "maxpool backward upstream");
  Tensor<T> dx(cache.in_shape);
  for (std::size_t i = 0; i < dy.size(); ++i)
    if (cache.argmax[i] != MaxPoolCache<T>::npos) dx[cache.argmax[i]] += dy[i];
  return dx;
}

// ----------------------------------------------------- global mean pool

template <typename T>
struct GlobalMeanPoolCache {
  std::vector<std::size_t> in_shape;
};

template <typename T>
Tensor<T> global_mean_pool_forward(const Tensor<T>& x, GlobalMeanPoolCache<T>* cache) {
  require_shape(x.rank() == 4, "global mean pool input");
  const std::size_t b = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  Tensor<T> out({b, c});
  for (std::size_t bi = 0; bi < b; ++bi) {
    for (std::size_t ci = 0; ci < c; ++ci) {
      double acc = 0.0;
      const T* src = &x.at4(bi, ci, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) acc += src[i];
      out.at2(bi, ci) = static_cast<T>(acc / static_cast<double>(plane));
    }
  }
  if (cache) cache->in_shape = x.shape;
  return out;
}

template <typename T>
Tensor<T> global_mean_pool_backward(const GlobalMeanPoolCache<T>& cache, const Tensor<T>& dy) {
  const auto& s = cache.in_shape;
  require_shape(dy.rank() == 2 && dy.dim(0) == s[0] && dy.dim(1) == s[1],
                "global mean pool backward upstream");
  Tensor<T> dx(s);
  const std::size_t plane = s[2] * s[3];
  const T inv = static_cast<T>(1.0 / static_cast<double>(plane));
  for (std::size_t bi = 0; bi < s[0]; ++bi) {
    for (std::size_t ci = 0; ci < s[1]; ++ci) {
      const T g = dy.at2(bi, ci) * inv;
      T* dst = &dx.at4(bi, ci, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) dst[i] = g;
    }
  }
  return dx;
}

// ----------------------------------------------------------------- dense

template <typename T>
struct DenseCache {
  Tensor<T> input;
};

template <typename T>
struct Dense {
  std::size_t in_features = 0, out_features = 0;
  ParamTensor<T> weight;  // [out, in]
  ParamTensor<T> bias;    // [out]

  void init(std::size_t in_f, std::size_t out_f, rng::Engine& gen) {
    in_features = in_f;
    out_features = out_f;
    weight.init({out_f, in_f});
    bias.init({out_f});
    glorot_uniform(weight.value, in_f, out_f, gen);
  }

  Tensor<T> forward(const Tensor<T>& x, DenseCache<T>* cache) const {
    require_shape(x.rank() == 2 && x.dim(1) == in_features, "dense input");
    const std::size_t b = x.dim(0);
    Tensor<T> out({b, out_features});
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t o = 0; o < out_features; ++o) {
        double acc = bias.value[o];
        const T* wrow = &weight.value.at2(o, 0);
        const T* xrow = &x.at2(bi, 0);
        for (std::size_t i = 0; i < in_features; ++i) acc += static_cast<double>(wrow[i]) * xrow[i];
        out.at2(bi, o) = static_cast<T>(acc);
      }
    }
    if (cache) cache->input = x;
    return out;
  }

  Tensor<T> backward(const DenseCache<T>& cache, const Tensor<T>& dy, Tensor<T>* dweight,
                     Tensor<T>* dbias) const {
    const Tensor<T>& x = cache.input;
    require_shape(dy.rank() == 2 && dy.dim(0) == x.dim(0) && dy.dim(1) == out_features,
                  "dense backward upstream");
    const std::size_t b = x.dim(0);
    Tensor<T> dx(x.shape);
    for (std::size_t bi = 0; bi < b; ++bi) {
      for (std::size_t o = 0; o < out_features; ++o) {
        const T g = dy.at2(bi, o);
        if (dbias) (*dbias)[o] += g;
        const T* xrow = &x.at2(bi, 0);
        const T* wrow = &weight.value.at2(o, 0);
        T* dxrow = &dx.at2(bi, 0);
        if (dweight) {
          T* dwrow = &dweight->at2(o, 0);
          for (std::size_t i = 0; i < in_features; ++i) {
            dwrow[i] += g * xrow[i];
            dxrow[i] += g * wrow[i];
          }
        } else {
          for (std::size_t i = 0; i < in_features; ++i) dxrow[i] += g * wrow[i];
        }
      }
    }
    return dx;
  }
};

// -------------------------------------------------------- softmax + loss

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  require_shape(logits.rank() == 2, "softmax input");
  const std::size_t b = logits.dim(0), c = logits.dim(1);
  Tensor<T> out(logits.shape);
  for (std::size_t bi = 0; bi < b; ++bi) {
    const T* row = &logits.at2(bi, 0);
    T mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
    for (std::size_t j = 0; j < c; ++j)
      out.at2(bi, j) = static_cast<T>(std::exp(static_cast<double>(row[j] - mx)) / denom);
  }
  return out;
}

template <typename T>
struct XentResult {
  double loss = 0.0;       // mean over the batch of -ln p[label]
  Tensor<T> probs;         // softmax rows
  Tensor<T> dlogits;       // (softmax - onehot) / batch
};

/// Categorical cross-entropy over softmax outputs.
template <typename T>
XentResult<T> softmax_xent(const Tensor<T>& logits, const std::vector<int>& labels) {
  require_shape(logits.rank() == 2 && logits.dim(0) == labels.size(), "softmax_xent input");
  const std::size_t b = logits.dim(0), c = logits.dim(1);
  XentResult<T> res;
  res.probs = softmax_rows(logits);
  res.dlogits = Tensor<T>(logits.shape);
  double total = 0.0;
  for (std::size_t bi = 0; bi < b; ++bi) {
    const int label = labels[bi];
    if (label < 0 || static_cast<std::size_t>(label) >= c)
      throw std::invalid_argument("softmax_xent: label out of range: " + std::to_string(label));
    // recompute log-prob in a numerically stable way
    const T* row = &logits.at2(bi, 0);
    T mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
    total += std::log(denom) - static_cast<double>(row[label] - mx);
    for (std::size_t j = 0; j < c; ++j) {
      const T onehot = static_cast<std::size_t>(label) == j ? static_cast<T>(1) : T{};
      res.dlogits.at2(bi, j) = (res.probs.at2(bi, j) - onehot) / static_cast<T>(b);
    }
  }
  res.loss = total / static_cast<double>(b);
  return res;
}

/// Fused dense -> softmax -> cross-entropy, the network head.
template <typename T>
struct DenseSoftmaxXentResult {
  double loss = 0.0;
  Tensor<T> probs;
  Tensor<T> dlogits;
  DenseCache<T> cache;
};

template <typename T>
DenseSoftmaxXentResult<T> dense_softmax_xent(const Dense<T>& head, const Tensor<T>& features,
                                             const std::vector<int>& labels) {
  DenseSoftmaxXentResult<T> res;
  const Tensor<T> logits = head.forward(features, &res.cache);
  auto xr = softmax_xent(logits, labels);
  res.loss = xr.loss;
  res.probs = std::move(xr.probs);
  res.dlogits = std::move(xr.dlogits);
  return res;
}

}  // namespace badkit
