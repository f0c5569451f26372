#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace badkit::fft {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// In-place iterative radix-2 Cooley-Tukey. Size must be a power of two.
/// Forward uses e^{-2*pi*i*jk/n}; inverse divides by n.
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (!is_pow2(n)) throw std::invalid_argument("fft_pow2: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  constexpr double pi = 3.141592653589793238462643383279502884;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * pi / static_cast<double>(len);
    const std::complex<double> step(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

/// DFT plan for an arbitrary size. Powers of two go straight to radix-2;
/// everything else runs Bluestein's chirp-z with precomputed chirp and
/// kernel spectrum, so repeated transforms of one size are cheap.
class Plan {
 public:
  explicit Plan(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("fft::Plan: zero size");
    if (is_pow2(n_)) return;
    constexpr double pi = 3.141592653589793238462643383279502884;
    m_ = next_pow2(2 * n_ - 1);
    chirp_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      // angle of e^{-i*pi*j^2/n}; reduce j^2 mod 2n first to keep precision
      const unsigned long long q = (static_cast<unsigned long long>(j) * j) % (2ull * n_);
      const double ang = -pi * static_cast<double>(q) / static_cast<double>(n_);
      chirp_[j] = {std::cos(ang), std::sin(ang)};
    }
    bhat_.assign(m_, {0.0, 0.0});
    bhat_[0] = std::conj(chirp_[0]);
    for (std::size_t j = 1; j < n_; ++j) {
      bhat_[j] = std::conj(chirp_[j]);
      bhat_[m_ - j] = std::conj(chirp_[j]);
    }
    fft_pow2(bhat_, false);
  }

  std::size_t size() const { return n_; }

  void forward(std::vector<std::complex<double>>& x) const { transform(x, false); }
  void inverse(std::vector<std::complex<double>>& x) const { transform(x, true); }

 private:
  void transform(std::vector<std::complex<double>>& x, bool inverse) const {
    if (x.size() != n_) throw std::invalid_argument("fft::Plan: size mismatch");
    if (inverse) {
      // idft(x) = conj(dft(conj(x))) / n
      for (auto& v : x) v = std::conj(v);
      transform(x, false);
      const double inv = 1.0 / static_cast<double>(n_);
      for (auto& v : x) v = std::conj(v) * inv;
      return;
    }
    if (is_pow2(n_)) {
      fft_pow2(x, false);
      return;
    }
    std::vector<std::complex<double>> a(m_, {0.0, 0.0});
    for (std::size_t j = 0; j < n_; ++j) a[j] = x[j] * chirp_[j];
    fft_pow2(a, false);
    for (std::size_t j = 0; j < m_; ++j) a[j] *= bhat_[j];
    fft_pow2(a, true);
    for (std::size_t k = 0; k < n_; ++k) x[k] = a[k] * chirp_[k];
  }

  std::size_t n_;
  std::size_t m_ = 0;
  std::vector<std::complex<double>> chirp_;
  std::vector<std::complex<double>> bhat_;
};

}  // namespace badkit::fft
