#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "aura/engine.hpp"

namespace aura {

class DftPlan;

/// Caller-owned scratch for one in-flight transform. A plan is immutable and
/// may be shared across threads as long as each concurrent call brings its
/// own workspace.
struct DftWorkspace {
  DftWorkspace() = default;
  explicit DftWorkspace(const DftPlan& plan);

  std::vector<std::complex<float>> work;
};

/// Real-to-complex forward / complex-to-real inverse transform of a fixed
/// power-of-two size. Forward is the unnormalized DFT sum; inverse applies
/// the 1/n_f factor, so pointwise spectral products implement linear
/// convolution of zero-padded sequences with no extra scaling.
///
/// Internally the length-n real transform runs as a length-n/2 complex FFT
/// on even/odd interleaved samples plus a split step.
class DftPlan {
public:
  explicit DftPlan(std::size_t fft_size) : size_(fft_size), half_(fft_size / 2) {
    if (!is_power_of_two(fft_size) || fft_size < 2 * kMinBlockSize)
      raise(ErrorCode::invalid_argument,
            "fft size must be a power of two >= " +
                std::to_string(2 * kMinBlockSize));
    const double step = -2.0 * std::numbers::pi / static_cast<double>(half_);
    stage_twiddles_.resize(half_ / 2);
    for (std::size_t j = 0; j < half_ / 2; ++j)
      stage_twiddles_[j] = std::complex<float>(
          static_cast<float>(std::cos(step * static_cast<double>(j))),
          static_cast<float>(std::sin(step * static_cast<double>(j))));
    const double split_step = -2.0 * std::numbers::pi / static_cast<double>(size_);
    split_twiddles_.resize(half_ / 2 + 1);
    for (std::size_t j = 0; j <= half_ / 2; ++j)
      split_twiddles_[j] = std::complex<float>(
          static_cast<float>(std::cos(split_step * static_cast<double>(j))),
          static_cast<float>(std::sin(split_step * static_cast<double>(j))));
    bit_reverse_.resize(half_);
    for (std::size_t i = 0; i < half_; ++i) {
      std::size_t r = 0;
      std::size_t v = i;
      for (std::size_t b = half_ >> 1; b != 0; b >>= 1) {
        r = (r << 1) | (v & 1);
        v >>= 1;
      }
      bit_reverse_[i] = r;
    }
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t bins() const noexcept { return half_ + 1; }

  /// spectrum[j] = sum_t buffer[t] * exp(-2*pi*i*j*t / n_f), j = 0..n_f/2.
  void forward(std::span<const float> buffer,
               std::span<std::complex<float>> spectrum,
               DftWorkspace& ws) const {
    if (buffer.size() != size_)
      raise(ErrorCode::length_mismatch,
            "forward transform expects " + std::to_string(size_) +
                " samples, got " + std::to_string(buffer.size()));
    if (spectrum.size() != bins())
      raise(ErrorCode::length_mismatch,
            "forward transform expects " + std::to_string(bins()) +
                " output bins, got " + std::to_string(spectrum.size()));
    auto& z = prepare(ws);
    for (std::size_t m = 0; m < half_; ++m)
      z[bit_reverse_[m]] =
          std::complex<float>(buffer[2 * m], buffer[2 * m + 1]);
    fft_in_place(z);

    // Split the half-size transform of the interleaved signal into the
    // spectrum of the real signal.
    const std::complex<float> z0 = z[0];
    spectrum[0] = {z0.real() + z0.imag(), 0.0f};
    spectrum[half_] = {z0.real() - z0.imag(), 0.0f};
    for (std::size_t k = 1; k <= half_ / 2; ++k) {
      const std::complex<float> a = z[k];
      const std::complex<float> b = std::conj(z[half_ - k]);
      const std::complex<float> even = 0.5f * (a + b);
      const std::complex<float> odd =
          std::complex<float>(0.0f, -0.5f) * (a - b);
      const std::complex<float> rotated = split_twiddles_[k] * odd;
      spectrum[k] = even + rotated;
      spectrum[half_ - k] = std::conj(even - rotated);
    }
  }

  /// Inverse of forward(), including the 1/n_f normalization. DC and Nyquist
  /// bins must be purely real.
  void inverse(std::span<const std::complex<float>> spectrum,
               std::span<float> buffer, DftWorkspace& ws) const {
    if (spectrum.size() != bins())
      raise(ErrorCode::length_mismatch,
            "inverse transform expects " + std::to_string(bins()) +
                " bins, got " + std::to_string(spectrum.size()));
    if (buffer.size() != size_)
      raise(ErrorCode::length_mismatch,
            "inverse transform expects " + std::to_string(size_) +
                " output samples, got " + std::to_string(buffer.size()));
    if (spectrum[0].imag() != 0.0f || spectrum[half_].imag() != 0.0f)
      raise(ErrorCode::non_real_edge_bins,
            "DC and Nyquist bins must have zero imaginary part");
    inverse_unchecked(spectrum, buffer, ws);
  }

  /// inverse() without precondition validation, for pipeline-internal calls
  /// whose spectra are real-edge by construction. The imaginary parts of the
  /// DC and Nyquist bins are ignored.
  void inverse_unchecked(std::span<const std::complex<float>> spectrum,
                         std::span<float> buffer, DftWorkspace& ws) const {
    auto& z = prepare(ws);

    // Merge the real spectrum back into the half-size complex spectrum, then
    // run the inverse complex FFT as conj -> forward -> conj / half.
    {
      const float xe = 0.5f * (spectrum[0].real() + spectrum[half_].real());
      const float xo = 0.5f * (spectrum[0].real() - spectrum[half_].real());
      z[bit_reverse_[0]] = std::conj(std::complex<float>(xe, xo));
    }
    for (std::size_t k = 1; k < half_; ++k) {
      const std::size_t kc = half_ - k;
      const std::complex<float> a = spectrum[k];
      const std::complex<float> b = std::conj(spectrum[kc]);
      const std::complex<float> even = 0.5f * (a + b);
      const std::complex<float> tw = k <= half_ / 2
                                         ? split_twiddles_[k]
                                         : -std::conj(split_twiddles_[kc]);
      const std::complex<float> odd = std::conj(tw) * (0.5f * (a - b));
      z[bit_reverse_[k]] =
          std::conj(even + std::complex<float>(0.0f, 1.0f) * odd);
    }
    fft_in_place(z);
    const float scale = 1.0f / static_cast<float>(half_);
    for (std::size_t m = 0; m < half_; ++m) {
      buffer[2 * m] = z[m].real() * scale;
      buffer[2 * m + 1] = -z[m].imag() * scale;
    }
  }

private:
  friend struct DftWorkspace;

  std::vector<std::complex<float>>& prepare(DftWorkspace& ws) const {
    if (ws.work.size() != half_) ws.work.resize(half_);
    return ws.work;
  }

  void fft_in_place(std::vector<std::complex<float>>& z) const {
    for (std::size_t len = 2; len <= half_; len <<= 1) {
      const std::size_t stride = half_ / len;
      for (std::size_t base = 0; base < half_; base += len) {
        for (std::size_t k = 0; k < len / 2; ++k) {
          const std::complex<float> w = stage_twiddles_[k * stride];
          const std::complex<float> u = z[base + k];
          const std::complex<float> v = z[base + k + len / 2] * w;
          z[base + k] = u + v;
          z[base + k + len / 2] = u - v;
        }
      }
    }
  }

  std::size_t size_;
  std::size_t half_;
  std::vector<std::complex<float>> stage_twiddles_;
  std::vector<std::complex<float>> split_twiddles_;
  std::vector<std::size_t> bit_reverse_;
};

inline DftWorkspace::DftWorkspace(const DftPlan& plan) {
  work.resize(plan.size() / 2);
}

inline SpectrumBlock forward_real(const DftPlan& plan,
                                  std::span<const float> buffer) {
  SpectrumBlock out;
  out.bins.resize(plan.bins());
  DftWorkspace ws(plan);
  plan.forward(buffer, out.bins, ws);
  return out;
}

inline std::vector<float> inverse_real(const DftPlan& plan,
                                       const SpectrumBlock& spectrum) {
  std::vector<float> out(plan.size());
  DftWorkspace ws(plan);
  plan.inverse(spectrum.bins, out, ws);
  return out;
}

}  // namespace aura
