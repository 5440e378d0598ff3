#include "aura/dft.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

using namespace aura;

namespace {

// Independent naive DFT in 64-bit; the oracle the fast transform is checked
// against.
std::vector<std::complex<double>> naive_dft(const std::vector<float>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t j = 0; j <= n / 2; ++j) {
    std::complex<double> sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) *
                           static_cast<double>(t) / static_cast<double>(n);
      sum += static_cast<double>(x[t]) *
             std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[j] = sum;
  }
  return out;
}

std::vector<float> random_buffer(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  std::vector<float> x(n);
  for (auto& v : x) v = dist(rng);
  return x;
}

TEST(Dft, RejectsBadSizes) {
  EXPECT_THROW(DftPlan(0), Error);
  EXPECT_THROW(DftPlan(24), Error);
  EXPECT_THROW(DftPlan(16), Error);  // below the 32-point minimum
  EXPECT_NO_THROW(DftPlan(32));
}

TEST(Dft, ZeroBufferGivesZeroSpectrum) {
  DftPlan plan(64);
  const auto spectrum = forward_real(plan, std::vector<float>(64, 0.0f));
  ASSERT_EQ(spectrum.size(), 33u);
  for (const auto& bin : spectrum.bins)
    EXPECT_EQ(bin, std::complex<float>(0.0f, 0.0f));
}

TEST(Dft, ImpulseGivesFlatSpectrum) {
  DftPlan plan(64);
  std::vector<float> x(64, 0.0f);
  x[0] = 1.0f;
  const auto spectrum = forward_real(plan, x);
  for (const auto& bin : spectrum.bins) {
    EXPECT_NEAR(bin.real(), 1.0f, 1e-6f);
    EXPECT_NEAR(bin.imag(), 0.0f, 1e-6f);
  }
}

TEST(Dft, FlatSpectrumInvertsToImpulse) {
  DftPlan plan(64);
  SpectrumBlock spectrum;
  spectrum.bins.assign(33, {1.0f, 0.0f});
  const auto x = inverse_real(plan, spectrum);
  EXPECT_NEAR(x[0], 1.0f, 1e-6f);
  for (std::size_t t = 1; t < x.size(); ++t) EXPECT_NEAR(x[t], 0.0f, 1e-6f);
}

TEST(Dft, MatchesNaiveDftOnRandomBuffer) {
  DftPlan plan(256);
  const auto x = random_buffer(256, 42);
  const auto fast = forward_real(plan, x);
  const auto exact = naive_dft(x);
  for (std::size_t j = 0; j < exact.size(); ++j) {
    EXPECT_NEAR(fast.bins[j].real(), exact[j].real(), 1e-5 * 256);
    EXPECT_NEAR(fast.bins[j].imag(), exact[j].imag(), 1e-5 * 256);
  }
}

TEST(Dft, MatchesNaiveDftAcrossSizes) {
  for (std::size_t n : {32u, 128u, 1024u}) {
    DftPlan plan(n);
    const auto x = random_buffer(n, n);
    const auto fast = forward_real(plan, x);
    const auto exact = naive_dft(x);
    double max_err = 0.0;
    for (std::size_t j = 0; j < exact.size(); ++j)
      max_err = std::max(max_err, std::abs(std::complex<double>(
                                      fast.bins[j].real(), fast.bins[j].imag()) -
                                  exact[j]));
    EXPECT_LT(max_err / static_cast<double>(n), 1e-5) << "n=" << n;
  }
}

TEST(Dft, EdgeBinsAreReal) {
  DftPlan plan(128);
  const auto spectrum = forward_real(plan, random_buffer(128, 7));
  EXPECT_EQ(spectrum.bins.front().imag(), 0.0f);
  EXPECT_EQ(spectrum.bins.back().imag(), 0.0f);
}

TEST(Dft, RoundTripIdentity) {
  DftPlan plan(512);
  const auto x = random_buffer(512, 3);
  const auto back = inverse_real(plan, forward_real(plan, x));
  for (std::size_t t = 0; t < x.size(); ++t)
    EXPECT_NEAR(back[t], x[t], 1e-6f * 100.0f);
}

TEST(Dft, Linearity) {
  DftPlan plan(256);
  const auto x = random_buffer(256, 10);
  const auto y = random_buffer(256, 11);
  const float a = 1.7f, b = -0.4f;
  std::vector<float> mix(256);
  for (std::size_t t = 0; t < 256; ++t) mix[t] = a * x[t] + b * y[t];

  const auto fx = forward_real(plan, x);
  const auto fy = forward_real(plan, y);
  const auto fmix = forward_real(plan, mix);
  for (std::size_t j = 0; j < fmix.size(); ++j) {
    const auto expected = a * fx.bins[j] + b * fy.bins[j];
    EXPECT_NEAR(fmix.bins[j].real(), expected.real(), 1e-5 * 256);
    EXPECT_NEAR(fmix.bins[j].imag(), expected.imag(), 1e-5 * 256);
  }
}

TEST(Dft, Parseval) {
  const std::size_t n = 256;
  DftPlan plan(n);
  const auto x = random_buffer(n, 21);
  const auto spectrum = forward_real(plan, x);

  double time_energy = 0.0;
  for (float v : x) time_energy += static_cast<double>(v) * v;

  double freq_energy = std::norm(std::complex<double>(
                           spectrum.bins.front().real(), 0.0)) +
                       std::norm(std::complex<double>(
                           spectrum.bins.back().real(), 0.0));
  for (std::size_t j = 1; j < n / 2; ++j)
    freq_energy += 2.0 * std::norm(std::complex<double>(
                             spectrum.bins[j].real(), spectrum.bins[j].imag()));
  freq_energy /= static_cast<double>(n);

  EXPECT_NEAR(freq_energy / time_energy, 1.0, 1e-4);
}

TEST(Dft, LengthMismatchRejected) {
  DftPlan plan(64);
  DftWorkspace ws(plan);
  std::vector<float> short_buf(32, 0.0f);
  std::vector<std::complex<float>> bins(33);
  EXPECT_THROW(plan.forward(short_buf, bins, ws), Error);
  std::vector<float> time(64);
  std::vector<std::complex<float>> wrong_bins(30);
  EXPECT_THROW(plan.inverse(wrong_bins, time, ws), Error);
}

TEST(Dft, NonRealEdgeBinsRejected) {
  DftPlan plan(64);
  DftWorkspace ws(plan);
  std::vector<std::complex<float>> bins(33, {0.0f, 0.0f});
  bins[0] = {1.0f, 0.5f};
  std::vector<float> time(64);
  try {
    plan.inverse(bins, time, ws);
    FAIL() << "expected non_real_edge_bins";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_real_edge_bins);
  }
}

}  // namespace
