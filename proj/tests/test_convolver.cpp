#include "aura/convolver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aura/oracle.hpp"

using namespace aura;

namespace {

std::vector<float> randn(std::size_t n, std::uint64_t seed, float scale = 1.0f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  std::vector<float> out(n);
  for (auto& v : out) v = scale * dist(rng);
  return out;
}

AudioBlock block_from(std::span<const float> samples, std::size_t channels = 1) {
  AudioBlock block(channels, samples.size());
  for (std::size_t c = 0; c < channels; ++c)
    std::copy(samples.begin(), samples.end(), block.channel(c).begin());
  return block;
}

TEST(Convolver, ImpulseFilterIsIdentity) {
  const EngineConfig cfg = make_config(48000, 64, 1, 1);
  std::vector<std::vector<float>> filters{{1.0f}};
  Convolver conv(filters, cfg, ChannelMode::broadcast);

  for (std::uint64_t b = 0; b < 5; ++b) {
    const auto x = randn(64, 100 + b);
    const auto y = conv.convolve(block_from(x));
    for (std::size_t t = 0; t < 64; ++t)
      EXPECT_NEAR(y.channel(0)[t], x[t], 2e-6f);
  }
}

TEST(Convolver, OneBlockDelayFilter) {
  const std::size_t n_x = 64;
  const EngineConfig cfg = make_config(48000, n_x, 1, 1);
  std::vector<float> delay(n_x + 1, 0.0f);
  delay[n_x] = 1.0f;  // delta at exactly one block
  std::vector<std::vector<float>> filters{delay};
  Convolver conv(filters, cfg, ChannelMode::broadcast);

  std::vector<std::vector<float>> inputs;
  for (std::uint64_t b = 0; b < 4; ++b) inputs.push_back(randn(n_x, 200 + b));

  std::vector<float> previous(n_x, 0.0f);
  for (const auto& x : inputs) {
    const auto y = conv.convolve(block_from(x));
    for (std::size_t t = 0; t < n_x; ++t)
      EXPECT_NEAR(y.channel(0)[t], previous[t], 2e-6f);
    previous = x;
  }
}

TEST(Convolver, MatchesDirectConvolutionBroadcast) {
  // n_h = 300 spans 5 partitions of 64 with a padded tail.
  const std::size_t n_x = 64, n_h = 300, channels = 3, blocks = 8;
  const EngineConfig cfg = make_config(48000, n_x, 1, channels);
  const float scale = 1.0f / std::sqrt(static_cast<float>(n_h));
  std::vector<std::vector<float>> filters;
  for (std::size_t c = 0; c < channels; ++c)
    filters.push_back(randn(n_h, 300 + c, scale));
  Convolver conv(filters, cfg, ChannelMode::broadcast);

  const auto input = randn(blocks * n_x, 77);
  std::vector<std::vector<float>> streamed(channels);
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto y = conv.convolve(block_from(
        std::span<const float>(input).subspan(b * n_x, n_x)));
    for (std::size_t c = 0; c < channels; ++c) {
      const auto ch = y.channel(c);
      streamed[c].insert(streamed[c].end(), ch.begin(), ch.end());
    }
  }

  for (std::size_t c = 0; c < channels; ++c) {
    const auto expected = oracle::direct_convolve(oracle::to_double(input),
                                                  oracle::to_double(filters[c]));
    for (std::size_t t = 0; t < blocks * n_x; ++t)
      EXPECT_NEAR(streamed[c][t], expected[t], 1e-4)
          << "channel " << c << " sample " << t;
  }
}

TEST(Convolver, PartitionSpectraShape) {
  const EngineConfig cfg = make_config(48000, 128, 1, 2);
  std::vector<std::vector<float>> filters(2, randn(480000, 5));
  Convolver conv(filters, cfg, ChannelMode::broadcast);
  EXPECT_EQ(conv.partition_count(), 3750u);
  EXPECT_EQ(conv.filters().bins(), 129u);
  EXPECT_EQ(conv.filters().num_channels(), 2u);
}

TEST(Convolver, UnitImpulsePartitionSpectrumIsFlat) {
  const EngineConfig cfg = make_config(48000, 64, 1, 1);
  std::vector<std::vector<float>> filters{{}};
  filters[0].assign(1, 1.0f);
  Convolver conv(filters, cfg, ChannelMode::broadcast);
  EXPECT_EQ(conv.partition_count(), 1u);
  for (const auto& bin : conv.filters().spectrum(0, 0)) {
    EXPECT_NEAR(bin.real(), 1.0f, 1e-6f);
    EXPECT_NEAR(bin.imag(), 0.0f, 1e-6f);
  }
}

TEST(Convolver, RaggedFiltersRejected) {
  const EngineConfig cfg = make_config(48000, 64, 1, 2);
  std::vector<std::vector<float>> filters{randn(100, 1), randn(200, 2)};
  try {
    Convolver conv(filters, cfg, ChannelMode::broadcast);
    FAIL() << "expected filter_length_mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::filter_length_mismatch);
  }
}

TEST(Convolver, EmptyFiltersRejected) {
  const EngineConfig cfg = make_config(48000, 64, 1, 1);
  std::vector<std::vector<float>> none;
  EXPECT_THROW(Convolver(none, cfg, ChannelMode::broadcast), Error);
  std::vector<std::vector<float>> zero_taps{{}};
  try {
    Convolver conv(zero_taps, cfg, ChannelMode::broadcast);
    FAIL() << "expected empty_filter";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_filter);
  }
}

TEST(Convolver, ModeChannelMismatchRejected) {
  std::vector<std::vector<float>> filters{{1.0f}, {1.0f}};
  try {
    Convolver conv(filters, make_config(48000, 64, 2, 2),
                   ChannelMode::broadcast);
    FAIL() << "expected mode_channel_mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::mode_channel_mismatch);
  }
  // One filter but two configured output channels.
  std::vector<std::vector<float>> one{{1.0f}};
  EXPECT_THROW(Convolver(one, make_config(48000, 64, 1, 2),
                         ChannelMode::broadcast),
               Error);
}

TEST(Convolver, ShapeAndFinitenessChecked) {
  const EngineConfig cfg = make_config(48000, 64, 1, 1);
  std::vector<std::vector<float>> filters{{1.0f}};
  Convolver conv(filters, cfg, ChannelMode::broadcast);

  EXPECT_THROW(conv.convolve(AudioBlock(2, 64)), Error);
  EXPECT_THROW(conv.convolve(AudioBlock(1, 32)), Error);

  AudioBlock bad(1, 64);
  bad.channel(0)[7] = std::numeric_limits<float>::infinity();
  try {
    conv.convolve(bad);
    FAIL() << "expected non_finite_input";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_finite_input);
  }
}

TEST(Convolver, ResetRestoresFreshState) {
  const std::size_t n_x = 64;
  const EngineConfig cfg = make_config(48000, n_x, 1, 1);
  std::vector<std::vector<float>> filters{randn(200, 9, 0.1f)};
  Convolver conv(filters, cfg, ChannelMode::broadcast);

  const auto x = randn(n_x, 50);
  const auto fresh = conv.convolve(block_from(x));
  for (int b = 0; b < 5; ++b) conv.convolve(block_from(randn(n_x, 60 + b)));
  EXPECT_EQ(conv.blocks_processed(), 6u);

  conv.reset();
  EXPECT_EQ(conv.blocks_processed(), 0u);
  const auto again = conv.convolve(block_from(x));
  for (std::size_t t = 0; t < n_x; ++t)
    EXPECT_EQ(again.channel(0)[t], fresh.channel(0)[t]);

  conv.reset();
  conv.reset();  // idempotent
  const auto zero = conv.convolve(AudioBlock(1, n_x));
  for (std::size_t t = 0; t < n_x; ++t) EXPECT_EQ(zero.channel(0)[t], 0.0f);
}

TEST(Convolver, LinearityAcrossFreshInstances) {
  const std::size_t n_x = 64, n_h = 150;
  const EngineConfig cfg = make_config(48000, n_x, 1, 1);
  std::vector<std::vector<float>> filters{
      randn(n_h, 7, 1.0f / std::sqrt(static_cast<float>(n_h)))};

  const float a = 0.8f, b = -1.3f;
  const auto x = randn(3 * n_x, 70);
  const auto y = randn(3 * n_x, 71);
  std::vector<float> mix(3 * n_x);
  for (std::size_t t = 0; t < mix.size(); ++t) mix[t] = a * x[t] + b * y[t];

  Convolver cx(filters, cfg, ChannelMode::broadcast);
  Convolver cy(filters, cfg, ChannelMode::broadcast);
  Convolver cmix(filters, cfg, ChannelMode::broadcast);

  for (std::size_t blk = 0; blk < 3; ++blk) {
    const auto sx = std::span<const float>(x).subspan(blk * n_x, n_x);
    const auto sy = std::span<const float>(y).subspan(blk * n_x, n_x);
    const auto sm = std::span<const float>(mix).subspan(blk * n_x, n_x);
    const auto ox = cx.convolve(block_from(sx));
    const auto oy = cy.convolve(block_from(sy));
    const auto om = cmix.convolve(block_from(sm));
    for (std::size_t t = 0; t < n_x; ++t)
      EXPECT_NEAR(om.channel(0)[t],
                  a * ox.channel(0)[t] + b * oy.channel(0)[t], 1e-4f);
  }
}

TEST(Convolver, BroadcastElementwiseConsistency) {
  const std::size_t n_x = 64, n_h = 3 * n_x + 7, channels = 4;
  const float scale = 1.0f / std::sqrt(static_cast<float>(n_h));
  std::vector<std::vector<float>> filters;
  for (std::size_t c = 0; c < channels; ++c)
    filters.push_back(randn(n_h, 400 + c, scale));

  Convolver broadcast(filters, make_config(48000, n_x, 1, channels),
                      ChannelMode::broadcast);
  Convolver elementwise(filters, make_config(48000, n_x, channels, channels),
                        ChannelMode::elementwise);

  for (std::uint64_t b = 0; b < 6; ++b) {
    const auto x = randn(n_x, 500 + b);
    const auto yb = broadcast.convolve(block_from(x, 1));
    const auto ye = elementwise.convolve(block_from(x, channels));
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < n_x; ++t)
        EXPECT_NEAR(ye.channel(c)[t], yb.channel(c)[t], 1e-6f);
  }
}

TEST(Convolver, FirstBlockUsesOnlyPartitionZero) {
  const std::size_t n_x = 64;
  const EngineConfig cfg = make_config(48000, n_x, 1, 1);
  const auto head = randn(n_x, 600, 0.5f);

  // Two filters sharing partition 0 but differing beyond it.
  std::vector<float> f1(3 * n_x), f2(3 * n_x);
  std::copy(head.begin(), head.end(), f1.begin());
  std::copy(head.begin(), head.end(), f2.begin());
  const auto tail1 = randn(2 * n_x, 601);
  const auto tail2 = randn(2 * n_x, 602);
  std::copy(tail1.begin(), tail1.end(), f1.begin() + n_x);
  std::copy(tail2.begin(), tail2.end(), f2.begin() + n_x);

  Convolver c1(std::vector<std::vector<float>>{f1}, cfg,
               ChannelMode::broadcast);
  Convolver c2(std::vector<std::vector<float>>{f2}, cfg,
               ChannelMode::broadcast);
  const auto x = randn(n_x, 603);
  const auto y1 = c1.convolve(block_from(x));
  const auto y2 = c2.convolve(block_from(x));
  for (std::size_t t = 0; t < n_x; ++t)
    EXPECT_EQ(y1.channel(0)[t], y2.channel(0)[t]);
}

TEST(Convolver, CausalStreaming) {
  // Changing a later input block cannot change an earlier output block.
  const std::size_t n_x = 64;
  const EngineConfig cfg = make_config(48000, n_x, 1, 1);
  std::vector<std::vector<float>> filters{randn(200, 12, 0.1f)};

  Convolver a(filters, cfg, ChannelMode::broadcast);
  Convolver b(filters, cfg, ChannelMode::broadcast);

  const auto block0 = randn(n_x, 13);
  const auto ya = a.convolve(block_from(block0));
  const auto yb = b.convolve(block_from(block0));
  for (std::size_t t = 0; t < n_x; ++t)
    EXPECT_EQ(ya.channel(0)[t], yb.channel(0)[t]);

  // Diverge afterwards; the already-emitted block is unaffected by design,
  // and the next outputs must follow each convolver's own input history.
  a.convolve(block_from(randn(n_x, 14)));
  b.convolve(block_from(randn(n_x, 15)));
}

TEST(Convolver, ParallelBackendMatchesReference) {
  const std::size_t n_x = 64, n_h = 10 * n_x, channels = 4, blocks = 13;
  const float scale = 1.0f / std::sqrt(static_cast<float>(n_h));
  std::vector<std::vector<float>> filters;
  for (std::size_t c = 0; c < channels; ++c)
    filters.push_back(randn(n_h, 700 + c, scale));
  const EngineConfig cfg = make_config(48000, n_x, 1, channels);

  Convolver ref(filters, cfg, ChannelMode::broadcast,
                make_backend("reference"));
  Convolver par(filters, cfg, ChannelMode::broadcast,
                make_backend("parallel"));

  for (std::uint64_t b = 0; b < blocks; ++b) {
    const auto x = randn(n_x, 800 + b);
    const auto yr = ref.convolve(block_from(x));
    const auto yp = par.convolve(block_from(x));
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < n_x; ++t)
        EXPECT_NEAR(yp.channel(c)[t], yr.channel(c)[t], 1e-4f);
  }
}

}  // namespace
