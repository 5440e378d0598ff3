#pragma once

#include <cmath>
#include <iomanip>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aura/convolver.hpp"
#include "aura/oracle.hpp"

namespace aura::verify {

enum class Grid { small, full };

struct Options {
  Grid grid = Grid::full;
  std::string device = "reference";
};

namespace detail {

inline std::vector<std::vector<float>> scaled_normal_filters(
    std::size_t channels, std::size_t length, std::mt19937_64& rng) {
  std::normal_distribution<float> dist(0.0f, 1.0f);
  const float scale = 1.0f / std::sqrt(static_cast<float>(length));
  std::vector<std::vector<float>> filters(channels);
  for (auto& f : filters) {
    f.resize(length);
    for (auto& v : f) v = scale * dist(rng);
  }
  return filters;
}

/// Stream `blocks` random blocks through a convolver and report the max
/// absolute deviation from the 64-bit direct-convolution prefix.
inline double convolver_vs_oracle(std::size_t block_size,
                                  std::size_t filter_length,
                                  std::size_t channels, ChannelMode mode,
                                  std::uint64_t seed,
                                  const std::shared_ptr<ExecutionBackend>& backend,
                                  std::size_t extra_blocks = 3) {
  std::mt19937_64 rng(seed);
  const std::size_t in_channels =
      mode == ChannelMode::broadcast ? 1 : channels;
  const auto filters = scaled_normal_filters(channels, filter_length, rng);

  const std::size_t blocks =
      partition_count(filter_length, block_size) + extra_blocks;
  std::normal_distribution<float> dist(0.0f, 1.0f);
  std::vector<std::vector<float>> input(in_channels);
  for (auto& ch : input) {
    ch.resize(blocks * block_size);
    for (auto& v : ch) v = dist(rng);
  }

  const EngineConfig cfg =
      make_config(48000, block_size, in_channels, channels);
  Convolver conv(filters, cfg, mode, backend);

  std::vector<std::vector<float>> streamed(channels);
  for (auto& ch : streamed) ch.reserve(blocks * block_size);
  AudioBlock in_block(in_channels, block_size);
  AudioBlock out_block(channels, block_size);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t c = 0; c < in_channels; ++c) {
      const auto dst = in_block.channel(c);
      std::copy_n(input[c].begin() +
                      static_cast<std::ptrdiff_t>(b * block_size),
                  block_size, dst.begin());
    }
    conv.process(in_block, out_block);
    for (std::size_t c = 0; c < channels; ++c) {
      const auto src = out_block.channel(c);
      streamed[c].insert(streamed[c].end(), src.begin(), src.end());
    }
  }

  double max_err = 0.0;
  for (std::size_t c = 0; c < channels; ++c) {
    const std::size_t in_c = mode == ChannelMode::broadcast ? 0 : c;
    const auto expected = oracle::direct_convolve(
        oracle::to_double(input[in_c]), oracle::to_double(filters[c]));
    for (std::size_t t = 0; t < blocks * block_size; ++t)
      max_err = std::max(
          max_err, std::abs(static_cast<double>(streamed[c][t]) - expected[t]));
  }
  return max_err;
}

struct CaseOutcome {
  std::string name;
  bool pass;
  double metric;
};

inline void report(std::ostream& log, const CaseOutcome& c) {
  log << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (metric="
      << std::scientific << std::setprecision(3) << c.metric
      << std::defaultfloat << ")\n";
}

}  // namespace detail

/// Oracle-equivalence grid plus the closed-loop scenarios, printed one line
/// per case. Returns true iff everything passed.
inline bool run(const Options& opts, std::ostream& log = std::cout) {
  auto backend = make_backend(opts.device);
  bool all_pass = true;

  const std::vector<std::size_t> block_sizes =
      opts.grid == Grid::full ? std::vector<std::size_t>{16, 64, 128}
                              : std::vector<std::size_t>{16, 64};
  const std::vector<std::uint64_t> seeds =
      opts.grid == Grid::full ? std::vector<std::uint64_t>{0, 1, 2}
                              : std::vector<std::uint64_t>{0};

  for (const std::size_t n_x : block_sizes) {
    std::vector<std::size_t> lengths;
    if (opts.grid == Grid::full)
      lengths = {1, n_x - 1, n_x, n_x + 1, 3 * n_x + 7, 10 * n_x};
    else
      lengths = {1, n_x, 3 * n_x + 7};
    for (const std::size_t n_h : lengths) {
      for (const std::size_t channels : {std::size_t{1}, std::size_t{4}}) {
        for (const ChannelMode mode :
             {ChannelMode::broadcast, ChannelMode::elementwise}) {
          for (const std::uint64_t seed : seeds) {
            const double err = detail::convolver_vs_oracle(
                n_x, n_h, channels, mode, seed, backend);
            std::ostringstream name;
            name << "convolver-vs-oracle n_x=" << n_x << " n_h=" << n_h
                 << " C=" << channels << " " << to_string(mode)
                 << " seed=" << seed;
            const detail::CaseOutcome outcome{name.str(), err < 1e-4, err};
            detail::report(log, outcome);
            all_pass = all_pass && outcome.pass;
          }
        }
      }
    }
  }

  // Closed loop: exact feedback cancellation when F^ = F.
  {
    const std::size_t n_x = 128;
    const std::size_t channels = 2;
    const std::size_t num_blocks = opts.grid == Grid::full ? 50 : 20;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist(0.0, 1.0);

    oracle::ClosedLoopScenario scn;
    scn.cfg = make_config(48000, n_x, 1, channels);
    scn.num_blocks = num_blocks;
    scn.source.resize(num_blocks * n_x);
    for (auto& v : scn.source) v = dist(rng);
    scn.synth_filters = detail::scaled_normal_filters(channels, 3 * n_x, rng);
    const std::size_t fc_len = opts.grid == Grid::full ? 4800 : 1024;
    scn.fc_filters = detail::scaled_normal_filters(channels, fc_len, rng);
    for (auto& f : scn.fc_filters)
      for (auto& v : f) v *= 0.1f;  // loop gain below one at every frequency
    scn.true_feedback_paths.resize(channels);
    for (std::size_t c = 0; c < channels; ++c)
      scn.true_feedback_paths[c] = oracle::to_double(scn.fc_filters[c]);

    const auto result = oracle::simulate_closed_loop(scn, backend);
    double max_residual = 0.0;
    for (const auto& block : result.residual_blocks)
      for (float v : block)
        max_residual = std::max(max_residual, std::abs(static_cast<double>(v)));
    const detail::CaseOutcome outcome{
        "closed-loop perfect cancellation (F^ = F)", max_residual < 1e-4,
        max_residual};
    detail::report(log, outcome);
    all_pass = all_pass && outcome.pass;
  }

  // Closed loop: divergence with no cancellation and loop gain above one.
  {
    const std::size_t n_x = 64;
    const std::size_t num_blocks = 14;
    oracle::ClosedLoopScenario scn;
    scn.cfg = make_config(48000, n_x, 1, 1);
    scn.num_blocks = num_blocks;
    scn.source.assign(num_blocks * n_x, 1.0);
    scn.synth_filters = {{1.0f}};           // unit-gain synthesis
    scn.fc_filters = {{0.0f}};              // F^ = 0
    scn.true_feedback_paths = {{1.2}};      // loop amplitude 1.2

    const auto result = oracle::simulate_closed_loop(scn, backend);
    std::vector<double> energy(num_blocks, 0.0);
    for (std::size_t b = 0; b < num_blocks; ++b)
      for (float v : result.mic_blocks[b])
        energy[b] += static_cast<double>(v) * static_cast<double>(v);
    bool increasing = true;
    for (std::size_t b = 3; b + 1 <= 12; ++b)
      increasing = increasing && energy[b + 1] > energy[b];
    const detail::CaseOutcome outcome{
        "closed-loop divergence (F^ = 0, loop gain 1.2)", increasing,
        energy[12] / energy[3]};
    detail::report(log, outcome);
    all_pass = all_pass && outcome.pass;
  }

  log << (all_pass ? "verification passed" : "verification FAILED") << "\n";
  return all_pass;
}

}  // namespace aura::verify
