#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aura/auralizer.hpp"
#include "aura/convolver.hpp"
#include "aura/engine.hpp"

namespace aura::bench {

enum class Subject { convolver, auralizer };
enum class SweptParameter { block_size, filter_length_s, channels, fc_length_s };

inline const char* to_string(Subject s) noexcept {
  return s == Subject::convolver ? "convolver" : "auralizer";
}

inline const char* to_string(SweptParameter p) noexcept {
  switch (p) {
    case SweptParameter::block_size: return "block-size";
    case SweptParameter::filter_length_s: return "filter-length";
    case SweptParameter::channels: return "channels";
    case SweptParameter::fc_length_s: return "fc-length";
  }
  return "?";
}

/// One benchmark sweep: which subject, which backend, which parameter to
/// vary, and the fixed defaults for everything else.
struct SweepSpec {
  Subject subject = Subject::convolver;
  std::string backend = "reference";
  SweptParameter parameter = SweptParameter::block_size;
  std::vector<double> values;  // strictly increasing

  std::uint32_t sample_rate_hz = 48000;
  std::size_t block_size = 128;
  std::size_t channels = 32;
  double synth_length_s = 10.0;
  double fc_length_s = 1.0;

  std::size_t trials = 10000;
  std::size_t warmup_trials = 100;
  std::uint64_t rng_seed = 0;
};

struct TimingRecord {
  std::string subject;
  std::string backend;
  std::string parameter;
  double value = 0.0;
  double mean_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
  std::size_t trials = 0;
  double budget_s = 0.0;
  bool realtime = false;

  friend bool operator==(const TimingRecord&, const TimingRecord&) = default;
};

inline std::vector<double> default_sweep_values(SweptParameter p) {
  switch (p) {
    case SweptParameter::block_size:
      return {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
    case SweptParameter::filter_length_s:
      return {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
    case SweptParameter::channels:
      return {1, 2, 4, 8, 16, 32, 64, 128};
    case SweptParameter::fc_length_s:
      return {0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
  }
  return {};
}

/// Standard-normal filters, one row per channel, bit-reproducible for a
/// given generator state.
inline std::vector<std::vector<float>> normal_filters(std::size_t channels,
                                                      std::size_t length,
                                                      std::mt19937_64& rng) {
  std::normal_distribution<float> dist(0.0f, 1.0f);
  std::vector<std::vector<float>> filters(channels);
  for (auto& f : filters) {
    f.resize(length);
    for (auto& v : f) v = dist(rng);
  }
  return filters;
}

inline std::vector<AudioBlock> normal_blocks(std::size_t count,
                                             std::size_t channels,
                                             std::size_t samples,
                                             std::mt19937_64& rng) {
  std::normal_distribution<float> dist(0.0f, 1.0f);
  std::vector<AudioBlock> blocks;
  blocks.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    AudioBlock block(channels, samples);
    for (auto& v : block.data()) v = dist(rng);
    blocks.push_back(std::move(block));
  }
  return blocks;
}

namespace detail {

struct ResolvedConfig {
  std::size_t block_size;
  std::size_t channels;
  std::size_t synth_taps;
  std::size_t fc_taps;
};

inline ResolvedConfig resolve(const SweepSpec& spec, double value) {
  ResolvedConfig r;
  r.block_size = spec.block_size;
  r.channels = spec.channels;
  double synth_s = spec.synth_length_s;
  double fc_s = spec.fc_length_s;
  switch (spec.parameter) {
    case SweptParameter::block_size:
      r.block_size = static_cast<std::size_t>(value);
      break;
    case SweptParameter::filter_length_s:
      synth_s = value;
      break;
    case SweptParameter::channels:
      r.channels = static_cast<std::size_t>(value);
      break;
    case SweptParameter::fc_length_s:
      fc_s = value;
      break;
  }
  const auto taps = [&](double seconds) {
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(seconds * spec.sample_rate_hz)));
  };
  r.synth_taps = taps(synth_s);
  r.fc_taps = taps(fc_s);
  return r;
}

inline void validate_spec(const SweepSpec& spec) {
  if (spec.values.empty())
    raise(ErrorCode::invalid_argument, "sweep needs at least one value");
  for (std::size_t i = 1; i < spec.values.size(); ++i)
    if (!(spec.values[i - 1] < spec.values[i]))
      raise(ErrorCode::invalid_argument,
            "sweep values must be strictly increasing");
  if (spec.trials == 0)
    raise(ErrorCode::invalid_argument, "trials must be >= 1");
  if (spec.warmup_trials == 0)
    raise(ErrorCode::invalid_argument, "warmup_trials must be >= 1");
}

}  // namespace detail

/// Build the subject with seeded random filters, run warmup calls, then time
/// `trials` single-block calls with a monotonic clock. Initialization and
/// filter transformation are excluded from the timings. A configuration that
/// fails to build (e.g. out of memory) is reported on stderr and skipped.
inline std::vector<TimingRecord> run_sweep(const SweepSpec& spec,
                                           std::ostream& log = std::cerr) {
  detail::validate_spec(spec);
  auto backend = make_backend(spec.backend);

  std::vector<TimingRecord> records;
  records.reserve(spec.values.size());
  for (std::size_t index = 0; index < spec.values.size(); ++index) {
    const double value = spec.values[index];
    const auto resolved = detail::resolve(spec, value);
    try {
      std::mt19937_64 rng(spec.rng_seed + 0x9e3779b97f4a7c15ULL * (index + 1));
      const EngineConfig cfg = make_config(spec.sample_rate_hz,
                                           resolved.block_size, 1,
                                           resolved.channels);

      std::optional<Convolver> convolver;
      std::optional<Auralizer> auralizer;
      if (spec.subject == Subject::convolver) {
        const auto filters =
            normal_filters(resolved.channels, resolved.synth_taps, rng);
        convolver.emplace(filters, cfg, ChannelMode::broadcast, backend);
      } else {
        const auto synth =
            normal_filters(resolved.channels, resolved.synth_taps, rng);
        const auto fc = normal_filters(resolved.channels, resolved.fc_taps, rng);
        auralizer.emplace(synth, fc, cfg, backend);
      }

      const std::size_t pool_size = std::min<std::size_t>(spec.trials, 64);
      const auto inputs =
          normal_blocks(pool_size, 1, resolved.block_size, rng);
      AudioBlock output(resolved.channels, resolved.block_size);

      const auto call = [&](const AudioBlock& in) {
        if (convolver)
          convolver->process(in, output);
        else
          auralizer->process(in, output);
      };

      for (std::size_t w = 0; w < spec.warmup_trials; ++w)
        call(inputs[w % pool_size]);

      using clock = std::chrono::steady_clock;
      double sum = 0.0;
      double min_s = std::numeric_limits<double>::infinity();
      double max_s = 0.0;
      for (std::size_t t = 0; t < spec.trials; ++t) {
        const auto t0 = clock::now();
        call(inputs[t % pool_size]);
        const auto t1 = clock::now();
        const double dt = std::chrono::duration<double>(t1 - t0).count();
        sum += dt;
        min_s = std::min(min_s, dt);
        max_s = std::max(max_s, dt);
      }

      TimingRecord rec;
      rec.subject = to_string(spec.subject);
      rec.backend = backend->descriptor().name;
      rec.parameter = to_string(spec.parameter);
      rec.value = value;
      rec.mean_s = sum / static_cast<double>(spec.trials);
      rec.min_s = min_s;
      rec.max_s = max_s;
      rec.trials = spec.trials;
      rec.budget_s = latency_budget(cfg);
      rec.realtime = rec.mean_s < rec.budget_s;
      records.push_back(std::move(rec));
    } catch (const std::bad_alloc&) {
      log << "bench: skipping " << to_string(spec.parameter) << "=" << value
          << ": out of memory\n";
    } catch (const Error& e) {
      if (e.code() == ErrorCode::out_of_memory) {
        log << "bench: skipping " << to_string(spec.parameter) << "=" << value
            << ": " << e.what() << "\n";
      } else {
        throw;
      }
    }
  }
  return records;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    raise(ErrorCode::corrupt_header, "bad numeric CSV field '" +
                                         std::string(s) + "'");
  return v;
}

inline std::size_t parse_size(std::string_view s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    raise(ErrorCode::corrupt_header, "bad integer CSV field '" +
                                         std::string(s) + "'");
  return v;
}

}  // namespace detail

inline constexpr std::string_view kCsvHeader =
    "subject,backend,parameter,value,mean_s,min_s,max_s,trials,budget_s,"
    "realtime";

/// UTF-8 CSV, '\n' newlines, '.' decimal point, shortest round-trippable
/// number formatting, realtime as lowercase true/false.
inline void emit_csv(std::span<const TimingRecord> records,
                     const std::filesystem::path& path) {
  if (records.empty())
    raise(ErrorCode::invalid_argument, "no timing records to write");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    raise(ErrorCode::io_error, "cannot open '" + path.string() +
                                   "' for writing");
  out << kCsvHeader << "\n";
  for (const auto& r : records) {
    out << r.subject << ',' << r.backend << ',' << r.parameter << ','
        << detail::format_double(r.value) << ','
        << detail::format_double(r.mean_s) << ','
        << detail::format_double(r.min_s) << ','
        << detail::format_double(r.max_s) << ',' << r.trials << ','
        << detail::format_double(r.budget_s) << ','
        << (r.realtime ? "true" : "false") << '\n';
  }
  if (!out.flush())
    raise(ErrorCode::io_error, "write to '" + path.string() + "' failed");
}

inline std::vector<TimingRecord> parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorCode::io_error, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    raise(ErrorCode::corrupt_header, "unexpected CSV header in '" +
                                         path.string() + "'");
  std::vector<TimingRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view view(line);
    while (true) {
      const auto comma = view.find(',');
      if (comma == std::string_view::npos) {
        fields.push_back(view);
        break;
      }
      fields.push_back(view.substr(0, comma));
      view.remove_prefix(comma + 1);
    }
    if (fields.size() != 10)
      raise(ErrorCode::corrupt_header, "CSV row with wrong field count");
    TimingRecord r;
    r.subject = std::string(fields[0]);
    r.backend = std::string(fields[1]);
    r.parameter = std::string(fields[2]);
    r.value = detail::parse_double(fields[3]);
    r.mean_s = detail::parse_double(fields[4]);
    r.min_s = detail::parse_double(fields[5]);
    r.max_s = detail::parse_double(fields[6]);
    r.trials = detail::parse_size(fields[7]);
    r.budget_s = detail::parse_double(fields[8]);
    if (fields[9] == "true")
      r.realtime = true;
    else if (fields[9] == "false")
      r.realtime = false;
    else
      raise(ErrorCode::corrupt_header, "realtime field must be true/false");
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace aura::bench
