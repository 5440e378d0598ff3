#pragma once

#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aura/engine.hpp"

namespace aura::io {

/// Planar multichannel sample buffer with its sample rate; used for both
/// filter sets and signals.
struct SoundData {
  std::size_t channels = 0;
  std::size_t length = 0;  // samples per channel
  std::uint32_t sample_rate_hz = 0;
  std::vector<float> samples;  // planar, channel-major

  std::span<float> channel(std::size_t c) {
    return std::span<float>(samples).subspan(c * length, length);
  }
  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(samples).subspan(c * length, length);
  }

  std::vector<std::vector<float>> rows() const {
    std::vector<std::vector<float>> out(channels);
    for (std::size_t c = 0; c < channels; ++c) {
      const auto ch = channel(c);
      out[c].assign(ch.begin(), ch.end());
    }
    return out;
  }
};

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorCode::io_error, "cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline float f32_from_le(const unsigned char* p) {
  const std::uint32_t u = get_u32(p);
  float f;
  std::memcpy(&f, &u, sizeof(f));
  return f;
}

inline void f32_to_le(float f, std::string& out) {
  std::uint32_t u;
  std::memcpy(&u, &f, sizeof(u));
  put_u32(out, u);
}

}  // namespace detail

inline constexpr std::uint16_t kWavFormatIeeeFloat = 3;

/// RIFF/WAVE, IEEE-float (format tag 3), 32-bit, interleaved frames.
inline void write_wav_f32(const SoundData& data,
                          const std::filesystem::path& path) {
  const std::uint32_t bytes_per_frame =
      static_cast<std::uint32_t>(data.channels) * 4;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(data.length) * bytes_per_frame;

  std::string out;
  out.reserve(56 + data_bytes);
  out += "RIFF";
  detail::put_u32(out, 48 + data_bytes);  // everything after this field
  out += "WAVE";
  out += "fmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, kWavFormatIeeeFloat);
  detail::put_u16(out, static_cast<std::uint16_t>(data.channels));
  detail::put_u32(out, data.sample_rate_hz);
  detail::put_u32(out, data.sample_rate_hz * bytes_per_frame);
  detail::put_u16(out, static_cast<std::uint16_t>(bytes_per_frame));
  detail::put_u16(out, 32);
  out += "fact";
  detail::put_u32(out, 4);
  detail::put_u32(out, static_cast<std::uint32_t>(data.length));
  out += "data";
  detail::put_u32(out, data_bytes);
  for (std::size_t frame = 0; frame < data.length; ++frame)
    for (std::size_t c = 0; c < data.channels; ++c)
      detail::f32_to_le(data.samples[c * data.length + frame], out);

  std::ofstream file(path, std::ios::binary);
  if (!file || !file.write(out.data(), static_cast<std::streamsize>(out.size())))
    raise(ErrorCode::io_error, "cannot write '" + path.string() + "'");
}

inline SoundData read_wav_f32(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    raise(ErrorCode::corrupt_header,
          "'" + path.string() + "' is not a RIFF/WAVE file");

  SoundData data;
  bool have_fmt = false;
  std::size_t pos = 12;
  std::size_t data_offset = 0;
  std::size_t data_bytes = 0;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t chunk_size = detail::get_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size())
      raise(ErrorCode::corrupt_header,
            "truncated chunk in '" + path.string() + "'");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_size < 16)
        raise(ErrorCode::corrupt_header, "fmt chunk too small");
      const std::uint16_t tag = detail::get_u16(bytes.data() + body);
      const std::uint16_t channels = detail::get_u16(bytes.data() + body + 2);
      const std::uint32_t rate = detail::get_u32(bytes.data() + body + 4);
      const std::uint16_t bits = detail::get_u16(bytes.data() + body + 14);
      if (tag != kWavFormatIeeeFloat || bits != 32)
        raise(ErrorCode::unsupported_format,
              "only 32-bit IEEE-float WAV is supported");
      if (channels == 0)
        raise(ErrorCode::corrupt_header, "WAV with zero channels");
      data.channels = channels;
      data.sample_rate_hz = rate;
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_offset = body;
      data_bytes = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }
  if (!have_fmt || data_offset == 0)
    raise(ErrorCode::corrupt_header,
          "missing fmt or data chunk in '" + path.string() + "'");
  const std::size_t bytes_per_frame = data.channels * 4;
  if (data_bytes % bytes_per_frame != 0)
    raise(ErrorCode::corrupt_header, "data chunk is not a whole number of frames");
  data.length = data_bytes / bytes_per_frame;
  data.samples.resize(data.channels * data.length);
  for (std::size_t frame = 0; frame < data.length; ++frame)
    for (std::size_t c = 0; c < data.channels; ++c)
      data.samples[c * data.length + frame] = detail::f32_from_le(
          bytes.data() + data_offset + (frame * data.channels + c) * 4);
  return data;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".meta";
  return p;
}

/// Planar little-endian float32 with a text sidecar carrying channels,
/// length and sample_rate as integer key=value lines. Escapes WAV's 4 GiB
/// ceiling for very long multichannel filter sets.
inline void write_raw_f32(const SoundData& data,
                          const std::filesystem::path& path) {
  std::string out;
  out.reserve(data.samples.size() * 4);
  for (float v : data.samples) detail::f32_to_le(v, out);
  std::ofstream file(path, std::ios::binary);
  if (!file || !file.write(out.data(), static_cast<std::streamsize>(out.size())))
    raise(ErrorCode::io_error, "cannot write '" + path.string() + "'");

  std::ofstream meta(sidecar_path(path), std::ios::binary);
  meta << "channels=" << data.channels << "\n"
       << "length=" << data.length << "\n"
       << "sample_rate=" << data.sample_rate_hz << "\n";
  if (!meta.flush())
    raise(ErrorCode::io_error,
          "cannot write '" + sidecar_path(path).string() + "'");
}

inline SoundData read_raw_f32(const std::filesystem::path& path) {
  std::ifstream meta(sidecar_path(path));
  if (!meta)
    raise(ErrorCode::io_error,
          "missing sidecar '" + sidecar_path(path).string() + "'");
  std::map<std::string, std::uint64_t> kv;
  std::string line;
  while (std::getline(meta, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(ErrorCode::corrupt_header,
            "bad sidecar line '" + line + "' (expected key=value)");
    try {
      kv[line.substr(0, eq)] = std::stoull(line.substr(eq + 1));
    } catch (const std::exception&) {
      raise(ErrorCode::corrupt_header, "bad sidecar value in '" + line + "'");
    }
  }
  for (const char* key : {"channels", "length", "sample_rate"})
    if (!kv.contains(key))
      raise(ErrorCode::corrupt_header,
            "sidecar is missing the '" + std::string(key) + "' key");

  SoundData data;
  data.channels = kv["channels"];
  data.length = kv["length"];
  data.sample_rate_hz = static_cast<std::uint32_t>(kv["sample_rate"]);
  if (data.channels == 0 || data.length == 0)
    raise(ErrorCode::corrupt_header, "sidecar declares an empty filter set");

  const auto bytes = detail::read_file(path);
  if (bytes.size() != data.channels * data.length * 4)
    raise(ErrorCode::corrupt_header,
          "raw file size does not match the sidecar description");
  data.samples.resize(data.channels * data.length);
  for (std::size_t i = 0; i < data.samples.size(); ++i)
    data.samples[i] = detail::f32_from_le(bytes.data() + i * 4);
  return data;
}

inline bool has_wav_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(c));
  return ext == ".wav";
}

/// Load a filter set (or signal): .wav files as float32 WAV, anything else
/// as raw float32 with a sidecar.
inline SoundData read_filters(const std::filesystem::path& path) {
  return has_wav_extension(path) ? read_wav_f32(path) : read_raw_f32(path);
}

inline void write_filters(const SoundData& data,
                          const std::filesystem::path& path) {
  if (has_wav_extension(path))
    write_wav_f32(data, path);
  else
    write_raw_f32(data, path);
}

}  // namespace aura::io
