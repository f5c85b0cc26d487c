#include "reverbmatch/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reverbmatch/keyvalue.hpp"

namespace reverbmatch {
namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <class T>
T read_le(const std::string& bytes, std::size_t offset) {
  T value{};
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <class T>
void append_le(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::invalid_argument(path.string() + ": " + what);
}

}  // namespace

Signal read_wav(const std::filesystem::path& path, std::optional<double> required_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0)
    fail(path, "not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_offset = 0, data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const auto size = read_le<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      if (id != "data") fail(path, "truncated chunk '" + id + "'");
    }
    if (id == "fmt ") {
      if (size < 16) fail(path, "fmt chunk too small");
      format = read_le<std::uint16_t>(bytes, body);
      channels = read_le<std::uint16_t>(bytes, body + 2);
      rate = read_le<std::uint32_t>(bytes, body + 4);
      bits = read_le<std::uint16_t>(bytes, body + 14);
      if (format == kFormatExtensible && size >= 26) format = read_le<std::uint16_t>(bytes, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      data_offset = body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) fail(path, "missing fmt chunk");
  if (data_offset == 0) fail(path, "missing data chunk");
  if (channels != 1) fail(path, "mono required (file has " + std::to_string(channels) + " channels)");
  if (required_rate && static_cast<double>(rate) != *required_rate)
    fail(path, "unsupported sample rate " + std::to_string(rate) + " Hz (expected " +
                   std::to_string(static_cast<long>(*required_rate)) + " Hz; resampling is not supported)");

  Signal out;
  out.sample_rate = static_cast<double>(rate);
  if (format == kFormatPcm && bits == 16) {
    const std::size_t n = data_size / 2;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      out.samples[i] = static_cast<double>(read_le<std::int16_t>(bytes, data_offset + 2 * i)) / 32768.0;
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t n = data_size / 4;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      out.samples[i] = static_cast<double>(read_le<float>(bytes, data_offset + 4 * i));
  } else {
    fail(path, "unsupported encoding (format " + std::to_string(format) + ", " + std::to_string(bits) +
                   " bits); expected PCM16 or float32");
  }
  out.validate();
  return out;
}

void write_wav(const std::filesystem::path& path, const Signal& signal, WavFormat format) {
  signal.validate();
  const double rate = std::round(signal.sample_rate);
  const std::uint16_t bits = format == WavFormat::pcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(signal.size() * block);

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  append_le<std::uint32_t>(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  append_le<std::uint32_t>(out, 16);
  append_le<std::uint16_t>(out, format == WavFormat::pcm16 ? kFormatPcm : kFormatFloat);
  append_le<std::uint16_t>(out, 1);
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(rate));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(rate) * block);
  append_le<std::uint16_t>(out, block);
  append_le<std::uint16_t>(out, bits);
  out += "data";
  append_le<std::uint32_t>(out, data_bytes);
  for (double v : signal.samples) {
    if (format == WavFormat::pcm16) {
      const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      append_le<std::int16_t>(out, static_cast<std::int16_t>(q));
    } else {
      append_le<float>(out, static_cast<float>(v));
    }
  }
  write_file_atomic(path, out);
}

}  // namespace reverbmatch
