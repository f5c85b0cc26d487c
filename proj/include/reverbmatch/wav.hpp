#pragma once

#include <filesystem>
#include <optional>

#include "reverbmatch/signal.hpp"

namespace reverbmatch {

enum class WavFormat { pcm16, float32 };

/// Reads a mono RIFF/WAVE file (PCM 16-bit or IEEE float 32-bit).
/// PCM16 samples are scaled to [-1, 1) by 1/32768. When `required_rate` is
/// set, any other rate is rejected ("unsupported sample rate"); there is no
/// resampling. Multichannel files are rejected ("mono required").
Signal read_wav(const std::filesystem::path& path, std::optional<double> required_rate = std::nullopt);

/// Writes `signal` atomically. PCM16 clips to [-1, 1 - 2^-15] and rounds to
/// the nearest step.
void write_wav(const std::filesystem::path& path, const Signal& signal, WavFormat format = WavFormat::float32);

}  // namespace reverbmatch
