#pragma once

#include "plmodem/channel.hpp"

#include <string>

namespace plmodem::wav {

// Declared full-scale mapping for interchange: 16-bit PCM full scale = 64 mA.
inline constexpr double kFullScaleMa = 64.0;

// PCM mono 16-bit only; sample rate is honored as stored in the file.
channel::Waveform read(const std::string& path);

// Samples are clamped to full scale before quantization.
void write(const std::string& path, const channel::Waveform& w);

} // namespace plmodem::wav
