#pragma once

#include <stdexcept>
#include <string>

#include "fxlearn/audio.hpp"

namespace fxlearn {

struct WavError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reads RIFF/WAVE, PCM16 or IEEE float32; stereo is averaged to mono.
// Malformed files raise WavError naming the offending chunk and byte offset.
AudioClip wav_read(const std::string& path);

enum class WavFormat { pcm16, float32 };

// Writes mono. float32 round-trips bit-exactly; PCM16 within 1/32768.
void wav_write(const std::string& path, const AudioClip& clip,
               WavFormat format = WavFormat::float32);

}  // namespace fxlearn
