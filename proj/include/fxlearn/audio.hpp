#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace fxlearn {

// One fixed-size block of mono audio. Frame length is set by the pipeline
// configuration (N = 1024 by default) and checked at the processing boundary.
struct AudioFrame {
  std::vector<double> samples;
  double sample_rate = 22050.0;

  AudioFrame() = default;
  AudioFrame(std::size_t n, double rate) : samples(n, 0.0), sample_rate(rate) {}

  std::size_t size() const { return samples.size(); }
};

// The current frame centered inside a longer window of surrounding samples.
// Invariant: length is a multiple of the frame size and the central N samples
// equal the paired AudioFrame.
struct ContextFrame {
  std::vector<double> samples;
  double sample_rate = 22050.0;

  std::size_t size() const { return samples.size(); }
};

// Variable-length mono recording.
struct AudioClip {
  std::vector<double> samples;
  double sample_rate = 22050.0;
  std::string source_id;

  std::size_t size() const { return samples.size(); }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

inline double db_to_lin(double db) { return std::pow(10.0, db / 20.0); }
inline double lin_to_db(double lin) { return 20.0 * std::log10(lin); }

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Start index of the frame within its context window.
inline std::size_t context_center_offset(std::size_t context_len, std::size_t frame_len) {
  return (context_len - frame_len) / 2;
}

}  // namespace fxlearn
