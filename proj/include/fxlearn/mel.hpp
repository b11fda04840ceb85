#pragma once

#include <span>
#include <vector>

#include "fxlearn/audio.hpp"

namespace fxlearn {

// time-major grid of per-frame feature vectors (mel energies, MFCCs, ...).
struct FeatureMap {
  int frames = 0;
  int bands = 0;
  std::vector<double> v;  // frames * bands, row-major

  FeatureMap() = default;
  FeatureMap(int t, int m) : frames(t), bands(m), v(static_cast<std::size_t>(t) * m, 0.0) {}
  double& at(int t, int m) { return v[static_cast<std::size_t>(t) * bands + m]; }
  double at(int t, int m) const { return v[static_cast<std::size_t>(t) * bands + m]; }
};

struct MelConfig {
  int window = 1024;       // ~46 ms at 22050 Hz
  int hop = 768;           // 25% overlap
  int n_mels = 128;
  double fmin = 20.0;
  double fmax = 0.0;       // 0 = Nyquist
  double log_offset = 1e-6;
  double sample_rate = 22050.0;

  int frames_for(int n_samples) const { return (n_samples - window) / hop + 1; }
};

// Triangular filters on the 2595*log10(1 + f/700) scale, area-normalized.
// Rows are mel bands, laid out sparsely as (first_bin, weights).
struct MelFilterBank {
  struct Filter {
    int first_bin = 0;
    std::vector<double> weights;
  };
  std::vector<Filter> filters;

  static MelFilterBank build(int n_fft, int n_mels, double fmin, double fmax,
                             double sample_rate);
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Hann STFT -> power spectrum -> mel filters -> log(. + offset).
FeatureMap melspec(std::span<const double> samples, const MelConfig& cfg);

struct MfccConfig {
  int n_mfcc = 13;
  int window = 1024;
  int hop = 256;  // 25% of the window
  int n_mels = 128;
  double sample_rate = 22050.0;
};

// Per-frame MFCC vectors (orthonormal DCT-II of the log-power mel spectrum,
// coefficients 0..n_mfcc-1 kept).
FeatureMap mfcc(std::span<const double> samples, const MfccConfig& cfg);

// Mean over frames of (1 - cosine similarity) between per-frame MFCC
// vectors. The shorter clip is zero-padded; frames where either side is
// silent are skipped.
double mfcc_distance(const AudioClip& a, const AudioClip& b, const MfccConfig& cfg = {});

}  // namespace fxlearn
