#include "fxlearn/mel.hpp"

#include <cmath>
#include <stdexcept>

#include "fxlearn/fft.hpp"

namespace fxlearn {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterBank MelFilterBank::build(int n_fft, int n_mels, double fmin, double fmax,
                                   double sample_rate) {
  if (fmax <= 0.0) fmax = sample_rate / 2.0;
  const int bins = n_fft / 2 + 1;
  const double bin_hz = sample_rate / n_fft;

  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  const double mel_lo = hz_to_mel(fmin), mel_hi = hz_to_mel(fmax);
  for (std::size_t m = 0; m < edges.size(); ++m) {
    edges[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(m) /
                                      (n_mels + 1));
  }

  MelFilterBank bank;
  bank.filters.resize(static_cast<std::size_t>(n_mels));
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double mid = edges[static_cast<std::size_t>(m) + 1];
    const double hi = edges[static_cast<std::size_t>(m) + 2];
    const double norm = 2.0 / (hi - lo);  // unit area

    auto& f = bank.filters[static_cast<std::size_t>(m)];
    f.first_bin = -1;
    for (int k = 0; k < bins; ++k) {
      const double fk = k * bin_hz;
      double w = 0.0;
      if (fk > lo && fk < hi) {
        w = fk <= mid ? (fk - lo) / (mid - lo) : (hi - fk) / (hi - mid);
      }
      if (w > 0.0) {
        if (f.first_bin < 0) f.first_bin = k;
        f.weights.push_back(w * norm);
      } else if (f.first_bin >= 0) {
        break;
      }
    }
    if (f.first_bin < 0) f.first_bin = 0;  // filter narrower than one bin
  }
  return bank;
}

namespace {

// Shared STFT -> log mel energy core.
FeatureMap log_mel_frames(std::span<const double> samples, int window, int hop, int n_mels,
                          double fmin, double fmax, double log_offset, double sample_rate) {
  if (static_cast<int>(samples.size()) < window) {
    throw std::invalid_argument("melspec: input shorter than the analysis window");
  }
  const int frames = (static_cast<int>(samples.size()) - window) / hop + 1;
  const MelFilterBank bank = MelFilterBank::build(window, n_mels, fmin, fmax, sample_rate);
  const std::vector<double> win = hann_window(static_cast<std::size_t>(window));

  FeatureMap out(frames, n_mels);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(window));
  std::vector<double> power(static_cast<std::size_t>(window / 2 + 1));
  for (int t = 0; t < frames; ++t) {
    const double* x = samples.data() + static_cast<std::size_t>(t) * hop;
    for (int i = 0; i < window; ++i) {
      buf[static_cast<std::size_t>(i)] = {x[i] * win[static_cast<std::size_t>(i)], 0.0};
    }
    fft_inplace(buf);
    for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);

    for (int m = 0; m < n_mels; ++m) {
      const auto& f = bank.filters[static_cast<std::size_t>(m)];
      double acc = 0.0;
      for (std::size_t j = 0; j < f.weights.size(); ++j) {
        acc += f.weights[j] * power[static_cast<std::size_t>(f.first_bin) + j];
      }
      out.at(t, m) = std::log(acc + log_offset);
    }
  }
  return out;
}

}  // namespace

FeatureMap melspec(std::span<const double> samples, const MelConfig& cfg) {
  return log_mel_frames(samples, cfg.window, cfg.hop, cfg.n_mels, cfg.fmin, cfg.fmax,
                        cfg.log_offset, cfg.sample_rate);
}

FeatureMap mfcc(std::span<const double> samples, const MfccConfig& cfg) {
  FeatureMap mel = log_mel_frames(samples, cfg.window, cfg.hop, cfg.n_mels, 20.0, 0.0, 1e-10,
                                  cfg.sample_rate);
  FeatureMap out(mel.frames, cfg.n_mfcc);
  const double n = cfg.n_mels;
  // Orthonormal DCT-II over the mel axis.
  for (int t = 0; t < mel.frames; ++t) {
    for (int k = 0; k < cfg.n_mfcc; ++k) {
      double acc = 0.0;
      for (int m = 0; m < cfg.n_mels; ++m) {
        acc += mel.at(t, m) * std::cos(M_PI * k * (m + 0.5) / n);
      }
      out.at(t, k) = acc * std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    }
  }
  return out;
}

double mfcc_distance(const AudioClip& a, const AudioClip& b, const MfccConfig& cfg) {
  std::vector<double> xa = a.samples, xb = b.samples;
  const std::size_t n = std::max(xa.size(), xb.size());
  xa.resize(n, 0.0);
  xb.resize(n, 0.0);
  if (static_cast<int>(n) < cfg.window) {
    throw std::invalid_argument("mfcc_distance: clips shorter than the analysis window");
  }

  const FeatureMap fa = mfcc(xa, cfg);
  const FeatureMap fb = mfcc(xb, cfg);

  // A frame is silent when its source samples are (numerically) all zero.
  auto frame_silent = [&](const std::vector<double>& x, int t) {
    const std::size_t off = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.window; ++i) {
      if (std::fabs(x[off + static_cast<std::size_t>(i)]) > 1e-12) return false;
    }
    return true;
  };

  double acc = 0.0;
  int used = 0;
  for (int t = 0; t < fa.frames; ++t) {
    if (frame_silent(xa, t) || frame_silent(xb, t)) continue;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int k = 0; k < cfg.n_mfcc; ++k) {
      dot += fa.at(t, k) * fb.at(t, k);
      na += fa.at(t, k) * fa.at(t, k);
      nb += fb.at(t, k) * fb.at(t, k);
    }
    if (na <= 0.0 || nb <= 0.0) continue;
    acc += 1.0 - dot / std::sqrt(na * nb);
    ++used;
  }
  return used > 0 ? acc / used : 0.0;
}

}  // namespace fxlearn
