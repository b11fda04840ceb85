#pragma once

#include <span>
#include <vector>

namespace fxlearn {

struct LossConfig {
  double alpha_time = 10.0;
  double alpha_freq = 1.0;
  int maxlag = 256;           // must stay below N/2
  double log_floor = 1e-7;    // magnitude floor inside the log term
  int fft_size = 1024;
};

// tau > 0 means the output lags the target by tau samples: the aligned pair
// is (y_hat[t], y[t - tau]) over the overlapping region.
struct DelayAlignment {
  int tau = 0;
  int polarity = +1;
  int valid_begin = 0;  // first y_hat index of the overlap
  int valid_len = 0;
};

struct LossBreakdown {
  double l_time = 0.0;
  double l_freq = 0.0;
  double total = 0.0;
  DelayAlignment alignment;
  std::vector<double> grad_output;      // d total / d y_hat, per sample
  std::vector<double> output_spectrum;  // |FFT| of aligned y_hat, fft_size/2+1 bins
  std::vector<double> target_spectrum;
};

// argmax over lags in [-maxlag, maxlag] of |cross-correlation|, polarity from
// the sign of the peak. Ties break toward smaller |tau|, then negative tau.
// All-zero inputs return tau=0, polarity=+1.
DelayAlignment estimate_delay(std::span<const double> y_hat, std::span<const double> y,
                              int maxlag);

struct TimeLossResult {
  double value = 0.0;
  std::vector<double> grad;  // w.r.t. y_hat
};

// Mean-L1 over the overlap, min of the 0-degree and 180-degree branches.
TimeLossResult time_loss(std::span<const double> y_hat, std::span<const double> y,
                         const DelayAlignment& align);

struct FreqLossResult {
  double value = 0.0;
  std::vector<double> grad;  // w.r.t. y_hat
  std::vector<double> output_spectrum;
  std::vector<double> target_spectrum;
};

// Hann-windowed magnitude spectra of the aligned overlap zero-padded to
// fft_size; RMS-normalized L2 of the magnitude difference plus L2 of the
// log-magnitude difference.
FreqLossResult freq_loss(std::span<const double> y_hat, std::span<const double> y,
                         const DelayAlignment& align, const LossConfig& cfg);

// alpha_time * L_time + alpha_freq * L_freq with the analytic gradient with
// respect to y_hat. tau and the min branch are treated as constants.
LossBreakdown total_loss(std::span<const double> y_hat, std::span<const double> y,
                         const LossConfig& cfg = {});

}  // namespace fxlearn
