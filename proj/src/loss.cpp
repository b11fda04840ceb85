#include "fxlearn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "fxlearn/fft.hpp"

namespace fxlearn {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Correlation at a single lag; tau > 0 pairs y_hat[t] with y[t - tau].
double xcorr_at(std::span<const double> y_hat, std::span<const double> y, int tau) {
  const int n = static_cast<int>(y_hat.size());
  const int begin = std::max(0, tau);
  const int end = n + std::min(0, tau);
  double acc = 0.0;
  for (int t = begin; t < end; ++t) acc += y_hat[static_cast<std::size_t>(t)] *
                                           y[static_cast<std::size_t>(t - tau)];
  return acc;
}

}  // namespace

DelayAlignment estimate_delay(std::span<const double> y_hat, std::span<const double> y,
                              int maxlag) {
  if (y_hat.size() != y.size()) throw std::invalid_argument("estimate_delay: length mismatch");
  const int n = static_cast<int>(y_hat.size());
  if (maxlag < 0 || maxlag >= n / 2) {
    throw std::invalid_argument("estimate_delay: maxlag must be in [0, N/2)");
  }

  // Visit lags as 0, -1, +1, -2, +2, ... and keep strictly greater peaks:
  // ties resolve toward smaller |tau|, then toward negative tau.
  double best = -1.0;
  int best_tau = 0;
  double best_val = 0.0;
  auto consider = [&](int tau) {
    double c = xcorr_at(y_hat, y, tau);
    if (std::fabs(c) > best) {
      best = std::fabs(c);
      best_tau = tau;
      best_val = c;
    }
  };
  consider(0);
  for (int k = 1; k <= maxlag; ++k) {
    consider(-k);
    consider(k);
  }

  DelayAlignment a;
  a.tau = best_tau;
  a.polarity = best_val < 0.0 ? -1 : +1;
  a.valid_begin = std::max(0, best_tau);
  a.valid_len = n - std::abs(best_tau);
  return a;
}

TimeLossResult time_loss(std::span<const double> y_hat, std::span<const double> y,
                         const DelayAlignment& align) {
  const int b = align.valid_begin;
  const int len = align.valid_len;
  if (len <= 0) throw std::invalid_argument("time_loss: empty valid region");

  double acc_minus = 0.0, acc_plus = 0.0;
  for (int i = 0; i < len; ++i) {
    double a = y_hat[static_cast<std::size_t>(b + i)];
    double t = y[static_cast<std::size_t>(b + i - align.tau)];
    acc_minus += std::fabs(a - t);
    acc_plus += std::fabs(a + t);
  }
  acc_minus /= len;
  acc_plus /= len;

  TimeLossResult r;
  r.grad.assign(y_hat.size(), 0.0);
  const bool use_minus = acc_minus <= acc_plus;
  r.value = use_minus ? acc_minus : acc_plus;
  for (int i = 0; i < len; ++i) {
    double a = y_hat[static_cast<std::size_t>(b + i)];
    double t = y[static_cast<std::size_t>(b + i - align.tau)];
    r.grad[static_cast<std::size_t>(b + i)] = sgn(use_minus ? a - t : a + t) / len;
  }
  return r;
}

FreqLossResult freq_loss(std::span<const double> y_hat, std::span<const double> y,
                         const DelayAlignment& align, const LossConfig& cfg) {
  const int b = align.valid_begin;
  const int len = align.valid_len;
  const auto k_fft = static_cast<std::size_t>(cfg.fft_size);
  if (len <= 0) throw std::invalid_argument("freq_loss: empty valid region");
  if (static_cast<std::size_t>(len) > k_fft) {
    throw std::invalid_argument("freq_loss: overlap exceeds fft_size");
  }

  const std::vector<double> w = hann_window(static_cast<std::size_t>(len));
  std::vector<std::complex<double>> ya(k_fft), yb(k_fft);
  for (int i = 0; i < len; ++i) {
    ya[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] *
                                      y_hat[static_cast<std::size_t>(b + i)];
    yb[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] *
                                      y[static_cast<std::size_t>(b + i - align.tau)];
  }
  fft_inplace(ya);
  fft_inplace(yb);

  const std::size_t bins = k_fft / 2 + 1;
  FreqLossResult r;
  r.output_spectrum.resize(bins);
  r.target_spectrum.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    r.output_spectrum[k] = std::abs(ya[k]);
    r.target_spectrum[k] = std::abs(yb[k]);
  }

  double sum_mag = 0.0, sum_log = 0.0;
  std::vector<double> dmag(bins), dlog(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    dmag[k] = r.output_spectrum[k] - r.target_spectrum[k];
    sum_mag += dmag[k] * dmag[k];
    dlog[k] = std::log(std::max(r.output_spectrum[k], cfg.log_floor)) -
              std::log(std::max(r.target_spectrum[k], cfg.log_floor));
    sum_log += dlog[k] * dlog[k];
  }
  const double nb = static_cast<double>(bins);
  const double l_mag = std::sqrt(sum_mag / nb);
  const double l_log = std::sqrt(sum_log / nb);
  r.value = l_mag + l_log;

  // d value / d |Y_k|, then pull back through the FFT of the windowed,
  // zero-padded overlap. Bins at the floor contribute no log gradient.
  std::vector<std::complex<double>> h(k_fft, {0.0, 0.0});
  for (std::size_t k = 0; k < bins; ++k) {
    double m = r.output_spectrum[k];
    double d = 0.0;
    if (l_mag > 0.0) d += dmag[k] / (nb * l_mag);
    if (l_log > 0.0 && m > cfg.log_floor) d += dlog[k] / (nb * l_log * m);
    if (m > 0.0 && d != 0.0) {
      h[k] = std::complex<double>(d * ya[k].real() / m, d * ya[k].imag() / m);
    }
  }
  fft_inplace(h, true);  // unnormalized e^{+iwt} transform

  r.grad.assign(y_hat.size(), 0.0);
  for (int i = 0; i < len; ++i) {
    r.grad[static_cast<std::size_t>(b + i)] =
        w[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)].real();
  }
  return r;
}

LossBreakdown total_loss(std::span<const double> y_hat, std::span<const double> y,
                         const LossConfig& cfg) {
  LossBreakdown out;
  out.alignment = estimate_delay(y_hat, y, cfg.maxlag);
  TimeLossResult lt = time_loss(y_hat, y, out.alignment);
  FreqLossResult lf = freq_loss(y_hat, y, out.alignment, cfg);

  out.l_time = lt.value;
  out.l_freq = lf.value;
  out.total = cfg.alpha_time * lt.value + cfg.alpha_freq * lf.value;
  out.grad_output.resize(y_hat.size());
  for (std::size_t t = 0; t < y_hat.size(); ++t) {
    out.grad_output[t] = cfg.alpha_time * lt.grad[t] + cfg.alpha_freq * lf.grad[t];
  }
  out.output_spectrum = std::move(lf.output_spectrum);
  out.target_spectrum = std::move(lf.target_spectrum);
  return out;
}

}  // namespace fxlearn
