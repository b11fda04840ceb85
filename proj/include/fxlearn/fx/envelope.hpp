#pragma once

#include <cmath>

namespace fxlearn {

// One-pole peak detector. Smoothing coefficient a = exp(-1 / (tau_ms * fs / 1000)),
// attack coefficient while the rectified input rises, release while it falls.
// tau_ms <= 0 means instant (coefficient 0).
class EnvelopeFollower {
 public:
  EnvelopeFollower() = default;
  EnvelopeFollower(double attack_ms, double release_ms, double fs) {
    configure(attack_ms, release_ms, fs);
  }

  void configure(double attack_ms, double release_ms, double fs) {
    attack_coeff_ = coeff(attack_ms, fs);
    release_coeff_ = coeff(release_ms, fs);
  }

  double tick(double x) {
    double a = std::fabs(x);
    double c = a > env_ ? attack_coeff_ : release_coeff_;
    env_ = c * env_ + (1.0 - c) * a;
    return env_;
  }

  double value() const { return env_; }
  void reset() { env_ = 0.0; }

  static double coeff(double tau_ms, double fs) {
    double samples = tau_ms * fs / 1000.0;
    return samples > 0.0 ? std::exp(-1.0 / samples) : 0.0;
  }

 private:
  double attack_coeff_ = 0.0;
  double release_coeff_ = 0.0;
  double env_ = 0.0;
};

}  // namespace fxlearn
