#pragma once

#include <cmath>

namespace fxlearn {

// Direct form I biquad. DF1 keeps state meaningful when coefficients are
// retuned every frame, which trainable split frequencies and EQ gains do.
class Biquad {
 public:
  double tick(double x) {
    double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

  void reset() { x1_ = x2_ = y1_ = y2_ = 0.0; }

  void set_coeffs(double b0, double b1, double b2, double a1, double a2) {
    b0_ = b0;
    b1_ = b1;
    b2_ = b2;
    a1_ = a1;
    a2_ = a2;
  }

  // RBJ cookbook prototypes, normalized by a0.
  void set_lowpass(double fc, double q, double fs) {
    double w = 2.0 * M_PI * fc / fs;
    double cw = std::cos(w);
    double alpha = std::sin(w) / (2.0 * q);
    double a0 = 1.0 + alpha;
    set_coeffs(((1.0 - cw) / 2.0) / a0, (1.0 - cw) / a0, ((1.0 - cw) / 2.0) / a0,
               (-2.0 * cw) / a0, (1.0 - alpha) / a0);
  }

  void set_highpass(double fc, double q, double fs) {
    double w = 2.0 * M_PI * fc / fs;
    double cw = std::cos(w);
    double alpha = std::sin(w) / (2.0 * q);
    double a0 = 1.0 + alpha;
    set_coeffs(((1.0 + cw) / 2.0) / a0, -(1.0 + cw) / a0, ((1.0 + cw) / 2.0) / a0,
               (-2.0 * cw) / a0, (1.0 - alpha) / a0);
  }

  void set_allpass(double fc, double q, double fs) {
    double w = 2.0 * M_PI * fc / fs;
    double cw = std::cos(w);
    double alpha = std::sin(w) / (2.0 * q);
    double a0 = 1.0 + alpha;
    set_coeffs((1.0 - alpha) / a0, (-2.0 * cw) / a0, (1.0 + alpha) / a0, (-2.0 * cw) / a0,
               (1.0 - alpha) / a0);
  }

  void set_peaking(double fc, double q, double gain_db, double fs) {
    double amp = std::pow(10.0, gain_db / 40.0);
    double w = 2.0 * M_PI * fc / fs;
    double cw = std::cos(w);
    double alpha = std::sin(w) / (2.0 * q);
    double a0 = 1.0 + alpha / amp;
    set_coeffs((1.0 + alpha * amp) / a0, (-2.0 * cw) / a0, (1.0 - alpha * amp) / a0,
               (-2.0 * cw) / a0, (1.0 - alpha / amp) / a0);
  }

 private:
  double b0_ = 1.0, b1_ = 0.0, b2_ = 0.0, a1_ = 0.0, a2_ = 0.0;
  double x1_ = 0.0, x2_ = 0.0, y1_ = 0.0, y2_ = 0.0;
};

}  // namespace fxlearn
