#pragma once

#include <memory>
#include <span>

#include "fxlearn/blackbox_fx.hpp"

namespace fxlearn {

// Differentiable test effect: exposes its exact VJP (in normalized parameter
// units) so the stochastic estimators can be checked against ground truth.
class AnalyticFx : public BlackboxFx {
 public:
  using BlackboxFx::BlackboxFx;
  virtual std::vector<double> analytic_vjp(const AudioFrame& x, const ParamVector& theta,
                                           std::span<const double> v) const = 0;
};

// Unity gain; the single parameter is ignored.
class IdentityFx final : public BlackboxFx {
 public:
  IdentityFx();
  void reset() override {}
  std::unique_ptr<BlackboxFx> clone_config() const override;

 protected:
  void run_block(std::span<const double> in, std::span<double> out,
                 std::span<const double> phys) override;
};

// Memoryless linear gain, physical range [0, 2].
class GainFx final : public AnalyticFx {
 public:
  GainFx();
  void reset() override {}
  std::unique_ptr<BlackboxFx> clone_config() const override;
  std::vector<double> analytic_vjp(const AudioFrame& x, const ParamVector& theta,
                                   std::span<const double> v) const override;

 protected:
  void run_block(std::span<const double> in, std::span<double> out,
                 std::span<const double> phys) override;
};

// level * tanh(drive * x); smooth and memoryless, so its Jacobian has a
// closed form. P = 2 (drive, level).
class SoftClipFx final : public AnalyticFx {
 public:
  SoftClipFx();
  void reset() override {}
  std::unique_ptr<BlackboxFx> clone_config() const override;
  std::vector<double> analytic_vjp(const AudioFrame& x, const ParamVector& theta,
                                   std::span<const double> v) const override;

 protected:
  void run_block(std::span<const double> in, std::span<double> out,
                 std::span<const double> phys) override;
};

// One-pole smoother y[n] = (1-c) x[n] + c y[n-1]; the simplest stateful
// effect, handy for exercising replica state handling.
class SmootherFx final : public BlackboxFx {
 public:
  SmootherFx();
  void reset() override { y1_ = 0.0; }
  std::unique_ptr<BlackboxFx> clone_config() const override;

 protected:
  void run_block(std::span<const double> in, std::span<double> out,
                 std::span<const double> phys) override;

 private:
  double y1_ = 0.0;
};

}  // namespace fxlearn
