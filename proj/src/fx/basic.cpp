#include "fxlearn/fx/basic.hpp"

#include <cmath>

namespace fxlearn {

IdentityFx::IdentityFx()
    : BlackboxFx(ParamSpecSet({{"unused", "", 0.0, 1.0, ParamMapping::linear}}), 1) {}

std::unique_ptr<BlackboxFx> IdentityFx::clone_config() const {
  return std::make_unique<IdentityFx>();
}

void IdentityFx::run_block(std::span<const double> in, std::span<double> out,
                           std::span<const double>) {
  std::copy(in.begin(), in.end(), out.begin());
}

GainFx::GainFx() : AnalyticFx(ParamSpecSet({{"gain", "x", 0.0, 2.0, ParamMapping::linear}}), 1) {}

std::unique_ptr<BlackboxFx> GainFx::clone_config() const { return std::make_unique<GainFx>(); }

void GainFx::run_block(std::span<const double> in, std::span<double> out,
                       std::span<const double> phys) {
  double g = phys[0];
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = g * in[i];
}

std::vector<double> GainFx::analytic_vjp(const AudioFrame& x, const ParamVector&,
                                         std::span<const double> v) const {
  const ParamSpec& s = param_specs().at(0);
  double acc = 0.0;
  for (std::size_t t = 0; t < x.samples.size(); ++t) acc += v[t] * x.samples[t];
  return {acc * (s.phys_max - s.phys_min)};
}

SoftClipFx::SoftClipFx()
    : AnalyticFx(ParamSpecSet({{"drive", "x", 0.5, 4.0, ParamMapping::linear},
                               {"level", "x", 0.0, 2.0, ParamMapping::linear}}),
                 1) {}

std::unique_ptr<BlackboxFx> SoftClipFx::clone_config() const {
  return std::make_unique<SoftClipFx>();
}

void SoftClipFx::run_block(std::span<const double> in, std::span<double> out,
                           std::span<const double> phys) {
  double drive = phys[0];
  double level = phys[1];
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = level * std::tanh(drive * in[i]);
}

std::vector<double> SoftClipFx::analytic_vjp(const AudioFrame& x, const ParamVector& theta,
                                             std::span<const double> v) const {
  double drive = denormalize(param_specs().at(0), theta[0]);
  double level = denormalize(param_specs().at(1), theta[1]);
  double drive_width = param_specs().at(0).phys_max - param_specs().at(0).phys_min;
  double level_width = param_specs().at(1).phys_max - param_specs().at(1).phys_min;
  double g_drive = 0.0, g_level = 0.0;
  for (std::size_t t = 0; t < x.samples.size(); ++t) {
    double th = std::tanh(drive * x.samples[t]);
    g_drive += v[t] * level * x.samples[t] * (1.0 - th * th);
    g_level += v[t] * th;
  }
  return {g_drive * drive_width, g_level * level_width};
}

SmootherFx::SmootherFx()
    : BlackboxFx(ParamSpecSet({{"coeff", "", 0.0, 0.995, ParamMapping::linear}}), 1) {}

std::unique_ptr<BlackboxFx> SmootherFx::clone_config() const {
  return std::make_unique<SmootherFx>();
}

void SmootherFx::run_block(std::span<const double> in, std::span<double> out,
                           std::span<const double> phys) {
  double c = phys[0];
  for (std::size_t i = 0; i < in.size(); ++i) {
    y1_ = (1.0 - c) * in[i] + c * y1_;
    out[i] = y1_;
  }
}

}  // namespace fxlearn
