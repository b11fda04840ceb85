#include "fxlearn/fx/graphic_eq.hpp"

#include <cmath>

namespace fxlearn {

namespace {

ParamSpecSet eq_specs() {
  std::vector<ParamSpec> s;
  for (int b = 1; b <= GraphicEqFx::kBands; ++b) {
    s.push_back({"gain_" + std::to_string(b), "dB", -24.0, 24.0, ParamMapping::linear});
  }
  s.push_back({"output_gain", "dB", -24.0, 24.0, ParamMapping::linear});
  return ParamSpecSet(std::move(s));
}

}  // namespace

std::array<double, GraphicEqFx::kBands> GraphicEqFx::center_frequencies() {
  std::array<double, kBands> c{};
  const double lo = 40.0, hi = 10200.0;
  for (int i = 0; i < kBands; ++i) {
    c[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (kBands - 1));
  }
  return c;
}

GraphicEqFx::GraphicEqFx(double sample_rate)
    : BlackboxFx(eq_specs(), 64), fs_(sample_rate), centers_(center_frequencies()) {
  last_gain_db_.fill(0.0);
  for (int i = 0; i < kBands; ++i) filters_[i].set_peaking(centers_[i], kQ, 0.0, fs_);
}

void GraphicEqFx::reset() {
  for (auto& f : filters_) f.reset();
}

std::unique_ptr<BlackboxFx> GraphicEqFx::clone_config() const {
  return std::make_unique<GraphicEqFx>(fs_);
}

void GraphicEqFx::run_block(std::span<const double> in, std::span<double> out,
                            std::span<const double> phys) {
  for (int b = 0; b < kBands; ++b) {
    if (phys[b] != last_gain_db_[b]) {
      filters_[b].set_peaking(centers_[b], kQ, phys[b], fs_);
      last_gain_db_[b] = phys[b];
    }
  }
  double out_gain = db_to_lin(phys[kBands]);
  for (std::size_t i = 0; i < in.size(); ++i) {
    double y = in[i];
    for (auto& f : filters_) y = f.tick(y);
    out[i] = y * out_gain;
  }
}

}  // namespace fxlearn
