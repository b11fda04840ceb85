#include "fxlearn/fx/multiband.hpp"

#include <algorithm>
#include <cmath>

#include "fxlearn/fx/dynamics.hpp"

namespace fxlearn {

namespace {

constexpr double kAttackMs = 10.0;
constexpr double kReleaseMs = 10.0;
constexpr double kLevelFloor = 1e-10;  // -200 dB, keeps log10 defined on silence

ParamSpecSet compressor_specs(bool with_knee, bool with_output_gain) {
  std::vector<ParamSpec> s;
  for (int b = 1; b <= 4; ++b) {
    std::string p = "b" + std::to_string(b) + "_";
    s.push_back({p + "threshold", "dBFS", -60.0, 0.0, ParamMapping::linear});
    s.push_back({p + "makeup", "dB", -24.0, 24.0, ParamMapping::linear});
    s.push_back({p + "ratio", "", 1.0, 20.0, ParamMapping::linear});
    if (with_knee) s.push_back({p + "knee", "dB", 0.0, 12.0, ParamMapping::linear});
  }
  s.push_back({"split1", "Hz", 40.0, 10000.0, ParamMapping::logarithmic});
  s.push_back({"split2", "Hz", 40.0, 10000.0, ParamMapping::logarithmic});
  s.push_back({"split3", "Hz", 40.0, 10000.0, ParamMapping::logarithmic});
  s.push_back({"input_gain", "dB", -24.0, 24.0, ParamMapping::linear});
  if (with_output_gain) s.push_back({"output_gain", "dB", -24.0, 24.0, ParamMapping::linear});
  return ParamSpecSet(std::move(s));
}

ParamSpecSet gate_specs() {
  std::vector<ParamSpec> s;
  for (int b = 1; b <= 4; ++b) {
    std::string p = "b" + std::to_string(b) + "_";
    s.push_back({p + "threshold", "dBFS", -60.0, 0.0, ParamMapping::linear});
    s.push_back({p + "reduction", "dB", -80.0, 0.0, ParamMapping::linear});
    s.push_back({p + "ratio", "", 1.0, 20.0, ParamMapping::linear});
  }
  s.push_back({"split1", "Hz", 40.0, 10000.0, ParamMapping::logarithmic});
  s.push_back({"split2", "Hz", 40.0, 10000.0, ParamMapping::logarithmic});
  s.push_back({"split3", "Hz", 40.0, 10000.0, ParamMapping::logarithmic});
  s.push_back({"input_gain", "dB", -24.0, 24.0, ParamMapping::linear});
  s.push_back({"output_gain", "dB", -24.0, 24.0, ParamMapping::linear});
  return ParamSpecSet(std::move(s));
}

}  // namespace

std::array<double, 3> sanitize_splits(double f1, double f2, double f3) {
  std::array<double, 3> f{f1, f2, f3};
  std::sort(f.begin(), f.end());
  if (f[1] <= f[0]) f[1] = f[0] + 1.0;
  if (f[2] <= f[1]) f[2] = f[1] + 1.0;
  return f;
}

MultibandCompressorFx::MultibandCompressorFx(double sample_rate, bool with_knee,
                                             bool with_output_gain)
    : BlackboxFx(compressor_specs(with_knee, with_output_gain), 64),
      fs_(sample_rate),
      with_knee_(with_knee),
      with_output_gain_(with_output_gain),
      crossover_(sample_rate) {
  for (auto& e : env_) e.configure(kAttackMs, kReleaseMs, fs_);
}

void MultibandCompressorFx::reset() {
  crossover_.reset();
  for (auto& e : env_) e.reset();
}

std::unique_ptr<BlackboxFx> MultibandCompressorFx::clone_config() const {
  return std::make_unique<MultibandCompressorFx>(fs_, with_knee_, with_output_gain_);
}

void MultibandCompressorFx::run_block(std::span<const double> in, std::span<double> out,
                                      std::span<const double> phys) {
  const int per_band = with_knee_ ? 4 : 3;
  const int split_base = 4 * per_band;
  auto f = sanitize_splits(phys[split_base], phys[split_base + 1], phys[split_base + 2]);
  crossover_.set_splits(f[0], f[1], f[2]);

  double in_gain = db_to_lin(phys[split_base + 3]);
  double out_gain = with_output_gain_ ? db_to_lin(phys[split_base + 4]) : 1.0;

  pre_.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) pre_[i] = in[i] * in_gain;
  crossover_.split(pre_, bands_);

  for (int b = 0; b < 4; ++b) {
    double thr = phys[b * per_band];
    double makeup = phys[b * per_band + 1];
    double ratio = phys[b * per_band + 2];
    double knee = with_knee_ ? phys[b * per_band + 3] : 0.0;
    auto& band = bands_[b];
    auto& env = env_[b];
    for (double& s : band) {
      double level_db = lin_to_db(std::max(env.tick(s), kLevelFloor));
      double gain_db = compressor_static_gain(level_db, thr, ratio, knee) + makeup;
      s *= db_to_lin(gain_db);
    }
  }

  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = (bands_[0][i] + bands_[1][i] + bands_[2][i] + bands_[3][i]) * out_gain;
  }
}

MultibandGateFx::MultibandGateFx(double sample_rate)
    : BlackboxFx(gate_specs(), 64), fs_(sample_rate), crossover_(sample_rate) {
  for (auto& e : env_) e.configure(kAttackMs, kReleaseMs, fs_);
}

void MultibandGateFx::reset() {
  crossover_.reset();
  for (auto& e : env_) e.reset();
}

std::unique_ptr<BlackboxFx> MultibandGateFx::clone_config() const {
  return std::make_unique<MultibandGateFx>(fs_);
}

void MultibandGateFx::run_block(std::span<const double> in, std::span<double> out,
                                std::span<const double> phys) {
  auto f = sanitize_splits(phys[12], phys[13], phys[14]);
  crossover_.set_splits(f[0], f[1], f[2]);

  double in_gain = db_to_lin(phys[15]);
  double out_gain = db_to_lin(phys[16]);

  pre_.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) pre_[i] = in[i] * in_gain;
  crossover_.split(pre_, bands_);

  for (int b = 0; b < 4; ++b) {
    double thr = phys[b * 3];
    double reduction = phys[b * 3 + 1];
    double ratio = phys[b * 3 + 2];
    auto& band = bands_[b];
    auto& env = env_[b];
    for (double& s : band) {
      double level_db = lin_to_db(std::max(env.tick(s), kLevelFloor));
      s *= db_to_lin(gate_static_gain(level_db, thr, ratio, reduction));
    }
  }

  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = (bands_[0][i] + bands_[1][i] + bands_[2][i] + bands_[3][i]) * out_gain;
  }
}

}  // namespace fxlearn
