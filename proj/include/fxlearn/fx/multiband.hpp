#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "fxlearn/blackbox_fx.hpp"
#include "fxlearn/fx/crossover.hpp"
#include "fxlearn/fx/envelope.hpp"

namespace fxlearn {

// 4-band compressor. Full layout (P = 21):
//   [threshold, makeup, ratio, knee] x 4 bands, 3 splits, input gain, output gain
// Mastering layout (P = 16) drops the knees and the output gain:
//   [threshold, makeup, ratio] x 4 bands, 3 splits, input gain
// Attack/release are non-trainable and fixed at 10 ms. Split frequencies are
// sorted ascending after denormalization (ties bumped by +1 Hz) so the
// crossover stays well-defined for any theta.
class MultibandCompressorFx final : public BlackboxFx {
 public:
  explicit MultibandCompressorFx(double sample_rate = 22050.0, bool with_knee = true,
                                 bool with_output_gain = true);

  void reset() override;
  std::unique_ptr<BlackboxFx> clone_config() const override;
  double sample_rate() const { return fs_; }

 protected:
  void run_block(std::span<const double> in, std::span<double> out,
                 std::span<const double> phys) override;

 private:
  double fs_;
  bool with_knee_;
  bool with_output_gain_;
  CrossoverBank crossover_;
  std::array<EnvelopeFollower, 4> env_;
  std::array<std::vector<double>, 4> bands_;
  std::vector<double> pre_;
};

// 4-band noise gate (downward expander), P = 17:
//   [threshold, reduction, ratio] x 4 bands, 3 splits, input gain, output gain
class MultibandGateFx final : public BlackboxFx {
 public:
  explicit MultibandGateFx(double sample_rate = 22050.0);

  void reset() override;
  std::unique_ptr<BlackboxFx> clone_config() const override;
  double sample_rate() const { return fs_; }

 protected:
  void run_block(std::span<const double> in, std::span<double> out,
                 std::span<const double> phys) override;

 private:
  double fs_;
  CrossoverBank crossover_;
  std::array<EnvelopeFollower, 4> env_;
  std::array<std::vector<double>, 4> bands_;
  std::vector<double> pre_;
};

// Shared by both multibands: sort splits ascending and bump exact ties by
// +1 Hz so f1 < f2 < f3 always holds.
std::array<double, 3> sanitize_splits(double f1, double f2, double f3);

}  // namespace fxlearn
