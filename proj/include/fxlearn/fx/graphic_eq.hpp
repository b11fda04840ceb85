#pragma once

#include <array>
#include <memory>
#include <span>

#include "fxlearn/blackbox_fx.hpp"
#include "fxlearn/fx/biquad.hpp"

namespace fxlearn {

// Cascade of 32 peaking filters at fixed log-spaced centers (40 Hz to
// ~10.2 kHz) with trainable gains, then an output gain. P = 33.
class GraphicEqFx final : public BlackboxFx {
 public:
  static constexpr int kBands = 32;
  static constexpr double kQ = 4.3;

  explicit GraphicEqFx(double sample_rate = 22050.0);

  void reset() override;
  std::unique_ptr<BlackboxFx> clone_config() const override;
  double sample_rate() const { return fs_; }

  static std::array<double, kBands> center_frequencies();

 protected:
  void run_block(std::span<const double> in, std::span<double> out,
                 std::span<const double> phys) override;

 private:
  double fs_;
  std::array<double, kBands> centers_;
  std::array<Biquad, kBands> filters_;
  std::array<double, kBands> last_gain_db_;
};

}  // namespace fxlearn
