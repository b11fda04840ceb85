#pragma once

#include <memory>
#include <span>

#include "fxlearn/blackbox_fx.hpp"
#include "fxlearn/fx/envelope.hpp"

namespace fxlearn {

// Peak limiter: ratio -> infinity realized as a hard clamp of the detector
// level to the threshold. Instant attack keeps the envelope >= |x| at every
// sample, so the output peak can never exceed the threshold; release is the
// fixed 10 ms minimum. P = 1 (threshold).
class LimiterFx final : public BlackboxFx {
 public:
  explicit LimiterFx(double sample_rate = 22050.0);

  void reset() override { env_.reset(); }
  std::unique_ptr<BlackboxFx> clone_config() const override;
  double sample_rate() const { return fs_; }

 protected:
  void run_block(std::span<const double> in, std::span<double> out,
                 std::span<const double> phys) override;

 private:
  double fs_;
  EnvelopeFollower env_;
};

}  // namespace fxlearn
