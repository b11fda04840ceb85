#pragma once

#include <memory>
#include <vector>

#include "fxlearn/blackbox_fx.hpp"

namespace fxlearn {

// Serial composition of effects. The concatenated parameter vector is sliced
// by the members' canonical order; member i's specs appear with an
// "fx<i>." prefix.
class ChainFx final : public BlackboxFx {
 public:
  explicit ChainFx(std::vector<std::unique_ptr<BlackboxFx>> members);

  void reset() override;
  std::unique_ptr<BlackboxFx> clone_config() const override;
  int latency() const override;

  int member_count() const { return static_cast<int>(members_.size()); }
  const BlackboxFx& member(int i) const { return *members_.at(static_cast<std::size_t>(i)); }

 protected:
  void do_process(const AudioFrame& x, const ParamVector& theta, AudioFrame& out) override;
  void run_block(std::span<const double>, std::span<double>, std::span<const double>) override;

 private:
  std::vector<std::unique_ptr<BlackboxFx>> members_;
};

}  // namespace fxlearn
