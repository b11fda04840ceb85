#include "fxlearn/fx/limiter.hpp"

#include <algorithm>

namespace fxlearn {

LimiterFx::LimiterFx(double sample_rate)
    : BlackboxFx(ParamSpecSet({{"threshold", "dBFS", -60.0, 0.0, ParamMapping::linear}}), 64),
      fs_(sample_rate) {
  env_.configure(0.0, 10.0, fs_);
}

std::unique_ptr<BlackboxFx> LimiterFx::clone_config() const {
  return std::make_unique<LimiterFx>(fs_);
}

void LimiterFx::run_block(std::span<const double> in, std::span<double> out,
                          std::span<const double> phys) {
  double thr = db_to_lin(phys[0]);
  for (std::size_t i = 0; i < in.size(); ++i) {
    double e = env_.tick(in[i]);
    double g = e > thr ? thr / e : 1.0;
    out[i] = in[i] * g;
  }
}

}  // namespace fxlearn
