#include "fxlearn/blackbox_fx.hpp"

#include <stdexcept>
#include <string>

namespace fxlearn {

std::atomic<long> FxInstanceRegistry::live_{0};

BlackboxFx::BlackboxFx(ParamSpecSet specs, int block_size)
    : specs_(std::move(specs)), block_size_(block_size) {
  if (block_size_ < 1) throw std::invalid_argument("block_size must be >= 1");
  FxInstanceRegistry::live_.fetch_add(1, std::memory_order_relaxed);
}

BlackboxFx::~BlackboxFx() { FxInstanceRegistry::live_.fetch_sub(1, std::memory_order_relaxed); }

AudioFrame BlackboxFx::process(const AudioFrame& x, const ParamVector& theta) {
  if (x.samples.empty() || x.samples.size() % static_cast<std::size_t>(block_size_) != 0) {
    throw std::invalid_argument("process: frame length " + std::to_string(x.samples.size()) +
                                " is not a positive multiple of block size " +
                                std::to_string(block_size_));
  }
  if (!all_finite(x.samples)) {
    throw std::invalid_argument("process: non-finite input sample");
  }
  validate_params(theta, param_count());

  AudioFrame out(x.samples.size(), x.sample_rate);
  do_process(x, theta, out);
  return out;
}

void BlackboxFx::do_process(const AudioFrame& x, const ParamVector& theta, AudioFrame& out) {
  const std::vector<double> phys = specs_.denormalize_all(theta);
  const std::size_t n = x.samples.size();
  const auto bs = static_cast<std::size_t>(block_size_);
  for (std::size_t off = 0; off < n; off += bs) {
    run_block(std::span<const double>(x.samples.data() + off, bs),
              std::span<double>(out.samples.data() + off, bs), phys);
  }
}

ReplicaSet::ReplicaSet(const BlackboxFx& prototype)
    : nominal_(prototype.clone_config()),
      plus_(prototype.clone_config()),
      minus_(prototype.clone_config()) {}

void ReplicaSet::reset_all() {
  nominal_->reset();
  plus_->reset();
  minus_->reset();
}

ReplicaOutputs ReplicaSet::process(const AudioFrame& x, const ParamVector& theta_nominal,
                                   const ParamVector& theta_plus,
                                   const ParamVector& theta_minus) {
  // Same x into all three keeps the input-history invariant; only the
  // parameters of this call differ.
  ReplicaOutputs out;
  out.nominal = nominal_->process(x, theta_nominal);
  out.plus = plus_->process(x, theta_plus);
  out.minus = minus_->process(x, theta_minus);
  return out;
}

}  // namespace fxlearn
