#pragma once

#include <atomic>
#include <memory>
#include <span>

#include "fxlearn/audio.hpp"
#include "fxlearn/params.hpp"

namespace fxlearn {

// Live count of effect instances. The trainer's replica bookkeeping is
// verified against this: 3M instances under SPSA, (2P+1)M under FD.
class FxInstanceRegistry {
 public:
  static long live() { return live_.load(std::memory_order_relaxed); }

 private:
  friend class BlackboxFx;
  static std::atomic<long> live_;
};

// Opaque stateful audio processor: (frame, normalized params) -> frame.
// Everything above the effect library talks to effects through process()
// only; internals, state and derivatives are off limits.
//
// An instance is single-threaded: one caller at a time may process or reset
// it. Distinct instances may run concurrently.
class BlackboxFx {
 public:
  BlackboxFx(ParamSpecSet specs, int block_size);
  virtual ~BlackboxFx();

  BlackboxFx(const BlackboxFx&) = delete;
  BlackboxFx& operator=(const BlackboxFx&) = delete;

  const ParamSpecSet& param_specs() const { return specs_; }
  int param_count() const { return specs_.size(); }
  int block_size() const { return block_size_; }

  // Bulk delay in samples, for diagnostics only. IIR phase/group delay is
  // not reported here; memoryless effects report 0.
  virtual int latency() const { return 0; }

  // Restores the freshly-constructed state.
  virtual void reset() = 0;

  // Fresh instance with identical configuration (and fresh state).
  virtual std::unique_ptr<BlackboxFx> clone_config() const = 0;

  // Processes one frame. Input length must be a positive multiple of
  // block_size and all samples finite; theta must have P in-range entries.
  // Advances internal state by exactly x.size() samples.
  AudioFrame process(const AudioFrame& x, const ParamVector& theta);

 protected:
  // Default implementation denormalizes theta once and feeds consecutive
  // block_size chunks to run_block. Composite effects may override.
  virtual void do_process(const AudioFrame& x, const ParamVector& theta, AudioFrame& out);

  virtual void run_block(std::span<const double> in, std::span<double> out,
                         std::span<const double> phys) = 0;

 private:
  ParamSpecSet specs_;
  int block_size_;
};

struct ReplicaOutputs {
  AudioFrame nominal;
  AudioFrame plus;
  AudioFrame minus;
};

// The nominal/plus/minus effect instances that keep stateful SPSA honest:
// all three are fed exactly the same input history and differ only in the
// parameters of each call.
class ReplicaSet {
 public:
  explicit ReplicaSet(const BlackboxFx& prototype);

  BlackboxFx& nominal() { return *nominal_; }
  BlackboxFx& plus() { return *plus_; }
  BlackboxFx& minus() { return *minus_; }
  int param_count() const { return nominal_->param_count(); }

  void reset_all();

  ReplicaOutputs process(const AudioFrame& x, const ParamVector& theta_nominal,
                         const ParamVector& theta_plus, const ParamVector& theta_minus);

 private:
  std::unique_ptr<BlackboxFx> nominal_;
  std::unique_ptr<BlackboxFx> plus_;
  std::unique_ptr<BlackboxFx> minus_;
};

}  // namespace fxlearn
