#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fxlearn/dataset.hpp"
#include "fxlearn/encoder.hpp"
#include "fxlearn/grad.hpp"
#include "fxlearn/loss.hpp"
#include "fxlearn/mel.hpp"
#include "fxlearn/threadpool.hpp"

namespace fxlearn {

struct TrainerConfig {
  int batch = 16;            // M
  int frame_size = 1024;     // N, the non-overlapping hop
  int context_size = 40960;  // C, centered on the current frame
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_epochs = 100;
  int steps_per_epoch = 250;
  int patience = 10;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
};

// Standard bias-corrected Adam over the canonical flat parameter order.
void adam_update(std::vector<double*>& params, const std::vector<const double*>& grads,
                 AdamState& state, const TrainerConfig& cfg);

struct StepSummary {
  double total = 0.0;
  double l_time = 0.0;
  double l_freq = 0.0;
  bool finite = true;  // non-finite losses abort the weight update
};

struct EpochRow {
  int epoch = 0;
  double train_total = 0.0;
  double train_l_time = 0.0;
  double train_l_freq = 0.0;
  double val_total = 0.0;
  double wallclock_s = 0.0;
};

struct TrainResult {
  EncoderWeights best_weights;
  double best_val = 0.0;
  int best_epoch = 0;
  std::vector<EpochRow> log;
};

// Writes `epoch<TAB>train_total<TAB>train_l_time<TAB>train_l_freq<TAB>
// val_total<TAB>wallclock_s` rows. Everything except the wall-clock column
// is deterministic for a fixed seed.
void metrics_write(const std::string& path, const std::vector<EpochRow>& log);

class Trainer {
 public:
  Trainer(const BlackboxFx& fx_proto, const LoadedDataset& data, const TrainerConfig& cfg,
          const MelConfig& mel_cfg, const LossConfig& loss_cfg,
          const PerturbationConfig& grad_cfg, const EncoderConfig& enc_cfg);

  // One minibatch: schedule M frames, forward through encoder and effects,
  // delay-invariant loss, stochastic VJP, encoder backward, Adam.
  StepSummary train_step();

  // Nominal-only forward passes over the validation split with eval-mode
  // batch norm and fresh effect state.
  double validate();

  TrainResult run_training(const std::function<void(const EpochRow&)>& on_epoch = {});

  EncoderWeights& weights() { return weights_; }
  const TrainerConfig& config() const { return cfg_; }
  long step_count() const { return step_; }
  long aborted_steps() const { return aborted_; }

 private:
  struct Slot {
    int clip = -1;
    long offset = 0;
    long frames_left = 0;
    std::unique_ptr<BlackboxGrad> grad;
    std::mt19937_64 swap_rng;
    // per-step buffers
    ContextFrame context;
    AudioFrame input;
    AudioFrame target;
    FeatureMap features;
    LossBreakdown loss;
    std::vector<double> grad_theta;
  };

  void assign_clip(Slot& slot);
  void schedule_step();

  const BlackboxFx& proto_;
  const LoadedDataset& data_;
  TrainerConfig cfg_;
  MelConfig mel_cfg_;
  LossConfig loss_cfg_;
  PerturbationConfig grad_cfg_;

  EncoderWeights weights_;
  AdamState adam_;
  std::vector<Slot> slots_;
  WorkerPool pool_;
  EncoderCache cache_;
  long step_ = 0;
  long aborted_ = 0;
  bool warned_short_clip_ = false;
};

struct RenderResult {
  AudioClip output;
  std::vector<ParamVector> raw_theta;       // one row per frame
  std::vector<ParamVector> smoothed_theta;  // after the one-pole lowpass
};

// Offline inference: consecutive frames with centered zero-padded context,
// one-pole smoothing of theta before denormalization, one fresh effect
// instance carrying state across the whole clip. Output length equals input
// length (the final partial frame is zero-padded, then trimmed).
RenderResult render(EncoderWeights& weights, const BlackboxFx& fx_proto, const AudioClip& clip,
                    const MelConfig& mel_cfg, int frame_size, int context_size,
                    double smooth_coeff);

// Context window for the frame starting at `offset`, zero-padded at edges.
ContextFrame make_context(const AudioClip& clip, long offset, int frame_size, int context_size);

}  // namespace fxlearn
