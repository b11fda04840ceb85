#include "fxlearn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "fxlearn/rng.hpp"

namespace fxlearn {

void adam_update(std::vector<double*>& params, const std::vector<const double*>& grads,
                 AdamState& state, const TrainerConfig& cfg) {
  const std::size_t n = params.size();
  if (grads.size() != n) throw std::invalid_argument("adam_update: size mismatch");
  if (state.m.size() != n) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
    state.t = 0;
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = *grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    *params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
  }
}

void metrics_write(const std::string& path, const std::vector<EpochRow>& log) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write metrics log '" + path + "'");
  os << "# epoch\ttrain_total\ttrain_l_time\ttrain_l_freq\tval_total\twallclock_s\n";
  os.precision(17);
  for (const auto& r : log) {
    os << r.epoch << '\t' << r.train_total << '\t' << r.train_l_time << '\t' << r.train_l_freq
       << '\t' << r.val_total << '\t' << r.wallclock_s << '\n';
  }
}

ContextFrame make_context(const AudioClip& clip, long offset, int frame_size, int context_size) {
  ContextFrame ctx;
  ctx.sample_rate = clip.sample_rate;
  ctx.samples.assign(static_cast<std::size_t>(context_size), 0.0);
  const long pad = static_cast<long>(context_center_offset(static_cast<std::size_t>(context_size),
                                                           static_cast<std::size_t>(frame_size)));
  const long begin = offset - pad;
  const long n = static_cast<long>(clip.samples.size());
  for (long i = 0; i < context_size; ++i) {
    const long src = begin + i;
    if (src >= 0 && src < n) {
      ctx.samples[static_cast<std::size_t>(i)] = clip.samples[static_cast<std::size_t>(src)];
    }
  }
  return ctx;
}

Trainer::Trainer(const BlackboxFx& fx_proto, const LoadedDataset& data,
                 const TrainerConfig& cfg, const MelConfig& mel_cfg, const LossConfig& loss_cfg,
                 const PerturbationConfig& grad_cfg, const EncoderConfig& enc_cfg)
    : proto_(fx_proto),
      data_(data),
      cfg_(cfg),
      mel_cfg_(mel_cfg),
      loss_cfg_(loss_cfg),
      grad_cfg_(grad_cfg),
      weights_(EncoderWeights::init(enc_cfg, cfg.seed)),
      pool_(cfg.workers) {
  if (cfg_.batch < 1) throw std::invalid_argument("batch size must be >= 1");
  if (data_.train.empty()) throw std::invalid_argument("training split is empty");
  if (enc_cfg.p_out != fx_proto.param_count()) {
    throw std::invalid_argument("encoder head P=" + std::to_string(enc_cfg.p_out) +
                                " does not match effect P=" +
                                std::to_string(fx_proto.param_count()));
  }
  if (enc_cfg.time_frames != mel_cfg_.frames_for(cfg_.context_size)) {
    throw std::invalid_argument("encoder time_frames does not match the mel front-end");
  }
  if (cfg_.frame_size % fx_proto.block_size() != 0) {
    throw std::invalid_argument("effect block size must divide the frame size");
  }

  slots_.resize(static_cast<std::size_t>(cfg_.batch));
  for (int s = 0; s < cfg_.batch; ++s) {
    Slot& slot = slots_[static_cast<std::size_t>(s)];
    slot.grad = std::make_unique<BlackboxGrad>(proto_, grad_cfg_.estimator);
    slot.swap_rng = derive_stream(cfg_.seed ^ 0x51077777ULL, static_cast<std::uint64_t>(s));
  }
}

void Trainer::assign_clip(Slot& slot) {
  const auto n_clips = static_cast<std::uint64_t>(data_.train.size());
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto pick = static_cast<int>(slot.swap_rng() % n_clips);
    const AudioClip& clip = data_.train[static_cast<std::size_t>(pick)].input;
    const long frames = static_cast<long>(clip.samples.size()) / cfg_.frame_size;
    if (frames < 1) {
      if (!warned_short_clip_) {
        warned_short_clip_ = true;
        std::cerr << "warning: skipping clip shorter than one frame ('" << clip.source_id
                  << "')\n";
      }
      continue;
    }
    slot.clip = pick;
    slot.offset = 0;
    slot.frames_left = frames;
    slot.grad->reset();
    return;
  }
  throw std::runtime_error("no training clip is at least one frame long");
}

void Trainer::schedule_step() {
  for (auto& slot : slots_) {
    if (slot.frames_left <= 0) assign_clip(slot);
    const PairedClips& pair = data_.train[static_cast<std::size_t>(slot.clip)];

    slot.input.sample_rate = pair.input.sample_rate;
    slot.input.samples.assign(
        pair.input.samples.begin() + slot.offset,
        pair.input.samples.begin() + slot.offset + cfg_.frame_size);
    slot.target.sample_rate = pair.target.sample_rate;
    slot.target.samples.assign(
        pair.target.samples.begin() + slot.offset,
        pair.target.samples.begin() + slot.offset + cfg_.frame_size);
    slot.context = make_context(pair.input, slot.offset, cfg_.frame_size, cfg_.context_size);

    slot.offset += cfg_.frame_size;
    slot.frames_left -= 1;
  }
}

StepSummary Trainer::train_step() {
  schedule_step();
  const int m = cfg_.batch;
  const long step_index = step_++;

  // Mel front-end per slot.
  pool_.parallel_for(m, [&](int s) {
    Slot& slot = slots_[static_cast<std::size_t>(s)];
    slot.features = melspec(slot.context.samples, mel_cfg_);
  });

  std::vector<FeatureMap> feats(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s) feats[static_cast<std::size_t>(s)] = slots_[static_cast<std::size_t>(s)].features;
  std::vector<ParamVector> theta =
      encoder_forward(weights_, feats, EncoderMode::train, cache_, &pool_);

  // Black-box forward + loss + VJP per slot; the plus/minus evaluations live
  // inside the slot's own replica set, so slots are fully independent here.
  pool_.parallel_for(m, [&](int s) {
    Slot& slot = slots_[static_cast<std::size_t>(s)];
    std::mt19937_64 rng = derive_stream(grad_cfg_.seed ^ cfg_.seed,
                                        static_cast<std::uint64_t>(s),
                                        static_cast<std::uint64_t>(step_index));
    AudioFrame y_hat = slot.grad->forward(slot.input, theta[static_cast<std::size_t>(s)],
                                          grad_cfg_.epsilon, rng);
    slot.loss = total_loss(y_hat.samples, slot.target.samples, loss_cfg_);
    slot.grad_theta = slot.grad->backward(slot.loss.grad_output);
  });

  StepSummary summary;
  for (int s = 0; s < m; ++s) {
    const LossBreakdown& l = slots_[static_cast<std::size_t>(s)].loss;
    summary.total += l.total / m;
    summary.l_time += l.l_time / m;
    summary.l_freq += l.l_freq / m;
    if (!std::isfinite(l.total)) summary.finite = false;
    for (double g : slots_[static_cast<std::size_t>(s)].grad_theta) {
      if (!std::isfinite(g)) summary.finite = false;
    }
  }
  if (!summary.finite) {
    ++aborted_;
    return summary;  // weights untouched, flagged in the log
  }

  // Mean-reduce over the batch through the encoder.
  std::vector<std::vector<double>> upstream(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s) {
    upstream[static_cast<std::size_t>(s)] = slots_[static_cast<std::size_t>(s)].grad_theta;
    for (double& g : upstream[static_cast<std::size_t>(s)]) g /= m;
  }
  EncoderGrads grads = encoder_backward(weights_, cache_, upstream, &pool_);

  std::vector<double*> params = trainable_params(weights_);
  std::vector<double*> gptrs = trainable_params(grads);
  std::vector<const double*> gview(gptrs.begin(), gptrs.end());
  adam_update(params, gview, adam_, cfg_);
  return summary;
}

double Trainer::validate() {
  if (data_.val.empty()) return 0.0;
  const int n_clips = static_cast<int>(data_.val.size());
  std::vector<double> clip_loss(static_cast<std::size_t>(n_clips), 0.0);

  pool_.parallel_for(n_clips, [&](int c) {
    const PairedClips& pair = data_.val[static_cast<std::size_t>(c)];
    auto fx = proto_.clone_config();  // fresh state per clip, nominal only
    const long frames = static_cast<long>(pair.input.samples.size()) / cfg_.frame_size;
    double acc = 0.0;
    long used = 0;
    EncoderCache cache;
    for (long f = 0; f < frames; ++f) {
      const long off = f * cfg_.frame_size;
      ContextFrame ctx = make_context(pair.input, off, cfg_.frame_size, cfg_.context_size);
      std::vector<FeatureMap> feats{melspec(ctx.samples, mel_cfg_)};
      std::vector<ParamVector> theta =
          encoder_forward(weights_, feats, EncoderMode::eval, cache, nullptr);

      AudioFrame x(static_cast<std::size_t>(cfg_.frame_size), pair.input.sample_rate);
      std::copy(pair.input.samples.begin() + off,
                pair.input.samples.begin() + off + cfg_.frame_size, x.samples.begin());
      AudioFrame y_hat = fx->process(x, theta[0]);

      std::vector<double> target(pair.target.samples.begin() + off,
                                 pair.target.samples.begin() + off + cfg_.frame_size);
      acc += total_loss(y_hat.samples, target, loss_cfg_).total;
      ++used;
    }
    clip_loss[static_cast<std::size_t>(c)] = used > 0 ? acc / static_cast<double>(used) : 0.0;
  });

  double total = 0.0;
  for (double v : clip_loss) total += v;
  return total / n_clips;
}

TrainResult Trainer::run_training(const std::function<void(const EpochRow&)>& on_epoch) {
  TrainResult result;
  result.best_val = std::numeric_limits<double>::infinity();
  result.best_weights = weights_;

  int since_best = 0;
  for (int epoch = 1; epoch <= cfg_.max_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    EpochRow row;
    row.epoch = epoch;
    for (int s = 0; s < cfg_.steps_per_epoch; ++s) {
      StepSummary sum = train_step();
      row.train_total += sum.total / cfg_.steps_per_epoch;
      row.train_l_time += sum.l_time / cfg_.steps_per_epoch;
      row.train_l_freq += sum.l_freq / cfg_.steps_per_epoch;
    }
    row.val_total = validate();
    row.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(row);
    if (on_epoch) on_epoch(row);

    if (row.val_total < result.best_val) {
      result.best_val = row.val_total;
      result.best_epoch = epoch;
      result.best_weights = weights_;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= cfg_.patience) break;
    }
  }
  return result;
}

RenderResult render(EncoderWeights& weights, const BlackboxFx& fx_proto, const AudioClip& clip,
                    const MelConfig& mel_cfg, int frame_size, int context_size,
                    double smooth_coeff) {
  if (clip.samples.empty()) throw std::invalid_argument("render: empty clip");
  if (smooth_coeff < 0.0 || smooth_coeff >= 1.0) {
    throw std::invalid_argument("render: smoother coefficient must be in [0,1)");
  }

  const std::size_t n = clip.samples.size();
  const auto fsz = static_cast<std::size_t>(frame_size);
  const std::size_t n_frames = (n + fsz - 1) / fsz;

  RenderResult out;
  out.output.sample_rate = clip.sample_rate;
  out.output.source_id = clip.source_id;
  out.output.samples.resize(n);

  auto fx = fx_proto.clone_config();
  EncoderCache cache;
  ParamVector smoothed;
  AudioFrame frame(fsz, clip.sample_rate);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const long off = static_cast<long>(f * fsz);
    ContextFrame ctx = make_context(clip, off, frame_size, context_size);
    std::vector<FeatureMap> feats{melspec(ctx.samples, mel_cfg)};
    std::vector<ParamVector> theta =
        encoder_forward(weights, feats, EncoderMode::eval, cache, nullptr);

    if (f == 0) {
      smoothed = theta[0];
    } else {
      for (std::size_t i = 0; i < smoothed.size(); ++i) {
        smoothed[i] = smooth_coeff * smoothed[i] + (1.0 - smooth_coeff) * theta[0][i];
      }
    }
    out.raw_theta.push_back(theta[0]);
    out.smoothed_theta.push_back(smoothed);

    const std::size_t len = std::min(fsz, n - f * fsz);
    std::fill(frame.samples.begin(), frame.samples.end(), 0.0);
    std::copy(clip.samples.begin() + off, clip.samples.begin() + off + static_cast<long>(len),
              frame.samples.begin());
    AudioFrame y = fx->process(frame, smoothed);
    std::copy(y.samples.begin(), y.samples.begin() + static_cast<long>(len),
              out.output.samples.begin() + off);
  }
  return out;
}

}  // namespace fxlearn
