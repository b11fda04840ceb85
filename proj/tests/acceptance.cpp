// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fxlearn/dataset.hpp"
#include "fxlearn/encoder.hpp"
#include "fxlearn/fx/factory.hpp"
#include "fxlearn/grad.hpp"
#include "fxlearn/loss.hpp"
#include "fxlearn/mel.hpp"
#include "fxlearn/rng.hpp"
#include "fxlearn/threadpool.hpp"
#include "fxlearn/trainer.hpp"
#include "support/test_effects.hpp"

using namespace fxlearn;
using fxlearn::testing::CountingFx;
using fxlearn::testing::LinearMixFx;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<double> smooth_frame(std::size_t n, std::uint64_t seed, double amp = 0.5) {
  std::mt19937_64 rng(splitmix64(seed));
  std::vector<double> x(n);
  double state = 0.0;
  for (auto& s : x) {
    state = 0.85 * state + 0.15 * uniform(rng, -1.0, 1.0);
    s = amp * state * 6.0;
  }
  return x;
}

// ---------------------------------------------------------------- criterion 1

Outcome gradient_fidelity() {
  double t0 = now_s();
  AudioFrame x(256, 22050.0);
  std::mt19937_64 rng(splitmix64(23));
  for (auto& s : x.samples) s = uniform(rng, -0.9, 0.9);
  std::vector<double> v(256);
  std::mt19937_64 rng2(29);
  for (auto& e : v) e = uniform(rng2, -1.0, 1.0);

  SoftClipFx fx;
  GradCheckReport rep = analytic_vjp_check(fx, x, {0.3, 0.8}, v, 1e-3, 1000, 77);

  double fd_rel = 0.0, spsa_rel = 0.0;
  for (int i = 0; i < 2; ++i) {
    auto k = static_cast<std::size_t>(i);
    fd_rel = std::max(fd_rel, std::fabs(rep.fd[k] - rep.analytic[k]) / std::fabs(rep.analytic[k]));
    spsa_rel = std::max(spsa_rel,
                        std::fabs(rep.spsa_mean[k] - rep.analytic[k]) / std::fabs(rep.analytic[k]));
  }
  double dt = now_s() - t0;

  Outcome o;
  o.pass = fd_rel < 1e-4 && spsa_rel < 0.05 && dt < 10.0;
  std::ostringstream ss;
  ss << "softclip P=2: fd_rel " << fd_rel << " (<1e-4), spsa_rel(1000 draws) " << spsa_rel
     << " (<0.05), " << dt << " s (<10)";
  o.detail = ss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 2

Outcome spsa_exhaustive_unbiasedness() {
  double t0 = now_s();
  double worst = 0.0;
  for (int p : {2, 5, 8}) {
    LinearMixFx fx(p);
    AudioFrame x(64, 22050.0);
    std::mt19937_64 rng(splitmix64(13));
    for (auto& s : x.samples) s = uniform(rng, -0.5, 0.5);
    std::vector<double> v(64);
    for (auto& e : v) e = uniform(rng, -1.0, 1.0);
    ParamVector theta(static_cast<std::size_t>(p), 0.5);
    const double eps = 0.01;

    FdPool pool(fx);
    auto fd = fd_vjp(pool, x, theta, v, eps).grad_theta;

    std::vector<double> mean(static_cast<std::size_t>(p), 0.0);
    ReplicaSet replicas(fx);
    const long patterns = 1L << p;
    for (long bits = 0; bits < patterns; ++bits) {
      std::vector<int> delta(static_cast<std::size_t>(p));
      for (int i = 0; i < p; ++i) delta[static_cast<std::size_t>(i)] = (bits >> i) & 1 ? 1 : -1;
      replicas.reset_all();
      auto g = spsa_backward(spsa_forward_with_delta(replicas, x, theta, eps, delta), v);
      for (int i = 0; i < p; ++i) {
        mean[static_cast<std::size_t>(i)] += g[static_cast<std::size_t>(i)] / static_cast<double>(patterns);
      }
    }
    for (int i = 0; i < p; ++i) {
      auto k = static_cast<std::size_t>(i);
      worst = std::max(worst, std::fabs(mean[k] - fd[k]) / std::max(std::fabs(fd[k]), 1e-300));
    }
  }
  double dt = now_s() - t0;

  Outcome o;
  o.pass = worst < 1e-9 && dt < 5.0;
  std::ostringstream ss;
  ss << "P in {2,5,8}: max |mean(2^P patterns) - FD| rel " << worst << " (<1e-9), " << dt
     << " s (<5)";
  o.detail = ss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 3

LoadedDataset tiny_dataset(int n_clips, std::size_t len, std::uint64_t seed) {
  LoadedDataset ds;
  for (int i = 0; i < n_clips; ++i) {
    PairedClips pair;
    pair.input.sample_rate = 22050.0;
    pair.input.samples = smooth_frame(len, seed + static_cast<std::uint64_t>(i), 0.3);
    pair.target = pair.input;
    ds.train.push_back(std::move(pair));
  }
  return ds;
}

Outcome cost_contracts() {
  const int m = 4;
  auto fx = make_fx("multiband_compressor");  // P = 21
  const int p = fx->param_count();

  TrainerConfig tr;
  tr.batch = m;
  tr.frame_size = 1024;
  tr.context_size = 4096;
  tr.workers = 2;
  tr.seed = 3;
  MelConfig mel;
  mel.window = 1024;
  mel.hop = 768;
  mel.n_mels = 32;
  LossConfig loss;
  EncoderConfig enc;
  enc.n_mels = 32;
  enc.time_frames = mel.frames_for(tr.context_size);
  enc.p_out = p;
  enc.conv_channels = {4};

  LoadedDataset ds = tiny_dataset(3, 8192, 5);

  long spsa_live, fd_live;
  {
    PerturbationConfig grad;
    grad.estimator = Estimator::spsa;
    long before = FxInstanceRegistry::live();
    Trainer trainer(*fx, ds, tr, mel, loss, grad, enc);
    spsa_live = FxInstanceRegistry::live() - before;
    trainer.train_step();
  }
  {
    PerturbationConfig grad;
    grad.estimator = Estimator::fd;
    long before = FxInstanceRegistry::live();
    Trainer trainer(*fx, ds, tr, mel, loss, grad, enc);
    fd_live = FxInstanceRegistry::live() - before;
    trainer.train_step();
  }

  // perturbed process calls per frame, independent of P
  bool calls_ok = true;
  std::ostringstream calls_detail;
  for (int probe_p : {3, 21}) {
    CountingFx proto(probe_p);
    ReplicaSet replicas(proto);
    auto& counter = dynamic_cast<CountingFx&>(replicas.nominal());
    AudioFrame x(1024, 22050.0);
    std::vector<double> v(1024, 1.0);
    std::mt19937_64 rng(7);
    long before_calls = counter.calls();
    spsa_vjp(replicas, x, ParamVector(static_cast<std::size_t>(probe_p), 0.5), v, 0.01, rng);
    long perturbed = counter.calls() - before_calls - 1;  // minus the nominal call
    calls_ok = calls_ok && perturbed == 2;
    calls_detail << " P=" << probe_p << ":" << perturbed;
  }

  Outcome o;
  o.pass = spsa_live == 3 * m && fd_live == (2 * p + 1) * m && calls_ok;
  std::ostringstream ss;
  ss << "live under SPSA " << spsa_live << " (=3M=" << 3 * m << "), under FD " << fd_live
     << " (=(2P+1)M=" << (2 * p + 1) * m << "); perturbed calls/frame" << calls_detail.str()
     << " (=2)";
  o.detail = ss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 4

Outcome delay_invariant_loss() {
  double t0 = now_s();
  LossConfig cfg;
  const int n_frames = 1000;
  const int maxlag = cfg.maxlag;

  // every shift in [-256, 256] is exercised across the 1000 frames; each
  // frame also checks polarity inversion
  WorkerPool pool(2);
  std::vector<int> fails(n_frames, 0);
  std::vector<double> worst(n_frames, 0.0);
  pool.parallel_for(n_frames, [&](int f) {
    auto y = smooth_frame(1024, 1000 + static_cast<std::uint64_t>(f));
    std::mt19937_64 rng(splitmix64(77 + static_cast<std::uint64_t>(f)));
    std::vector<int> shifts = {
        static_cast<int>(f % (2 * maxlag + 1)) - maxlag,  // scheduled full coverage
        static_cast<int>(rng() % (2 * maxlag + 1)) - maxlag,
        static_cast<int>(rng() % (2 * maxlag + 1)) - maxlag,
        0,
        -maxlag,
        maxlag,
    };
    for (int k : shifts) {
      std::vector<double> shifted(y.size(), 0.0);
      for (std::size_t t = 0; t < y.size(); ++t) {
        long src = static_cast<long>(t) - k;
        if (src >= 0 && src < static_cast<long>(y.size())) shifted[t] = y[static_cast<std::size_t>(src)];
      }
      double total = total_loss(shifted, y, cfg).total;
      worst[static_cast<std::size_t>(f)] = std::max(worst[static_cast<std::size_t>(f)], total);
      if (!(total < 1e-6)) ++fails[static_cast<std::size_t>(f)];
    }
    auto inv = y;
    for (auto& s : inv) s = -s;
    double total = total_loss(inv, y, cfg).total;
    worst[static_cast<std::size_t>(f)] = std::max(worst[static_cast<std::size_t>(f)], total);
    if (!(total < 1e-6)) ++fails[static_cast<std::size_t>(f)];
  });
  long shift_fails = 0;
  double worst_total = 0.0;
  for (int f = 0; f < n_frames; ++f) {
    shift_fails += fails[static_cast<std::size_t>(f)];
    worst_total = std::max(worst_total, worst[static_cast<std::size_t>(f)]);
  }

  // analytic gradient vs finite differences on short frames
  LossConfig small = cfg;
  small.maxlag = 16;
  double max_rel = 0.0;
  for (std::uint64_t seed : {4u, 5u, 6u, 7u}) {
    auto y = smooth_frame(64, seed);
    auto y_hat = y;
    std::mt19937_64 rng(splitmix64(100 + seed));
    for (auto& s : y_hat) s = 1.3 * s + 0.05 + 0.02 * uniform(rng, -1.0, 1.0);
    auto base = total_loss(y_hat, y, small);
    const double h = 1e-6;
    for (std::size_t t = 0; t < y_hat.size(); ++t) {
      auto up = y_hat, dn = y_hat;
      up[t] += h;
      dn[t] -= h;
      double fd = (total_loss(up, y, small).total - total_loss(dn, y, small).total) / (2.0 * h);
      double g = base.grad_output[t];
      double denom = std::max({std::fabs(fd), std::fabs(g), 1e-6});
      max_rel = std::max(max_rel, std::fabs(fd - g) / denom);
    }
  }
  double dt = now_s() - t0;

  Outcome o;
  o.pass = shift_fails == 0 && max_rel < 1e-4 && dt < 30.0;
  std::ostringstream ss;
  ss << "1000 frames x 6 shifts + polarity: failures " << shift_fails << ", worst total "
     << worst_total << " (<1e-6); grad-vs-FD rel " << max_rel << " (<1e-4); " << dt
     << " s (<30)";
  o.detail = ss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 5

Outcome streaming_state_equivalence() {
  double worst = 0.0;
  bool reset_ok = true;
  std::string failed_id;
  for (const std::string& id : registered_fx_ids()) {
    auto build = [&]() -> std::unique_ptr<BlackboxFx> {
      if (id == "chain") return make_chain({"multiband_compressor16", "graphic_eq", "limiter"});
      return make_fx(id);
    };
    auto whole = build();
    auto chunked = build();
    std::mt19937_64 trng(splitmix64(900));
    ParamVector theta(static_cast<std::size_t>(whole->param_count()));
    for (auto& v : theta) v = uniform(trng, 0.05, 0.95);

    const std::size_t n = 8192, frame = 1024;
    AudioFrame sig(n, 22050.0);
    std::mt19937_64 rng(41);
    for (auto& s : sig.samples) s = uniform(rng, -0.6, 0.6);

    AudioFrame one_pass = whole->process(sig, theta);
    std::vector<double> pieces;
    for (std::size_t off = 0; off < n; off += frame) {
      AudioFrame f(frame, 22050.0);
      std::copy(sig.samples.begin() + static_cast<long>(off),
                sig.samples.begin() + static_cast<long>(off + frame), f.samples.begin());
      AudioFrame y = chunked->process(f, theta);
      pieces.insert(pieces.end(), y.samples.begin(), y.samples.end());
    }
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::fabs(pieces[i] - one_pass.samples[i]));
    }
    if (err >= 1e-6 && failed_id.empty()) failed_id = id;
    worst = std::max(worst, err);

    // reset contract: bit-exact fresh behavior
    auto fresh = build();
    AudioFrame probe(1024, 22050.0);
    for (auto& s : probe.samples) s = uniform(rng, -0.5, 0.5);
    whole->process(probe, theta);
    whole->reset();
    if (whole->process(probe, theta).samples != fresh->process(probe, theta).samples) {
      reset_ok = false;
      if (failed_id.empty()) failed_id = id + " (reset)";
    }
  }

  Outcome o;
  o.pass = worst < 1e-6 && reset_ok;
  std::ostringstream ss;
  ss << "all shipped effects, whole vs 1024-chunked: max abs err " << worst
     << " (<1e-6); reset bit-exact: " << (reset_ok ? "yes" : "NO");
  if (!failed_id.empty()) ss << "; first failure: " << failed_id;
  o.detail = ss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 6

Outcome encoder_gradcheck() {
  EncoderConfig cfg;
  cfg.time_frames = 8;
  cfg.n_mels = 8;
  cfg.p_out = 2;
  cfg.conv_channels = {2};
  EncoderWeights w = EncoderWeights::init(cfg, 19);

  std::vector<FeatureMap> batch;
  std::mt19937_64 rng(splitmix64(20));
  for (int i = 0; i < 2; ++i) {
    FeatureMap f(cfg.time_frames, cfg.n_mels);
    for (auto& v : f.v) v = uniform(rng, -2.0, 2.0);
    batch.push_back(std::move(f));
  }
  std::vector<std::vector<double>> up{{0.7, -1.3}, {0.4, 0.9}};

  EncoderCache cache;
  EncoderWeights wf = w;
  encoder_forward(wf, batch, EncoderMode::train, cache);
  EncoderGrads grads = encoder_backward(w, cache, up);

  auto loss_at = [&](EncoderWeights& probe) {
    EncoderWeights copy = probe;
    EncoderCache c;
    auto theta = encoder_forward(copy, batch, EncoderMode::train, c);
    double acc = 0.0;
    for (int b = 0; b < 2; ++b) {
      for (int p = 0; p < 2; ++p) {
        acc += up[static_cast<std::size_t>(b)][static_cast<std::size_t>(p)] *
               theta[static_cast<std::size_t>(b)][static_cast<std::size_t>(p)];
      }
    }
    return acc;
  };

  std::vector<double*> wp = trainable_params(w);
  std::vector<double*> gp = trainable_params(grads);
  const double h = 1e-5;
  double max_rel = 0.0;
  for (std::size_t i = 0; i < wp.size(); ++i) {
    double keep = *wp[i];
    *wp[i] = keep + h;
    double lp = loss_at(w);
    *wp[i] = keep - h;
    double lm = loss_at(w);
    *wp[i] = keep;
    double fd = (lp - lm) / (2.0 * h);
    double denom = std::max({std::fabs(fd), std::fabs(*gp[i]), 1e-6});
    max_rel = std::max(max_rel, std::fabs(fd - *gp[i]) / denom);
  }

  Outcome o;
  o.pass = max_rel < 1e-3;
  std::ostringstream ss;
  ss << "downsized net (" << wp.size() << " weights), full FD agreement: max rel " << max_rel
     << " (<1e-3)";
  o.detail = ss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 7

Outcome teacher_recovery() {
  double t0 = now_s();
  const double fs = 22050.0;
  const int frame = 1024, context = 40960;

  // ~5 minutes of synthetic plucks
  auto sources = synth_sources(SourceKind::plucks, 60, 404, 5.0, fs);

  // fixed hidden teacher: a compressor voicing with a strong per-band makeup
  // tilt, so the transformation is clearly visible to the MFCC metric
  auto teacher = make_fx("multiband_compressor", fs);
  TeacherSpec spec;
  spec.constant_values = {0.55, 0.02, 0.25, 0.25, 0.55, 0.25, 0.20, 0.25,
                          0.55, 0.85, 0.20, 0.25, 0.55, 0.98, 0.25, 0.25,
                          0.28, 0.48, 0.68, 0.60, 0.55};
  auto pairs = generate_teacher_pairs(sources, *teacher, spec, frame, 11);

  LoadedDataset ds;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::string split = split_for_index(static_cast<int>(i));
    if (split == "train") ds.train.push_back(pairs[i]);
    else if (split == "val") ds.val.push_back(pairs[i]);
    else ds.test.push_back(pairs[i]);
  }

  TrainerConfig tr;
  tr.batch = 16;
  tr.frame_size = frame;
  tr.context_size = context;
  tr.lr = 3e-4;
  tr.max_epochs = 16;
  tr.steps_per_epoch = 250;  // 4000 steps total, under the 5000-step budget
  tr.patience = 16;
  tr.seed = 11;
  tr.workers = 2;
  MelConfig mel;
  LossConfig loss;
  PerturbationConfig grad;
  grad.estimator = Estimator::spsa;
  grad.seed = 11;
  EncoderConfig enc;
  enc.time_frames = mel.frames_for(context);
  enc.n_mels = mel.n_mels;
  enc.p_out = teacher->param_count();

  MfccConfig mfcc_cfg;
  auto mean_test_distance = [&](EncoderWeights& w) {
    double acc = 0.0;
    for (const auto& pair : ds.test) {
      RenderResult r = render(w, *teacher, pair.input, mel, frame, context, 0.9);
      acc += mfcc_distance(r.output, pair.target, mfcc_cfg) / static_cast<double>(ds.test.size());
    }
    return acc;
  };

  Trainer trainer(*teacher, ds, tr, mel, loss, grad, enc);
  double baseline = mean_test_distance(trainer.weights());  // untrained encoder

  TrainResult result = trainer.run_training([&](const EpochRow& row) {
    std::fprintf(stderr, "  [recovery] epoch %d train %.4f val %.4f (%.1f s)\n", row.epoch,
                 row.train_total, row.val_total, row.wallclock_s);
  });
  double trained = mean_test_distance(result.best_weights);
  double dt = now_s() - t0;

  Outcome o;
  long steps = static_cast<long>(result.log.size()) * tr.steps_per_epoch;
  o.pass = trained <= 0.05 && trained <= 0.2 * baseline && steps <= 5000 && dt < 1800.0;
  std::ostringstream ss;
  ss << "P=21 compressor, " << steps << " steps (<=5000): test d_mfcc " << trained
     << " (<=0.05), untrained baseline " << baseline << " (ratio "
     << (baseline > 0 ? trained / baseline : 0.0) << " <=0.2), " << dt << " s (<1800)";
  o.detail = ss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 8

Outcome scale_statement() {
  Outcome o;
  o.pass = true;
  o.detail =
      "published absolute MFCC distances (tube 0.2596, non-speech 0.0186, mastering 0.0282) "
      "depend on the original datasets, full-size encoders and human listening studies; they "
      "are NOT reproduced at desk scale. The property and teacher-recovery suites above stand "
      "in for them.";
  return o;
}

// ---------------------------------------------------------------- criterion 9

Outcome determinism() {
  auto run = [&](int workers) {
    LoadedDataset ds;
    for (int i = 0; i < 12; ++i) {
      PairedClips pair;
      pair.input.sample_rate = 22050.0;
      pair.input.samples = smooth_frame(8192, 3000 + static_cast<std::uint64_t>(i), 0.3);
      pair.target = pair.input;
      for (auto& s : pair.target.samples) s *= 0.5;
      if (i % 10 == 8) ds.val.push_back(std::move(pair));
      else if (i % 10 == 9) ds.test.push_back(std::move(pair));
      else ds.train.push_back(std::move(pair));
    }
    TrainerConfig tr;
    tr.batch = 4;
    tr.frame_size = 1024;
    tr.context_size = 8192;
    tr.seed = 77;
    tr.workers = workers;
    tr.max_epochs = 2;
    tr.steps_per_epoch = 10;
    tr.patience = 5;
    MelConfig mel;
    mel.n_mels = 64;
    LossConfig loss;
    PerturbationConfig grad;
    grad.seed = 77;
    EncoderConfig enc;
    enc.n_mels = 64;
    enc.time_frames = mel.frames_for(tr.context_size);
    enc.p_out = 1;
    enc.conv_channels = {8, 16};

    GainFx proto;
    Trainer trainer(proto, ds, tr, mel, loss, grad, enc);
    TrainResult r = trainer.run_training();
    // deterministic columns only; wall-clock legitimately differs
    std::ostringstream ss;
    ss.precision(17);
    for (const auto& row : r.log) {
      ss << row.epoch << '\t' << row.train_total << '\t' << row.train_l_time << '\t'
         << row.train_l_freq << '\t' << row.val_total << '\n';
    }
    return ss.str();
  };

  std::string a = run(1);
  std::string b = run(2);
  std::string c = run(4);

  Outcome o;
  o.pass = a == b && b == c;
  o.detail = o.pass ? "metrics rows bit-identical for workers in {1,2,4} at fixed seed"
                    : "metrics rows differ across worker counts";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> fn;
  };
  std::vector<Criterion> criteria = {
      {"gradient fidelity (FD/SPSA vs analytic)", gradient_fidelity},
      {"SPSA exhaustive unbiasedness", spsa_exhaustive_unbiasedness},
      {"cost contracts (3M / (2P+1)M / 2 calls)", cost_contracts},
      {"delay-invariant loss", delay_invariant_loss},
      {"streaming/state equivalence", streaming_state_equivalence},
      {"encoder gradcheck", encoder_gradcheck},
      {"end-to-end teacher recovery", teacher_recovery},
      {"desk-scale scope statement", scale_statement},
      {"determinism across workers", determinism},
  };

  int failures = 0;
  for (auto& c : criteria) {
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  %s -- %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures;
}
