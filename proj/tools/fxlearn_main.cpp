// fxlearn command line: synthetic data generation, training, rendering,
// evaluation and gradient diagnostics, wired together by flat config files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "fxlearn/config.hpp"
#include "fxlearn/dataset.hpp"
#include "fxlearn/fx/factory.hpp"
#include "fxlearn/grad.hpp"
#include "fxlearn/mel.hpp"
#include "fxlearn/rng.hpp"
#include "fxlearn/trainer.hpp"
#include "fxlearn/wav.hpp"

namespace fs = std::filesystem;
using namespace fxlearn;

namespace {

// ------------------------------------------------------------------ presets

const char* kPresetTube = R"(
fx.id = multiband_compressor
data.kinds = plucks
data.count = 60
data.duration = 5.0
teacher.mode = constant
teacher.values = 0.30,0.60,0.18,0.25, 0.35,0.65,0.22,0.25, 0.33,0.62,0.25,0.25, 0.40,0.58,0.20,0.25, 0.35,0.55,0.75, 0.667,0.45
)";

const char* kPresetGate = R"(
fx.id = multiband_gate
data.kinds = noise-bursts
data.count = 60
data.duration = 5.0
teacher.mode = constant
teacher.values = 0.60,0.40,0.15, 0.62,0.42,0.18, 0.58,0.38,0.15, 0.60,0.40,0.20, 0.35,0.55,0.75, 0.5,0.5
)";

const char* kPresetMastering = R"(
fx.id = chain
fx.chain = multiband_compressor16, graphic_eq, limiter
data.kinds = plucks,chirps,tones
data.count = 60
data.duration = 5.0
data.normalize_dbfs = -25
teacher.mode = constant
teacher.values = 0.42,0.60,0.20, 0.44,0.62,0.22, 0.40,0.58,0.18, 0.42,0.60,0.20, 0.35,0.55,0.75, 0.55, 0.46,0.47,0.48,0.49,0.50,0.51,0.52,0.53,0.54,0.55,0.56,0.57,0.58,0.58,0.57,0.56,0.55,0.54,0.53,0.52,0.51,0.50,0.49,0.48,0.47,0.46,0.45,0.44,0.43,0.42,0.41,0.40, 0.50, 0.85
)";

Config load_config(const std::string& path, const std::string& task_flag,
                   long seed_flag, const std::string& out_flag, int workers_flag) {
  Config cfg = path.empty() ? Config() : Config::parse_file(path);
  std::string task = task_flag.empty() ? cfg.get_str("task", "") : task_flag;
  if (!task.empty()) {
    const char* preset = nullptr;
    if (task == "tube-emulation") preset = kPresetTube;
    else if (task == "gate-cleanup") preset = kPresetGate;
    else if (task == "mastering") preset = kPresetMastering;
    else throw ConfigError("unknown task preset '" + task + "'");
    Config base = Config::parse_string(preset, "preset:" + task);
    // explicit config keys override the preset
    for (const auto& [k, v] : cfg.all()) base.set(k, v);
    base.set("task", task);
    cfg = base;
  }
  if (seed_flag >= 0) cfg.set("seed", std::to_string(seed_flag));
  if (!out_flag.empty()) cfg.set("out", out_flag);
  if (workers_flag > 0) cfg.set("trainer.workers", std::to_string(workers_flag));
  return cfg;
}

std::unique_ptr<BlackboxFx> effect_from_config(const Config& cfg) {
  const double fs = cfg.get_num("sample_rate", 22050.0);
  const std::string id = cfg.get_str("fx.id");
  if (id == "chain") {
    if (!cfg.has("fx.chain")) {
      throw ConfigError("fx.id = chain requires fx.chain (comma-separated member ids)");
    }
    return make_chain(cfg.get_list("fx.chain"), fs);
  }
  return make_fx(id, fs);
}

MelConfig mel_from_config(const Config& cfg) {
  MelConfig mel;
  mel.sample_rate = cfg.get_num("sample_rate", 22050.0);
  mel.window = static_cast<int>(cfg.get_int("mel.window", 1024));
  double overlap = cfg.get_num("mel.overlap", 0.25);
  mel.hop = static_cast<int>(mel.window * (1.0 - overlap));
  mel.n_mels = static_cast<int>(cfg.get_int("mel.n_mels", 128));
  mel.log_offset = cfg.get_num("mel.log_offset", 1e-6);
  return mel;
}

LossConfig loss_from_config(const Config& cfg) {
  LossConfig loss;
  loss.alpha_time = cfg.get_num("loss.alpha1", 10.0);
  loss.alpha_freq = cfg.get_num("loss.alpha2", 1.0);
  loss.maxlag = static_cast<int>(cfg.get_int("loss.maxlag", 256));
  loss.log_floor = cfg.get_num("loss.log_floor", 1e-7);
  loss.fft_size = static_cast<int>(cfg.get_int("loss.fft_size", 1024));
  return loss;
}

PerturbationConfig grad_from_config(const Config& cfg) {
  PerturbationConfig grad;
  const std::string est = cfg.get_str("grad.estimator", "spsa");
  if (est == "spsa") grad.estimator = Estimator::spsa;
  else if (est == "fd") grad.estimator = Estimator::fd;
  else throw ConfigError("grad.estimator must be 'spsa' or 'fd', got '" + est + "'");
  grad.epsilon = cfg.get_num("grad.epsilon", 0.01);
  if (!(grad.epsilon > 0.0 && grad.epsilon < 0.5)) {
    throw ConfigError("grad.epsilon must be in (0, 0.5)");
  }
  grad.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  return grad;
}

TrainerConfig trainer_from_config(const Config& cfg) {
  TrainerConfig tr;
  tr.batch = static_cast<int>(cfg.get_int("trainer.batch", 16));
  tr.frame_size = static_cast<int>(cfg.get_int("trainer.frame", 1024));
  tr.context_size = static_cast<int>(cfg.get_int("trainer.context", 40960));
  tr.lr = cfg.get_num("trainer.lr", 1e-4);
  tr.beta1 = cfg.get_num("trainer.beta1", 0.9);
  tr.beta2 = cfg.get_num("trainer.beta2", 0.999);
  tr.adam_eps = cfg.get_num("trainer.adam_eps", 1e-8);
  tr.max_epochs = static_cast<int>(cfg.get_int("trainer.max_epochs", 100));
  tr.steps_per_epoch = static_cast<int>(cfg.get_int("trainer.steps_per_epoch", 250));
  tr.patience = static_cast<int>(cfg.get_int("trainer.patience", 10));
  tr.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  tr.workers = static_cast<int>(cfg.get_int("trainer.workers", 1));
  if (tr.context_size % tr.frame_size != 0) {
    throw ConfigError("trainer.context must be a multiple of trainer.frame");
  }
  return tr;
}

EncoderConfig encoder_from_config(const Config& cfg, const MelConfig& mel, int context,
                                  int p_out) {
  EncoderConfig enc;
  enc.n_mels = mel.n_mels;
  enc.time_frames = mel.frames_for(context);
  enc.p_out = p_out;
  enc.conv_channels.clear();
  if (cfg.has("encoder.channels")) {
    for (double c : cfg.get_num_list("encoder.channels")) {
      enc.conv_channels.push_back(static_cast<int>(c));
    }
  } else {
    enc.conv_channels = {16, 32, 64};
  }
  return enc;
}

std::string out_dir(const Config& cfg) {
  std::string out = cfg.get_str("out", "");
  if (out.empty()) throw ConfigError("missing required config key 'out' (or --out flag)");
  return out;
}

// --------------------------------------------------------------- subcommands

int cmd_datagen(const Config& cfg) {
  // fail fast before touching the filesystem
  if (!cfg.has("data.kinds")) {
    throw ConfigError("missing required config key 'data.kinds' (source specification)");
  }
  auto kinds = cfg.get_list("data.kinds");
  const int count = static_cast<int>(cfg.get_int("data.count", 40));
  const double duration = cfg.get_num("data.duration", 5.0);
  const double fs = cfg.get_num("sample_rate", 22050.0);
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  const int frame = static_cast<int>(cfg.get_int("trainer.frame", 1024));
  const std::string dir = out_dir(cfg);

  auto teacher = effect_from_config(cfg);
  TeacherSpec spec;
  const std::string mode = cfg.get_str("teacher.mode", "constant");
  if (mode == "constant") {
    spec.mode = TeacherSpec::Mode::constant;
    spec.constant_values = cfg.get_num_list("teacher.values");
    if (static_cast<int>(spec.constant_values.size()) != teacher->param_count()) {
      throw ConfigError("teacher.values has " + std::to_string(spec.constant_values.size()) +
                        " entries but the effect needs " +
                        std::to_string(teacher->param_count()));
    }
    for (double v : spec.constant_values) {
      if (v < 0.0 || v > 1.0) throw ConfigError("teacher.values entries must be in [0,1]");
    }
  } else if (mode == "segments") {
    spec.mode = TeacherSpec::Mode::segments;
    spec.seed = static_cast<std::uint64_t>(cfg.get_int("teacher.seed", cfg.get_int("seed", 0)));
  } else {
    throw ConfigError("teacher.mode must be 'constant' or 'segments'");
  }

  // build sources round-robin over the requested kinds
  std::vector<AudioClip> sources;
  for (int i = 0; i < count; ++i) {
    SourceKind kind = source_kind_from_string(kinds[static_cast<std::size_t>(i) % kinds.size()]);
    auto one = synth_sources(kind, 1, seed + static_cast<std::uint64_t>(i) * 131, duration, fs);
    sources.push_back(std::move(one[0]));
  }
  if (cfg.has("data.normalize_dbfs")) {
    const double target = cfg.get_num("data.normalize_dbfs");
    for (auto& s : sources) s = loudness_normalize(s, target);
  }

  auto pairs = generate_teacher_pairs(sources, *teacher, spec, frame, seed);

  fs::create_directories(dir);
  std::vector<ManifestRow> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    char in_name[32], tg_name[32];
    std::snprintf(in_name, sizeof in_name, "input_%03zu.wav", i);
    std::snprintf(tg_name, sizeof tg_name, "target_%03zu.wav", i);
    const std::string in_path = dir + "/" + in_name;
    const std::string tg_path = dir + "/" + tg_name;
    wav_write(in_path, pairs[i].input, WavFormat::float32);
    wav_write(tg_path, pairs[i].target, WavFormat::float32);
    rows.push_back({in_path, tg_path, split_for_index(static_cast<int>(i))});
  }
  manifest_write(dir + "/manifest.tsv", rows);

  // hidden parameters sidecar, diagnostics only
  std::ofstream sidecar(dir + "/teacher_params.txt");
  sidecar << "# hidden teacher parameters, never read by training\n";
  sidecar << "effect = " << cfg.get_str("fx.id") << "\n";
  sidecar << "mode = " << mode << "\n";
  if (spec.mode == TeacherSpec::Mode::constant) {
    sidecar << "values =";
    for (double v : spec.constant_values) sidecar << " " << v;
    sidecar << "\n";
  } else {
    sidecar << "waypoint_seed = " << spec.seed << "\n";
  }

  std::cout << "datagen: wrote " << pairs.size() << " pairs to " << dir << "\n";
  return 0;
}

int cmd_train(const Config& cfg, const std::string& resume) {
  const std::string manifest = cfg.get_str("dataset.manifest");
  const std::string dir = out_dir(cfg);
  const double fs = cfg.get_num("sample_rate", 22050.0);

  auto fx = effect_from_config(cfg);
  MelConfig mel = mel_from_config(cfg);
  LossConfig loss = loss_from_config(cfg);
  PerturbationConfig grad = grad_from_config(cfg);
  TrainerConfig tr = trainer_from_config(cfg);
  EncoderConfig enc = encoder_from_config(cfg, mel, tr.context_size, fx->param_count());

  if (!resume.empty()) {
    // validate the checkpoint against the configured shapes before training
    EncoderWeights w = EncoderWeights::load(resume);
    if (w.cfg.p_out != fx->param_count()) {
      throw ConfigError("checkpoint P=" + std::to_string(w.cfg.p_out) +
                        " does not match effect P=" + std::to_string(fx->param_count()));
    }
    if (w.cfg.n_mels != enc.n_mels || w.cfg.time_frames != enc.time_frames) {
      throw ConfigError("checkpoint feature shape does not match the configured front-end");
    }
    enc = w.cfg;
  }

  LoadedDataset data = load_dataset(manifest, fs);
  std::cout << "dataset: " << data.train.size() << " train / " << data.val.size() << " val / "
            << data.test.size() << " test clips\n";

  long live_before = FxInstanceRegistry::live();
  Trainer trainer(*fx, data, tr, mel, loss, grad, enc);
  std::cout << "live effect instances: " << (FxInstanceRegistry::live() - live_before)
            << " (batch " << tr.batch << ", "
            << (grad.estimator == Estimator::spsa ? "spsa" : "fd") << ")\n";

  if (!resume.empty()) trainer.weights() = EncoderWeights::load(resume);

  fs::create_directories(dir);
  {
    std::ofstream snap(dir + "/config_snapshot.txt");
    snap << cfg.to_string();
  }

  TrainResult result = trainer.run_training([&](const EpochRow& row) {
    std::cout << "epoch " << row.epoch << "  train " << row.train_total << "  val "
              << row.val_total << "  (" << row.wallclock_s << " s)\n";
    std::cout.flush();
  });

  metrics_write(dir + "/metrics.tsv", result.log);
  result.best_weights.save(dir + "/best.ckpt");
  trainer.weights().save(dir + "/final.ckpt");
  if (trainer.aborted_steps() > 0) {
    std::cout << "warning: " << trainer.aborted_steps() << " steps aborted on non-finite loss\n";
  }
  std::cout << "train: best val " << result.best_val << " at epoch " << result.best_epoch
            << "; checkpoints in " << dir << "\n";
  return 0;
}

int cmd_render(const Config& cfg, const std::string& ckpt_path, const std::string& input_path,
               double smooth) {
  const std::string dir = out_dir(cfg);
  const double fs = cfg.get_num("sample_rate", 22050.0);
  const int frame = static_cast<int>(cfg.get_int("trainer.frame", 1024));
  const int context = static_cast<int>(cfg.get_int("trainer.context", 40960));

  auto fx = effect_from_config(cfg);
  EncoderWeights weights = EncoderWeights::load(ckpt_path);
  if (weights.cfg.p_out != fx->param_count()) {
    throw ConfigError("checkpoint P does not match the configured effect");
  }
  MelConfig mel = mel_from_config(cfg);
  if (weights.cfg.time_frames != mel.frames_for(context) || weights.cfg.n_mels != mel.n_mels) {
    throw ConfigError("checkpoint feature shape does not match the configured front-end");
  }

  AudioClip clip = wav_read(input_path);
  if (clip.sample_rate != fs) {
    throw std::runtime_error("sample-rate mismatch: input " +
                             std::to_string(clip.sample_rate) + " Hz, config expects " +
                             std::to_string(fs));
  }
  if (smooth < 0.0) smooth = cfg.get_num("render.smooth", 0.9);

  RenderResult r = render(weights, *fx, clip, mel, frame, context, smooth);

  fs::create_directories(dir);
  const std::string wav_out = dir + "/rendered.wav";
  wav_write(wav_out, r.output, WavFormat::float32);

  const std::string csv_out = dir + "/theta_trajectory.csv";
  std::ofstream csv(csv_out);
  csv << "frame,seconds";
  const ParamSpecSet& specs = fx->param_specs();
  for (int i = 0; i < specs.size(); ++i) {
    csv << "," << specs.at(i).name;
    if (!specs.at(i).unit.empty()) csv << "_" << specs.at(i).unit;
  }
  csv << "\n";
  csv.precision(10);
  for (std::size_t f = 0; f < r.smoothed_theta.size(); ++f) {
    csv << f << "," << (static_cast<double>(f) * frame / fs);
    for (int i = 0; i < specs.size(); ++i) {
      csv << "," << denormalize(specs.at(i), r.smoothed_theta[f][static_cast<std::size_t>(i)]);
    }
    csv << "\n";
  }
  std::cout << "render: wrote " << wav_out << " and " << csv_out << " (" << r.smoothed_theta.size()
            << " frames)\n";
  return 0;
}

int cmd_eval(const Config& cfg, const std::string& ckpt_path, const std::string& manifest) {
  const std::string dir = out_dir(cfg);
  const double fs = cfg.get_num("sample_rate", 22050.0);
  const int frame = static_cast<int>(cfg.get_int("trainer.frame", 1024));
  const int context = static_cast<int>(cfg.get_int("trainer.context", 40960));
  const double smooth = cfg.get_num("render.smooth", 0.9);

  auto fx = effect_from_config(cfg);
  EncoderWeights weights = EncoderWeights::load(ckpt_path);
  MelConfig mel = mel_from_config(cfg);
  MfccConfig mfcc_cfg;
  mfcc_cfg.sample_rate = fs;

  LoadedDataset data = load_dataset(manifest.empty() ? cfg.get_str("dataset.manifest")
                                                     : manifest,
                                    fs);
  if (data.test.empty()) throw ConfigError("test split is empty");

  fs::create_directories(dir);
  std::ofstream report(dir + "/eval.tsv");
  report << "# clip\td_mfcc_rendered\td_mfcc_baseline\n";
  double mean_rendered = 0.0, mean_baseline = 0.0;
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    const auto& pair = data.test[i];
    RenderResult r = render(weights, *fx, pair.input, mel, frame, context, smooth);
    double d_rendered = mfcc_distance(r.output, pair.target, mfcc_cfg);
    double d_baseline = mfcc_distance(pair.input, pair.target, mfcc_cfg);
    mean_rendered += d_rendered / static_cast<double>(data.test.size());
    mean_baseline += d_baseline / static_cast<double>(data.test.size());
    report << i << '\t' << d_rendered << '\t' << d_baseline << '\n';
  }
  report << "# mean\t" << mean_rendered << '\t' << mean_baseline << '\n';
  std::cout << "eval: mean d_mfcc rendered-vs-target " << mean_rendered
            << ", baseline input-vs-target " << mean_baseline << "\n";
  return 0;
}

int cmd_gradcheck(const std::string& effect_id, int n_seeds, double epsilon,
                  std::uint64_t seed) {
  auto fx = make_fx(effect_id);
  const auto* analytic = dynamic_cast<const AnalyticFx*>(fx.get());
  if (!analytic) {
    throw std::runtime_error("effect '" + effect_id +
                             "' has no closed-form Jacobian; use gain or softclip");
  }

  AudioFrame x(256, 22050.0);
  std::mt19937_64 rng(derive_stream(seed, 1));
  double state = 0.0;
  for (auto& s : x.samples) {
    state = 0.8 * state + 0.2 * uniform(rng, -1.0, 1.0);
    s = 3.0 * state;
  }
  std::vector<double> v(x.samples.size());
  for (auto& e : v) e = uniform(rng, -1.0, 1.0);
  ParamVector theta(static_cast<std::size_t>(fx->param_count()), 0.5);
  if (effect_id == "softclip") theta = {0.3, 0.8};  // balanced coordinate gradients

  GradCheckReport rep = analytic_vjp_check(*analytic, x, theta, v, epsilon, n_seeds, seed);

  const double fd_tol = effect_id == "gain" ? 1e-9 : 1e-4;
  const double spsa_tol = 0.05;
  bool ok = true;
  std::printf("%-5s %14s %14s %14s %10s %10s  %s\n", "i", "analytic", "fd", "spsa_mean",
              "fd_rel", "spsa_rel", "flag");
  for (int i = 0; i < fx->param_count(); ++i) {
    auto idx = static_cast<std::size_t>(i);
    double fd_rel = std::fabs(rep.fd[idx] - rep.analytic[idx]) /
                    std::max(std::fabs(rep.analytic[idx]), 1e-300);
    double spsa_rel = std::fabs(rep.spsa_mean[idx] - rep.analytic[idx]) /
                      std::max(std::fabs(rep.analytic[idx]), 1e-300);
    bool pass = fd_rel < fd_tol && (n_seeds == 0 || spsa_rel < spsa_tol);
    ok = ok && pass;
    std::printf("%-5d %14.6g %14.6g %14.6g %10.2e %10.2e  %s\n", i, rep.analytic[idx],
                rep.fd[idx], rep.spsa_mean[idx], fd_rel, spsa_rel, pass ? "PASS" : "FAIL");
  }
  std::printf("gradcheck %s: eps=%g, %d spsa draws -> %s\n", effect_id.c_str(), epsilon,
              n_seeds, ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"black-box audio effect controller training"};
  app.require_subcommand(1);
  app.fallthrough();  // common flags may follow the subcommand

  std::string config_path, task, out, resume, checkpoint, input, manifest, effect = "softclip";
  long seed = -1;
  int workers = 0, gc_seeds = 1000;
  double smooth = -1.0, gc_eps = 1e-3;

  app.add_option("--config", config_path, "flat `section.key = value` config file");
  app.add_option("--task", task, "preset: tube-emulation | gate-cleanup | mastering");
  app.add_option("--seed", seed, "override config seed");
  app.add_option("--out", out, "override output directory");
  app.add_option("--workers", workers, "worker threads");

  auto* datagen = app.add_subcommand("datagen", "synthesize teacher-labeled wav pairs");
  std::string estimator;
  auto* train = app.add_subcommand("train", "train the encoder against the black-box effect");
  train->add_option("--resume", resume, "warm-start weights from a checkpoint");
  train->add_option("--estimator", estimator, "gradient estimator (spsa | fd), overrides config");
  auto* render_cmd = app.add_subcommand("render", "run inference over a wav file");
  render_cmd->add_option("--checkpoint", checkpoint, "encoder checkpoint")->required();
  render_cmd->add_option("--input", input, "input wav")->required();
  render_cmd->add_option("--smooth", smooth, "theta lowpass retain coefficient [0,1)");
  auto* eval_cmd = app.add_subcommand("eval", "MFCC-distance report over the test split");
  eval_cmd->add_option("--checkpoint", checkpoint, "encoder checkpoint")->required();
  eval_cmd->add_option("--manifest", manifest, "dataset manifest (default from config)");
  auto* gradcheck = app.add_subcommand("gradcheck", "FD / SPSA / analytic comparison table");
  gradcheck->add_option("--effect", effect, "differentiable test effect (gain | softclip)");
  gradcheck->add_option("--draws", gc_seeds, "number of seeded SPSA draws");
  gradcheck->add_option("--epsilon", gc_eps, "perturbation size");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gradcheck->parsed()) {
      return cmd_gradcheck(effect, gc_seeds, gc_eps,
                           seed >= 0 ? static_cast<std::uint64_t>(seed) : 7);
    }
    Config cfg = load_config(config_path, task, seed, out, workers);
    if (!estimator.empty()) cfg.set("grad.estimator", estimator);
    if (datagen->parsed()) return cmd_datagen(cfg);
    if (train->parsed()) return cmd_train(cfg, resume);
    if (render_cmd->parsed()) return cmd_render(cfg, checkpoint, input, smooth);
    if (eval_cmd->parsed()) return cmd_eval(cfg, checkpoint, manifest);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
