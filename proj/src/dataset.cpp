#include "fxlearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fxlearn/rng.hpp"
#include "fxlearn/wav.hpp"

namespace fxlearn {

double rms_dbfs(const AudioClip& clip) {
  if (clip.samples.empty()) throw std::invalid_argument("rms_dbfs: empty clip");
  double acc = 0.0;
  for (double s : clip.samples) acc += s * s;
  double rms = std::sqrt(acc / static_cast<double>(clip.samples.size()));
  if (rms <= 0.0) throw std::invalid_argument("rms_dbfs: silent clip");
  return lin_to_db(rms);
}

AudioClip loudness_normalize(const AudioClip& clip, double target_dbfs) {
  double gain = db_to_lin(target_dbfs - rms_dbfs(clip));
  AudioClip out = clip;
  for (double& s : out.samples) s *= gain;
  return out;
}

SourceKind source_kind_from_string(const std::string& s) {
  if (s == "tones") return SourceKind::tones;
  if (s == "chirps") return SourceKind::chirps;
  if (s == "noise-bursts" || s == "noise_bursts") return SourceKind::noise_bursts;
  if (s == "plucks") return SourceKind::plucks;
  throw std::invalid_argument("unknown source kind '" + s + "'");
}

namespace {

void add_pluck(std::vector<double>& x, double fs, std::size_t onset, double f0, double amp,
               double decay_s, std::mt19937_64& rng) {
  const int harmonics = 6;
  double phases[harmonics];
  for (auto& p : phases) p = uniform(rng, 0.0, 2.0 * M_PI);
  const double tau = decay_s;
  for (std::size_t i = onset; i < x.size(); ++i) {
    double t = static_cast<double>(i - onset) / fs;
    double env = amp * std::exp(-t / tau);
    if (env < 1e-5) break;
    double v = 0.0;
    for (int h = 0; h < harmonics; ++h) {
      double f = f0 * (h + 1);
      if (f > fs * 0.45) break;
      // higher partials decay faster, roughly like a plucked string
      v += std::sin(2.0 * M_PI * f * t + phases[h]) * std::exp(-t * h * 2.0) / (h + 1);
    }
    x[i] += env * v;
  }
}

AudioClip make_clip(SourceKind kind, int index, std::uint64_t seed, double duration_s,
                    double fs) {
  std::mt19937_64 rng = derive_stream(seed, static_cast<std::uint64_t>(index) + 17);
  const auto n = static_cast<std::size_t>(duration_s * fs);
  std::vector<double> x(n, 0.0);

  switch (kind) {
    case SourceKind::tones: {
      int partials = 2 + static_cast<int>(rng() % 3);
      for (int p = 0; p < partials; ++p) {
        double f = uniform(rng, 80.0, 4000.0);
        double a = uniform(rng, 0.05, 0.25);
        double ph = uniform(rng, 0.0, 2.0 * M_PI);
        double lfo = uniform(rng, 0.1, 0.5);  // slow amplitude movement
        for (std::size_t i = 0; i < n; ++i) {
          double t = static_cast<double>(i) / fs;
          x[i] += a * (0.6 + 0.4 * std::sin(2.0 * M_PI * lfo * t)) *
                  std::sin(2.0 * M_PI * f * t + ph);
        }
      }
      break;
    }
    case SourceKind::chirps: {
      double f0 = uniform(rng, 50.0, 300.0);
      double f1 = uniform(rng, 2000.0, 9000.0);
      double a = uniform(rng, 0.15, 0.4);
      double k = std::log(f1 / f0);
      for (std::size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / fs;
        double u = t / duration_s;
        // exponential sweep; phase is the integral of the instantaneous freq
        double phase = 2.0 * M_PI * f0 * duration_s * (std::exp(k * u) - 1.0) / k;
        x[i] = a * std::sin(phase);
      }
      break;
    }
    case SourceKind::noise_bursts: {
      double floor_amp = uniform(rng, 0.002, 0.01);  // constant low-level bed
      for (std::size_t i = 0; i < n; ++i) x[i] = floor_amp * (uniform(rng) * 2.0 - 1.0);
      double t = uniform(rng, 0.05, 0.3);
      while (t < duration_s - 0.2) {
        double len = uniform(rng, 0.1, 0.5);
        double a = uniform(rng, 0.15, 0.45);
        auto i0 = static_cast<std::size_t>(t * fs);
        auto i1 = std::min(n, static_cast<std::size_t>((t + len) * fs));
        double state = 0.0;
        double tone_f = uniform(rng, 100.0, 1500.0);
        for (std::size_t i = i0; i < i1; ++i) {
          double u = static_cast<double>(i - i0) / (static_cast<double>(i1 - i0) + 1.0);
          double env = std::sin(M_PI * u);  // raised on/off ramp
          state = 0.8 * state + 0.2 * (uniform(rng) * 2.0 - 1.0);  // brownish noise
          double tt = static_cast<double>(i) / fs;
          x[i] += a * env * (0.7 * state * 4.0 + 0.3 * std::sin(2.0 * M_PI * tone_f * tt));
        }
        t += len + uniform(rng, 0.2, 0.8);
      }
      break;
    }
    case SourceKind::plucks: {
      double t = uniform(rng, 0.02, 0.2);
      while (t < duration_s - 0.3) {
        // roughly guitar range, equal-tempered-ish random pitches
        double f0 = 82.4 * std::pow(2.0, uniform(rng, 0.0, 3.0));
        double amp = uniform(rng, 0.2, 0.5);
        double decay = uniform(rng, 0.3, 1.2);
        add_pluck(x, fs, static_cast<std::size_t>(t * fs), f0, amp, decay, rng);
        t += uniform(rng, 0.25, 0.9);
      }
      break;
    }
  }

  // keep headroom
  double peak = 0.0;
  for (double s : x) peak = std::max(peak, std::fabs(s));
  if (peak > 0.9) {
    double g = 0.9 / peak;
    for (double& s : x) s *= g;
  }

  AudioClip clip;
  clip.samples = std::move(x);
  clip.sample_rate = fs;
  clip.source_id = "synth_" + std::to_string(index);
  return clip;
}

}  // namespace

std::vector<AudioClip> synth_sources(SourceKind kind, int count, std::uint64_t seed,
                                     double duration_s, double sample_rate) {
  if (count < 1) throw std::invalid_argument("synth_sources: count must be >= 1");
  std::vector<AudioClip> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(make_clip(kind, i, seed, duration_s, sample_rate));
  return out;
}

ParamVector teacher_theta(const TeacherSpec& spec, int p, int frame, int n_frames,
                          double frames_per_second, std::uint64_t pair_seed) {
  if (spec.mode == TeacherSpec::Mode::constant) {
    if (static_cast<int>(spec.constant_values.size()) != p) {
      throw std::invalid_argument("teacher constant_values length != P");
    }
    return spec.constant_values;
  }

  // Piecewise linear between waypoints one second apart.
  const double frames_per_seg = std::max(1.0, frames_per_second);
  const int n_waypoints = static_cast<int>(std::ceil(n_frames / frames_per_seg)) + 2;
  auto waypoint = [&](int w) {
    std::mt19937_64 rng = derive_stream(spec.seed ^ pair_seed, static_cast<std::uint64_t>(w) + 31);
    ParamVector v(static_cast<std::size_t>(p));
    for (auto& e : v) e = uniform(rng);
    return v;
  };
  double pos = frame / frames_per_seg;
  int w0 = std::min(static_cast<int>(pos), n_waypoints - 2);
  double frac = pos - w0;
  ParamVector a = waypoint(w0), b = waypoint(w0 + 1);
  ParamVector out(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    out[static_cast<std::size_t>(i)] = (1.0 - frac) * a[static_cast<std::size_t>(i)] +
                                       frac * b[static_cast<std::size_t>(i)];
  }
  return out;
}

AudioClip process_clip(BlackboxFx& fx, const AudioClip& clip,
                       const std::vector<ParamVector>& trajectory, int frame_size) {
  const std::size_t n = clip.samples.size();
  const auto fsz = static_cast<std::size_t>(frame_size);
  const std::size_t n_frames = (n + fsz - 1) / fsz;
  if (trajectory.size() != n_frames) {
    throw std::invalid_argument("process_clip: trajectory length != frame count");
  }

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.source_id = clip.source_id;
  out.samples.resize(n);

  AudioFrame frame(fsz, clip.sample_rate);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t off = f * fsz;
    const std::size_t len = std::min(fsz, n - off);
    std::fill(frame.samples.begin(), frame.samples.end(), 0.0);
    std::copy(clip.samples.begin() + static_cast<long>(off),
              clip.samples.begin() + static_cast<long>(off + len), frame.samples.begin());
    AudioFrame y = fx.process(frame, trajectory[f]);
    std::copy(y.samples.begin(), y.samples.begin() + static_cast<long>(len),
              out.samples.begin() + static_cast<long>(off));
  }
  return out;
}

std::vector<PairedClips> generate_teacher_pairs(const std::vector<AudioClip>& sources,
                                                const BlackboxFx& teacher_proto,
                                                const TeacherSpec& spec, int frame_size,
                                                std::uint64_t seed) {
  if (sources.empty()) throw std::invalid_argument("generate_teacher_pairs: no sources");
  const int p = teacher_proto.param_count();

  std::vector<PairedClips> out;
  out.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const AudioClip& src = sources[i];
    const int n_frames =
        static_cast<int>((src.samples.size() + static_cast<std::size_t>(frame_size) - 1) /
                         static_cast<std::size_t>(frame_size));
    const double fps = src.sample_rate / frame_size;

    std::vector<ParamVector> traj;
    traj.reserve(static_cast<std::size_t>(n_frames));
    for (int f = 0; f < n_frames; ++f) {
      traj.push_back(teacher_theta(spec, p, f, n_frames, fps, seed + i * 977));
    }

    auto fx = teacher_proto.clone_config();
    PairedClips pair;
    pair.input = src;
    pair.target = process_clip(*fx, src, traj, frame_size);
    out.push_back(std::move(pair));
  }
  return out;
}

std::string split_for_index(int index) {
  int r = index % 10;
  if (r == 8) return "val";
  if (r == 9) return "test";
  return "train";
}

std::vector<ManifestRow> manifest_read(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest '" + path + "'");
  std::vector<ManifestRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ManifestRow row;
    if (!std::getline(ls, row.input_path, '\t') || !std::getline(ls, row.target_path, '\t') ||
        !std::getline(ls, row.split, '\t')) {
      throw std::runtime_error("manifest '" + path + "' line " + std::to_string(lineno) +
                               ": expected input<TAB>target<TAB>split");
    }
    if (row.split != "train" && row.split != "val" && row.split != "test") {
      throw std::runtime_error("manifest '" + path + "' line " + std::to_string(lineno) +
                               ": unknown split '" + row.split + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void manifest_write(const std::string& path, const std::vector<ManifestRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest '" + path + "'");
  for (const auto& r : rows) {
    os << r.input_path << '\t' << r.target_path << '\t' << r.split << '\n';
  }
}

LoadedDataset load_dataset(const std::string& manifest_path, double expected_rate) {
  LoadedDataset ds;
  for (const auto& row : manifest_read(manifest_path)) {
    PairedClips pair;
    pair.input = wav_read(row.input_path);
    pair.target = wav_read(row.target_path);
    if (expected_rate > 0.0 && (pair.input.sample_rate != expected_rate ||
                                pair.target.sample_rate != expected_rate)) {
      throw std::runtime_error("sample rate mismatch in '" + row.input_path + "'");
    }
    if (pair.input.samples.size() != pair.target.samples.size()) {
      throw std::runtime_error("input/target length mismatch for '" + row.input_path + "'");
    }
    if (row.split == "train") ds.train.push_back(std::move(pair));
    else if (row.split == "val") ds.val.push_back(std::move(pair));
    else ds.test.push_back(std::move(pair));
  }
  return ds;
}

}  // namespace fxlearn
