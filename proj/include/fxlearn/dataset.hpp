#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fxlearn/audio.hpp"
#include "fxlearn/blackbox_fx.hpp"

namespace fxlearn {

// RMS-referenced: a full-scale sine sits at -3.01 dBFS. Throws on silence.
AudioClip loudness_normalize(const AudioClip& clip, double target_dbfs);
double rms_dbfs(const AudioClip& clip);

enum class SourceKind { tones, chirps, noise_bursts, plucks };

SourceKind source_kind_from_string(const std::string& s);

// Deterministic synthetic mono clips with band-limited content and varied
// envelopes; plucks are exponentially decaying harmonic notes.
std::vector<AudioClip> synth_sources(SourceKind kind, int count, std::uint64_t seed,
                                     double duration_s = 5.0, double sample_rate = 22050.0);

// Hidden parameter trajectory driving the teacher effect. Constant holds
// theta* for the whole clip; segments interpolates linearly between random
// waypoints spaced 1 second apart.
struct TeacherSpec {
  enum class Mode { constant, segments };
  Mode mode = Mode::constant;
  std::vector<double> constant_values;  // normalized, length P (constant mode)
  std::uint64_t seed = 0;               // waypoint stream (segments mode)
};

// theta for frame index `frame` of a clip with `n_frames` frames.
ParamVector teacher_theta(const TeacherSpec& spec, int p, int frame, int n_frames,
                          double frames_per_second, std::uint64_t pair_seed);

struct PairedClips {
  AudioClip input;
  AudioClip target;
};

// target = teacher effect applied to the input with the hidden trajectory,
// processed as consecutive frame_size frames through a fresh instance.
std::vector<PairedClips> generate_teacher_pairs(const std::vector<AudioClip>& sources,
                                                const BlackboxFx& teacher_proto,
                                                const TeacherSpec& spec, int frame_size,
                                                std::uint64_t seed);

// Applies an effect to a whole clip frame by frame with a per-frame
// trajectory (n_frames x P); pads the tail frame with zeros and trims.
AudioClip process_clip(BlackboxFx& fx, const AudioClip& clip,
                       const std::vector<ParamVector>& trajectory, int frame_size);

struct ManifestRow {
  std::string input_path;
  std::string target_path;
  std::string split;  // train | val | test
};

// One `input<TAB>target<TAB>split` row per pair.
std::vector<ManifestRow> manifest_read(const std::string& path);
void manifest_write(const std::string& path, const std::vector<ManifestRow>& rows);

// 80/10/10 by clip index (i%10 == 8 -> val, == 9 -> test).
std::string split_for_index(int index);

struct LoadedDataset {
  std::vector<PairedClips> train;
  std::vector<PairedClips> val;
  std::vector<PairedClips> test;
};

// Reads every referenced wav; rates must agree with expected_rate (0 = any).
LoadedDataset load_dataset(const std::string& manifest_path, double expected_rate = 0.0);

}  // namespace fxlearn
