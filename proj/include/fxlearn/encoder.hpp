#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fxlearn/mel.hpp"
#include "fxlearn/params.hpp"
#include "fxlearn/threadpool.hpp"

namespace fxlearn {

// Trainable analyzer: per-band batch norm on the log-mel input, a small
// stack of 3x3 conv blocks (ReLU, 2x2 max pool), global average pooling and
// a sigmoid head with P outputs. Forward and backward are written out by
// hand; only the batch-norm stage couples batch items, so the conv stacks
// run per item on the worker pool.
struct EncoderConfig {
  int time_frames = 53;
  int n_mels = 128;
  int p_out = 1;
  std::vector<int> conv_channels = {16, 32, 64};
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;
};

struct ConvLayer {
  int in_ch = 0;
  int out_ch = 0;
  std::vector<double> w;  // [out][in][3][3]
  std::vector<double> b;  // [out]
};

struct EncoderWeights {
  EncoderConfig cfg;

  std::vector<double> bn_gamma, bn_beta;               // [n_mels]
  std::vector<double> bn_running_mean, bn_running_var;  // [n_mels], not trained
  std::vector<ConvLayer> conv;
  std::vector<double> head_w;  // [p_out][last_channels]
  std::vector<double> head_b;  // [p_out]

  // Centered uniform init scaled by fan-in; head bias 0 so training starts
  // at mid-range parameters.
  static EncoderWeights init(const EncoderConfig& cfg, std::uint64_t seed);

  int last_channels() const { return cfg.conv_channels.back(); }
  long trainable_count() const;

  void save(const std::string& path) const;
  static EncoderWeights load(const std::string& path);
};

// Gradients with the same tensor layout as the trainable weights.
struct EncoderGrads {
  std::vector<double> bn_gamma, bn_beta;
  std::vector<ConvLayer> conv;
  std::vector<double> head_w, head_b;

  static EncoderGrads zeros_like(const EncoderWeights& w);
  void add_scaled(const EncoderGrads& other, double scale);
};

// Flat views in a fixed canonical order (running stats excluded) for the
// optimizer and for finite-difference checks.
std::vector<double*> trainable_params(EncoderWeights& w);
std::vector<double*> trainable_params(EncoderGrads& g);

enum class EncoderMode { train, eval };

struct EncoderCache {
  EncoderMode mode = EncoderMode::train;
  int batch = 0;

  std::vector<double> bn_xhat;     // [B][T][M]
  std::vector<double> bn_out;      // [B][T][M]

  struct Item {
    // Per conv block: input activation, pre-ReLU response, pooled output
    // (which is the next block's input), and pool argmax offsets.
    std::vector<std::vector<double>> block_in;
    std::vector<std::vector<double>> block_z;
    std::vector<std::vector<int>> pool_argmax;
    std::vector<double> gap;       // [C_last]
    std::vector<double> sigmoid;   // [P]
  };
  std::vector<Item> items;
};

// Runs the batch forward pass. In train mode batch statistics are used and
// the running stats in `w` are updated; eval mode reads running stats only.
std::vector<ParamVector> encoder_forward(EncoderWeights& w,
                                         const std::vector<FeatureMap>& batch,
                                         EncoderMode mode, EncoderCache& cache,
                                         WorkerPool* pool = nullptr);

// Exact gradients of sum_b <theta_b, grad_theta_b> w.r.t. every trainable
// weight. No gradient is produced for the input features.
EncoderGrads encoder_backward(const EncoderWeights& w, const EncoderCache& cache,
                              const std::vector<std::vector<double>>& grad_theta,
                              WorkerPool* pool = nullptr);

}  // namespace fxlearn
