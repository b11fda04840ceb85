#include "fxlearn/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fxlearn/rng.hpp"

namespace fxlearn {

namespace {

struct Dims {
  int c, h, w;
  std::size_t count() const {
    return static_cast<std::size_t>(c) * static_cast<std::size_t>(h) *
           static_cast<std::size_t>(w);
  }
};

// Input dims of every conv block, plus the final pooled dims.
std::vector<Dims> stage_dims(const EncoderConfig& cfg) {
  std::vector<Dims> d;
  Dims cur{1, cfg.time_frames, cfg.n_mels};
  d.push_back(cur);
  for (int ch : cfg.conv_channels) {
    cur = Dims{ch, cur.h / 2, cur.w / 2};  // conv keeps h,w; pool halves (floor)
    d.push_back(cur);
  }
  return d;
}

void conv3x3_forward(const ConvLayer& L, const double* in, int h, int w, double* out) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int co = 0; co < L.out_ch; ++co) {
    double* dst = out + co * plane;
    for (std::size_t i = 0; i < plane; ++i) dst[i] = L.b[static_cast<std::size_t>(co)];
  }
  for (int co = 0; co < L.out_ch; ++co) {
    for (int ci = 0; ci < L.in_ch; ++ci) {
      for (int ky = 0; ky < 3; ++ky) {
        const int y0 = ky == 0 ? 1 : 0;
        const int y1 = ky == 2 ? h - 1 : h;
        for (int kx = 0; kx < 3; ++kx) {
          const double wv = L.w[static_cast<std::size_t>(((co * L.in_ch + ci) * 3 + ky) * 3 + kx)];
          const int x0 = kx == 0 ? 1 : 0;
          const int x1 = kx == 2 ? w - 1 : w;
          const int len = x1 - x0;
          if (len <= 0) continue;
          for (int y = y0; y < y1; ++y) {
            const double* src = in + ci * plane + static_cast<std::size_t>(y + ky - 1) * w +
                                (x0 + kx - 1);
            double* dst = out + co * plane + static_cast<std::size_t>(y) * w + x0;
            for (int x = 0; x < len; ++x) dst[x] += wv * src[x];
          }
        }
      }
    }
  }
}

void conv3x3_backward(const ConvLayer& L, const double* in, const double* dout, int h, int w,
                      double* din, double* dw, double* db) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int co = 0; co < L.out_ch; ++co) {
    const double* g = dout + co * plane;
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += g[i];
    db[static_cast<std::size_t>(co)] += acc;
  }
  for (int co = 0; co < L.out_ch; ++co) {
    for (int ci = 0; ci < L.in_ch; ++ci) {
      for (int ky = 0; ky < 3; ++ky) {
        const int y0 = ky == 0 ? 1 : 0;
        const int y1 = ky == 2 ? h - 1 : h;
        for (int kx = 0; kx < 3; ++kx) {
          const int x0 = kx == 0 ? 1 : 0;
          const int x1 = kx == 2 ? w - 1 : w;
          const int len = x1 - x0;
          if (len <= 0) continue;
          const std::size_t widx =
              static_cast<std::size_t>(((co * L.in_ch + ci) * 3 + ky) * 3 + kx);
          const double wv = L.w[widx];
          double wacc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* src = in + ci * plane + static_cast<std::size_t>(y + ky - 1) * w +
                                (x0 + kx - 1);
            double* dsrc = din ? din + ci * plane + static_cast<std::size_t>(y + ky - 1) * w +
                                     (x0 + kx - 1)
                               : nullptr;
            const double* g = dout + co * plane + static_cast<std::size_t>(y) * w + x0;
            double local = 0.0;
            if (dsrc) {
              for (int x = 0; x < len; ++x) {
                local += g[x] * src[x];
                dsrc[x] += wv * g[x];
              }
            } else {
              for (int x = 0; x < len; ++x) local += g[x] * src[x];
            }
            wacc += local;
          }
          dw[widx] += wacc;
        }
      }
    }
  }
}

void maxpool2_forward(const double* a, int c, int h, int w, double* out, int* argmax) {
  const int h2 = h / 2, w2 = w / 2;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::size_t o = 0;
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h2; ++y) {
      for (int x = 0; x < w2; ++x, ++o) {
        double best = -1.0;  // ReLU activations are >= 0
        int best_idx = -1;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const std::size_t idx =
                ch * plane + static_cast<std::size_t>(2 * y + dy) * w + (2 * x + dx);
            if (a[idx] > best) {
              best = a[idx];
              best_idx = static_cast<int>(idx);
            }
          }
        }
        out[o] = best;
        argmax[o] = best_idx;
      }
    }
  }
}

}  // namespace

EncoderWeights EncoderWeights::init(const EncoderConfig& cfg, std::uint64_t seed) {
  EncoderWeights w;
  w.cfg = cfg;
  auto m = static_cast<std::size_t>(cfg.n_mels);
  w.bn_gamma.assign(m, 1.0);
  w.bn_beta.assign(m, 0.0);
  w.bn_running_mean.assign(m, 0.0);
  w.bn_running_var.assign(m, 1.0);

  std::mt19937_64 rng(splitmix64(seed ^ 0xEC0DE5EEDULL));
  int in_ch = 1;
  for (int ch : cfg.conv_channels) {
    ConvLayer layer;
    layer.in_ch = in_ch;
    layer.out_ch = ch;
    double a = 1.0 / std::sqrt(static_cast<double>(in_ch) * 9.0);
    layer.w.resize(static_cast<std::size_t>(ch) * in_ch * 9);
    for (auto& v : layer.w) v = uniform(rng, -a, a);
    layer.b.assign(static_cast<std::size_t>(ch), 0.0);
    w.conv.push_back(std::move(layer));
    in_ch = ch;
  }

  double a = 1.0 / std::sqrt(static_cast<double>(in_ch));
  w.head_w.resize(static_cast<std::size_t>(cfg.p_out) * in_ch);
  for (auto& v : w.head_w) v = uniform(rng, -a, a);
  w.head_b.assign(static_cast<std::size_t>(cfg.p_out), 0.0);
  return w;
}

long EncoderWeights::trainable_count() const {
  long n = static_cast<long>(bn_gamma.size() + bn_beta.size());
  for (const auto& c : conv) n += static_cast<long>(c.w.size() + c.b.size());
  n += static_cast<long>(head_w.size() + head_b.size());
  return n;
}

EncoderGrads EncoderGrads::zeros_like(const EncoderWeights& w) {
  EncoderGrads g;
  g.bn_gamma.assign(w.bn_gamma.size(), 0.0);
  g.bn_beta.assign(w.bn_beta.size(), 0.0);
  for (const auto& c : w.conv) {
    ConvLayer layer;
    layer.in_ch = c.in_ch;
    layer.out_ch = c.out_ch;
    layer.w.assign(c.w.size(), 0.0);
    layer.b.assign(c.b.size(), 0.0);
    g.conv.push_back(std::move(layer));
  }
  g.head_w.assign(w.head_w.size(), 0.0);
  g.head_b.assign(w.head_b.size(), 0.0);
  return g;
}

void EncoderGrads::add_scaled(const EncoderGrads& other, double scale) {
  auto axpy = [scale](std::vector<double>& dst, const std::vector<double>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  };
  axpy(bn_gamma, other.bn_gamma);
  axpy(bn_beta, other.bn_beta);
  for (std::size_t k = 0; k < conv.size(); ++k) {
    axpy(conv[k].w, other.conv[k].w);
    axpy(conv[k].b, other.conv[k].b);
  }
  axpy(head_w, other.head_w);
  axpy(head_b, other.head_b);
}

namespace {

template <typename T>
std::vector<double*> collect_params(T& x) {
  std::vector<double*> out;
  auto push = [&out](std::vector<double>& v) {
    for (auto& e : v) out.push_back(&e);
  };
  push(x.bn_gamma);
  push(x.bn_beta);
  for (auto& c : x.conv) {
    push(c.w);
    push(c.b);
  }
  push(x.head_w);
  push(x.head_b);
  return out;
}

}  // namespace

std::vector<double*> trainable_params(EncoderWeights& w) { return collect_params(w); }
std::vector<double*> trainable_params(EncoderGrads& g) { return collect_params(g); }

std::vector<ParamVector> encoder_forward(EncoderWeights& w,
                                         const std::vector<FeatureMap>& batch,
                                         EncoderMode mode, EncoderCache& cache,
                                         WorkerPool* pool) {
  const EncoderConfig& cfg = w.cfg;
  const int B = static_cast<int>(batch.size());
  if (B == 0) throw std::invalid_argument("encoder_forward: empty batch");
  for (const auto& f : batch) {
    if (f.frames != cfg.time_frames || f.bands != cfg.n_mels) {
      throw std::invalid_argument("encoder_forward: feature map shape mismatch");
    }
  }

  const std::size_t tm = static_cast<std::size_t>(cfg.time_frames) * cfg.n_mels;
  cache.mode = mode;
  cache.batch = B;
  cache.bn_xhat.resize(static_cast<std::size_t>(B) * tm);
  cache.bn_out.resize(static_cast<std::size_t>(B) * tm);
  cache.items.assign(static_cast<std::size_t>(B), {});

  // Batch norm per mel band over (batch, time).
  const int nbt = B * cfg.time_frames;
  for (int m = 0; m < cfg.n_mels; ++m) {
    double mean, var;
    if (mode == EncoderMode::train) {
      double s = 0.0;
      for (int b = 0; b < B; ++b) {
        for (int t = 0; t < cfg.time_frames; ++t) s += batch[static_cast<std::size_t>(b)].at(t, m);
      }
      mean = s / nbt;
      double sv = 0.0;
      for (int b = 0; b < B; ++b) {
        for (int t = 0; t < cfg.time_frames; ++t) {
          double d = batch[static_cast<std::size_t>(b)].at(t, m) - mean;
          sv += d * d;
        }
      }
      var = sv / nbt;
      double unbiased = nbt > 1 ? sv / (nbt - 1) : var;
      auto mi = static_cast<std::size_t>(m);
      w.bn_running_mean[mi] = (1.0 - cfg.bn_momentum) * w.bn_running_mean[mi] +
                              cfg.bn_momentum * mean;
      w.bn_running_var[mi] = (1.0 - cfg.bn_momentum) * w.bn_running_var[mi] +
                             cfg.bn_momentum * unbiased;
    } else {
      mean = w.bn_running_mean[static_cast<std::size_t>(m)];
      var = w.bn_running_var[static_cast<std::size_t>(m)];
    }
    const double inv_std = 1.0 / std::sqrt(var + cfg.bn_eps);
    const double gamma = w.bn_gamma[static_cast<std::size_t>(m)];
    const double beta = w.bn_beta[static_cast<std::size_t>(m)];
    for (int b = 0; b < B; ++b) {
      for (int t = 0; t < cfg.time_frames; ++t) {
        const std::size_t idx = static_cast<std::size_t>(b) * tm +
                                static_cast<std::size_t>(t) * cfg.n_mels +
                                static_cast<std::size_t>(m);
        double xh = (batch[static_cast<std::size_t>(b)].at(t, m) - mean) * inv_std;
        cache.bn_xhat[idx] = xh;
        cache.bn_out[idx] = gamma * xh + beta;
      }
    }
  }

  // Per-item conv stack; items are independent past the batch norm.
  const std::vector<Dims> dims = stage_dims(cfg);
  const int n_blocks = static_cast<int>(cfg.conv_channels.size());
  std::vector<ParamVector> theta(static_cast<std::size_t>(B));

  auto run_item = [&](int b) {
    EncoderCache::Item& item = cache.items[static_cast<std::size_t>(b)];
    item.block_in.resize(static_cast<std::size_t>(n_blocks));
    item.block_z.resize(static_cast<std::size_t>(n_blocks));
    item.pool_argmax.resize(static_cast<std::size_t>(n_blocks));

    std::vector<double> cur(cache.bn_out.begin() + static_cast<long>(b) * static_cast<long>(tm),
                            cache.bn_out.begin() + (static_cast<long>(b) + 1) * static_cast<long>(tm));
    for (int k = 0; k < n_blocks; ++k) {
      const Dims in_d = dims[static_cast<std::size_t>(k)];
      const ConvLayer& L = w.conv[static_cast<std::size_t>(k)];
      item.block_in[static_cast<std::size_t>(k)] = std::move(cur);

      std::vector<double> z(static_cast<std::size_t>(L.out_ch) * in_d.h * in_d.w);
      conv3x3_forward(L, item.block_in[static_cast<std::size_t>(k)].data(), in_d.h, in_d.w,
                      z.data());

      std::vector<double> act(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) act[i] = z[i] > 0.0 ? z[i] : 0.0;
      item.block_z[static_cast<std::size_t>(k)] = std::move(z);

      const Dims out_d = dims[static_cast<std::size_t>(k) + 1];
      std::vector<double> pooled(out_d.count());
      item.pool_argmax[static_cast<std::size_t>(k)].resize(pooled.size());
      maxpool2_forward(act.data(), L.out_ch, in_d.h, in_d.w, pooled.data(),
                       item.pool_argmax[static_cast<std::size_t>(k)].data());
      cur = std::move(pooled);
    }

    const Dims last = dims.back();
    const double inv_spatial = 1.0 / (static_cast<double>(last.h) * last.w);
    item.gap.assign(static_cast<std::size_t>(last.c), 0.0);
    for (int c = 0; c < last.c; ++c) {
      const double* plane = cur.data() + static_cast<std::size_t>(c) * last.h * last.w;
      double s = 0.0;
      for (int i = 0; i < last.h * last.w; ++i) s += plane[i];
      item.gap[static_cast<std::size_t>(c)] = s * inv_spatial;
    }

    item.sigmoid.resize(static_cast<std::size_t>(cfg.p_out));
    ParamVector& th = theta[static_cast<std::size_t>(b)];
    th.resize(static_cast<std::size_t>(cfg.p_out));
    for (int p = 0; p < cfg.p_out; ++p) {
      double u = w.head_b[static_cast<std::size_t>(p)];
      const double* row = w.head_w.data() + static_cast<std::size_t>(p) * last.c;
      for (int c = 0; c < last.c; ++c) u += row[c] * item.gap[static_cast<std::size_t>(c)];
      double s = 1.0 / (1.0 + std::exp(-u));
      item.sigmoid[static_cast<std::size_t>(p)] = s;
      th[static_cast<std::size_t>(p)] = s;
    }
  };

  if (pool) {
    pool->parallel_for(B, run_item);
  } else {
    for (int b = 0; b < B; ++b) run_item(b);
  }
  return theta;
}

EncoderGrads encoder_backward(const EncoderWeights& w, const EncoderCache& cache,
                              const std::vector<std::vector<double>>& grad_theta,
                              WorkerPool* pool) {
  const EncoderConfig& cfg = w.cfg;
  const int B = cache.batch;
  if (static_cast<int>(grad_theta.size()) != B) {
    throw std::invalid_argument("encoder_backward: upstream batch size mismatch");
  }
  if (static_cast<int>(cache.items.size()) != B || cache.items.empty() ||
      cache.items[0].sigmoid.empty()) {
    throw std::invalid_argument("encoder_backward: stale or missing forward cache");
  }

  const std::vector<Dims> dims = stage_dims(cfg);
  const int n_blocks = static_cast<int>(cfg.conv_channels.size());
  const std::size_t tm = static_cast<std::size_t>(cfg.time_frames) * cfg.n_mels;

  std::vector<EncoderGrads> item_grads(static_cast<std::size_t>(B));
  std::vector<std::vector<double>> dbn(static_cast<std::size_t>(B));

  auto run_item = [&](int b) {
    const EncoderCache::Item& item = cache.items[static_cast<std::size_t>(b)];
    EncoderGrads& g = item_grads[static_cast<std::size_t>(b)];
    g = EncoderGrads::zeros_like(w);

    const Dims last = dims.back();
    // Sigmoid head.
    std::vector<double> du(static_cast<std::size_t>(cfg.p_out));
    for (int p = 0; p < cfg.p_out; ++p) {
      double s = item.sigmoid[static_cast<std::size_t>(p)];
      du[static_cast<std::size_t>(p)] = grad_theta[static_cast<std::size_t>(b)][static_cast<std::size_t>(p)] * s * (1.0 - s);
    }
    std::vector<double> dgap(static_cast<std::size_t>(last.c), 0.0);
    for (int p = 0; p < cfg.p_out; ++p) {
      const double* row = w.head_w.data() + static_cast<std::size_t>(p) * last.c;
      double* grow = g.head_w.data() + static_cast<std::size_t>(p) * last.c;
      const double dup = du[static_cast<std::size_t>(p)];
      g.head_b[static_cast<std::size_t>(p)] += dup;
      for (int c = 0; c < last.c; ++c) {
        grow[c] += dup * item.gap[static_cast<std::size_t>(c)];
        dgap[static_cast<std::size_t>(c)] += row[c] * dup;
      }
    }

    // Global average pool.
    std::vector<double> dcur(last.count());
    const double inv_spatial = 1.0 / (static_cast<double>(last.h) * last.w);
    for (int c = 0; c < last.c; ++c) {
      double v = dgap[static_cast<std::size_t>(c)] * inv_spatial;
      double* plane = dcur.data() + static_cast<std::size_t>(c) * last.h * last.w;
      for (int i = 0; i < last.h * last.w; ++i) plane[i] = v;
    }

    // Conv blocks in reverse.
    for (int k = n_blocks - 1; k >= 0; --k) {
      const Dims in_d = dims[static_cast<std::size_t>(k)];
      const ConvLayer& L = w.conv[static_cast<std::size_t>(k)];
      const auto& z = item.block_z[static_cast<std::size_t>(k)];
      const auto& argmax = item.pool_argmax[static_cast<std::size_t>(k)];

      // Un-pool into ReLU grads, masked by z > 0.
      std::vector<double> dz(z.size(), 0.0);
      for (std::size_t o = 0; o < argmax.size(); ++o) {
        const auto idx = static_cast<std::size_t>(argmax[o]);
        if (z[idx] > 0.0) dz[idx] += dcur[o];
      }

      std::vector<double> din(static_cast<std::size_t>(L.in_ch) * in_d.h * in_d.w, 0.0);
      conv3x3_backward(L, item.block_in[static_cast<std::size_t>(k)].data(), dz.data(), in_d.h,
                       in_d.w, din.data(), g.conv[static_cast<std::size_t>(k)].w.data(),
                       g.conv[static_cast<std::size_t>(k)].b.data());
      dcur = std::move(din);
    }
    dbn[static_cast<std::size_t>(b)] = std::move(dcur);  // gradient w.r.t. bn output
  };

  if (pool) {
    pool->parallel_for(B, run_item);
  } else {
    for (int b = 0; b < B; ++b) run_item(b);
  }

  // Deterministic reduction in slot order, then the batch-norm parameter
  // gradients. gamma/beta only scale/shift x_hat, which does not depend on
  // them, so no gradient flows further down (and input gradients are not
  // produced by design).
  EncoderGrads total = EncoderGrads::zeros_like(w);
  for (int b = 0; b < B; ++b) total.add_scaled(item_grads[static_cast<std::size_t>(b)], 1.0);

  for (int b = 0; b < B; ++b) {
    const auto& d = dbn[static_cast<std::size_t>(b)];
    for (int t = 0; t < cfg.time_frames; ++t) {
      for (int m = 0; m < cfg.n_mels; ++m) {
        const std::size_t idx = static_cast<std::size_t>(t) * cfg.n_mels +
                                static_cast<std::size_t>(m);
        const std::size_t cidx = static_cast<std::size_t>(b) * tm + idx;
        total.bn_gamma[static_cast<std::size_t>(m)] += d[idx] * cache.bn_xhat[cidx];
        total.bn_beta[static_cast<std::size_t>(m)] += d[idx];
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization: versioned header, layer manifest, little-endian
// float32 tensors.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'F', 'X', 'E', 'N', 'C', '0', '1', '\n'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((u >> (8 * i)) & 0xff));
}

double get_f64(std::istream& is) {
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) {
    int c = is.get();
    if (c == EOF) throw std::runtime_error("checkpoint truncated");
    u |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

void put_tensor(std::ostream& os, const std::string& name, const std::vector<double>& data,
                std::vector<std::uint32_t> dims) {
  put_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<long>(name.size()));
  put_u32(os, static_cast<std::uint32_t>(dims.size()));
  std::size_t expect = 1;
  for (auto d : dims) {
    put_u32(os, d);
    expect *= d;
  }
  if (expect != data.size()) throw std::logic_error("tensor dims mismatch on save: " + name);
  for (double v : data) {
    float f = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32(os, u);
  }
}

std::pair<std::string, std::vector<double>> get_tensor(std::istream& is) {
  std::uint32_t name_len = get_u32(is);
  std::string name(name_len, '\0');
  is.read(name.data(), name_len);
  std::uint32_t ndim = get_u32(is);
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) count *= get_u32(is);
  std::vector<double> data(count);
  for (auto& v : data) {
    std::uint32_t u = get_u32(is);
    float f;
    std::memcpy(&f, &u, 4);
    v = static_cast<double>(f);
  }
  return {name, std::move(data)};
}

}  // namespace

void EncoderWeights::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
  os.write(kMagic, 8);
  put_u32(os, static_cast<std::uint32_t>(cfg.n_mels));
  put_u32(os, static_cast<std::uint32_t>(cfg.time_frames));
  put_u32(os, static_cast<std::uint32_t>(cfg.p_out));
  put_u32(os, static_cast<std::uint32_t>(cfg.conv_channels.size()));
  for (int c : cfg.conv_channels) put_u32(os, static_cast<std::uint32_t>(c));
  put_f64(os, cfg.bn_momentum);
  put_f64(os, cfg.bn_eps);

  put_u32(os, static_cast<std::uint32_t>(6 + 2 * conv.size()));
  auto m = static_cast<std::uint32_t>(cfg.n_mels);
  put_tensor(os, "bn.gamma", bn_gamma, {m});
  put_tensor(os, "bn.beta", bn_beta, {m});
  put_tensor(os, "bn.running_mean", bn_running_mean, {m});
  put_tensor(os, "bn.running_var", bn_running_var, {m});
  for (std::size_t k = 0; k < conv.size(); ++k) {
    std::string base = "conv" + std::to_string(k + 1);
    put_tensor(os, base + ".w", conv[k].w,
               {static_cast<std::uint32_t>(conv[k].out_ch),
                static_cast<std::uint32_t>(conv[k].in_ch), 3u, 3u});
    put_tensor(os, base + ".b", conv[k].b, {static_cast<std::uint32_t>(conv[k].out_ch)});
  }
  put_tensor(os, "head.w", head_w,
             {static_cast<std::uint32_t>(cfg.p_out), static_cast<std::uint32_t>(last_channels())});
  put_tensor(os, "head.b", head_b, {static_cast<std::uint32_t>(cfg.p_out)});
  if (!os) throw std::runtime_error("write failed: " + path);
}

EncoderWeights EncoderWeights::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("not an encoder checkpoint (bad magic): " + path);
  }

  EncoderConfig cfg;
  cfg.n_mels = static_cast<int>(get_u32(is));
  cfg.time_frames = static_cast<int>(get_u32(is));
  cfg.p_out = static_cast<int>(get_u32(is));
  std::uint32_t n_conv = get_u32(is);
  cfg.conv_channels.clear();
  for (std::uint32_t i = 0; i < n_conv; ++i) cfg.conv_channels.push_back(static_cast<int>(get_u32(is)));
  cfg.bn_momentum = get_f64(is);
  cfg.bn_eps = get_f64(is);

  EncoderWeights w = EncoderWeights::init(cfg, 0);
  std::uint32_t n_tensors = get_u32(is);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    auto [name, data] = get_tensor(is);
    std::vector<double>* dst = nullptr;
    if (name == "bn.gamma") dst = &w.bn_gamma;
    else if (name == "bn.beta") dst = &w.bn_beta;
    else if (name == "bn.running_mean") dst = &w.bn_running_mean;
    else if (name == "bn.running_var") dst = &w.bn_running_var;
    else if (name == "head.w") dst = &w.head_w;
    else if (name == "head.b") dst = &w.head_b;
    else if (name.rfind("conv", 0) == 0) {
      std::size_t dot = name.find('.');
      int idx = std::stoi(name.substr(4, dot - 4)) - 1;
      if (idx < 0 || idx >= static_cast<int>(w.conv.size())) {
        throw std::runtime_error("checkpoint layer out of range: " + name);
      }
      dst = name.substr(dot + 1) == "w" ? &w.conv[static_cast<std::size_t>(idx)].w
                                        : &w.conv[static_cast<std::size_t>(idx)].b;
    } else {
      throw std::runtime_error("unknown tensor in checkpoint: " + name);
    }
    if (dst->size() != data.size()) {
      throw std::runtime_error("tensor size mismatch in checkpoint: " + name);
    }
    *dst = std::move(data);
  }
  return w;
}

}  // namespace fxlearn
