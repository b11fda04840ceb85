#include "doctest.h"

#include <cmath>
#include <memory>

#include "fxlearn/fx/basic.hpp"
#include "fxlearn/fx/chain.hpp"
#include "fxlearn/fx/crossover.hpp"
#include "fxlearn/fx/dynamics.hpp"
#include "fxlearn/fx/envelope.hpp"
#include "fxlearn/fx/factory.hpp"
#include "fxlearn/fx/graphic_eq.hpp"
#include "fxlearn/fx/limiter.hpp"
#include "fxlearn/fx/multiband.hpp"
#include "fxlearn/rng.hpp"
#include "support/dsp_oracles.hpp"

using namespace fxlearn;
using namespace fxlearn::testing;

namespace {

constexpr double kFs = 22050.0;

AudioFrame frame_from(const std::vector<double>& v) {
  AudioFrame f;
  f.samples = v;
  f.sample_rate = kFs;
  return f;
}

// Steady-state gain of an effect for a sine, measured over the second half.
double sine_gain_db(BlackboxFx& fx, const ParamVector& theta, double freq,
                    double seconds = 1.0, double amp = 0.1) {
  auto n = static_cast<std::size_t>(seconds * kFs);
  n -= n % static_cast<std::size_t>(fx.block_size());
  std::vector<double> x = sine(freq, kFs, n, amp);
  AudioFrame y = fx.process(frame_from(x), theta);
  double gin = rms(x, n / 2, n);
  double gout = rms(y.samples, n / 2, n);
  return 20.0 * std::log10(gout / gin);
}

ParamVector random_theta(int p, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  ParamVector v(static_cast<std::size_t>(p));
  for (auto& e : v) e = uniform(rng, 0.05, 0.95);
  return v;
}

}  // namespace

// ---------------------------------------------------------------- envelope

TEST_CASE("envelope follower holds its fixed point on constant input") {
  EnvelopeFollower env(10.0, 10.0, kFs);
  for (int i = 0; i < 5000; ++i) env.tick(0.5);  // ~23 time constants
  double settled = env.value();
  CHECK(settled == doctest::Approx(0.5).epsilon(1e-6));
  for (int i = 0; i < 1000; ++i) env.tick(0.5);
  CHECK(std::fabs(env.value() - settled) < 1e-9);
}

TEST_CASE("envelope step response matches the closed-form one-pole curve") {
  EnvelopeFollower env(10.0, 10.0, kFs);
  double last = 0.0;
  for (int i = 0; i < 221; ++i) last = env.tick(1.0);
  // 1 - exp(-221 / 220.5), the analytic response after 221 samples
  double expected = 1.0 - std::exp(-221.0 / 220.5);
  CHECK(last == doctest::Approx(expected).epsilon(1e-9));
  CHECK(last == doctest::Approx(0.632).epsilon(2e-3));
}

TEST_CASE("envelope decays monotonically toward zero on silence") {
  EnvelopeFollower env(10.0, 10.0, kFs);
  for (int i = 0; i < 50; ++i) env.tick(0.8);
  double prev = env.value();
  for (int i = 0; i < 500; ++i) {
    double e = env.tick(0.0);
    CHECK(e <= prev);
    prev = e;
  }
  CHECK(prev < 0.1);
}

// ------------------------------------------------------------ static curves

TEST_CASE("compressor static curve") {
  CHECK(compressor_static_gain(-30.0, -20.0, 4.0, 0.0) == doctest::Approx(0.0));
  // G = T + (L-T)/R = -17.5, gain = -17.5 - (-10) = -7.5
  CHECK(compressor_static_gain(-10.0, -20.0, 4.0, 0.0) == doctest::Approx(-7.5));
  CHECK(compressor_static_gain(-20.0, -20.0, 7.0, 0.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(compressor_static_gain(-10.0, -20.0, 0.5, 0.0), std::domain_error);
}

TEST_CASE("compressor soft knee is continuous on a 0.01 dB grid") {
  const double T = -20.0, R = 4.0, W = 6.0;
  double prev = compressor_static_gain(-40.0, T, R, W);
  for (double level = -40.0; level <= 0.0; level += 0.01) {
    double g = compressor_static_gain(level, T, R, W);
    CHECK(std::fabs(g - prev) < 0.01);  // no jumps at the knee edges
    prev = g;
  }
  // knee edges specifically
  for (double edge : {T - W / 2, T + W / 2}) {
    double below = compressor_static_gain(edge - 1e-9, T, R, W);
    double above = compressor_static_gain(edge + 1e-9, T, R, W);
    CHECK(below == doctest::Approx(above).epsilon(1e-6));
  }
}

TEST_CASE("gate static curve") {
  CHECK(gate_static_gain(-10.0, -40.0, 2.0, -80.0) == doctest::Approx(0.0));
  CHECK(gate_static_gain(-60.0, -40.0, 2.0, -80.0) == doctest::Approx(-20.0));
  // unclamped -180 dB hits the reduction floor
  CHECK(gate_static_gain(-60.0, -40.0, 10.0, -30.0) == doctest::Approx(-30.0));
  CHECK_THROWS_AS(gate_static_gain(-60.0, -40.0, 0.9, -30.0), std::domain_error);
}

// --------------------------------------------------------------- crossover

TEST_CASE("crossover bands sum to unity magnitude across the audible range") {
  CrossoverBank bank(kFs);
  bank.set_splits(200.0, 1000.0, 5000.0);
  // frequency response probe: sine in, RMS of the band sum out
  for (double freq : {50.0, 100.0, 200.0, 400.0, 800.0, 1000.0, 2000.0, 4000.0, 5000.0,
                      8000.0, 10000.0}) {
    bank.reset();
    auto n = static_cast<std::size_t>(kFs);
    std::vector<double> x = sine(freq, kFs, n, 0.5);
    std::array<std::vector<double>, 4> bands;
    bank.split(x, bands);
    std::vector<double> sum(n);
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] = bands[0][i] + bands[1][i] + bands[2][i] + bands[3][i];
    }
    double gain_db = 20.0 * std::log10(rms(sum, n / 2, n) / rms(x, n / 2, n));
    CHECK(std::fabs(gain_db) < 1.0);  // allpass: flat magnitude, phase free
  }
}

TEST_CASE("crossover separates a low sinusoid into band 1") {
  CrossoverBank bank(kFs);
  bank.set_splits(200.0, 1000.0, 5000.0);
  auto n = static_cast<std::size_t>(kFs);
  std::vector<double> x = sine(100.0, kFs, n, 0.5);
  std::array<std::vector<double>, 4> bands;
  bank.split(x, bands);
  double e1 = rms(bands[0], n / 2, n);
  for (int b = 1; b < 4; ++b) {
    double eb = rms(bands[static_cast<std::size_t>(b)], n / 2, n);
    CHECK(eb * eb < 0.01 * e1 * e1);  // < 1% of band-1 energy
  }
}

TEST_CASE("split sanitizing sorts and bumps ties") {
  auto f = sanitize_splits(5000.0, 200.0, 1000.0);
  CHECK(f[0] == 200.0);
  CHECK(f[1] == 1000.0);
  CHECK(f[2] == 5000.0);
  auto g = sanitize_splits(300.0, 300.0, 300.0);
  CHECK(g[0] == 300.0);
  CHECK(g[1] == 301.0);
  CHECK(g[2] == 302.0);
}

// ------------------------------------------------------- multiband dynamics

namespace {

// Compressor theta with inactive dynamics: thresholds at 0 dBFS, no makeup,
// unity in/out gains, mid splits.
ParamVector inactive_compressor_theta() {
  ParamVector v(21, 0.0);
  for (int b = 0; b < 4; ++b) {
    v[static_cast<std::size_t>(b * 4 + 0)] = 1.0;  // threshold 0 dBFS
    v[static_cast<std::size_t>(b * 4 + 1)] = 0.5;  // makeup 0 dB
    v[static_cast<std::size_t>(b * 4 + 2)] = 0.0;  // ratio 1
    v[static_cast<std::size_t>(b * 4 + 3)] = 0.0;  // knee 0
  }
  v[16] = 0.3;
  v[17] = 0.5;
  v[18] = 0.7;  // splits
  v[19] = 0.5;  // input gain 0 dB
  v[20] = 0.5;  // output gain 0 dB
  return v;
}

}  // namespace

TEST_CASE("inactive multiband compressor is transparent up to crossover coloration") {
  MultibandCompressorFx fx(kFs);
  REQUIRE(fx.param_count() == 21);
  auto theta = inactive_compressor_theta();
  for (double freq : {100.0, 1000.0, 6000.0}) {
    fx.reset();
    CHECK(std::fabs(sine_gain_db(fx, theta, freq)) < 1.0);
  }
}

TEST_CASE("multiband compressor actually compresses above threshold") {
  MultibandCompressorFx fx(kFs);
  auto theta = inactive_compressor_theta();
  for (int b = 0; b < 4; ++b) {
    theta[static_cast<std::size_t>(b * 4 + 0)] = 1.0 / 3.0;  // threshold -40 dBFS
    theta[static_cast<std::size_t>(b * 4 + 2)] = 0.5;        // ratio 10.5
  }
  // a sine ~26 dB over threshold; the in-band component is reduced hard,
  // with a floor from uncompressed leakage through the neighbor bands
  double g = sine_gain_db(fx, theta, 1000.0, 1.0, 0.3);
  CHECK(g < -6.0);
  CHECK(g > -25.0);
}

TEST_CASE("inactive multiband gate is transparent") {
  MultibandGateFx fx(kFs);
  REQUIRE(fx.param_count() == 17);
  ParamVector v(17, 0.0);
  for (int b = 0; b < 4; ++b) {
    v[static_cast<std::size_t>(b * 3 + 0)] = 0.0;  // threshold -60
    v[static_cast<std::size_t>(b * 3 + 1)] = 1.0;  // reduction 0 dB
    v[static_cast<std::size_t>(b * 3 + 2)] = 0.0;  // ratio 1
  }
  v[12] = 0.3;
  v[13] = 0.5;
  v[14] = 0.7;
  v[15] = 0.5;
  v[16] = 0.5;
  for (double freq : {100.0, 1000.0, 6000.0}) {
    fx.reset();
    CHECK(std::fabs(sine_gain_db(fx, v, freq)) < 1.0);
  }
}

TEST_CASE("gate attenuates signal below threshold") {
  MultibandGateFx fx(kFs);
  ParamVector v(17, 0.0);
  for (int b = 0; b < 4; ++b) {
    v[static_cast<std::size_t>(b * 3 + 0)] = 0.75;  // threshold -15 dBFS
    v[static_cast<std::size_t>(b * 3 + 1)] = 0.5;   // reduction -40 dB
    v[static_cast<std::size_t>(b * 3 + 2)] = 0.25;  // ratio ~5.75
  }
  v[12] = 0.3;
  v[13] = 0.5;
  v[14] = 0.7;
  v[15] = 0.5;
  v[16] = 0.5;
  double g = sine_gain_db(fx, v, 1000.0, 1.0, 0.01);  // ~ -43 dBFS sine
  CHECK(g < -10.0);
}

// -------------------------------------------------------------- graphic EQ

TEST_CASE("flat graphic EQ is an identity") {
  GraphicEqFx fx(kFs);
  REQUIRE(fx.param_count() == 33);
  ParamVector v(33, 0.5);  // all gains 0 dB, output 0 dB
  std::mt19937_64 rng(11);
  AudioFrame x(1024, kFs);
  for (auto& s : x.samples) s = uniform(rng, -0.5, 0.5);
  AudioFrame y = fx.process(x, v);
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    CHECK(y.samples[i] == doctest::Approx(x.samples[i]).epsilon(1e-9));
  }
}

TEST_CASE("boosting one EQ band lifts its center and spares far bands") {
  GraphicEqFx fx(kFs);
  auto centers = GraphicEqFx::center_frequencies();
  const int band = 16;
  ParamVector v(33, 0.5);
  v[band] = 0.75;  // +12 dB
  double at_center = sine_gain_db(fx, v, centers[band]);
  CHECK(at_center == doctest::Approx(12.0).epsilon(0.1));

  fx.reset();
  double far = sine_gain_db(fx, v, centers[band] / 8.0);  // 3 octaves below
  CHECK(std::fabs(far) < 1.0);
}

TEST_CASE("EQ output gain scales the whole signal") {
  GraphicEqFx fx(kFs);
  ParamVector v(33, 0.5);
  v[32] = 0.375;  // -6 dB
  AudioFrame x(1024, kFs);
  std::mt19937_64 rng(13);
  for (auto& s : x.samples) s = uniform(rng, -0.5, 0.5);
  AudioFrame y = fx.process(x, v);
  double expect = std::pow(10.0, -6.0 / 20.0);
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    CHECK(y.samples[i] == doctest::Approx(x.samples[i] * expect).epsilon(1e-9));
  }
}

// ----------------------------------------------------------------- limiter

TEST_CASE("limiter below threshold is transparent") {
  LimiterFx fx(kFs);
  ParamVector v{0.9};  // threshold -6 dBFS
  AudioFrame x = frame_from(sine(500.0, kFs, 4096, 0.1));  // peaks -20 dBFS
  AudioFrame y = fx.process(x, v);
  CHECK(y.samples == x.samples);
}

TEST_CASE("limiter clamps a full-scale constant to the threshold") {
  LimiterFx fx(kFs);
  ParamVector v{0.9};  // -6 dBFS
  AudioFrame x(4096, kFs);
  std::fill(x.samples.begin(), x.samples.end(), 1.0);
  AudioFrame y = fx.process(x, v);
  double steady = y.samples.back();
  double expect = db_to_lin(-6.0);
  CHECK(20.0 * std::log10(steady) == doctest::Approx(-6.0).epsilon(0.02));
  CHECK(steady == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("limiter with threshold at 0 dBFS passes legal signals") {
  LimiterFx fx(kFs);
  ParamVector v{1.0};
  AudioFrame x = frame_from(sine(800.0, kFs, 2048, 0.99));
  AudioFrame y = fx.process(x, v);
  CHECK(y.samples == x.samples);
}

TEST_CASE("limiter output peak never exceeds the threshold") {
  LimiterFx fx(kFs);
  ParamVector v{0.8};  // -12 dBFS
  double thr = db_to_lin(-12.0);
  std::mt19937_64 rng(5);
  AudioFrame x(8192, kFs);
  for (auto& s : x.samples) s = uniform(rng, -1.0, 1.0);
  AudioFrame y = fx.process(x, v);
  auto settle = static_cast<std::size_t>(0.010 * kFs);
  for (std::size_t i = settle; i < y.samples.size(); ++i) {
    CHECK(std::fabs(y.samples[i]) <= thr * db_to_lin(0.5));
  }
}

// ------------------------------------------------------------------- chain

TEST_CASE("chain of one effect equals that effect") {
  auto inner = make_fx("softclip");
  std::vector<std::unique_ptr<BlackboxFx>> members;
  members.push_back(make_fx("softclip"));
  ChainFx chain(std::move(members));

  ParamVector theta{0.4, 0.7};
  AudioFrame x = frame_from(sine(441.0, kFs, 256, 0.8));
  CHECK(chain.process(x, theta).samples == inner->process(x, theta).samples);
}

TEST_CASE("chain of two identities is an identity") {
  std::vector<std::unique_ptr<BlackboxFx>> members;
  members.push_back(make_fx("identity"));
  members.push_back(make_fx("identity"));
  ChainFx chain(std::move(members));
  AudioFrame x = frame_from(sine(300.0, kFs, 128, 0.5));
  CHECK(chain.process(x, {0.1, 0.9}).samples == x.samples);
}

TEST_CASE("mastering chain exposes 50 parameters") {
  auto chain = make_chain({"multiband_compressor16", "graphic_eq", "limiter"}, kFs);
  CHECK(chain->param_count() == 50);
  CHECK(chain->param_specs().at(0).name == "fx1.b1_threshold");
  CHECK(chain->param_specs().at(49).name == "fx3.threshold");
}

TEST_CASE("chain rejects a wrong total parameter count") {
  auto chain = make_chain({"gain", "limiter"}, kFs);
  AudioFrame x(64, kFs);
  CHECK_THROWS_AS(chain->process(x, {0.5}), std::invalid_argument);
}

// ----------------------------------------------- streaming / state contracts

namespace {

std::unique_ptr<BlackboxFx> shipped_effect(const std::string& id) {
  if (id == "chain") return make_chain({"multiband_compressor16", "graphic_eq", "limiter"}, kFs);
  return make_fx(id, kFs);
}

}  // namespace

TEST_CASE("every shipped effect streams: whole signal equals frame-chunked") {
  for (const std::string& id : registered_fx_ids()) {
    CAPTURE(id);
    auto whole = shipped_effect(id);
    auto chunked = shipped_effect(id);
    ParamVector theta = random_theta(whole->param_count(), 41);

    const std::size_t n = 8192, frame = 1024;
    std::mt19937_64 rng(17);
    AudioFrame sig(n, kFs);
    for (auto& s : sig.samples) s = uniform(rng, -0.6, 0.6);

    AudioFrame one_pass = whole->process(sig, theta);
    std::vector<double> pieces;
    for (std::size_t off = 0; off < n; off += frame) {
      AudioFrame f(frame, kFs);
      std::copy(sig.samples.begin() + static_cast<long>(off),
                sig.samples.begin() + static_cast<long>(off + frame), f.samples.begin());
      AudioFrame y = chunked->process(f, theta);
      pieces.insert(pieces.end(), y.samples.begin(), y.samples.end());
    }
    REQUIRE(pieces.size() == one_pass.samples.size());
    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_err = std::max(max_err, std::fabs(pieces[i] - one_pass.samples[i]));
    }
    CHECK(max_err < 1e-6);
  }
}

TEST_CASE("every shipped effect resets to fresh-instance behavior") {
  for (const std::string& id : registered_fx_ids()) {
    CAPTURE(id);
    auto fx = shipped_effect(id);
    auto fresh = shipped_effect(id);
    ParamVector theta = random_theta(fx->param_count(), 97);

    std::mt19937_64 rng(23);
    AudioFrame x(1024, kFs);
    for (auto& s : x.samples) s = uniform(rng, -0.5, 0.5);

    for (int k = 0; k < 3; ++k) fx->process(x, theta);
    fx->reset();
    CHECK(fx->process(x, theta).samples == fresh->process(x, theta).samples);
  }
}
