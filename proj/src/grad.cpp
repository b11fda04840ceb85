#include "fxlearn/grad.hpp"

#include <stdexcept>

#include "fxlearn/rng.hpp"

namespace fxlearn {

std::vector<int> sample_perturbation(int p, std::mt19937_64& rng) {
  if (p < 1) throw std::invalid_argument("sample_perturbation: P must be >= 1");
  std::vector<int> delta(static_cast<std::size_t>(p));
  for (auto& d : delta) d = (rng() & 1u) ? 1 : -1;
  return delta;
}

SpsaTape spsa_forward(ReplicaSet& replicas, const AudioFrame& x, const ParamVector& theta,
                      double epsilon, std::mt19937_64& rng) {
  return spsa_forward_with_delta(replicas, x, theta, epsilon,
                                 sample_perturbation(replicas.param_count(), rng));
}

SpsaTape spsa_forward_with_delta(ReplicaSet& replicas, const AudioFrame& x,
                                 const ParamVector& theta, double epsilon,
                                 std::vector<int> delta) {
  const int p = replicas.param_count();
  validate_params(theta, p);
  if (static_cast<int>(delta.size()) != p) {
    throw std::invalid_argument("spsa: delta length != P");
  }

  SpsaTape tape;
  tape.delta = std::move(delta);

  ParamVector theta_plus(theta), theta_minus(theta);
  for (int i = 0; i < p; ++i) {
    theta_plus[static_cast<std::size_t>(i)] =
        clip01(theta[static_cast<std::size_t>(i)] + epsilon * tape.delta[static_cast<std::size_t>(i)]);
    theta_minus[static_cast<std::size_t>(i)] =
        clip01(theta[static_cast<std::size_t>(i)] - epsilon * tape.delta[static_cast<std::size_t>(i)]);
  }

  ReplicaOutputs outs = replicas.process(x, theta, theta_plus, theta_minus);
  tape.output = std::move(outs.nominal);
  tape.diff_over_2eps.resize(x.samples.size());
  for (std::size_t t = 0; t < x.samples.size(); ++t) {
    tape.diff_over_2eps[t] = (outs.plus.samples[t] - outs.minus.samples[t]) / (2.0 * epsilon);
  }
  return tape;
}

std::vector<double> spsa_backward(const SpsaTape& tape, std::span<const double> v) {
  if (v.size() != tape.diff_over_2eps.size()) {
    throw std::invalid_argument("spsa_backward: upstream gradient length mismatch");
  }
  double contracted = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) contracted += v[t] * tape.diff_over_2eps[t];
  // 1/delta_i = delta_i for +/-1 entries.
  std::vector<double> grad(tape.delta.size());
  for (std::size_t i = 0; i < tape.delta.size(); ++i) grad[i] = contracted * tape.delta[i];
  return grad;
}

VjpResult spsa_vjp(ReplicaSet& replicas, const AudioFrame& x, const ParamVector& theta,
                   std::span<const double> v, double epsilon, std::mt19937_64& rng) {
  SpsaTape tape = spsa_forward(replicas, x, theta, epsilon, rng);
  VjpResult r;
  r.grad_theta = spsa_backward(tape, v);
  r.output = std::move(tape.output);
  return r;
}

FdPool::FdPool(const BlackboxFx& prototype, int p) : p_(p) {
  if (p != prototype.param_count()) {
    throw std::invalid_argument("FdPool: P does not match prototype");
  }
  pool_.reserve(static_cast<std::size_t>(2 * p + 1));
  for (int i = 0; i < 2 * p + 1; ++i) pool_.push_back(prototype.clone_config());
}

void FdPool::reset_all() {
  for (auto& fx : pool_) fx->reset();
}

FdTape fd_forward(FdPool& pool, const AudioFrame& x, const ParamVector& theta, double epsilon) {
  const int p = pool.param_count();
  validate_params(theta, p);

  FdTape tape;
  tape.output = pool.nominal().process(x, theta);
  tape.diff_over_2eps.assign(static_cast<std::size_t>(p),
                             std::vector<double>(x.samples.size()));
  for (int i = 0; i < p; ++i) {
    ParamVector theta_plus(theta), theta_minus(theta);
    theta_plus[static_cast<std::size_t>(i)] = clip01(theta[static_cast<std::size_t>(i)] + epsilon);
    theta_minus[static_cast<std::size_t>(i)] = clip01(theta[static_cast<std::size_t>(i)] - epsilon);
    AudioFrame yp = pool.plus(i).process(x, theta_plus);
    AudioFrame ym = pool.minus(i).process(x, theta_minus);
    auto& diff = tape.diff_over_2eps[static_cast<std::size_t>(i)];
    for (std::size_t t = 0; t < x.samples.size(); ++t) {
      diff[t] = (yp.samples[t] - ym.samples[t]) / (2.0 * epsilon);
    }
  }
  return tape;
}

std::vector<double> fd_backward(const FdTape& tape, std::span<const double> v) {
  std::vector<double> grad(tape.diff_over_2eps.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const auto& diff = tape.diff_over_2eps[i];
    if (v.size() != diff.size()) {
      throw std::invalid_argument("fd_backward: upstream gradient length mismatch");
    }
    double acc = 0.0;
    for (std::size_t t = 0; t < v.size(); ++t) acc += v[t] * diff[t];
    grad[i] = acc;
  }
  return grad;
}

VjpResult fd_vjp(FdPool& pool, const AudioFrame& x, const ParamVector& theta,
                 std::span<const double> v, double epsilon) {
  FdTape tape = fd_forward(pool, x, theta, epsilon);
  VjpResult r;
  r.grad_theta = fd_backward(tape, v);
  r.output = std::move(tape.output);
  return r;
}

GradCheckReport analytic_vjp_check(const AnalyticFx& fx, const AudioFrame& x,
                                   const ParamVector& theta, std::span<const double> v,
                                   double epsilon, int n_spsa_draws, std::uint64_t seed) {
  GradCheckReport report;
  report.analytic = fx.analytic_vjp(x, theta, v);

  FdPool pool(fx);
  report.fd = fd_vjp(pool, x, theta, v, epsilon).grad_theta;

  const auto p = static_cast<std::size_t>(fx.param_count());
  report.spsa_mean.assign(p, 0.0);
  ReplicaSet replicas(fx);
  for (int d = 0; d < n_spsa_draws; ++d) {
    std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(d)));
    std::vector<double> g = spsa_vjp(replicas, x, theta, v, epsilon, rng).grad_theta;
    for (std::size_t i = 0; i < p; ++i) report.spsa_mean[i] += g[i];
  }
  for (double& g : report.spsa_mean) g /= std::max(1, n_spsa_draws);
  return report;
}

BlackboxGrad::BlackboxGrad(const BlackboxFx& prototype, Estimator estimator)
    : estimator_(estimator) {
  if (estimator_ == Estimator::spsa) {
    replicas_ = std::make_unique<ReplicaSet>(prototype);
  } else {
    fd_pool_ = std::make_unique<FdPool>(prototype);
  }
}

BlackboxFx& BlackboxGrad::nominal() {
  return estimator_ == Estimator::spsa ? replicas_->nominal() : fd_pool_->nominal();
}

void BlackboxGrad::reset() {
  if (replicas_) replicas_->reset_all();
  if (fd_pool_) fd_pool_->reset_all();
}

AudioFrame BlackboxGrad::forward(const AudioFrame& x, const ParamVector& theta, double epsilon,
                                 std::mt19937_64& rng) {
  if (estimator_ == Estimator::spsa) {
    spsa_tape_ = spsa_forward(*replicas_, x, theta, epsilon, rng);
    return spsa_tape_.output;
  }
  fd_tape_ = fd_forward(*fd_pool_, x, theta, epsilon);
  return fd_tape_.output;
}

std::vector<double> BlackboxGrad::backward(std::span<const double> v) const {
  return estimator_ == Estimator::spsa ? spsa_backward(spsa_tape_, v)
                                       : fd_backward(fd_tape_, v);
}

}  // namespace fxlearn
