#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "fxlearn/blackbox_fx.hpp"
#include "fxlearn/fx/basic.hpp"

namespace fxlearn {

enum class Estimator { spsa, fd };

struct PerturbationConfig {
  double epsilon = 0.01;  // in normalized [0,1] units
  Estimator estimator = Estimator::spsa;
  std::uint64_t seed = 0;
};

// i.i.d. +/-1 entries, one raw engine bit per coordinate.
std::vector<int> sample_perturbation(int p, std::mt19937_64& rng);

struct VjpResult {
  AudioFrame output;            // nominal forward output
  std::vector<double> grad_theta;  // length P, normalized units
};

// ----- SPSA (two perturbed evaluations per frame, any P) -----
//
// Forward evaluates the nominal, plus and minus replicas on the same frame
// (keeping their input histories identical); backward contracts the stored
// difference quotient with the upstream gradient v. Perturbed parameters are
// clipped to [0,1] before use while the denominator keeps the nominal
// epsilon. No gradient is produced for the input signal.
struct SpsaTape {
  AudioFrame output;
  std::vector<double> diff_over_2eps;  // (y_plus - y_minus) / (2 eps), per sample
  std::vector<int> delta;              // the +/-1 draw
};

SpsaTape spsa_forward(ReplicaSet& replicas, const AudioFrame& x, const ParamVector& theta,
                      double epsilon, std::mt19937_64& rng);
// Deterministic core of the estimator: evaluate at a given sign pattern
// (used directly to enumerate all 2^P patterns).
SpsaTape spsa_forward_with_delta(ReplicaSet& replicas, const AudioFrame& x,
                                 const ParamVector& theta, double epsilon,
                                 std::vector<int> delta);
std::vector<double> spsa_backward(const SpsaTape& tape, std::span<const double> v);
VjpResult spsa_vjp(ReplicaSet& replicas, const AudioFrame& x, const ParamVector& theta,
                   std::span<const double> v, double epsilon, std::mt19937_64& rng);

// ----- Two-sided finite differences (2P perturbed evaluations per frame) -----
//
// The pool holds 2P+1 instances sharing one input history: [0] nominal,
// [1+2i] plus_i, [2+2i] minus_i. Every instance processes every frame so the
// states stay aligned.
class FdPool {
 public:
  FdPool(const BlackboxFx& prototype, int p);
  explicit FdPool(const BlackboxFx& prototype)
      : FdPool(prototype, prototype.param_count()) {}

  int param_count() const { return p_; }
  int size() const { return static_cast<int>(pool_.size()); }
  BlackboxFx& nominal() { return *pool_[0]; }
  BlackboxFx& plus(int i) { return *pool_[static_cast<std::size_t>(1 + 2 * i)]; }
  BlackboxFx& minus(int i) { return *pool_[static_cast<std::size_t>(2 + 2 * i)]; }
  void reset_all();

 private:
  int p_;
  std::vector<std::unique_ptr<BlackboxFx>> pool_;
};

struct FdTape {
  AudioFrame output;
  std::vector<std::vector<double>> diff_over_2eps;  // [P][N]
};

FdTape fd_forward(FdPool& pool, const AudioFrame& x, const ParamVector& theta, double epsilon);
std::vector<double> fd_backward(const FdTape& tape, std::span<const double> v);
VjpResult fd_vjp(FdPool& pool, const AudioFrame& x, const ParamVector& theta,
                 std::span<const double> v, double epsilon);

// ----- Validation harness -----
struct GradCheckReport {
  std::vector<double> analytic;
  std::vector<double> fd;
  std::vector<double> spsa_mean;  // averaged over n_spsa_draws seeded draws
};

// Compares the estimators against the closed-form VJP of a differentiable
// test effect. Fresh instances are cloned per evaluation, so stateless
// effects are required (gain, softclip).
GradCheckReport analytic_vjp_check(const AnalyticFx& fx, const AudioFrame& x,
                                   const ParamVector& theta, std::span<const double> v,
                                   double epsilon, int n_spsa_draws, std::uint64_t seed);

// Per-slot evaluator owned by the trainer: bundles the replica/pool state for
// one batch slot behind the estimator choice.
class BlackboxGrad {
 public:
  BlackboxGrad(const BlackboxFx& prototype, Estimator estimator);

  Estimator estimator() const { return estimator_; }
  BlackboxFx& nominal();
  void reset();

  AudioFrame forward(const AudioFrame& x, const ParamVector& theta, double epsilon,
                     std::mt19937_64& rng);
  std::vector<double> backward(std::span<const double> v) const;

 private:
  Estimator estimator_;
  std::unique_ptr<ReplicaSet> replicas_;
  std::unique_ptr<FdPool> fd_pool_;
  SpsaTape spsa_tape_;
  FdTape fd_tape_;
};

}  // namespace fxlearn
