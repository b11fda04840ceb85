#pragma once

#include <array>
#include <span>
#include <vector>

#include "fxlearn/fx/biquad.hpp"

namespace fxlearn {

// 4-band splitter built from 4th-order Linkwitz-Riley sections (cascaded
// Butterworth pairs) in a tree: middle split first, then the outer splits on
// each branch. Each LR4 pair sums to a 2nd-order allpass, so matching
// allpass sections on the opposite branches make the four bands sum to a
// pure allpass of the input: flat magnitude, rotated phase.
class CrossoverBank {
 public:
  explicit CrossoverBank(double sample_rate) : fs_(sample_rate) {}

  // Splits must be strictly increasing; callers sort/deduplicate first.
  void set_splits(double f1, double f2, double f3);

  void reset();

  // Appends nothing; bands are resized to in.size() and overwritten.
  void split(std::span<const double> in, std::array<std::vector<double>, 4>& bands);

  double sample_rate() const { return fs_; }

 private:
  double fs_;
  double f_[3] = {-1.0, -1.0, -1.0};

  // Stage at f2 feeding both branches.
  Biquad lp2a_, lp2b_, hp2a_, hp2b_;
  // Low branch split at f1, high branch split at f3.
  Biquad lp1a_, lp1b_, hp1a_, hp1b_;
  Biquad lp3a_, lp3b_, hp3a_, hp3b_;
  // Phase compensation: the low branch sees the f3 allpass, the high branch
  // the f1 allpass, once per band so the states stay independent.
  Biquad ap3_b1_, ap3_b2_, ap1_b3_, ap1_b4_;
};

}  // namespace fxlearn
