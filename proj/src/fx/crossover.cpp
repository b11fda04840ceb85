#include "fxlearn/fx/crossover.hpp"

#include <cmath>
#include <stdexcept>

namespace fxlearn {

namespace {
constexpr double kButterworthQ = 0.7071067811865476;  // 1/sqrt(2)
}

void CrossoverBank::set_splits(double f1, double f2, double f3) {
  if (!(f1 < f2 && f2 < f3)) {
    throw std::invalid_argument("crossover splits must be strictly increasing");
  }
  if (f1 == f_[0] && f2 == f_[1] && f3 == f_[2]) return;
  f_[0] = f1;
  f_[1] = f2;
  f_[2] = f3;

  lp2a_.set_lowpass(f2, kButterworthQ, fs_);
  lp2b_.set_lowpass(f2, kButterworthQ, fs_);
  hp2a_.set_highpass(f2, kButterworthQ, fs_);
  hp2b_.set_highpass(f2, kButterworthQ, fs_);

  lp1a_.set_lowpass(f1, kButterworthQ, fs_);
  lp1b_.set_lowpass(f1, kButterworthQ, fs_);
  hp1a_.set_highpass(f1, kButterworthQ, fs_);
  hp1b_.set_highpass(f1, kButterworthQ, fs_);

  lp3a_.set_lowpass(f3, kButterworthQ, fs_);
  lp3b_.set_lowpass(f3, kButterworthQ, fs_);
  hp3a_.set_highpass(f3, kButterworthQ, fs_);
  hp3b_.set_highpass(f3, kButterworthQ, fs_);

  ap3_b1_.set_allpass(f3, kButterworthQ, fs_);
  ap3_b2_.set_allpass(f3, kButterworthQ, fs_);
  ap1_b3_.set_allpass(f1, kButterworthQ, fs_);
  ap1_b4_.set_allpass(f1, kButterworthQ, fs_);
}

void CrossoverBank::reset() {
  for (Biquad* b : {&lp2a_, &lp2b_, &hp2a_, &hp2b_, &lp1a_, &lp1b_, &hp1a_, &hp1b_, &lp3a_,
                    &lp3b_, &hp3a_, &hp3b_, &ap3_b1_, &ap3_b2_, &ap1_b3_, &ap1_b4_}) {
    b->reset();
  }
}

void CrossoverBank::split(std::span<const double> in,
                          std::array<std::vector<double>, 4>& bands) {
  for (auto& b : bands) b.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    double x = in[i];
    double mid_lo = lp2b_.tick(lp2a_.tick(x));
    double mid_hi = hp2b_.tick(hp2a_.tick(x));
    bands[0][i] = ap3_b1_.tick(lp1b_.tick(lp1a_.tick(mid_lo)));
    bands[1][i] = ap3_b2_.tick(hp1b_.tick(hp1a_.tick(mid_lo)));
    bands[2][i] = ap1_b3_.tick(lp3b_.tick(lp3a_.tick(mid_hi)));
    bands[3][i] = ap1_b4_.tick(hp3b_.tick(hp3a_.tick(mid_hi)));
  }
}

}  // namespace fxlearn
