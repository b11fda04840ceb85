#pragma once

#include <string>
#include <vector>

namespace fxlearn {

enum class ParamMapping { linear, logarithmic };

// Physical range and scaling of one effect parameter. The trainable side of
// the system only ever sees normalized values in [0,1]; effects denormalize
// through their specs.
struct ParamSpec {
  std::string name;
  std::string unit;
  double phys_min = 0.0;
  double phys_max = 1.0;
  ParamMapping mapping = ParamMapping::linear;
};

// [0,1] -> physical units. Throws std::domain_error outside [0,1].
double denormalize(const ParamSpec& spec, double v);
// physical units -> [0,1] (clamped at the range edges).
double normalize(const ParamSpec& spec, double phys);

// Ordered parameter list; the position of a spec is the canonical parameter
// index used by gradients, config files and trajectory CSVs.
class ParamSpecSet {
 public:
  ParamSpecSet() = default;
  explicit ParamSpecSet(std::vector<ParamSpec> specs);

  int size() const { return static_cast<int>(specs_.size()); }
  const ParamSpec& at(int i) const { return specs_.at(static_cast<std::size_t>(i)); }
  const std::vector<ParamSpec>& specs() const { return specs_; }

  std::vector<double> denormalize_all(const std::vector<double>& v) const;

 private:
  std::vector<ParamSpec> specs_;
};

// Normalized parameter vector emitted by the encoder; every entry in [0,1].
using ParamVector = std::vector<double>;

// Throws std::invalid_argument on length mismatch or out-of-range entries.
void validate_params(const ParamVector& theta, int expected_p);

inline double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

ParamVector clip01(const ParamVector& v);

}  // namespace fxlearn
