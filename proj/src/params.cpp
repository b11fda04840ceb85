#include "fxlearn/params.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace fxlearn {

double denormalize(const ParamSpec& spec, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("denormalize: value " + std::to_string(v) + " for '" + spec.name +
                            "' outside [0,1]");
  }
  if (spec.mapping == ParamMapping::linear) {
    return spec.phys_min + v * (spec.phys_max - spec.phys_min);
  }
  return spec.phys_min * std::pow(spec.phys_max / spec.phys_min, v);
}

double normalize(const ParamSpec& spec, double phys) {
  double v;
  if (spec.mapping == ParamMapping::linear) {
    v = (phys - spec.phys_min) / (spec.phys_max - spec.phys_min);
  } else {
    v = std::log(phys / spec.phys_min) / std::log(spec.phys_max / spec.phys_min);
  }
  return clip01(v);
}

ParamSpecSet::ParamSpecSet(std::vector<ParamSpec> specs) : specs_(std::move(specs)) {
  std::set<std::string> names;
  for (const auto& s : specs_) {
    if (!(s.phys_min < s.phys_max)) {
      throw std::invalid_argument("ParamSpec '" + s.name + "': phys_min must be < phys_max");
    }
    if (s.mapping == ParamMapping::logarithmic && !(s.phys_min > 0.0)) {
      throw std::invalid_argument("ParamSpec '" + s.name + "': log mapping requires phys_min > 0");
    }
    if (!names.insert(s.name).second) {
      throw std::invalid_argument("ParamSpecSet: duplicate parameter name '" + s.name + "'");
    }
  }
}

std::vector<double> ParamSpecSet::denormalize_all(const std::vector<double>& v) const {
  if (static_cast<int>(v.size()) != size()) {
    throw std::invalid_argument("denormalize_all: expected " + std::to_string(size()) +
                                " values, got " + std::to_string(v.size()));
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = denormalize(specs_[i], v[i]);
  }
  return out;
}

void validate_params(const ParamVector& theta, int expected_p) {
  if (static_cast<int>(theta.size()) != expected_p) {
    throw std::invalid_argument("parameter vector length " + std::to_string(theta.size()) +
                                " does not match P=" + std::to_string(expected_p));
  }
  for (double v : theta) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("parameter value " + std::to_string(v) + " outside [0,1]");
    }
  }
}

ParamVector clip01(const ParamVector& v) {
  ParamVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = clip01(v[i]);
  return out;
}

}  // namespace fxlearn
