#include "fxlearn/fx/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

namespace fxlearn {

double compressor_static_gain(double level_db, double threshold_db, double ratio,
                              double knee_db) {
  if (ratio < 1.0) throw std::domain_error("compressor ratio must be >= 1");
  double over = level_db - threshold_db;
  double g;
  if (knee_db > 0.0 && 2.0 * over >= -knee_db && 2.0 * over <= knee_db) {
    double t = over + knee_db / 2.0;
    g = level_db + (1.0 / ratio - 1.0) * t * t / (2.0 * knee_db);
  } else if (2.0 * over < -knee_db || (knee_db <= 0.0 && over <= 0.0)) {
    g = level_db;
  } else {
    g = threshold_db + over / ratio;
  }
  return g - level_db;
}

double gate_static_gain(double level_db, double threshold_db, double ratio,
                        double reduction_db) {
  if (ratio < 1.0) throw std::domain_error("gate ratio must be >= 1");
  if (level_db >= threshold_db) return 0.0;
  double g = (level_db - threshold_db) * (ratio - 1.0);
  g = std::max(g, reduction_db);
  return std::min(g, 0.0);
}

}  // namespace fxlearn
