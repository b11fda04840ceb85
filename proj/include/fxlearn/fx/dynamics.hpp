#pragma once

namespace fxlearn {

// Soft-knee compressor static curve. Returns the gain G(L) - L in dB for a
// detector level L (dB), threshold T (dB), ratio R >= 1 and knee width W >= 0:
//   G = L                                    below the knee region
//   G = L + (1/R - 1) (L - T + W/2)^2 / 2W   inside |2(L-T)| <= W
//   G = T + (L - T)/R                        above
// Throws std::domain_error for ratio < 1.
double compressor_static_gain(double level_db, double threshold_db, double ratio, double knee_db);

// Downward-expander static curve for the noise gate. 0 dB at/above threshold;
// below, (L - T) * (ratio - 1) clamped so the attenuation never exceeds
// |reduction_db| (reduction_db <= 0). Throws std::domain_error for ratio < 1.
double gate_static_gain(double level_db, double threshold_db, double ratio, double reduction_db);

}  // namespace fxlearn
