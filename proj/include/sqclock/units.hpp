#pragma once

#include <cmath>

namespace sqclock {

/// Decibels of a variance ratio (factor-10 convention: linear = 10^(dB/10)).
struct DecibelValue {
  double value_db = 0.0;
};

inline double db_to_linear(DecibelValue x) { return std::pow(10.0, x.value_db / 10.0); }

inline double db_to_linear(double value_db) { return db_to_linear(DecibelValue{value_db}); }

inline DecibelValue linear_to_db(double x) { return {10.0 * std::log10(x)}; }

} // namespace sqclock
