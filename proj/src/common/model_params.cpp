#include "uavfl/model_params.hpp"

#include <cmath>

#include "uavfl/errors.hpp"

namespace uavfl {

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double l2_norm(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

void require_finite(std::span<const double> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NonFiniteGradient(what + ": non-finite value at index " +
                              std::to_string(i));
    }
  }
}

}  // namespace uavfl
