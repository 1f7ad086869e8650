#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace uavfl {

/// Flat vector of learnable weights plus the layer dimensions it was built
/// from. The shape never changes during a run.
struct ModelParams {
  std::vector<double> values;
  std::vector<std::size_t> shape;

  ModelParams() = default;
  ModelParams(std::vector<double> v, std::vector<std::size_t> s)
      : values(std::move(v)), shape(std::move(s)) {}

  std::size_t size() const { return values.size(); }
  std::span<double> span() { return values; }
  std::span<const double> span() const { return values; }

  bool same_shape(const ModelParams& other) const {
    return shape == other.shape && values.size() == other.values.size();
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

bool all_finite(std::span<const double> values);

double l2_norm(std::span<const double> values);

/// Throws NonFiniteGradient naming `what` when any entry is NaN/Inf.
void require_finite(std::span<const double> values, const std::string& what);

}  // namespace uavfl
