#pragma once

#include <cstdint>

#include "tacticrl/policy.hpp"

namespace tacticrl {

/// A scalar function of the policy parameters with an exact gradient.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const PolicyParams& params) const = 0;
  /// Returns the value and writes d value / d params into `grad` (same layout).
  virtual double value_and_gradient(const PolicyParams& params, Gradient& grad) const = 0;
};

struct LossGradient {
  double value = 0;
  Gradient gradient;
};

/// Throws NonFiniteGradient if any entry is not finite.
LossGradient loss_gradient(const PolicyParams& params, const Objective& objective);

struct FiniteDifferenceReport {
  double max_relative_error = 0;
  std::size_t coordinates = 0;
  std::size_t worst_coordinate = 0;
  double worst_analytic = 0;
  double worst_numeric = 0;
};

/// Central differences on `coordinates` distinct coordinates drawn uniformly
/// from the seeded generator. Relative error is
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
FiniteDifferenceReport finite_difference_check(const PolicyParams& params, const Objective& objective,
                                               double epsilon, std::size_t coordinates = 200,
                                               std::uint64_t seed = 0);

}  // namespace tacticrl
