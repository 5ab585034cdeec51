#include "tacticrl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tacticrl/errors.hpp"
#include "tacticrl/rng.hpp"

namespace tacticrl {

LossGradient loss_gradient(const PolicyParams& params, const Objective& objective) {
  LossGradient out{0, Gradient(params.layout())};
  out.value = objective.value_and_gradient(params, out.gradient);
  if (!out.gradient.all_finite()) throw NonFiniteGradient("gradient has non-finite entries");
  return out;
}

FiniteDifferenceReport finite_difference_check(const PolicyParams& params, const Objective& objective,
                                               double epsilon, std::size_t coordinates, std::uint64_t seed) {
  LossGradient analytic = loss_gradient(params, objective);
  const std::size_t n = params.values().size();
  std::vector<std::size_t> index(n);
  std::iota(index.begin(), index.end(), 0);
  Rng rng(derive_seed(seed, "fd-coordinates"));
  shuffle(index, rng);
  index.resize(std::min(coordinates, n));
  std::sort(index.begin(), index.end());

  FiniteDifferenceReport report;
  report.coordinates = index.size();
  PolicyParams probe = params;
  for (std::size_t i : index) {
    const double original = probe.values()[i];
    probe.values()[i] = original + epsilon;
    const double up = objective.value(probe);
    probe.values()[i] = original - epsilon;
    const double down = objective.value(probe);
    probe.values()[i] = original;
    const double numeric = (up - down) / (2 * epsilon);
    const double a = analytic.gradient.values()[i];
    const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    if (rel >= report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_coordinate = i;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
    }
  }
  return report;
}

}  // namespace tacticrl
