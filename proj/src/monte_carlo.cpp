#include "ergokit/monte_carlo.hpp"

#include <cmath>

#include "ergokit/errors.hpp"

namespace ergokit {

McEstimate summarize(std::span<const kernels::PathOutcome> outcomes) {
  if (outcomes.size() < 2) throw InvalidArgument("Monte Carlo estimate needs at least two paths");
  McEstimate out;
  out.n_paths = outcomes.size();
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (const auto& o : outcomes) {
    if (o.censored) ++out.censored;
    ++k;
    const double delta = o.value - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (o.value - mean);
  }
  if (out.censored == out.n_paths) {
    throw NumericalError("all Monte Carlo paths were censored; the target set looks unreachable");
  }
  out.estimate = mean;
  out.std_error = std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k));
  return out;
}

}  // namespace ergokit
