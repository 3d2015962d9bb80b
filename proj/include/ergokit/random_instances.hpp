#pragma once

// Random irreducible chains and weights for sweeps, tests and benchmarks.

#include <cstddef>
#include <random>

#include "ergokit/ctmc.hpp"

namespace ergokit::ctmc {

// A ring 0 -> 1 -> ... -> n-1 -> 0 with rates in [0.2, 2] guarantees
// irreducibility; every other off-diagonal pair carries a rate in [0.1, 2]
// with probability `density`.
RateMatrix random_rate_matrix(std::size_t n, std::mt19937_64& rng, double density = 0.5);

// f with entries uniform in [1, max_value].
WeightTable random_weight(std::size_t n, std::mt19937_64& rng, double max_value = 5.0);

// Uniformly sized nonempty subset of {0..n-1}.
FiniteSet random_subset(std::size_t n, std::mt19937_64& rng);

// Zero-mass signed measure with entries of order one.
FiniteSignedMeasure random_zero_mass_measure(std::size_t n, std::mt19937_64& rng);

}  // namespace ergokit::ctmc
