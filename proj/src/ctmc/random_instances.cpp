#include "ergokit/random_instances.hpp"

#include <algorithm>
#include <numeric>

namespace ergokit::ctmc {

RateMatrix random_rate_matrix(std::size_t n, std::mt19937_64& rng, double density) {
  std::uniform_real_distribution<double> ring_rate(0.2, 2.0);
  std::uniform_real_distribution<double> rate(0.1, 2.0);
  std::bernoulli_distribution present(density);
  Matrix q = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (n > 1 && j == (i + 1) % n) {
        q(i, j) = ring_rate(rng);
      } else if (present(rng)) {
        q(i, j) = rate(rng);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) s += q(i, j);
    }
    q(i, i) = -s;
  }
  return RateMatrix(std::move(q));
}

WeightTable random_weight(std::size_t n, std::mt19937_64& rng, double max_value) {
  std::uniform_real_distribution<double> u(1.0, max_value);
  std::vector<double> f(n);
  for (auto& v : f) v = u(rng);
  return WeightTable(std::move(f));
}

FiniteSet random_subset(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::uniform_int_distribution<std::size_t> size(1, n);
  idx.resize(size(rng));
  return FiniteSet(n, std::move(idx));
}

FiniteSignedMeasure random_zero_mass_measure(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> m(n);
  for (auto& v : m) v = u(rng);
  const double mean = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(n);
  for (auto& v : m) v -= mean;
  return FiniteSignedMeasure(std::move(m));
}

}  // namespace ergokit::ctmc
