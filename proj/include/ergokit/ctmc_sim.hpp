#pragma once

// Exact (event-driven) path simulation of a finite chain, used to check the
// linear-algebra functionals against sampled paths.

#include <cstddef>
#include <cstdint>
#include <span>

#include "ergokit/ctmc.hpp"
#include "ergokit/monte_carlo.hpp"

namespace ergokit::ctmc {

inline constexpr double kDefaultTimeCap = 1e3;

struct SimulationOptions {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  double time_cap = kDefaultTimeCap;
  kernels::Execution execution = kernels::Execution::Parallel;
};

// E_x0 int_0^{tau_B(r)} g(Phi_t) dt.
McEstimate mc_hitting_functional(const RateMatrix& q, std::span<const double> g,
                                 const FiniteSet& b, double r, std::size_t x0,
                                 const SimulationOptions& options);

// E_x0 int_0^{tilde tau_C} f(Phi_t) dt where tilde tau_C is the time at which
// the occupation of C reaches an independent Exp(1) clock.
McEstimate mc_lyapunov(const RateMatrix& q, std::span<const double> f, const FiniteSet& c,
                       std::size_t x0, const SimulationOptions& options);

// E_x0 sum_{i=0}^{tau} g(X(i)) for the Delta-skeleton, tau = min{i >= 1 : X(i) in B},
// sampled from the rows of P^Delta.
McEstimate mc_skeleton_hitting_sum(const RateMatrix& q, double interval, std::span<const double> g,
                                   const FiniteSet& b, std::size_t x0,
                                   const SimulationOptions& options);

}  // namespace ergokit::ctmc
