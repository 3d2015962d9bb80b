#pragma once

// Cross-module experiments. Each suite runs the engines on one model and
// collects its checks and estimated constants in an ExperimentReport.
// Suprema over infinite sets are maxima over the finite state space (exact)
// or over declared grids and samples (continuous case, lower bounds).

#include <cstddef>
#include <optional>
#include <vector>

#include "ergokit/ctmc.hpp"
#include "ergokit/diffusion.hpp"
#include "ergokit/report.hpp"

namespace ergokit::analysis {

// pi(f), sup_C G_C(., f; 1), the converse Lyapunov function and its drift
// margins, b_f = max_x G_C(x, f; 1) / (V(x) + 1), and pi(S_V) = 1.
ExperimentReport equivalence_suite(const ctmc::RateMatrix& q, const WeightTable& f,
                                   const FiniteSet& c);

struct RegularityOptions {
  double r0 = 1.0;
  double interval = 1.0;          // skeleton used for c_B
  std::size_t slope_grid = 64;    // r-grid on (0, max(r, 2 r0)] for b_C
};

// G_C(x, f; r) <= G_C(x, f; r0) + b_C r, the transfer G_C finite => G_B finite,
// and c_B = max_x (G^Delta_B(x, f_Delta) - G_C(x, f)) for each B.
ExperimentReport regularity_transfer_check(const ctmc::RateMatrix& q, const WeightTable& f,
                                           const FiniteSet& c, const std::vector<FiniteSet>& targets,
                                           double r, const RegularityOptions& options = {});

struct SkeletonSuiteOptions {
  // Horizon for the continuous integrals; 0 picks 40 / gap.
  double t_max = 0.0;
};

// Skeleton drift margins, |V_Delta - G_C|, minorization constants, and the
// discrete sums against the continuous integrals (sum >= integral - error).
ExperimentReport skeleton_suite(const ctmc::RateMatrix& q, const WeightTable& f, double interval,
                                const FiniteSet& c, const SkeletonSuiteOptions& options = {});

struct GridSpec {
  Point lower;
  Point upper;
  double step = 0.0;
};

struct DiffusionSuiteOptions {
  GridSpec grid;
  double tolerance = diffusion::kDriftTolerance;
  diffusion::McOptions mc;
  std::vector<Point> starts;        // where the two Lyapunov estimators are compared
  Point ergodic_start;
  double horizon = 1e4;
  double burn_in = 100.0;
  std::size_t n_batches = 50;
  std::optional<double> reference;  // declared pi(f), when known
  double beta = 1.0;
  std::vector<double> domination_times;
};

ExperimentReport diffusion_suite(const diffusion::DiffusionModel& model,
                                 const diffusion::FieldCertificate& cert,
                                 const DiffusionSuiteOptions& options);

// Inputs of a finite model as a canonical JSON value, for digests.
nlohmann::json describe(const ctmc::RateMatrix& q, const WeightTable& f, const FiniteSet& c);

}  // namespace ergokit::analysis
