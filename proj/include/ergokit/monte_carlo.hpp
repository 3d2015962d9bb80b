#pragma once

#include <cstddef>
#include <span>

#include "ergokit/kernels.hpp"

namespace ergokit {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::size_t censored = 0;  // paths stopped at the time cap
  bool is_censored() const { return censored > 0; }
};

// Mean and standard error in index order; throws NumericalError when every
// path was censored.
McEstimate summarize(std::span<const kernels::PathOutcome> outcomes);

}  // namespace ergokit
