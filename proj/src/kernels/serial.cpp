#include "ergokit/kernels.hpp"

namespace ergokit::kernels::serial {

void run_paths(std::span<PathOutcome> out, const PathTask& task) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = task(i);
}

void run_points(std::span<double> out, const PointTask& task) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = task(i);
}

}  // namespace ergokit::kernels::serial
