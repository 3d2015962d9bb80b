#include "ergokit/kernels.hpp"

namespace ergokit::kernels {

void run_paths(Execution exec, std::span<PathOutcome> out, const PathTask& task) {
  if (exec == Execution::Parallel) {
    omp::run_paths(out, task);
  } else {
    serial::run_paths(out, task);
  }
}

void run_points(Execution exec, std::span<double> out, const PointTask& task) {
  if (exec == Execution::Parallel) {
    omp::run_points(out, task);
  } else {
    serial::run_points(out, task);
  }
}

namespace {

// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t task, Stream purpose) {
  // A seed_seq costs far more than the short paths it would seed.
  const std::uint64_t key = mix(mix(mix(seed) ^ task) ^ static_cast<std::uint64_t>(purpose));
  return std::mt19937_64(key);
}

}  // namespace ergokit::kernels
