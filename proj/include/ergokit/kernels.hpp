#pragma once

// Batch kernels for the Monte Carlo side. Every path (or grid point) is an
// independent task whose result lands in a slot indexed by the task number,
// so the OpenMP kernels and the serial reference produce identical output
// regardless of scheduling. Aggregation always runs afterwards, in index order.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>

namespace ergokit::kernels {

enum class Execution { Serial, Parallel };

struct PathOutcome {
  double value = 0.0;
  bool censored = false;
};

using PathTask = std::function<PathOutcome(std::size_t)>;
using PointTask = std::function<double(std::size_t)>;

namespace serial {
void run_paths(std::span<PathOutcome> out, const PathTask& task);
void run_points(std::span<double> out, const PointTask& task);
}  // namespace serial

namespace omp {
void run_paths(std::span<PathOutcome> out, const PathTask& task);
void run_points(std::span<double> out, const PointTask& task);
// Threads OpenMP will use; 1 when built without OpenMP.
int max_threads();
}  // namespace omp

void run_paths(Execution exec, std::span<PathOutcome> out, const PathTask& task);
void run_points(Execution exec, std::span<double> out, const PointTask& task);

// Independent stream per (seed, task, purpose).
enum class Stream : std::uint32_t { Increments = 1, Clock = 2, Jumps = 3 };
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t task, Stream purpose);

}  // namespace ergokit::kernels
