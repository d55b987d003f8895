#pragma once

namespace npcvar {

// Execution policy for the data-parallel kernels. Every parallel entry point
// has a serial twin that produces bit-identical output: parallel loops write
// into preallocated slots and all reductions run serially over those slots.
enum class Exec {
  serial,
  openmp,
};

// Number of worker threads the openmp policy would use (1 when built
// without OpenMP).
int max_threads();

}  // namespace npcvar
