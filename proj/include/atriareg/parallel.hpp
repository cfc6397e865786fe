#pragma once

#include <cstddef>
#include <span>

namespace atriareg {

// Worker count for voxel-parallel loops: ATRIAREG_THREADS when set to a
// positive integer, otherwise the OpenMP default.
int worker_threads();

// Pairwise summation over fixed 1024-element leaves. The result depends only
// on the input order, never on the thread count.
double ordered_sum(std::span<const double> values) noexcept;

} // namespace atriareg
