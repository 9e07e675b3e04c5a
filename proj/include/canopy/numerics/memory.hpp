#pragma once

namespace canopy::numerics {

/// Keeps large freed blocks in the heap instead of returning them to the OS.
/// Training allocates and frees the same activation sizes every step, and
/// without this each step pays for fresh page faults. No-op off glibc.
void tune_allocator();

}  // namespace canopy::numerics
