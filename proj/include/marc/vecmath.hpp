#pragma once

// Vector and grid primitives shared by every module.

#include <span>
#include <vector>

#include "marc/types.hpp"

namespace marc {

// Norms below this floor have no usable direction.
inline constexpr double kNormFloor = 1e-12;

// Cosine similarity, clamped to [-1, 1] so downstream "1 - cos" distances
// never go negative through rounding. Throws ZeroNormError if either vector's
// norm is below kNormFloor, DimMismatchError on length mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

// Column mean over the P patch rows: length-d vector.
std::vector<double> mean_pool(const TokenGrid& g);

// L2 norm.
double norm(std::span<const double> v);

// Normalize v to unit length in place. Throws ZeroNormError below kNormFloor.
void l2_normalize(std::vector<double>& v);

}  // namespace marc
