#include "marc/vecmath.hpp"

#include <cmath>
#include <string>

#include "marc/errors.hpp"
#include "marc/kernels.hpp"

namespace marc {

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimMismatchError("cosine: length mismatch " + std::to_string(u.size()) +
                           " vs " + std::to_string(v.size()));
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  kernels::dot_norms(u.data(), v.data(), u.size(), ab, aa, bb);
  const double nu = std::sqrt(aa);
  const double nv = std::sqrt(bb);
  if (nu < kNormFloor) throw ZeroNormError("cosine: first argument has near-zero norm");
  if (nv < kNormFloor) throw ZeroNormError("cosine: second argument has near-zero norm");
  double c = ab / (nu * nv);
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

std::vector<double> mean_pool(const TokenGrid& g) {
  std::vector<double> out(g.dim, 0.0);
  for (std::size_t p = 0; p < g.patches; ++p) {
    kernels::add_inplace(out.data(), g.data.data() + p * g.dim, g.dim);
  }
  kernels::scale(out.data(), 1.0 / static_cast<double>(g.patches), g.dim);
  return out;
}

double norm(std::span<const double> v) {
  return std::sqrt(kernels::dot(v.data(), v.data(), v.size()));
}

void l2_normalize(std::vector<double>& v) {
  const double n = norm(v);
  if (n < kNormFloor) throw ZeroNormError("l2_normalize: near-zero norm");
  kernels::scale(v.data(), 1.0 / n, v.size());
}

}  // namespace marc
