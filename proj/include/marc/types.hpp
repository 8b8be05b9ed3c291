#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace marc {

// One frame as a P x d patch-token matrix, row-major.
struct TokenGrid {
  std::size_t patches = 0;  // P >= 1
  std::size_t dim = 0;      // d >= 1
  std::vector<double> data; // P * d entries, finite

  TokenGrid() = default;
  TokenGrid(std::size_t p, std::size_t d, double fill = 0.0)
      : patches(p), dim(d), data(p * d, fill) {}

  std::span<const double> row(std::size_t p) const {
    return {data.data() + p * dim, dim};
  }
  std::span<double> row(std::size_t p) {
    return {data.data() + p * dim, dim};
  }
  double& at(std::size_t p, std::size_t j) { return data[p * dim + j]; }
  double at(std::size_t p, std::size_t j) const { return data[p * dim + j]; }
};

// Spatio-temporal grid descriptor carried alongside a sequence.
struct GridMeta {
  std::size_t t_frames = 0;
  std::size_t h_patches = 1;
  std::size_t w_patches = 1;
};

// A video as consecutive frames with strictly increasing timestamps (seconds).
struct TokenSequence {
  std::vector<TokenGrid> frames;
  std::vector<double> timestamps;
  GridMeta grid_meta;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

// Throw on violated structural invariants. Used at module entry points,
// not after every internal transform.
void validate(const TokenGrid& g);
void validate(const TokenSequence& seq);

}  // namespace marc
