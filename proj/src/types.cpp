#include "marc/types.hpp"

#include <cmath>
#include <string>

#include "marc/errors.hpp"

namespace marc {

void validate(const TokenGrid& g) {
  if (g.patches < 1 || g.dim < 1) {
    throw EmptySequenceError("grid must have at least one patch and one dimension");
  }
  if (g.data.size() != g.patches * g.dim) {
    throw DimMismatchError("grid storage is " + std::to_string(g.data.size()) +
                           " entries, expected " + std::to_string(g.patches * g.dim));
  }
  for (double x : g.data) {
    if (!std::isfinite(x)) throw Error("grid contains a non-finite entry");
  }
}

void validate(const TokenSequence& seq) {
  if (seq.empty()) throw EmptySequenceError("sequence has no frames");
  if (seq.timestamps.size() != seq.frames.size()) {
    throw DimMismatchError("sequence has " + std::to_string(seq.frames.size()) +
                           " frames but " + std::to_string(seq.timestamps.size()) +
                           " timestamps");
  }
  const std::size_t p = seq.frames.front().patches;
  const std::size_t d = seq.frames.front().dim;
  for (const auto& f : seq.frames) {
    validate(f);
    if (f.patches != p || f.dim != d) {
      throw DimMismatchError("sequence frames disagree on patch grid shape");
    }
  }
  for (std::size_t t = 1; t < seq.timestamps.size(); ++t) {
    if (!(seq.timestamps[t] > seq.timestamps[t - 1])) {
      throw Error("sequence timestamps must be strictly increasing");
    }
  }
}

}  // namespace marc
