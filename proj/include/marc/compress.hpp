#pragma once

// Temporal token compression: partition a sequence into fixed-length windows,
// iteratively merge the most similar adjacent frame pair inside each window
// down to a per-window budget, then consolidate across windows to the global
// target. Merging two frames averages their token grids elementwise and their
// timestamps; an optional count-weighted mode averages by constituent counts
// instead of plain halving.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "marc/types.hpp"

namespace marc {

struct CompressConfig {
  double rho = 0.5;          // keep ratio target is (1 - rho); must lie in (0, 1)
  std::size_t window_m = 8;  // window length, >= 1
  std::optional<std::size_t> target_override;  // global frame target, replaces the rho-derived one
  bool weighted_merge = false;  // count-weighted averaging instead of plain halving
};

struct CompressReport {
  std::size_t input_frames = 0;
  std::size_t output_frames = 0;
  std::size_t input_tokens = 0;   // input_frames * P
  std::size_t output_tokens = 0;  // output_frames * P
  std::vector<std::size_t> per_window_budgets;  // realized per-window output lengths
  std::size_t merges_performed = 0;         // merges inside windows
  std::size_t global_merges_performed = 0;  // merges in the final consolidation pass
};

// Mean over patches of the patchwise cosine similarity. Result clamped to
// [-1, 1]. Throws DimMismatchError on shape mismatch and ZeroNormError
// (carrying the patch index) when a patch row has no direction.
double frame_similarity(const TokenGrid& a, const TokenGrid& b);

// Elementwise average of two equal-shape grids.
TokenGrid merge_frames(const TokenGrid& a, const TokenGrid& b);

// Frames kept for a window of the given length: max(1, floor((1 - rho) * len)).
std::size_t window_budget(std::size_t len, double rho);

// Merge the most similar adjacent pair (ties: smallest index) until at most
// `budget` frames remain. Only the two similarities adjacent to a merged slot
// are recomputed; cached values elsewhere are reused unchanged, which the tests
// hold bit-exactly equal to a full recomputation. Budget must be >= 1.
std::vector<TokenGrid> compress_window(std::vector<TokenGrid> frames,
                                       std::size_t budget,
                                       std::size_t* merges = nullptr);

// Full pipeline over a sequence. The output frame count is always
// min(N, N_target) where N_target is the override when set, else
// max(1, floor((1 - rho) * N)): when the windowed pass leaves more than
// N_target frames a consolidation pass merges the concatenation down; when
// per-window flooring undershoots the target, the output is instead rebuilt by
// one global pass over the original frames with budget exactly N_target (the
// identity when N_target >= N). Merged timestamps are the mean of their
// constituents, so output timestamps stay strictly increasing.
std::pair<TokenSequence, CompressReport> compress_sequence(const TokenSequence& seq,
                                                           const CompressConfig& cfg);

}  // namespace marc
