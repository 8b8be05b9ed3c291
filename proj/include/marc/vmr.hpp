#pragma once

// Event-based visual memory: boundary detection over frame transitions,
// fragment embeddings, an id-ordered memory bank, exact top-k retrieval,
// and reassembly of retrieved fragments into a low-fps sequence.

#include <cstdint>
#include <span>
#include <vector>

#include "marc/types.hpp"

namespace marc {

struct MemoryFragment {
  std::uint64_t fragment_id = 0;
  std::uint64_t video_id = 0;
  std::size_t start_frame = 0;  // inclusive
  std::size_t end_frame = 0;    // inclusive
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<double> embedding;  // unit length once embedded; empty before
};

class MemoryBank {
 public:
  explicit MemoryBank(std::size_t dim);

  // Validates dimension, unit norm (within 1e-9) and id uniqueness, then
  // inserts keeping fragments ordered by fragment_id.
  void add(MemoryFragment frag);

  const MemoryFragment* find(std::uint64_t fragment_id) const;
  const std::vector<MemoryFragment>& fragments() const { return frags_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return frags_.size(); }
  bool empty() const { return frags_.empty(); }

 private:
  std::size_t dim_;
  std::vector<MemoryFragment> frags_;
};

// Ranked retrieval output; parallel arrays, best first.
struct RetrievalResult {
  std::vector<std::uint64_t> fragment_ids;
  std::vector<double> scores;
};

struct SegmentConfig {
  enum class Threshold { fixed, adaptive };
  Threshold mode = Threshold::adaptive;
  double fixed_threshold = 0.5;  // used in fixed mode
  // Adaptive mode: theta = median(b) + mad_k * MAD(b), where MAD is the
  // consistency-scaled median absolute deviation 1.4826 * median(|b - median|),
  // i.e. mad_k counts robust sigmas.
  double mad_k = 3.0;
  std::size_t min_event_len = 2;  // shorter events merge into the preceding one
};

// Cut the sequence at transitions where b_t = 1 - cosine(pool_t, pool_{t+1})
// exceeds the threshold. Events shorter than min_event_len are merged into the
// preceding event (a short first event merges forward). Returns fragments with
// ids 0..K-1, frame spans, timestamps, and embeddings left empty.
std::vector<MemoryFragment> segment_events(const TokenSequence& seq,
                                           const SegmentConfig& cfg,
                                           std::uint64_t video_id = 0);

// Unit-normalized mean of the pooled frames in the fragment's span.
std::vector<double> embed_fragment(const TokenSequence& seq, const MemoryFragment& frag);

// Unit-normalize a raw query vector.
std::vector<double> embed_query(std::vector<double> query);

// Exact top-k by cosine against a unit query (embeddings are unit, so the
// score is the clamped dot product). Descending score; ties break toward the
// smaller fragment_id. k is capped at the bank size.
RetrievalResult retrieve_topk(const MemoryBank& bank, std::span<const double> query,
                              std::size_t k);

struct AssembleConfig {
  enum class Order { chronological, rank };
  Order order = Order::chronological;
  double fps = 1.0;             // kept-frame spacing is >= 1/fps seconds
  std::size_t max_frames = 64;  // hard cap on output length
};

struct AssembleResult {
  TokenSequence seq;
  std::vector<std::size_t> source_frames;  // original index of each kept frame
};

// Concatenate the retrieved fragments (chronological by default; rank order
// re-stamps timestamps on a uniform 1/fps grid, since ranked spans are not
// time-ordered) and resample each fragment so consecutive kept frames are at
// least 1/fps apart, always keeping a fragment's first frame, truncating at
// max_frames.
AssembleResult assemble_retrieved(const TokenSequence& seq,
                                  const std::vector<MemoryFragment>& fragments,
                                  const RetrievalResult& result,
                                  const AssembleConfig& cfg);

}  // namespace marc
