#pragma once

// Retrieve-then-compress: segment a video into events, embed them, retrieve
// the query-relevant fragments, reassemble at low fps, compress to the token
// budget. The student input to the policy is the output of this pipeline.

#include <cstdint>
#include <span>
#include <vector>

#include "marc/compress.hpp"
#include "marc/synth.hpp"
#include "marc/vmr.hpp"

namespace marc {

struct PipelineConfig {
  SegmentConfig segment;
  std::size_t top_k = 3;
  AssembleConfig assemble;
  CompressConfig compress;
};

struct PipelineResult {
  std::vector<MemoryFragment> fragments;  // embedded
  RetrievalResult retrieval;
  AssembleResult assembled;
  TokenSequence compressed;
  CompressReport report;
};

PipelineResult run_sample_pipeline(const TokenSequence& video,
                                   std::span<const double> query,
                                   const PipelineConfig& cfg,
                                   std::uint64_t video_id = 0);

// Segment and embed every sample's video into one bank; fragment ids are
// renumbered to stay globally unique, video_id is the sample index.
MemoryBank build_bank(const std::vector<QASample>& samples, const SegmentConfig& cfg);

}  // namespace marc
