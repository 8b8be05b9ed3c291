#include "marc/pipeline.hpp"

#include "marc/errors.hpp"

namespace marc {

PipelineResult run_sample_pipeline(const TokenSequence& video,
                                   std::span<const double> query,
                                   const PipelineConfig& cfg,
                                   std::uint64_t video_id) {
  PipelineResult out;
  out.fragments = segment_events(video, cfg.segment, video_id);
  for (MemoryFragment& f : out.fragments) {
    f.embedding = embed_fragment(video, f);
  }

  const std::size_t d = video.frames.front().dim;
  MemoryBank bank(d);
  for (const MemoryFragment& f : out.fragments) bank.add(f);

  const std::vector<double> q = embed_query(std::vector<double>(query.begin(), query.end()));
  out.retrieval = retrieve_topk(bank, q, cfg.top_k);
  out.assembled = assemble_retrieved(video, out.fragments, out.retrieval, cfg.assemble);

  auto [compressed, report] = compress_sequence(out.assembled.seq, cfg.compress);
  out.compressed = std::move(compressed);
  out.report = report;
  return out;
}

MemoryBank build_bank(const std::vector<QASample>& samples, const SegmentConfig& cfg) {
  if (samples.empty()) throw EmptySequenceError("bank build needs at least one sample");
  const std::size_t d = samples.front().video.frames.front().dim;
  MemoryBank bank(d);
  std::uint64_t next_id = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto frags = segment_events(samples[i].video, cfg, static_cast<std::uint64_t>(i));
    for (MemoryFragment& f : frags) {
      f.fragment_id = next_id++;
      f.embedding = embed_fragment(samples[i].video, f);
      bank.add(std::move(f));
    }
  }
  return bank;
}

}  // namespace marc
