#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <set>
#include <vector>

#include "marc/pipeline.hpp"
#include "marc/rng.hpp"
#include "marc/synth.hpp"
#include "marc/types.hpp"

using namespace marc;

namespace {

std::vector<QASample> make_samples(std::size_t count, std::uint64_t seed) {
  SynthConfig cfg;
  Rng proto_rng(derive_stream(seed, "prototypes"));
  const Prototypes protos = gen_prototypes(cfg, proto_rng);
  return gen_videos(cfg, protos, derive_stream(seed, "data"), count);
}

bool sequences_bit_equal(const TokenSequence& a, const TokenSequence& b) {
  if (a.frames.size() != b.frames.size()) return false;
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    if (a.timestamps[t] != b.timestamps[t]) return false;
    if (std::memcmp(a.frames[t].data.data(), b.frames[t].data.data(),
                    a.frames[t].data.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("run_sample_pipeline produces a consistent result") {
  const auto samples = make_samples(12, 4242);
  const PipelineConfig cfg;  // defaults: adaptive segmentation, top 3, rho 0.5

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const PipelineResult res = run_sample_pipeline(s.video, s.query, cfg, i);

    REQUIRE(!res.fragments.empty());
    std::set<std::uint64_t> ids;
    for (const auto& f : res.fragments) {
      CHECK(f.video_id == i);
      CHECK(!f.embedding.empty());
      ids.insert(f.fragment_id);
    }
    CHECK(ids.size() == res.fragments.size());

    REQUIRE(!res.retrieval.fragment_ids.empty());
    CHECK(res.retrieval.fragment_ids.size() <= cfg.top_k);
    for (auto id : res.retrieval.fragment_ids) CHECK(ids.count(id) == 1);
    CHECK(std::is_sorted(res.retrieval.scores.begin(), res.retrieval.scores.end(),
                         std::greater<>()));

    CHECK(res.assembled.seq.frames.size() <= cfg.assemble.max_frames);
    CHECK(res.assembled.seq.frames.size() == res.assembled.source_frames.size());
    CHECK_NOTHROW(validate(res.assembled.seq));

    CHECK(res.compressed.frames.size() <= res.assembled.seq.frames.size());
    CHECK(res.report.output_frames == res.compressed.frames.size());
    CHECK(res.report.input_frames == res.assembled.seq.frames.size());
    CHECK_NOTHROW(validate(res.compressed));
  }
}

TEST_CASE("retrieval lands on an event of the queried class") {
  const auto samples = make_samples(40, 777);
  const PipelineConfig cfg;

  // The query encodes the target class prototype, and classes recur within a
  // video, so any fragment covering an event of that class is a correct hit.
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const PipelineResult res = run_sample_pipeline(s.video, s.query, cfg, i);

    const MemoryFragment* top = nullptr;
    for (const auto& f : res.fragments) {
      if (f.fragment_id == res.retrieval.fragment_ids[0]) top = &f;
    }
    REQUIRE(top != nullptr);

    bool hit = false;
    for (std::size_t ev = 0; ev < s.event_classes.size(); ++ev) {
      if (s.event_classes[ev] != s.answer) continue;
      const std::size_t lo = ev == 0 ? 0 : s.planted_boundaries[ev - 1] + 1;
      const std::size_t hi = ev == s.planted_boundaries.size()
                                 ? s.video.frames.size() - 1
                                 : s.planted_boundaries[ev];
      if (top->start_frame <= hi && lo <= top->end_frame) {
        hit = true;
        break;
      }
    }
    hits += hit ? 1 : 0;
  }
  CHECK(hits >= 36);  // 90% on clean synthetic data
}

TEST_CASE("pipeline is deterministic") {
  const auto samples = make_samples(3, 99);
  const PipelineConfig cfg;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto a = run_sample_pipeline(samples[i].video, samples[i].query, cfg, i);
    const auto b = run_sample_pipeline(samples[i].video, samples[i].query, cfg, i);
    CHECK(sequences_bit_equal(a.compressed, b.compressed));
    CHECK(a.retrieval.fragment_ids == b.retrieval.fragment_ids);
  }
}

TEST_CASE("build_bank renumbers fragments globally") {
  const auto samples = make_samples(6, 31);
  const MemoryBank bank = build_bank(samples, SegmentConfig{});

  REQUIRE(bank.size() >= samples.size());  // at least one fragment per video
  std::set<std::uint64_t> videos;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const auto& f = bank.fragments()[i];
    CHECK(f.fragment_id == i);  // dense ids in insertion order
    CHECK(!f.embedding.empty());
    videos.insert(f.video_id);
  }
  CHECK(videos.size() == samples.size());
}
