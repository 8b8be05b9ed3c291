#include "marc/vmr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "marc/errors.hpp"
#include "marc/kernels.hpp"
#include "marc/vecmath.hpp"

namespace marc {

namespace {

double median_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) * 0.5;
}

// Consistency-scaled median absolute deviation (robust sigma).
double scaled_mad(const std::vector<double>& v, double med) {
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::fabs(v[i] - med);
  return 1.4826 * median_sorted(std::move(dev));
}

struct Span {
  std::size_t start;
  std::size_t end;  // inclusive
  std::size_t len() const { return end - start + 1; }
};

}  // namespace

MemoryBank::MemoryBank(std::size_t dim) : dim_(dim) {
  if (dim < 1) throw ConfigError("bank dimension must be >= 1");
}

void MemoryBank::add(MemoryFragment frag) {
  if (frag.embedding.size() != dim_) {
    throw DimMismatchError("fragment embedding has dim " +
                           std::to_string(frag.embedding.size()) + ", bank expects " +
                           std::to_string(dim_));
  }
  const double n = norm(frag.embedding);
  if (std::fabs(n - 1.0) > 1e-9) {
    throw Error("fragment " + std::to_string(frag.fragment_id) +
                " embedding is not unit length (norm " + std::to_string(n) + ")");
  }
  auto it = std::lower_bound(frags_.begin(), frags_.end(), frag.fragment_id,
                             [](const MemoryFragment& f, std::uint64_t id) {
                               return f.fragment_id < id;
                             });
  if (it != frags_.end() && it->fragment_id == frag.fragment_id) {
    throw Error("duplicate fragment id " + std::to_string(frag.fragment_id));
  }
  frags_.insert(it, std::move(frag));
}

const MemoryFragment* MemoryBank::find(std::uint64_t fragment_id) const {
  auto it = std::lower_bound(frags_.begin(), frags_.end(), fragment_id,
                             [](const MemoryFragment& f, std::uint64_t id) {
                               return f.fragment_id < id;
                             });
  if (it == frags_.end() || it->fragment_id != fragment_id) return nullptr;
  return &*it;
}

std::vector<MemoryFragment> segment_events(const TokenSequence& seq,
                                           const SegmentConfig& cfg,
                                           std::uint64_t video_id) {
  validate(seq);
  const std::size_t n = seq.size();

  std::vector<Span> spans;
  if (n == 1) {
    spans.push_back({0, 0});
  } else {
    std::vector<std::vector<double>> pooled(n);
    for (std::size_t t = 0; t < n; ++t) pooled[t] = mean_pool(seq.frames[t]);

    std::vector<double> b(n - 1);
    for (std::size_t t = 0; t + 1 < n; ++t) {
      b[t] = 1.0 - cosine(pooled[t], pooled[t + 1]);
    }

    double theta;
    if (cfg.mode == SegmentConfig::Threshold::fixed) {
      theta = cfg.fixed_threshold;
    } else {
      const double med = median_sorted(b);
      theta = med + cfg.mad_k * scaled_mad(b, med);
    }

    std::size_t start = 0;
    for (std::size_t t = 0; t + 1 < n; ++t) {
      if (b[t] > theta) {
        spans.push_back({start, t});
        start = t + 1;
      }
    }
    spans.push_back({start, n - 1});
  }

  // Fold events below the minimum length into their predecessor; a short
  // first event is absorbed by the event after it.
  std::vector<Span> merged;
  for (const Span& s : spans) {
    if (!merged.empty() && s.len() < cfg.min_event_len) {
      merged.back().end = s.end;
    } else {
      merged.push_back(s);
    }
  }
  if (merged.size() >= 2 && merged.front().len() < cfg.min_event_len) {
    merged[1].start = merged[0].start;
    merged.erase(merged.begin());
  }

  std::vector<MemoryFragment> out;
  out.reserve(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    MemoryFragment f;
    f.fragment_id = i;
    f.video_id = video_id;
    f.start_frame = merged[i].start;
    f.end_frame = merged[i].end;
    f.start_time = seq.timestamps[merged[i].start];
    f.end_time = seq.timestamps[merged[i].end];
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<double> embed_fragment(const TokenSequence& seq, const MemoryFragment& frag) {
  validate(seq);
  if (frag.end_frame >= seq.size() || frag.start_frame > frag.end_frame) {
    throw DimMismatchError("fragment span [" + std::to_string(frag.start_frame) + ", " +
                           std::to_string(frag.end_frame) + "] does not fit a " +
                           std::to_string(seq.size()) + "-frame sequence");
  }
  const std::size_t d = seq.frames.front().dim;
  std::vector<double> acc(d, 0.0);
  for (std::size_t t = frag.start_frame; t <= frag.end_frame; ++t) {
    const std::vector<double> pooled = mean_pool(seq.frames[t]);
    kernels::add_inplace(acc.data(), pooled.data(), d);
  }
  const auto count = static_cast<double>(frag.end_frame - frag.start_frame + 1);
  kernels::scale(acc.data(), 1.0 / count, d);
  l2_normalize(acc);
  return acc;
}

std::vector<double> embed_query(std::vector<double> query) {
  l2_normalize(query);
  return query;
}

RetrievalResult retrieve_topk(const MemoryBank& bank, std::span<const double> query,
                              std::size_t k) {
  if (bank.empty()) throw EmptyBankError("retrieval from an empty bank");
  if (k < 1) throw ConfigError("top-k must be >= 1");
  if (query.size() != bank.dim()) {
    throw DimMismatchError("query has dim " + std::to_string(query.size()) +
                           ", bank expects " + std::to_string(bank.dim()));
  }
  const auto& frags = bank.fragments();
  std::vector<std::size_t> order(frags.size());
  std::vector<double> scores(frags.size());
  for (std::size_t i = 0; i < frags.size(); ++i) {
    order[i] = i;
    double s = kernels::dot(query.data(), frags[i].embedding.data(), query.size());
    if (s > 1.0) s = 1.0;
    if (s < -1.0) s = -1.0;
    scores[i] = s;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return frags[a].fragment_id < frags[b].fragment_id;
  });
  const std::size_t take = std::min(k, frags.size());
  RetrievalResult res;
  res.fragment_ids.reserve(take);
  res.scores.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    res.fragment_ids.push_back(frags[order[i]].fragment_id);
    res.scores.push_back(scores[order[i]]);
  }
  return res;
}

AssembleResult assemble_retrieved(const TokenSequence& seq,
                                  const std::vector<MemoryFragment>& fragments,
                                  const RetrievalResult& result,
                                  const AssembleConfig& cfg) {
  validate(seq);
  if (!(cfg.fps > 0.0)) throw ConfigError("fps must be positive");
  if (cfg.max_frames < 1) throw ConfigError("max_frames must be >= 1");

  std::vector<const MemoryFragment*> chosen;
  chosen.reserve(result.fragment_ids.size());
  for (std::uint64_t id : result.fragment_ids) {
    auto it = std::find_if(fragments.begin(), fragments.end(),
                           [id](const MemoryFragment& f) { return f.fragment_id == id; });
    if (it == fragments.end()) {
      throw Error("retrieved fragment " + std::to_string(id) + " not in fragment list");
    }
    if (it->end_frame >= seq.size()) {
      throw DimMismatchError("fragment " + std::to_string(id) +
                             " span exceeds the sequence");
    }
    chosen.push_back(&*it);
  }
  if (cfg.order == AssembleConfig::Order::chronological) {
    std::sort(chosen.begin(), chosen.end(),
              [](const MemoryFragment* a, const MemoryFragment* b) {
                return a->start_frame < b->start_frame;
              });
  }

  const double min_gap = 1.0 / cfg.fps;
  AssembleResult out;
  out.seq.grid_meta = seq.grid_meta;

  for (const MemoryFragment* frag : chosen) {
    bool first_in_fragment = true;
    double last_ts = 0.0;
    for (std::size_t t = frag->start_frame; t <= frag->end_frame; ++t) {
      const double ts = seq.timestamps[t];
      // small slack so e.g. 0.1s-spaced stamps hit an exact 1s grid
      if (!first_in_fragment && ts - last_ts < min_gap - 1e-9) continue;
      if (out.seq.frames.size() >= cfg.max_frames) break;
      out.seq.frames.push_back(seq.frames[t]);
      out.seq.timestamps.push_back(ts);
      out.source_frames.push_back(t);
      last_ts = ts;
      first_in_fragment = false;
    }
    if (out.seq.frames.size() >= cfg.max_frames) break;
  }

  if (cfg.order == AssembleConfig::Order::rank) {
    // Ranked fragments are not time-ordered; re-stamp on a uniform 1/fps grid
    // to keep sequence timestamps strictly increasing.
    for (std::size_t i = 0; i < out.seq.timestamps.size(); ++i) {
      out.seq.timestamps[i] = static_cast<double>(i) * min_gap;
    }
  }

  out.seq.grid_meta.t_frames = out.seq.frames.size();
  return out;
}

}  // namespace marc
