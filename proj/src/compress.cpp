#include "marc/compress.hpp"

#include <cmath>
#include <string>

#include "marc/errors.hpp"
#include "marc/kernels.hpp"
#include "marc/vecmath.hpp"

namespace marc {

namespace {

// A frame plus the bookkeeping the merge loop needs.
struct Slot {
  TokenGrid grid;
  double ts = 0.0;
  double weight = 1.0;  // constituent count, used only in weighted mode
};

void check_same_shape(const TokenGrid& a, const TokenGrid& b, const char* who) {
  if (a.patches != b.patches || a.dim != b.dim) {
    throw DimMismatchError(std::string(who) + ": grids are " + std::to_string(a.patches) +
                           "x" + std::to_string(a.dim) + " vs " + std::to_string(b.patches) +
                           "x" + std::to_string(b.dim));
  }
}

double slot_similarity(const Slot& a, const Slot& b) {
  return frame_similarity(a.grid, b.grid);
}

Slot merge_slots(const Slot& a, const Slot& b, bool weighted) {
  Slot out;
  out.grid.patches = a.grid.patches;
  out.grid.dim = a.grid.dim;
  const std::size_t n = a.grid.data.size();
  if (!weighted) {
    out.grid.data.resize(n);
    kernels::average2(a.grid.data.data(), b.grid.data.data(), out.grid.data.data(), n);
    out.ts = (a.ts + b.ts) * 0.5;
    out.weight = a.weight + b.weight;
  } else {
    const double total = a.weight + b.weight;
    const double wa = a.weight / total;
    const double wb = b.weight / total;
    out.grid.data = a.grid.data;
    kernels::scale(out.grid.data.data(), wa, n);
    kernels::axpy(wb, b.grid.data.data(), out.grid.data.data(), n);
    out.ts = wa * a.ts + wb * b.ts;
    out.weight = total;
  }
  return out;
}

// Iterative merge down to `budget` slots. Adjacent-pair similarities are kept
// in a cache; after a merge only the two entries touching the merged slot are
// recomputed.
void merge_down(std::vector<Slot>& slots, std::size_t budget, bool weighted,
                std::size_t& merges) {
  if (budget < 1) throw ConfigError("merge budget must be >= 1");
  if (slots.size() <= budget) return;
  std::vector<double> sims(slots.size() - 1);
  for (std::size_t i = 0; i + 1 < slots.size(); ++i) {
    sims[i] = slot_similarity(slots[i], slots[i + 1]);
  }
  while (slots.size() > budget) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < sims.size(); ++i) {
      if (sims[i] > sims[best]) best = i;  // strict: ties keep the earliest pair
    }
    slots[best] = merge_slots(slots[best], slots[best + 1], weighted);
    slots.erase(slots.begin() + static_cast<std::ptrdiff_t>(best) + 1);
    sims.erase(sims.begin() + static_cast<std::ptrdiff_t>(best));
    if (best > 0) sims[best - 1] = slot_similarity(slots[best - 1], slots[best]);
    if (best < sims.size()) sims[best] = slot_similarity(slots[best], slots[best + 1]);
    ++merges;
  }
}

std::vector<Slot> to_slots(const TokenSequence& seq) {
  std::vector<Slot> slots(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    slots[t].grid = seq.frames[t];
    slots[t].ts = seq.timestamps[t];
    slots[t].weight = 1.0;
  }
  return slots;
}

}  // namespace

double frame_similarity(const TokenGrid& a, const TokenGrid& b) {
  check_same_shape(a, b, "frame_similarity");
  double s = 0.0;
  for (std::size_t p = 0; p < a.patches; ++p) {
    try {
      s += cosine(a.row(p), b.row(p));
    } catch (const ZeroNormError& e) {
      throw ZeroNormError(std::string(e.what()) + " (patch " + std::to_string(p) + ")",
                          static_cast<std::ptrdiff_t>(p));
    }
  }
  double m = s / static_cast<double>(a.patches);
  if (m > 1.0) m = 1.0;
  if (m < -1.0) m = -1.0;
  return m;
}

TokenGrid merge_frames(const TokenGrid& a, const TokenGrid& b) {
  check_same_shape(a, b, "merge_frames");
  TokenGrid out(a.patches, a.dim);
  kernels::average2(a.data.data(), b.data.data(), out.data.data(), a.data.size());
  return out;
}

std::size_t window_budget(std::size_t len, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
  if (len < 1) throw ConfigError("window length must be >= 1");
  const double kept = std::floor((1.0 - rho) * static_cast<double>(len));
  const auto k = static_cast<std::size_t>(kept);
  return k < 1 ? 1 : k;
}

std::vector<TokenGrid> compress_window(std::vector<TokenGrid> frames,
                                       std::size_t budget, std::size_t* merges) {
  std::vector<Slot> slots(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    slots[i].grid = std::move(frames[i]);
    slots[i].ts = static_cast<double>(i);
  }
  std::size_t count = 0;
  merge_down(slots, budget, /*weighted=*/false, count);
  if (merges != nullptr) *merges = count;
  std::vector<TokenGrid> out(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) out[i] = std::move(slots[i].grid);
  return out;
}

std::pair<TokenSequence, CompressReport> compress_sequence(const TokenSequence& seq,
                                                           const CompressConfig& cfg) {
  validate(seq);
  if (cfg.window_m < 1) throw ConfigError("window_m must be >= 1");

  const std::size_t n = seq.size();
  const std::size_t patches = seq.frames.front().patches;

  CompressReport report;
  report.input_frames = n;
  report.input_tokens = n * patches;

  // Windowed pass: budgets from the keep-ratio formula, realized lengths recorded.
  std::vector<Slot> all = to_slots(seq);
  std::vector<Slot> concat;
  concat.reserve(n);
  for (std::size_t start = 0; start < n; start += cfg.window_m) {
    const std::size_t len = std::min(cfg.window_m, n - start);
    std::vector<Slot> window(all.begin() + static_cast<std::ptrdiff_t>(start),
                             all.begin() + static_cast<std::ptrdiff_t>(start + len));
    merge_down(window, window_budget(len, cfg.rho), cfg.weighted_merge,
               report.merges_performed);
    report.per_window_budgets.push_back(window.size());
    for (auto& s : window) concat.push_back(std::move(s));
  }

  const std::size_t target =
      cfg.target_override ? *cfg.target_override : window_budget(n, cfg.rho);

  std::vector<Slot> final_slots;
  if (concat.size() > target) {
    merge_down(concat, target, cfg.weighted_merge, report.global_merges_performed);
    final_slots = std::move(concat);
  } else if (concat.size() < target) {
    // Per-window flooring undershot the global target. Rebuild by one global
    // pass over the original frames so the output budget contract holds
    // exactly (identity when target >= N).
    final_slots = to_slots(seq);
    merge_down(final_slots, target, cfg.weighted_merge, report.global_merges_performed);
  } else {
    final_slots = std::move(concat);
  }

  TokenSequence out;
  out.grid_meta = seq.grid_meta;
  out.grid_meta.t_frames = final_slots.size();
  out.frames.reserve(final_slots.size());
  out.timestamps.reserve(final_slots.size());
  for (auto& s : final_slots) {
    out.frames.push_back(std::move(s.grid));
    out.timestamps.push_back(s.ts);
  }

  report.output_frames = out.frames.size();
  report.output_tokens = out.frames.size() * patches;
  return {std::move(out), report};
}

}  // namespace marc
