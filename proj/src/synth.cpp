#include "marc/synth.hpp"

#include <cmath>
#include <string>

#include "marc/errors.hpp"
#include "marc/kernels.hpp"
#include "marc/vecmath.hpp"

namespace marc {

namespace {

std::vector<double> gaussian_vector(std::size_t d, Rng& rng) {
  std::vector<double> v(d);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

Prototypes gen_prototypes(const SynthConfig& cfg, Rng& rng) {
  const std::size_t c = cfg.num_classes;
  const std::size_t d = cfg.dim;
  if (c < 1 || d < 1) throw ConfigError("num_classes and dim must be >= 1");

  Prototypes out;
  out.rows.reserve(c);

  if (c <= d) {
    // Gram-Schmidt; a draw that collapses numerically is rejected and redrawn.
    while (out.rows.size() < c) {
      std::vector<double> v = gaussian_vector(d, rng);
      for (const auto& q : out.rows) {
        const double proj = kernels::dot(v.data(), q.data(), d);
        kernels::axpy(-proj, q.data(), v.data(), d);
      }
      if (norm(v) < 1e-6) continue;
      l2_normalize(v);
      out.rows.push_back(std::move(v));
    }
    out.max_abs_cos = 0.0;
  } else {
    for (std::size_t i = 0; i < c; ++i) {
      std::vector<double> v = gaussian_vector(d, rng);
      l2_normalize(v);
      out.rows.push_back(std::move(v));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = i + 1; j < c; ++j) {
        const double overlap =
            std::fabs(kernels::dot(out.rows[i].data(), out.rows[j].data(), d));
        if (overlap > worst) worst = overlap;
      }
    }
    out.max_abs_cos = worst;
  }
  return out;
}

QASample gen_video(const SynthConfig& cfg, const Prototypes& protos, Rng& rng) {
  const std::size_t e = cfg.events_per_video;
  if (e < 1) throw ConfigError("events_per_video must be >= 1");
  if (cfg.event_len_lo < 1 || cfg.event_len_hi < cfg.event_len_lo) {
    throw ConfigError("event length bounds must satisfy 1 <= lo <= hi");
  }
  if (!(cfg.fps > 0.0)) throw ConfigError("fps must be positive");
  if (protos.rows.size() != cfg.num_classes) {
    throw DimMismatchError("prototype count does not match num_classes");
  }
  const std::size_t c = cfg.num_classes;
  const std::size_t d = cfg.dim;

  QASample s;

  // 1) event classes, uniform with no immediate repeats
  s.event_classes.resize(e);
  s.event_classes[0] = rng.uniform_int(c);
  for (std::size_t i = 1; i < e; ++i) {
    if (c == 1) {
      s.event_classes[i] = 0;
    } else {
      const std::uint64_t step = rng.uniform_int(c - 1);
      s.event_classes[i] = (s.event_classes[i - 1] + 1 + step) % c;
    }
  }

  // 2) event lengths
  std::vector<std::size_t> lens(e);
  const std::uint64_t span = cfg.event_len_hi - cfg.event_len_lo + 1;
  for (auto& len : lens) len = cfg.event_len_lo + rng.uniform_int(span);

  // 3) frames: prototype of the event's class plus iid N(0, sigma^2) per entry
  std::size_t t = 0;
  for (std::size_t ev = 0; ev < e; ++ev) {
    const auto& proto = protos.rows[s.event_classes[ev]];
    for (std::size_t k = 0; k < lens[ev]; ++k, ++t) {
      TokenGrid g(cfg.patches, d);
      for (std::size_t p = 0; p < cfg.patches; ++p) {
        for (std::size_t j = 0; j < d; ++j) {
          g.at(p, j) = proto[j] + cfg.noise_sigma * rng.normal();
        }
      }
      s.video.frames.push_back(std::move(g));
      s.video.timestamps.push_back(static_cast<double>(t) / cfg.fps);
    }
    if (ev + 1 < e) s.planted_boundaries.push_back(t - 1);
  }
  s.video.grid_meta = {s.video.frames.size(), 1, cfg.patches};

  // 4) target event. Queries about a one-off event are unanswerable from a
  //    pooled top-k readout (two orthogonal distractors pool at equal weight),
  //    so the target prefers events whose class recurs; videos whose classes
  //    are all unique fall back to a uniform pick.
  std::vector<std::size_t> count_by_class(c, 0);
  for (std::size_t cls : s.event_classes) ++count_by_class[cls];
  std::vector<std::size_t> recurring;
  for (std::size_t ev = 0; ev < e; ++ev) {
    if (count_by_class[s.event_classes[ev]] >= 2) recurring.push_back(ev);
  }
  s.target_event = recurring.empty() ? rng.uniform_int(e)
                                     : recurring[rng.uniform_int(recurring.size())];
  s.answer = s.event_classes[s.target_event];
  s.query.resize(d);
  const auto& aproto = protos.rows[s.answer];
  for (std::size_t j = 0; j < d; ++j) {
    s.query[j] = aproto[j] + cfg.noise_sigma * rng.normal();
  }
  return s;
}

std::vector<QASample> gen_videos(const SynthConfig& cfg, const Prototypes& protos,
                                 std::uint64_t stream_seed, std::size_t count) {
  std::vector<QASample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_stream(stream_seed, static_cast<std::uint64_t>(i)));
    out.push_back(gen_video(cfg, protos, rng));
  }
  return out;
}

}  // namespace marc
