#pragma once

// Synthetic event-structured feature videos with retrieval-answerable QA:
// class prototypes in feature space, videos as runs of prototype-plus-noise
// frames, a query near the target event's prototype, and the planted event
// boundaries kept as ground truth.

#include <cstdint>
#include <vector>

#include "marc/rng.hpp"
#include "marc/types.hpp"

namespace marc {

struct SynthConfig {
  std::size_t num_classes = 4;      // C
  std::size_t dim = 16;             // d
  std::size_t patches = 4;          // P
  std::size_t events_per_video = 6; // E
  std::size_t event_len_lo = 4;     // frames per event, inclusive bounds
  std::size_t event_len_hi = 8;
  double noise_sigma = 0.05;
  double fps = 1.0;                 // timestamps are frame_index / fps
  std::size_t num_samples = 500;
};

struct QASample {
  TokenSequence video;
  std::vector<double> query;                    // answer prototype + noise, not normalized
  std::size_t answer = 0;                       // class of the target event
  std::size_t target_event = 0;
  std::vector<std::size_t> event_classes;       // per event, no immediate repeats
  std::vector<std::size_t> planted_boundaries;  // t where frames t and t+1 differ in event
};

struct Prototypes {
  std::vector<std::vector<double>> rows;  // C unit vectors of length d
  // Largest |cos| between distinct prototypes; 0 when C <= d (orthonormal set).
  double max_abs_cos = 0.0;
};

// C <= d: random orthonormal set via Gram-Schmidt on Gaussian draws.
// C > d: independent random unit vectors, pairwise overlap recorded.
Prototypes gen_prototypes(const SynthConfig& cfg, Rng& rng);

// Draw order is fixed (classes, lengths, frame noise by t/p/j, target event,
// query noise), so one seed reproduces the sample exactly.
QASample gen_video(const SynthConfig& cfg, const Prototypes& protos, Rng& rng);

// count videos, each from its own derived substream of stream_seed, so sample
// i is reproducible in isolation.
std::vector<QASample> gen_videos(const SynthConfig& cfg, const Prototypes& protos,
                                 std::uint64_t stream_seed, std::size_t count);

}  // namespace marc
