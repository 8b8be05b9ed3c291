#pragma once

// MARCDATA container, version 1, little-endian throughout:
//   magic   8 bytes  "MARCDATA"
//   u32     version (1)
//   u32     n_samples
//   u32     num_classes, u32 dim, u32 patches
// then per sample:
//   u32 n_frames, u32 h_patches, u32 w_patches
//   n_frames x f64 timestamps
//   n_frames x (patches x dim) f64 token payload
//   dim x f64 query
//   u32 answer, u32 target_event
//   u32 n_events + n_events x u32 event classes
//   u32 n_boundaries + n_boundaries x u32 planted boundaries
//
// save_dataset also writes "<path>.manifest.json" with per-sample metadata.
// Saves are atomic; loads reject wrong magic, unknown versions, truncation,
// and trailing bytes.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "marc/synth.hpp"

namespace marc {

struct Dataset {
  std::size_t num_classes = 0;
  std::size_t dim = 0;
  std::size_t patches = 0;
  std::vector<QASample> samples;
};

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

std::filesystem::path manifest_path_for(const std::filesystem::path& data_path);

}  // namespace marc
