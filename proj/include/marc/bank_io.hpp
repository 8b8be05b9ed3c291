#pragma once

// MARCBANK container, version 1, little-endian throughout:
//   magic   8 bytes  "MARCBANK"
//   u32     version  (1)
//   u32     d        embedding dimension
//   u32     n        fragment count
// then n records:
//   u64 fragment_id, u64 video_id, u64 start_frame, u64 end_frame,
//   f64 start_time, f64 end_time, d x f64 embedding
//
// Saves are atomic (temp file + rename). Loads reject wrong magic, unknown
// versions, truncation, trailing bytes, and records violating bank invariants.

#include <filesystem>

#include "marc/vmr.hpp"

namespace marc {

void bank_save(const MemoryBank& bank, const std::filesystem::path& path);
MemoryBank bank_load(const std::filesystem::path& path);

}  // namespace marc
