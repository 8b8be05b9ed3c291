#pragma once

// Flat key-value run configuration. Grammar (see README for the key table):
//   - '#' or ';' starts a comment, blank lines ignored
//   - 'seed = N' may appear before any section
//   - '[section]' opens a section; 'key = value' assigns within it
//   - unknown sections or keys are hard errors, as are out-of-range values

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "marc/cgrpo.hpp"
#include "marc/compress.hpp"
#include "marc/pipeline.hpp"
#include "marc/synth.hpp"
#include "marc/vmr.hpp"

namespace marc {

enum class TrainMode { cgrpo, grpo, sft };

struct TrainSettings {
  TrainMode mode = TrainMode::cgrpo;
  std::size_t steps = 300;
  std::size_t batch_size = 16;
  double lr = 0.05;
  std::size_t eval_every = 50;
  std::size_t eval_samples = 200;
  double init_scale = 0.01;
};

struct RetrievalSettings {
  std::size_t top_k = 3;
  AssembleConfig assemble;
};

struct RunConfig {
  std::uint64_t seed = 42;
  SynthConfig synth;
  SegmentConfig segment;
  CompressConfig compress;
  RetrievalSettings retrieval;
  CGRPOConfig cgrpo;
  TrainSettings train;

  PipelineConfig pipeline() const {
    return {segment, retrieval.top_k, retrieval.assemble, compress};
  }
};

// Parse, applying values over the defaults above. origin names the source in
// error messages. Throws ConfigError naming the offending key.
RunConfig parse_config_text(std::string_view text, const std::string& origin);
RunConfig parse_config_file(const std::filesystem::path& path);

// Range checks shared by the parser and by CLI flag overrides.
void validate_config(const RunConfig& cfg);

const char* train_mode_name(TrainMode mode);
TrainMode parse_train_mode(std::string_view name);  // ConfigError on bad name

}  // namespace marc
