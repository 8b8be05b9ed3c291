#pragma once

// Training driver. Per-purpose RNG substreams keep runs reproducible: the
// policy draws its init from the "init" stream and everything stochastic in
// the loop (batch indices, rollout sampling) from the "rollout" stream, so a
// seed fixes the whole trajectory byte for byte.

#include <string>
#include <vector>

#include "marc/cgrpo.hpp"
#include "marc/config.hpp"
#include "marc/pipeline.hpp"
#include "marc/rng.hpp"
#include "marc/synth.hpp"

namespace marc {

enum class EvalInput { full, compressed };

// Fraction of samples answered correctly. compressed runs each sample through
// the retrieval pipeline first (video_id = sample index). argmax ties break
// toward the smaller class; with argmax = false classes are sampled from the
// policy distribution and rng is required.
double eval_accuracy(const ToyPolicy& policy, const std::vector<QASample>& samples,
                     EvalInput input, const PipelineConfig& pipe, bool argmax = true,
                     Rng* rng = nullptr);

struct TrainOutput {
  ToyPolicy policy;
  std::string metrics_csv;  // header line plus one row per step
  std::vector<StepMetrics> history;
};

// Full training run. Compressed inputs are precomputed once per sample; each
// step draws batch_size indices from the train set (with replacement), then
// applies one cgrpo_step / sft_step. grpo mode is cgrpo with alpha forced to
// 0 and consumes the identical RNG stream. Both accuracy columns are filled
// on steps where step % eval_every == 0 and on the final step, if
// eval_samples is non-empty.
TrainOutput train_run(const std::vector<QASample>& train_samples,
                      const std::vector<QASample>& eval_samples, const RunConfig& cfg);

}  // namespace marc
