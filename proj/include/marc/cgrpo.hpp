#pragma once

// Compression-gated group-relative policy optimization on a linear softmax
// toy policy. A group of G rollouts is sampled per question from the frozen
// step-start policy; the teacher branch (full input) only calibrates the
// retention ratio, the student branch (compressed input) carries the
// learning signal.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "marc/rng.hpp"
#include "marc/types.hpp"

namespace marc {

struct CGRPOConfig {
  double tau = 0.6;          // retention threshold before any bonus is paid
  double alpha = 1.0;        // bonus scale; 0 disables the compression term
  double beta = 0.04;        // KL penalty weight
  double eps_clip = 0.2;     // ratio clip half-width
  std::size_t group_size = 8;
  std::optional<double> eta_clamp = 1.0;  // cap on a_comp / a_full; nullopt = uncapped
  double sigma_floor = 1e-8;  // below this reward spread, advantages are all zero
  double afull_floor = 1e-8;  // below this teacher accuracy, eta is defined as 0
  bool use_ppo_min = false;   // min(ratio*A, clip(ratio)*A) instead of clip(ratio)*A
};

// eta = a_comp / a_full, 0 when the teacher accuracy is below the floor,
// capped at eta_clamp when set.
double retention_ratio(double a_comp, double a_full, const CGRPOConfig& cfg);

// r_c = alpha * max(0, eta - tau)
double compression_reward(double eta, const CGRPOConfig& cfg);

// R = r + r_c when the rollout answered correctly, else R = r.
double total_reward(double r, bool correct, double r_c);

// Group-relative advantages: (R_i - mean) / population_std, or all zeros when
// the population std is below sigma_floor. mean/std are reported if requested.
std::vector<double> normalize_advantages(const std::vector<double>& rewards,
                                         const CGRPOConfig& cfg,
                                         double* mean_out = nullptr,
                                         double* std_out = nullptr);

// KL(p || q) over categorical distributions; p entries of 0 contribute 0.
// p must sum to 1 within 1e-9; q must be fully supported (ZeroProbError).
double kl_categorical(std::span<const double> p, std::span<const double> q);

struct Rollout {
  std::size_t output_class = 0;
  double prob_new = 0.0;  // pi_theta(o | x)
  double prob_old = 0.0;  // pi_old(o | x), fixed at sampling time
  double reward = 0.0;    // r_i, binary correctness
  bool correct = false;
};

struct RolloutGroup {
  std::vector<Rollout> rollouts;
  double a_full = 0.0;
  double a_comp = 0.0;
  std::vector<double> total_rewards;  // R_i
  std::vector<double> advantages;     // A_i
  double reward_mean = 0.0;
  double reward_std = 0.0;  // population
};

// Clipped surrogate minus beta * kl, averaged over the group. The printed
// objective multiplies the advantage by the clipped ratio alone; use_ppo_min
// switches to the pessimistic min over the raw and clipped terms. Throws
// ZeroProbError when any prob_old underflows 1e-300.
double cgrpo_objective(const RolloutGroup& group, double kl, const CGRPOConfig& cfg);

// ------------------------------------------------------------------
// Toy policy
// ------------------------------------------------------------------

struct ToyPolicy {
  std::size_t classes = 0;
  std::size_t dim = 0;
  std::vector<double> W;  // classes x dim, row-major
  std::vector<double> b;  // classes
};

// Gaussian init, scale * N(0,1), W row-major first then b.
ToyPolicy init_policy(std::size_t classes, std::size_t dim, double scale, Rng& rng);

// Mean over frames of the mean-pooled patch vectors.
std::vector<double> sequence_feature(const TokenSequence& seq);

// Numerically stable softmax (max subtraction); sums to 1 within 1e-12.
std::vector<double> softmax(std::vector<double> logits);

// softmax(W x + b) for the sequence's feature vector.
std::vector<double> policy_forward(const ToyPolicy& policy, const TokenSequence& seq);

// J and its analytic gradient in (W, b) at `policy`, for one group evaluated
// on student feature x. Rollouts carry the sampled class and the old
// probability; advantages are fixed constants. ref_probs feeds the KL term.
struct ObjectiveEval {
  double j = 0.0;
  double kl = 0.0;
  std::vector<double> grad_w;  // layout of ToyPolicy::W
  std::vector<double> grad_b;
};
ObjectiveEval cgrpo_objective_grad(const ToyPolicy& policy, std::span<const double> x,
                                   const std::vector<Rollout>& rollouts,
                                   const std::vector<double>& advantages,
                                   std::span<const double> ref_probs,
                                   const CGRPOConfig& cfg);

// One training item: teacher sees `full`, student sees `comp`.
struct TrainItem {
  const TokenSequence* full = nullptr;
  const TokenSequence* comp = nullptr;
  std::size_t answer = 0;
};

struct StepMetrics {
  std::size_t step = 0;
  // batch means; unset (empty CSV cell) where a mode does not produce the value
  std::optional<double> a_full, a_comp, eta, r_c_mean;
  std::optional<double> j, kl;
  double grad_norm = 0.0;
  std::optional<double> eval_acc_comp, eval_acc_full;
};

inline constexpr const char* kMetricsCsvHeader =
    "step,a_full,a_comp,eta,r_c_mean,J,kl,grad_norm,eval_acc_comp,eval_acc_full";

std::string metrics_csv_row(const StepMetrics& m);

// One ascent step. For every batch item, in order: G student classes are
// sampled from the step-start policy on the compressed input, then G teacher
// classes on the full input; rewards are gated and normalized per group; the
// gradient of the clipped objective with the KL anchor to `ref` is averaged
// over the batch and applied with learning rate lr. Returns batch-mean metrics.
StepMetrics cgrpo_step(ToyPolicy& policy, const ToyPolicy& ref,
                       const std::vector<TrainItem>& batch, const CGRPOConfig& cfg,
                       double lr, Rng& rng);

// Supervised baseline: one cross-entropy descent step on the compressed inputs.
struct SftMetrics {
  double loss = 0.0;  // mean cross-entropy
  double grad_norm = 0.0;
};
SftMetrics sft_step(ToyPolicy& policy, const std::vector<TrainItem>& batch, double lr);

void policy_save(const ToyPolicy& policy, const std::filesystem::path& path);
ToyPolicy policy_load(const std::filesystem::path& path);

}  // namespace marc
