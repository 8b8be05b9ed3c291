#include "marc/train.hpp"

#include <utility>

#include "marc/errors.hpp"
#include "marc/kernels.hpp"

namespace marc {
namespace {

std::vector<double> feature_probs(const ToyPolicy& p, const std::vector<double>& x) {
  std::vector<double> logits(p.classes);
  for (std::size_t k = 0; k < p.classes; ++k) {
    logits[k] = kernels::dot(p.W.data() + k * p.dim, x.data(), p.dim) + p.b[k];
  }
  return softmax(std::move(logits));
}

std::size_t argmax_class(const std::vector<double>& probs) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[best]) best = k;
  }
  return best;
}

std::size_t sample_from(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    cum += probs[k];
    if (u < cum) return k;
  }
  return probs.size() - 1;
}

}  // namespace

double eval_accuracy(const ToyPolicy& policy, const std::vector<QASample>& samples,
                     EvalInput input, const PipelineConfig& pipe, bool argmax, Rng* rng) {
  if (samples.empty()) throw ConfigError("eval_accuracy: empty sample set");
  if (!argmax && rng == nullptr) {
    throw ConfigError("eval_accuracy: sampling mode requires an rng");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const QASample& s = samples[i];
    std::vector<double> probs;
    if (input == EvalInput::full) {
      probs = policy_forward(policy, s.video);
    } else {
      PipelineResult res = run_sample_pipeline(s.video, s.query, pipe, i);
      probs = policy_forward(policy, res.compressed);
    }
    const std::size_t pred = argmax ? argmax_class(probs) : sample_from(probs, *rng);
    if (pred == s.answer) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainOutput train_run(const std::vector<QASample>& train_samples,
                      const std::vector<QASample>& eval_samples, const RunConfig& cfg) {
  if (train_samples.empty()) throw ConfigError("train_run: empty train set");
  validate_config(cfg);

  CGRPOConfig g = cfg.cgrpo;
  if (cfg.train.mode == TrainMode::grpo) g.alpha = 0.0;
  const PipelineConfig pipe = cfg.pipeline();

  // The pipeline is deterministic, so compressed inputs are fixed per sample
  // and computed once up front.
  const std::size_t n_train = train_samples.size();
  std::vector<TokenSequence> train_comp(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    train_comp[i] =
        run_sample_pipeline(train_samples[i].video, train_samples[i].query, pipe, i)
            .compressed;
  }
  std::vector<std::vector<double>> eval_feat_comp(eval_samples.size());
  std::vector<std::vector<double>> eval_feat_full(eval_samples.size());
  for (std::size_t i = 0; i < eval_samples.size(); ++i) {
    eval_feat_comp[i] = sequence_feature(
        run_sample_pipeline(eval_samples[i].video, eval_samples[i].query, pipe, i)
            .compressed);
    eval_feat_full[i] = sequence_feature(eval_samples[i].video);
  }

  Rng init_rng(derive_stream(cfg.seed, "init"));
  ToyPolicy policy =
      init_policy(cfg.synth.num_classes, cfg.synth.dim, cfg.train.init_scale, init_rng);
  const ToyPolicy ref = policy;

  Rng rng(derive_stream(cfg.seed, "rollout"));

  auto eval_pass = [&](const std::vector<std::vector<double>>& feats) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < feats.size(); ++i) {
      if (argmax_class(feature_probs(policy, feats[i])) == eval_samples[i].answer) {
        ++correct;
      }
    }
    return static_cast<double>(correct) / static_cast<double>(feats.size());
  };

  TrainOutput out;
  out.metrics_csv = std::string(kMetricsCsvHeader) + "\n";
  out.history.reserve(cfg.train.steps);

  std::vector<TrainItem> batch(cfg.train.batch_size);
  for (std::size_t step = 1; step <= cfg.train.steps; ++step) {
    // Batch indices are drawn before any per-item sampling so every mode
    // sees the same batches under the same seed.
    for (std::size_t j = 0; j < cfg.train.batch_size; ++j) {
      const std::size_t i = rng.uniform_int(n_train);
      batch[j] = {&train_samples[i].video, &train_comp[i], train_samples[i].answer};
    }

    StepMetrics m;
    if (cfg.train.mode == TrainMode::sft) {
      const SftMetrics sm = sft_step(policy, batch, cfg.train.lr);
      m.j = -sm.loss;
      m.grad_norm = sm.grad_norm;
    } else {
      m = cgrpo_step(policy, ref, batch, g, cfg.train.lr, rng);
    }
    m.step = step;

    if (!eval_samples.empty() &&
        (step % cfg.train.eval_every == 0 || step == cfg.train.steps)) {
      m.eval_acc_comp = eval_pass(eval_feat_comp);
      m.eval_acc_full = eval_pass(eval_feat_full);
    }

    out.metrics_csv += metrics_csv_row(m);
    out.metrics_csv += "\n";
    out.history.push_back(m);
  }

  out.policy = std::move(policy);
  return out;
}

}  // namespace marc
