#include "marc/cgrpo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include <json.hpp>

#include "marc/errors.hpp"
#include "marc/kernels.hpp"
#include "marc/vecmath.hpp"
#include "wire.hpp"

namespace marc {

namespace {

constexpr double kProbFloor = 1e-300;

std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::size_t sample_class(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    cum += probs[k];
    if (u < cum) return k;
  }
  return probs.size() - 1;  // guard against rounding in the partial sums
}

double clip(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

}  // namespace

double retention_ratio(double a_comp, double a_full, const CGRPOConfig& cfg) {
  if (a_full < cfg.afull_floor) return 0.0;
  double eta = a_comp / a_full;
  if (cfg.eta_clamp && eta > *cfg.eta_clamp) eta = *cfg.eta_clamp;
  return eta;
}

double compression_reward(double eta, const CGRPOConfig& cfg) {
  return cfg.alpha * std::max(0.0, eta - cfg.tau);
}

double total_reward(double r, bool correct, double r_c) {
  return correct ? r + r_c : r;
}

std::vector<double> normalize_advantages(const std::vector<double>& rewards,
                                         const CGRPOConfig& cfg, double* mean_out,
                                         double* std_out) {
  if (rewards.empty()) throw ConfigError("advantage normalization needs a non-empty group");
  const auto g = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= g;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= g;  // population variance
  const double sd = std::sqrt(var);
  if (mean_out != nullptr) *mean_out = mean;
  if (std_out != nullptr) *std_out = sd;
  std::vector<double> adv(rewards.size(), 0.0);
  if (sd < cfg.sigma_floor) return adv;  // degenerate group: no signal
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

double kl_categorical(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimMismatchError("kl_categorical: length mismatch");
  if (p.empty()) throw DimMismatchError("kl_categorical: empty distributions");
  double sum = 0.0;
  for (double x : p) {
    if (x < 0.0) throw Error("kl_categorical: negative probability");
    sum += x;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw Error("kl_categorical: p sums to " + std::to_string(sum) + ", not 1");
  }
  for (double x : q) {
    if (x <= 0.0) throw ZeroProbError("kl_categorical: reference is not fully supported");
  }
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) kl += p[k] * std::log(p[k] / q[k]);
  }
  return kl;
}

double cgrpo_objective(const RolloutGroup& group, double kl, const CGRPOConfig& cfg) {
  const std::size_t g = group.rollouts.size();
  if (g == 0) throw ConfigError("objective needs a non-empty group");
  if (group.advantages.size() != g) {
    throw DimMismatchError("group has " + std::to_string(group.advantages.size()) +
                           " advantages for " + std::to_string(g) + " rollouts");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    const Rollout& r = group.rollouts[i];
    if (r.prob_old < kProbFloor) {
      throw ZeroProbError("rollout " + std::to_string(i) + " has vanishing old probability");
    }
    const double ratio = r.prob_new / r.prob_old;
    const double clipped = clip(ratio, 1.0 - cfg.eps_clip, 1.0 + cfg.eps_clip);
    const double a = group.advantages[i];
    acc += cfg.use_ppo_min ? std::min(ratio * a, clipped * a) : clipped * a;
  }
  return acc / static_cast<double>(g) - cfg.beta * kl;
}

ToyPolicy init_policy(std::size_t classes, std::size_t dim, double scale, Rng& rng) {
  if (classes < 1 || dim < 1) throw ConfigError("policy needs classes >= 1 and dim >= 1");
  ToyPolicy p;
  p.classes = classes;
  p.dim = dim;
  p.W.resize(classes * dim);
  p.b.resize(classes);
  for (auto& w : p.W) w = scale * rng.normal();
  for (auto& x : p.b) x = scale * rng.normal();
  return p;
}

std::vector<double> sequence_feature(const TokenSequence& seq) {
  validate(seq);
  const std::size_t d = seq.frames.front().dim;
  std::vector<double> acc(d, 0.0);
  for (const TokenGrid& f : seq.frames) {
    const std::vector<double> pooled = mean_pool(f);
    kernels::add_inplace(acc.data(), pooled.data(), d);
  }
  kernels::scale(acc.data(), 1.0 / static_cast<double>(seq.size()), d);
  return acc;
}

std::vector<double> softmax(std::vector<double> logits) {
  if (logits.empty()) throw DimMismatchError("softmax of an empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto& z : logits) {
    z = std::exp(z - m);
    sum += z;
  }
  for (auto& z : logits) z /= sum;
  return logits;
}

namespace {

std::vector<double> policy_probs(const ToyPolicy& policy, std::span<const double> x) {
  if (x.size() != policy.dim) {
    throw DimMismatchError("feature has dim " + std::to_string(x.size()) +
                           ", policy expects " + std::to_string(policy.dim));
  }
  std::vector<double> logits(policy.classes);
  for (std::size_t c = 0; c < policy.classes; ++c) {
    logits[c] = kernels::dot(policy.W.data() + c * policy.dim, x.data(), policy.dim) +
                policy.b[c];
  }
  return softmax(std::move(logits));
}

}  // namespace

std::vector<double> policy_forward(const ToyPolicy& policy, const TokenSequence& seq) {
  return policy_probs(policy, sequence_feature(seq));
}

ObjectiveEval cgrpo_objective_grad(const ToyPolicy& policy, std::span<const double> x,
                                   const std::vector<Rollout>& rollouts,
                                   const std::vector<double>& advantages,
                                   std::span<const double> ref_probs,
                                   const CGRPOConfig& cfg) {
  const std::size_t g = rollouts.size();
  if (g == 0) throw ConfigError("objective needs a non-empty group");
  if (advantages.size() != g) throw DimMismatchError("advantages do not match rollouts");
  if (ref_probs.size() != policy.classes) {
    throw DimMismatchError("reference distribution does not match class count");
  }

  const std::vector<double> probs = policy_probs(policy, x);
  const double kl = kl_categorical(probs, ref_probs);

  ObjectiveEval out;
  out.kl = kl;
  std::vector<double> gz(policy.classes, 0.0);

  double acc = 0.0;
  const double inv_g = 1.0 / static_cast<double>(g);
  for (std::size_t i = 0; i < g; ++i) {
    const Rollout& r = rollouts[i];
    if (r.output_class >= policy.classes) throw DimMismatchError("rollout class out of range");
    if (r.prob_old < kProbFloor) {
      throw ZeroProbError("rollout " + std::to_string(i) + " has vanishing old probability");
    }
    const double ratio = probs[r.output_class] / r.prob_old;
    const double clipped = clip(ratio, 1.0 - cfg.eps_clip, 1.0 + cfg.eps_clip);
    const double a = advantages[i];

    double term;
    bool flows;  // does d(term)/d(ratio) equal a (vs 0)?
    if (cfg.use_ppo_min) {
      const double raw = ratio * a;
      const double capped = clipped * a;
      if (raw <= capped) {
        term = raw;
        flows = true;  // ties take the unclipped branch
      } else {
        term = capped;
        flows = ratio > 1.0 - cfg.eps_clip && ratio < 1.0 + cfg.eps_clip;
      }
    } else {
      term = clipped * a;
      flows = ratio > 1.0 - cfg.eps_clip && ratio < 1.0 + cfg.eps_clip;
    }
    acc += term;

    if (flows) {
      // d(ratio)/dz = ratio * (e_o - probs)
      const double coef = inv_g * a * ratio;
      for (std::size_t k = 0; k < policy.classes; ++k) gz[k] -= coef * probs[k];
      gz[r.output_class] += coef;
    }
  }
  out.j = acc * inv_g - cfg.beta * kl;

  // KL gradient wrt logits: probs .* (log(probs/ref) - kl)
  for (std::size_t k = 0; k < policy.classes; ++k) {
    if (probs[k] > 0.0) {
      gz[k] -= cfg.beta * probs[k] * (std::log(probs[k] / ref_probs[k]) - kl);
    }
  }

  out.grad_w.assign(policy.classes * policy.dim, 0.0);
  out.grad_b = gz;
  for (std::size_t k = 0; k < policy.classes; ++k) {
    kernels::axpy(gz[k], x.data(), out.grad_w.data() + k * policy.dim, policy.dim);
  }
  return out;
}

std::string metrics_csv_row(const StepMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); };
  std::string row = std::to_string(m.step);
  row += ',';
  row += opt(m.a_full);
  row += ',';
  row += opt(m.a_comp);
  row += ',';
  row += opt(m.eta);
  row += ',';
  row += opt(m.r_c_mean);
  row += ',';
  row += opt(m.j);
  row += ',';
  row += opt(m.kl);
  row += ',';
  row += fmt_double(m.grad_norm);
  row += ',';
  row += opt(m.eval_acc_comp);
  row += ',';
  row += opt(m.eval_acc_full);
  return row;
}

StepMetrics cgrpo_step(ToyPolicy& policy, const ToyPolicy& ref,
                       const std::vector<TrainItem>& batch, const CGRPOConfig& cfg,
                       double lr, Rng& rng) {
  if (batch.empty()) throw ConfigError("training step needs a non-empty batch");
  if (cfg.group_size < 1) throw ConfigError("group_size must be >= 1");
  const std::size_t g = cfg.group_size;
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  std::vector<double> gw(policy.classes * policy.dim, 0.0);
  std::vector<double> gb(policy.classes, 0.0);
  double sum_afull = 0, sum_acomp = 0, sum_eta = 0, sum_rc = 0, sum_j = 0, sum_kl = 0;

  for (const TrainItem& item : batch) {
    if (item.full == nullptr || item.comp == nullptr) {
      throw ConfigError("training item is missing a sequence");
    }
    if (item.answer >= policy.classes) throw ConfigError("answer class out of range");

    const std::vector<double> x_comp = sequence_feature(*item.comp);
    const std::vector<double> x_full = sequence_feature(*item.full);
    const std::vector<double> p_comp = policy_probs(policy, x_comp);
    const std::vector<double> p_full = policy_probs(policy, x_full);

    // student group first, then teacher group; both from the step-start policy
    std::vector<std::size_t> student(g), teacher(g);
    for (auto& s : student) s = sample_class(p_comp, rng);
    for (auto& t : teacher) t = sample_class(p_full, rng);

    double a_comp = 0.0, a_full = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      a_comp += student[i] == item.answer ? 1.0 : 0.0;
      a_full += teacher[i] == item.answer ? 1.0 : 0.0;
    }
    a_comp /= static_cast<double>(g);
    a_full /= static_cast<double>(g);

    const double eta = retention_ratio(a_comp, a_full, cfg);
    const double r_c = compression_reward(eta, cfg);

    std::vector<Rollout> rollouts(g);
    std::vector<double> totals(g);
    for (std::size_t i = 0; i < g; ++i) {
      const bool correct = student[i] == item.answer;
      rollouts[i].output_class = student[i];
      rollouts[i].prob_new = p_comp[student[i]];
      rollouts[i].prob_old = p_comp[student[i]];
      rollouts[i].reward = correct ? 1.0 : 0.0;
      rollouts[i].correct = correct;
      totals[i] = total_reward(rollouts[i].reward, correct, r_c);
    }
    const std::vector<double> adv = normalize_advantages(totals, cfg);

    const std::vector<double> ref_probs = policy_probs(ref, x_comp);
    const ObjectiveEval eval =
        cgrpo_objective_grad(policy, x_comp, rollouts, adv, ref_probs, cfg);

    kernels::add_inplace(gw.data(), eval.grad_w.data(), gw.size());
    kernels::add_inplace(gb.data(), eval.grad_b.data(), gb.size());
    sum_afull += a_full;
    sum_acomp += a_comp;
    sum_eta += eta;
    sum_rc += r_c;
    sum_j += eval.j;
    sum_kl += eval.kl;
  }

  kernels::scale(gw.data(), inv_b, gw.size());
  kernels::scale(gb.data(), inv_b, gb.size());
  const double grad_norm = std::sqrt(kernels::dot(gw.data(), gw.data(), gw.size()) +
                                     kernels::dot(gb.data(), gb.data(), gb.size()));
  kernels::axpy(lr, gw.data(), policy.W.data(), policy.W.size());
  kernels::axpy(lr, gb.data(), policy.b.data(), policy.b.size());

  StepMetrics m;
  m.a_full = sum_afull * inv_b;
  m.a_comp = sum_acomp * inv_b;
  m.eta = sum_eta * inv_b;
  m.r_c_mean = sum_rc * inv_b;
  m.j = sum_j * inv_b;
  m.kl = sum_kl * inv_b;
  m.grad_norm = grad_norm;
  return m;
}

SftMetrics sft_step(ToyPolicy& policy, const std::vector<TrainItem>& batch, double lr) {
  if (batch.empty()) throw ConfigError("training step needs a non-empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  std::vector<double> gw(policy.classes * policy.dim, 0.0);
  std::vector<double> gb(policy.classes, 0.0);
  double loss = 0.0;

  for (const TrainItem& item : batch) {
    if (item.comp == nullptr) throw ConfigError("training item is missing a sequence");
    if (item.answer >= policy.classes) throw ConfigError("answer class out of range");
    const std::vector<double> x = sequence_feature(*item.comp);
    const std::vector<double> probs = policy_probs(policy, x);
    const double p_ans = probs[item.answer];
    if (p_ans < kProbFloor) throw ZeroProbError("answer probability underflowed");
    loss += -std::log(p_ans);
    // d(-log p_ans)/dz = probs - e_ans
    for (std::size_t k = 0; k < policy.classes; ++k) {
      const double gzk = probs[k] - (k == item.answer ? 1.0 : 0.0);
      gb[k] += gzk;
      kernels::axpy(gzk, x.data(), gw.data() + k * policy.dim, policy.dim);
    }
  }

  kernels::scale(gw.data(), inv_b, gw.size());
  kernels::scale(gb.data(), inv_b, gb.size());
  SftMetrics m;
  m.loss = loss * inv_b;
  m.grad_norm = std::sqrt(kernels::dot(gw.data(), gw.data(), gw.size()) +
                          kernels::dot(gb.data(), gb.data(), gb.size()));
  kernels::axpy(-lr, gw.data(), policy.W.data(), policy.W.size());
  kernels::axpy(-lr, gb.data(), policy.b.data(), policy.b.size());
  return m;
}

void policy_save(const ToyPolicy& policy, const std::filesystem::path& path) {
  nlohmann::json j;
  j["classes"] = policy.classes;
  j["dim"] = policy.dim;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t c = 0; c < policy.classes; ++c) {
    rows.push_back(std::vector<double>(policy.W.begin() + c * policy.dim,
                                       policy.W.begin() + (c + 1) * policy.dim));
  }
  j["W"] = std::move(rows);
  j["b"] = policy.b;

  wire::AtomicWriter writer(path);
  writer.stream() << j.dump(2) << '\n';
  writer.commit();
}

ToyPolicy policy_load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string() + " for reading");
  nlohmann::json j;
  try {
    is >> j;
    ToyPolicy p;
    p.classes = j.at("classes").get<std::size_t>();
    p.dim = j.at("dim").get<std::size_t>();
    p.b = j.at("b").get<std::vector<double>>();
    const auto& rows = j.at("W");
    if (p.classes < 1 || p.dim < 1 || rows.size() != p.classes || p.b.size() != p.classes) {
      throw FormatError("policy file has inconsistent shapes");
    }
    p.W.reserve(p.classes * p.dim);
    for (const auto& row : rows) {
      const auto vals = row.get<std::vector<double>>();
      if (vals.size() != p.dim) throw FormatError("policy file has inconsistent shapes");
      p.W.insert(p.W.end(), vals.begin(), vals.end());
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("cannot parse policy file " + path.string() + ": " + e.what());
  }
}

}  // namespace marc
