#include "marc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "marc/errors.hpp"

namespace marc {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

struct Cursor {
  const std::string& origin;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
  }
};

std::uint64_t parse_u64(const Cursor& at, std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    at.fail("key " + std::string(key) + ": expected a non-negative integer, got '" +
            std::string(value) + "'");
  }
  return out;
}

std::size_t parse_size(const Cursor& at, std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(parse_u64(at, key, value));
}

double parse_double(const Cursor& at, std::string_view key, std::string_view value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    at.fail("key " + std::string(key) + ": expected a finite number, got '" +
            std::string(value) + "'");
  }
  return out;
}

bool parse_bool(const Cursor& at, std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  at.fail("key " + std::string(key) + ": expected true or false, got '" +
          std::string(value) + "'");
}

void apply_synth(const Cursor& at, SynthConfig& c, std::string_view key, std::string_view value) {
  if (key == "num_classes") c.num_classes = parse_size(at, key, value);
  else if (key == "dim") c.dim = parse_size(at, key, value);
  else if (key == "patches") c.patches = parse_size(at, key, value);
  else if (key == "events_per_video") c.events_per_video = parse_size(at, key, value);
  else if (key == "event_len_lo") c.event_len_lo = parse_size(at, key, value);
  else if (key == "event_len_hi") c.event_len_hi = parse_size(at, key, value);
  else if (key == "noise_sigma") c.noise_sigma = parse_double(at, key, value);
  else if (key == "fps") c.fps = parse_double(at, key, value);
  else if (key == "num_samples") c.num_samples = parse_size(at, key, value);
  else at.fail("unknown key " + std::string(key) + " in [synth]");
}

void apply_segment(const Cursor& at, SegmentConfig& c, std::string_view key,
                   std::string_view value) {
  if (key == "threshold_mode") {
    if (value == "fixed") c.mode = SegmentConfig::Threshold::fixed;
    else if (value == "adaptive") c.mode = SegmentConfig::Threshold::adaptive;
    else at.fail("key threshold_mode: expected fixed or adaptive, got '" +
                 std::string(value) + "'");
  } else if (key == "fixed_threshold") c.fixed_threshold = parse_double(at, key, value);
  else if (key == "mad_k") c.mad_k = parse_double(at, key, value);
  else if (key == "min_event_len") c.min_event_len = parse_size(at, key, value);
  else at.fail("unknown key " + std::string(key) + " in [segment]");
}

void apply_compress(const Cursor& at, CompressConfig& c, std::string_view key,
                    std::string_view value) {
  if (key == "rho") c.rho = parse_double(at, key, value);
  else if (key == "window_m") c.window_m = parse_size(at, key, value);
  else if (key == "target_override") {
    if (value == "none") c.target_override.reset();
    else c.target_override = parse_size(at, key, value);
  } else if (key == "weighted_merge") c.weighted_merge = parse_bool(at, key, value);
  else at.fail("unknown key " + std::string(key) + " in [compress]");
}

void apply_retrieval(const Cursor& at, RetrievalSettings& c, std::string_view key,
                     std::string_view value) {
  if (key == "top_k") c.top_k = parse_size(at, key, value);
  else if (key == "order") {
    if (value == "chronological") c.assemble.order = AssembleConfig::Order::chronological;
    else if (value == "rank") c.assemble.order = AssembleConfig::Order::rank;
    else at.fail("key order: expected chronological or rank, got '" + std::string(value) + "'");
  } else if (key == "fps") c.assemble.fps = parse_double(at, key, value);
  else if (key == "max_frames") c.assemble.max_frames = parse_size(at, key, value);
  else at.fail("unknown key " + std::string(key) + " in [retrieval]");
}

void apply_cgrpo(const Cursor& at, CGRPOConfig& c, std::string_view key,
                 std::string_view value) {
  if (key == "tau") c.tau = parse_double(at, key, value);
  else if (key == "alpha") c.alpha = parse_double(at, key, value);
  else if (key == "beta") c.beta = parse_double(at, key, value);
  else if (key == "eps_clip") c.eps_clip = parse_double(at, key, value);
  else if (key == "group_size") c.group_size = parse_size(at, key, value);
  else if (key == "eta_clamp") {
    if (value == "none") c.eta_clamp.reset();
    else c.eta_clamp = parse_double(at, key, value);
  } else if (key == "sigma_floor") c.sigma_floor = parse_double(at, key, value);
  else if (key == "afull_floor") c.afull_floor = parse_double(at, key, value);
  else if (key == "use_ppo_min") c.use_ppo_min = parse_bool(at, key, value);
  else at.fail("unknown key " + std::string(key) + " in [cgrpo]");
}

void apply_train(const Cursor& at, TrainSettings& c, std::string_view key,
                 std::string_view value) {
  if (key == "mode") {
    if (value == "cgrpo") c.mode = TrainMode::cgrpo;
    else if (value == "grpo") c.mode = TrainMode::grpo;
    else if (value == "sft") c.mode = TrainMode::sft;
    else at.fail("key mode: expected cgrpo, grpo or sft, got '" + std::string(value) + "'");
  } else if (key == "steps") c.steps = parse_size(at, key, value);
  else if (key == "batch_size") c.batch_size = parse_size(at, key, value);
  else if (key == "lr") c.lr = parse_double(at, key, value);
  else if (key == "eval_every") c.eval_every = parse_size(at, key, value);
  else if (key == "eval_samples") c.eval_samples = parse_size(at, key, value);
  else if (key == "init_scale") c.init_scale = parse_double(at, key, value);
  else at.fail("unknown key " + std::string(key) + " in [train]");
}

}  // namespace

RunConfig parse_config_text(std::string_view text, const std::string& origin) {
  RunConfig cfg;
  Cursor at{origin, 0};
  std::string section;  // empty until the first [section]
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++at.line;

    if (std::size_t hash = line.find_first_of("#;"); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        at.fail("malformed section header '" + std::string(line) + "'");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "synth" && section != "segment" && section != "compress" &&
          section != "retrieval" && section != "cgrpo" && section != "train") {
        at.fail("unknown section [" + section + "]");
      }
      continue;
    }

    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      at.fail("expected 'key = value', got '" + std::string(line) + "'");
    }
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) at.fail("empty key");
    if (value.empty()) at.fail("key " + std::string(key) + ": empty value");

    if (section.empty()) {
      if (key == "seed") cfg.seed = parse_u64(at, key, value);
      else at.fail("unknown top-level key " + std::string(key) +
                   " (only 'seed' may appear before a section)");
    } else if (section == "synth") apply_synth(at, cfg.synth, key, value);
    else if (section == "segment") apply_segment(at, cfg.segment, key, value);
    else if (section == "compress") apply_compress(at, cfg.compress, key, value);
    else if (section == "retrieval") apply_retrieval(at, cfg.retrieval, key, value);
    else if (section == "cgrpo") apply_cgrpo(at, cfg.cgrpo, key, value);
    else apply_train(at, cfg.train, key, value);

    if (eol == text.size()) break;
  }
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file: " + path.string());
  return parse_config_text(buf.str(), path.string());
}

void validate_config(const RunConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  const SynthConfig& s = cfg.synth;
  require(s.num_classes >= 1, "synth.num_classes must be >= 1");
  require(s.dim >= 1, "synth.dim must be >= 1");
  require(s.patches >= 1, "synth.patches must be >= 1");
  require(s.events_per_video >= 1, "synth.events_per_video must be >= 1");
  require(s.event_len_lo >= 1, "synth.event_len_lo must be >= 1");
  require(s.event_len_hi >= s.event_len_lo, "synth.event_len_hi must be >= event_len_lo");
  require(s.noise_sigma >= 0.0, "synth.noise_sigma must be >= 0");
  require(s.fps > 0.0, "synth.fps must be > 0");
  require(s.num_samples >= 1, "synth.num_samples must be >= 1");

  require(cfg.segment.mad_k >= 0.0, "segment.mad_k must be >= 0");
  require(cfg.segment.min_event_len >= 1, "segment.min_event_len must be >= 1");

  require(cfg.compress.rho > 0.0 && cfg.compress.rho < 1.0,
          "compress.rho must lie in (0, 1)");
  require(cfg.compress.window_m >= 1, "compress.window_m must be >= 1");
  if (cfg.compress.target_override) {
    require(*cfg.compress.target_override >= 1, "compress.target_override must be >= 1");
  }

  require(cfg.retrieval.top_k >= 1, "retrieval.top_k must be >= 1");
  require(cfg.retrieval.assemble.fps > 0.0, "retrieval.fps must be > 0");
  require(cfg.retrieval.assemble.max_frames >= 1, "retrieval.max_frames must be >= 1");

  const CGRPOConfig& g = cfg.cgrpo;
  require(g.tau >= 0.0, "cgrpo.tau must be >= 0");
  require(g.alpha >= 0.0, "cgrpo.alpha must be >= 0");
  require(g.beta >= 0.0, "cgrpo.beta must be >= 0");
  require(g.eps_clip > 0.0 && g.eps_clip < 1.0, "cgrpo.eps_clip must lie in (0, 1)");
  require(g.group_size >= 1, "cgrpo.group_size must be >= 1");
  if (g.eta_clamp) require(*g.eta_clamp > 0.0, "cgrpo.eta_clamp must be > 0 or none");
  require(g.sigma_floor >= 0.0, "cgrpo.sigma_floor must be >= 0");
  require(g.afull_floor >= 0.0, "cgrpo.afull_floor must be >= 0");

  const TrainSettings& t = cfg.train;
  require(t.steps >= 1, "train.steps must be >= 1");
  require(t.batch_size >= 1, "train.batch_size must be >= 1");
  require(t.lr > 0.0, "train.lr must be > 0");
  require(t.eval_every >= 1, "train.eval_every must be >= 1");
  require(t.eval_samples >= 1, "train.eval_samples must be >= 1");
  require(t.init_scale >= 0.0, "train.init_scale must be >= 0");
}

const char* train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::cgrpo: return "cgrpo";
    case TrainMode::grpo: return "grpo";
    case TrainMode::sft: return "sft";
  }
  return "cgrpo";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "cgrpo") return TrainMode::cgrpo;
  if (name == "grpo") return TrainMode::grpo;
  if (name == "sft") return TrainMode::sft;
  throw ConfigError("unknown train mode '" + std::string(name) +
                    "' (expected cgrpo, grpo or sft)");
}

}  // namespace marc
