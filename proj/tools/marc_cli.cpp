// marc: command-line front end over the library. Subcommands cover dataset
// generation, the retrieval+compression pipeline, training, evaluation, and
// memory bank files. Exit codes: 0 ok, 2 configuration/usage, 3 file I/O or
// format, 4 degenerate numerics (zero norm / zero probability), 1 anything else.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "marc/bank_io.hpp"
#include "marc/cgrpo.hpp"
#include "marc/compress.hpp"
#include "marc/config.hpp"
#include "marc/dataset_io.hpp"
#include "marc/errors.hpp"
#include "marc/kernels.hpp"
#include "marc/pipeline.hpp"
#include "marc/rng.hpp"
#include "marc/synth.hpp"
#include "marc/train.hpp"
#include "marc/vmr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_free(const fs::path& path, bool force) {
  if (!force && fs::exists(path)) {
    throw marc::IoError("refusing to overwrite " + path.string() + " (pass --force)");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw marc::IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw marc::IoError("error writing " + path.string());
}

void emit_report(const json& j, const std::string& out_path, bool force) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    ensure_free(out_path, force);
    write_text(out_path, j.dump(2) + "\n");
  }
}

json compress_report_json(const marc::CompressReport& r) {
  return json{{"input_frames", r.input_frames},
              {"output_frames", r.output_frames},
              {"input_tokens", r.input_tokens},
              {"output_tokens", r.output_tokens},
              {"per_window_budgets", r.per_window_budgets},
              {"merges_performed", r.merges_performed},
              {"global_merges_performed", r.global_merges_performed}};
}

json fragment_json(const marc::MemoryFragment& f) {
  return json{{"fragment_id", f.fragment_id},
              {"video_id", f.video_id},
              {"start_frame", f.start_frame},
              {"end_frame", f.end_frame},
              {"start_time", f.start_time},
              {"end_time", f.end_time}};
}

// Per-subcommand state. Every subcommand accepts --config and --seed; the
// remaining overrides bind only where they are registered.
struct Opts {
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::size_t top_k = 0;
  double rho = 0.0;
  double tau = 0.0;
  std::size_t window_m = 0;
  std::string mode;
  std::string data_path;
  std::string in_path;
  std::string out_path;
  std::string out_dir;
  std::string policy_path;
  std::string input_kind = "compressed";
  std::size_t index = 0;
  bool force = false;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* count_opt = nullptr;
  CLI::Option* top_k_opt = nullptr;
  CLI::Option* rho_opt = nullptr;
  CLI::Option* tau_opt = nullptr;
  CLI::Option* window_m_opt = nullptr;
  CLI::Option* mode_opt = nullptr;

  marc::RunConfig resolve() const {
    marc::RunConfig cfg;
    if (!config_path.empty()) cfg = marc::parse_config_file(config_path);
    if (seed_opt && seed_opt->count()) cfg.seed = seed;
    if (count_opt && count_opt->count()) cfg.synth.num_samples = count;
    if (top_k_opt && top_k_opt->count()) cfg.retrieval.top_k = top_k;
    if (rho_opt && rho_opt->count()) cfg.compress.rho = rho;
    if (tau_opt && tau_opt->count()) cfg.cgrpo.tau = tau;
    if (window_m_opt && window_m_opt->count()) cfg.compress.window_m = window_m;
    if (mode_opt && mode_opt->count()) cfg.train.mode = marc::parse_train_mode(mode);
    marc::validate_config(cfg);
    return cfg;
  }
};

void add_common(CLI::App* sub, Opts& o) {
  sub->add_option("--config", o.config_path, "Run configuration file")
      ->check(CLI::ExistingFile);
  o.seed_opt = sub->add_option("--seed", o.seed, "Master seed override");
}

marc::Dataset load_data(const std::string& path) {
  return marc::load_dataset(path);
}

const marc::QASample& sample_at(const marc::Dataset& ds, std::size_t index) {
  if (index >= ds.samples.size()) {
    throw marc::ConfigError("--index " + std::to_string(index) + " out of range (dataset has " +
                            std::to_string(ds.samples.size()) + " samples)");
  }
  return ds.samples[index];
}

std::vector<marc::QASample> generated_eval_set(const marc::RunConfig& cfg) {
  marc::Rng proto_rng(marc::derive_stream(cfg.seed, "prototypes"));
  const marc::Prototypes protos = marc::gen_prototypes(cfg.synth, proto_rng);
  return marc::gen_videos(cfg.synth, protos, marc::derive_stream(cfg.seed, "evaldata"),
                          cfg.train.eval_samples);
}

void cmd_gen_data(const Opts& o) {
  const marc::RunConfig cfg = o.resolve();
  ensure_free(o.out_path, o.force);
  ensure_free(marc::manifest_path_for(o.out_path), o.force);

  marc::Rng proto_rng(marc::derive_stream(cfg.seed, "prototypes"));
  const marc::Prototypes protos = marc::gen_prototypes(cfg.synth, proto_rng);
  marc::Dataset ds;
  ds.num_classes = cfg.synth.num_classes;
  ds.dim = cfg.synth.dim;
  ds.patches = cfg.synth.patches;
  ds.samples = marc::gen_videos(cfg.synth, protos, marc::derive_stream(cfg.seed, "data"),
                                cfg.synth.num_samples);
  marc::save_dataset(ds, o.out_path);

  std::cout << json{{"path", o.out_path},
                    {"manifest", marc::manifest_path_for(o.out_path).string()},
                    {"num_samples", ds.samples.size()},
                    {"num_classes", ds.num_classes},
                    {"dim", ds.dim},
                    {"patches", ds.patches},
                    {"max_abs_proto_cos", protos.max_abs_cos},
                    {"seed", cfg.seed}}
                   .dump(2)
            << "\n";
}

void cmd_pipeline(const Opts& o) {
  const marc::RunConfig cfg = o.resolve();
  const marc::Dataset ds = load_data(o.data_path);
  const marc::QASample& s = sample_at(ds, o.index);

  const marc::PipelineResult res =
      marc::run_sample_pipeline(s.video, s.query, cfg.pipeline(), o.index);

  json frags = json::array();
  for (const auto& f : res.fragments) frags.push_back(fragment_json(f));
  json report{{"index", o.index},
              {"answer", s.answer},
              {"target_event", s.target_event},
              {"fragments", frags},
              {"retrieval",
               json{{"fragment_ids", res.retrieval.fragment_ids},
                    {"scores", res.retrieval.scores}}},
              {"assembled_frames", res.assembled.seq.frames.size()},
              {"assembled_source_frames", res.assembled.source_frames},
              {"compressed_frames", res.compressed.frames.size()},
              {"compress", compress_report_json(res.report)}};
  emit_report(report, o.out_path, o.force);
}

void cmd_compress(const Opts& o) {
  const marc::RunConfig cfg = o.resolve();
  const marc::Dataset ds = load_data(o.data_path);
  const marc::QASample& s = sample_at(ds, o.index);

  auto [seq, rep] = marc::compress_sequence(s.video, cfg.compress);
  json report{{"index", o.index},
              {"compress", compress_report_json(rep)},
              {"output_timestamps", seq.timestamps}};
  emit_report(report, o.out_path, o.force);
}

void cmd_train(const Opts& o) {
  const marc::RunConfig cfg = o.resolve();
  const fs::path dir = o.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw marc::IoError("cannot create " + dir.string() + ": " + ec.message());
  const fs::path metrics_path = dir / "metrics.csv";
  const fs::path policy_path = dir / "policy.json";
  const fs::path report_path = dir / "report.json";
  ensure_free(metrics_path, o.force);
  ensure_free(policy_path, o.force);
  ensure_free(report_path, o.force);

  marc::Rng proto_rng(marc::derive_stream(cfg.seed, "prototypes"));
  const marc::Prototypes protos = marc::gen_prototypes(cfg.synth, proto_rng);
  const auto train_set = marc::gen_videos(cfg.synth, protos,
                                          marc::derive_stream(cfg.seed, "data"),
                                          cfg.synth.num_samples);
  const auto eval_set = marc::gen_videos(cfg.synth, protos,
                                         marc::derive_stream(cfg.seed, "evaldata"),
                                         cfg.train.eval_samples);

  const marc::TrainOutput out = marc::train_run(train_set, eval_set, cfg);
  write_text(metrics_path, out.metrics_csv);
  marc::policy_save(out.policy, policy_path);

  const marc::StepMetrics& last = out.history.back();
  json report{{"mode", marc::train_mode_name(cfg.train.mode)},
              {"seed", cfg.seed},
              {"steps", cfg.train.steps},
              {"train_samples", train_set.size()},
              {"eval_samples", eval_set.size()},
              {"metrics", metrics_path.string()},
              {"policy", policy_path.string()},
              {"kernel_backend", marc::kernels::backend_name(marc::kernels::active())},
              {"final_grad_norm", last.grad_norm}};
  if (last.eval_acc_comp) report["final_eval_acc_comp"] = *last.eval_acc_comp;
  if (last.eval_acc_full) report["final_eval_acc_full"] = *last.eval_acc_full;
  if (last.j) report["final_objective"] = *last.j;
  write_text(report_path, report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
}

void cmd_eval(const Opts& o) {
  const marc::RunConfig cfg = o.resolve();
  const marc::ToyPolicy policy = marc::policy_load(o.policy_path);

  std::vector<marc::QASample> samples;
  if (!o.data_path.empty()) {
    samples = load_data(o.data_path).samples;
  } else {
    samples = generated_eval_set(cfg);
  }

  marc::EvalInput input = marc::EvalInput::compressed;
  if (o.input_kind == "full") input = marc::EvalInput::full;
  else if (o.input_kind != "compressed") {
    throw marc::ConfigError("--input must be 'full' or 'compressed', got '" + o.input_kind + "'");
  }

  const double acc = marc::eval_accuracy(policy, samples, input, cfg.pipeline());
  json report{{"accuracy", acc},
              {"samples", samples.size()},
              {"input", o.input_kind},
              {"policy", o.policy_path}};
  emit_report(report, o.out_path, o.force);
}

void cmd_bank_save(const Opts& o) {
  const marc::RunConfig cfg = o.resolve();
  const marc::Dataset ds = load_data(o.data_path);
  ensure_free(o.out_path, o.force);
  const marc::MemoryBank bank = marc::build_bank(ds.samples, cfg.segment);
  marc::bank_save(bank, o.out_path);
  std::cout << json{{"path", o.out_path}, {"dim", bank.dim()}, {"fragments", bank.size()}}
                   .dump(2)
            << "\n";
}

void cmd_bank_load(const Opts& o) {
  const marc::MemoryBank bank = marc::bank_load(o.in_path);
  std::cout << json{{"path", o.in_path}, {"dim", bank.dim()}, {"fragments", bank.size()}}
                   .dump(2)
            << "\n";
}

void cmd_bank_inspect(const Opts& o) {
  const marc::MemoryBank bank = marc::bank_load(o.in_path);
  json frags = json::array();
  for (const auto& f : bank.fragments()) frags.push_back(fragment_json(f));
  json report{{"path", o.in_path},
              {"dim", bank.dim()},
              {"fragments", frags}};
  emit_report(report, o.out_path, o.force);
}

int run(int argc, char** argv) {
  CLI::App app{"memory-augmented retrieval and token compression lab"};
  app.set_version_flag("--version", "marc 0.1.0");
  app.require_subcommand(1);

  Opts gen, pipe, comp, train, eval, bsave, bload, binspect;

  CLI::App* g = app.add_subcommand("gen-data", "Generate a synthetic QA dataset");
  add_common(g, gen);
  g->add_option("--out", gen.out_path, "Output .marcdata path")->required();
  gen.count_opt = g->add_option("--count", gen.count, "Sample count override");
  g->add_flag("--force", gen.force, "Overwrite existing outputs");
  g->callback([&] { cmd_gen_data(gen); });

  CLI::App* p = app.add_subcommand("pipeline", "Run retrieval + compression on one sample");
  add_common(p, pipe);
  p->add_option("--data", pipe.data_path, "Input .marcdata path")->required();
  p->add_option("--index", pipe.index, "Sample index");
  pipe.top_k_opt = p->add_option("--top-k", pipe.top_k, "Fragments to retrieve");
  pipe.rho_opt = p->add_option("--rho", pipe.rho, "Compression ratio override");
  p->add_option("--out", pipe.out_path, "Write the JSON report here instead of stdout");
  p->add_flag("--force", pipe.force, "Overwrite existing outputs");
  p->callback([&] { cmd_pipeline(pipe); });

  CLI::App* c = app.add_subcommand("compress", "Compress one raw sample sequence");
  add_common(c, comp);
  c->add_option("--data", comp.data_path, "Input .marcdata path")->required();
  c->add_option("--index", comp.index, "Sample index");
  comp.rho_opt = c->add_option("--rho", comp.rho, "Compression ratio override");
  comp.window_m_opt = c->add_option("--window-m", comp.window_m, "Window length override");
  c->add_option("--out", comp.out_path, "Write the JSON report here instead of stdout");
  c->add_flag("--force", comp.force, "Overwrite existing outputs");
  c->callback([&] { cmd_compress(comp); });

  CLI::App* t = app.add_subcommand("train", "Train the toy policy");
  add_common(t, train);
  t->add_option("--out-dir", train.out_dir, "Directory for metrics.csv, policy.json, report.json")
      ->required();
  train.mode_opt = t->add_option("--mode", train.mode, "cgrpo, grpo or sft");
  train.top_k_opt = t->add_option("--top-k", train.top_k, "Fragments to retrieve");
  train.rho_opt = t->add_option("--rho", train.rho, "Compression ratio override");
  train.tau_opt = t->add_option("--tau", train.tau, "Retention threshold override");
  t->add_flag("--force", train.force, "Overwrite existing outputs");
  t->callback([&] { cmd_train(train); });

  CLI::App* e = app.add_subcommand("eval", "Evaluate a saved policy");
  add_common(e, eval);
  e->add_option("--policy", eval.policy_path, "policy.json path")->required();
  e->add_option("--data", eval.data_path,
                "Evaluate on this dataset instead of the generated eval split");
  e->add_option("--input", eval.input_kind, "'compressed' (default) or 'full'");
  eval.top_k_opt = e->add_option("--top-k", eval.top_k, "Fragments to retrieve");
  eval.rho_opt = e->add_option("--rho", eval.rho, "Compression ratio override");
  e->add_option("--out", eval.out_path, "Write the JSON report here instead of stdout");
  e->add_flag("--force", eval.force, "Overwrite existing outputs");
  e->callback([&] { cmd_eval(eval); });

  CLI::App* b = app.add_subcommand("bank", "Memory bank files");
  b->require_subcommand(1);

  CLI::App* bs = b->add_subcommand("save", "Segment a dataset into a bank file");
  add_common(bs, bsave);
  bs->add_option("--data", bsave.data_path, "Input .marcdata path")->required();
  bs->add_option("--out", bsave.out_path, "Output .marcbank path")->required();
  bs->add_flag("--force", bsave.force, "Overwrite existing outputs");
  bs->callback([&] { cmd_bank_save(bsave); });

  CLI::App* bl = b->add_subcommand("load", "Validate a bank file and print a summary");
  bl->add_option("--in", bload.in_path, "Input .marcbank path")->required();
  bl->callback([&] { cmd_bank_load(bload); });

  CLI::App* bi = b->add_subcommand("inspect", "Dump bank contents as JSON");
  bi->add_option("--in", binspect.in_path, "Input .marcbank path")->required();
  bi->add_option("--out", binspect.out_path, "Write the JSON report here instead of stdout");
  bi->add_flag("--force", binspect.force, "Overwrite existing outputs");
  bi->callback([&] { cmd_bank_inspect(binspect); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const marc::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const marc::ZeroNormError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 4;
  } catch (const marc::ZeroProbError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 4;
  } catch (const marc::IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const marc::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
