/* Copyright 2026 The msra2d Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// msra: dataset generation, training, evaluation, decoding and certification.
//
// Exit status: 0 on success, 1 for invalid arguments, configuration or input,
// 2 when gradcheck or oraclecheck exceeds its tolerance.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "msra/certify.hpp"
#include "msra/core.hpp"
#include "msra/decode.hpp"
#include "msra/lattice.hpp"
#include "msra/metrics.hpp"
#include "msra/model.hpp"
#include "msra/parallel.hpp"
#include "msra/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitCertification = 2;

struct Common {
  std::string symbols = "-0123456789";
  double lambda_h = 0.9;
  double lambda_v = 0.1;
  int threads = msra::default_threads();

  msra::LambdaParams lambda() const {
    msra::LambdaParams p{lambda_h, lambda_v};
    p.validate();
    return p;
  }
};

void add_lambda(CLI::App* cmd, Common& c) {
  cmd->add_option("--lambda-h", c.lambda_h, "Horizontal transition weight")
      ->capture_default_str();
  cmd->add_option("--lambda-v", c.lambda_v, "Vertical transition weight")
      ->capture_default_str();
}

void add_symbols(CLI::App* cmd, Common& c) {
  cmd->add_option("--symbols", c.symbols,
                  "Class symbols; the first one stands for blank")
      ->capture_default_str();
}

void add_threads(CLI::App* cmd, Common& c) {
  cmd->add_option("--threads", c.threads, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

msra::ProbGrid read_grid_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw msra::Error("cannot open grid file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw msra::InvalidInput(path.string() + ": " + e.what());
  }
  const msra::GridShape shape{j.at("h").get<int>(), j.at("w").get<int>(),
                              j.at("q").get<int>()};
  msra::ProbGrid x(shape, j.at("probs").get<std::vector<double>>());
  const msra::GridDiagnostics diag = msra::validate_grid(x);
  if (!diag.ok()) {
    throw msra::InvalidInput(path.string() + ": " + diag.summary());
  }
  return x;
}

// --- gen --------------------------------------------------------------------

struct GenArgs {
  std::string out;
  std::string layout = "stacked-rows";
  std::string idx_images;
  std::string idx_labels;
  msra::synth::DatasetSpec spec;
};

CLI::App* setup_gen(CLI::App& app, GenArgs& a, Common& c) {
  auto* cmd = app.add_subcommand("gen", "Render a synthetic dataset");
  auto& s = a.spec;
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--layout", a.layout, "stacked-rows or horizontal-vertical")
      ->capture_default_str()
      ->check(CLI::IsMember({"stacked-rows", "horizontal-vertical"}));
  cmd->add_option("--max-sequences", s.max_sequences)->capture_default_str();
  cmd->add_option("--min-length", s.min_length)->capture_default_str();
  cmd->add_option("--max-length", s.max_length)->capture_default_str();
  cmd->add_option("--length-mean", s.length_mean)->capture_default_str();
  cmd->add_option("--length-stddev", s.length_stddev)->capture_default_str();
  cmd->add_option("--jitter-px", s.jitter_px)->capture_default_str();
  cmd->add_option("--rotation-deg", s.rotation_deg)->capture_default_str();
  cmd->add_option("--noise-divisor", s.noise_divisor)->capture_default_str();
  cmd->add_option("--noise-size", s.noise_size)->capture_default_str();
  cmd->add_option("--hv-length", s.hv_length)->capture_default_str();
  cmd->add_option("--hv-slots", s.hv_slots)->capture_default_str();
  cmd->add_option("--width", s.width)->capture_default_str();
  cmd->add_option("--train-count", s.train_count)->capture_default_str();
  cmd->add_option("--test-count", s.test_count)->capture_default_str();
  cmd->add_option("--seed", s.seed)->capture_default_str();
  cmd->add_option("--charset", s.charset)->capture_default_str();
  cmd->add_option("--idx-images", a.idx_images, "IDX glyph images (optional)");
  cmd->add_option("--idx-labels", a.idx_labels, "IDX glyph labels");
  add_symbols(cmd, c);
  add_threads(cmd, c);
  return cmd;
}

int run_gen(GenArgs& a, const Common& c) {
  namespace synth = msra::synth;
  a.spec.layout = a.layout == "stacked-rows"
                      ? synth::Layout::kStackedRows
                      : synth::Layout::kHorizontalVertical;
  a.spec.validate();
  if (a.idx_images.empty() != a.idx_labels.empty()) {
    throw msra::InvalidInput("--idx-images and --idx-labels go together");
  }
  const synth::GlyphSource glyphs =
      a.idx_images.empty() ? synth::GlyphSource::builtin_digits()
                           : synth::load_idx(a.idx_images, a.idx_labels);
  synth::gen_dataset(a.spec, a.out, glyphs, msra::Alphabet(c.symbols),
                     c.threads);
  std::cout << "wrote " << a.spec.train_count << " train / "
            << a.spec.test_count << " test samples to " << a.out << "\n";
  return kExitOk;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string train;
  std::string heldout;
  std::string out;
  std::string loss = "mean-probability";
  std::string strategy = "rows";
  msra::model::TrainConfig cfg;
};

CLI::App* setup_train(CLI::App& app, TrainArgs& a, Common& c) {
  auto* cmd = app.add_subcommand("train", "Train the patch classifier");
  auto& cfg = a.cfg;
  cmd->add_option("--train", a.train, "Training JSONL")->required();
  cmd->add_option("--heldout", a.heldout, "Held-out JSONL scored every epoch");
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--epochs", cfg.epochs)->capture_default_str();
  cmd->add_option("--batch-size", cfg.batch_size)->capture_default_str();
  cmd->add_option("--rho", cfg.rho)->capture_default_str();
  cmd->add_option("--eps", cfg.eps)->capture_default_str();
  cmd->add_option("--seed", cfg.seed)->capture_default_str();
  cmd->add_option("--hidden", cfg.hidden, "Hidden units (0 = affine)")
      ->capture_default_str();
  cmd->add_option("--init-scale", cfg.init_scale)->capture_default_str();
  cmd->add_option("--loss", a.loss,
                  "mean-probability, or the non-default sum-log variant")
      ->capture_default_str()
      ->check(CLI::IsMember({"mean-probability", "sum-log"}));
  cmd->add_option("--strategy", a.strategy, "Grouping for held-out decoding")
      ->capture_default_str();
  add_lambda(cmd, c);
  add_symbols(cmd, c);
  add_threads(cmd, c);
  return cmd;
}

int run_train(TrainArgs& a, const Common& c) {
  namespace model = msra::model;
  auto& cfg = a.cfg;
  cfg.lambda = c.lambda();
  cfg.threads = c.threads;
  cfg.loss_variant = a.loss == "sum-log" ? msra::SetLossVariant::kSumLog
                                         : msra::SetLossVariant::kMeanProbability;
  cfg.eval_strategy = msra::GroupingStrategy::parse(a.strategy);
  fs::create_directories(a.out);
  cfg.checkpoint_path = fs::path(a.out) / "model.ckpt";
  cfg.validate();
  const msra::Alphabet alphabet(c.symbols);
  const auto data = msra::synth::read_dataset(a.train);
  const auto heldout = a.heldout.empty()
                           ? std::vector<msra::synth::SampleRecord>{}
                           : msra::synth::read_dataset(a.heldout);
  std::ofstream log(fs::path(a.out) / "train_log.jsonl");
  auto progress = [&](const model::EpochLog& e) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["mean_loss"] = e.mean_loss;
    std::cout << "epoch " << e.epoch << " loss " << e.mean_loss;
    if (e.heldout) {
      j["ned"] = e.heldout->ned_percent;
      j["sa"] = e.heldout->sa_percent;
      j["ia"] = e.heldout->ia_percent;
      std::cout << " NED " << e.heldout->ned_percent << " SA "
                << e.heldout->sa_percent << " IA " << e.heldout->ia_percent;
    }
    std::cout << std::endl;
    log << j.dump() << '\n' << std::flush;
  };
  try {
    model::train(data, heldout, cfg, alphabet, progress);
  } catch (const model::TrainingDiverged& e) {
    std::cerr << "error: training diverged: " << e.what() << "\n";
    return kExitInvalid;
  }
  std::cout << "checkpoint: " << cfg.checkpoint_path->string() << "\n";
  return kExitOk;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::string data;
  std::string strategy = "rows";
  std::vector<std::string> candidates;
  std::string out;
};

CLI::App* setup_eval(CLI::App& app, EvalArgs& a, Common& c) {
  auto* cmd = app.add_subcommand("eval", "Score a checkpoint on a dataset");
  cmd->add_option("--model", a.model, "Checkpoint")->required();
  cmd->add_option("--data", a.data, "Dataset JSONL")->required();
  cmd->add_option("--strategy", a.strategy)->capture_default_str();
  cmd->add_option("--select", a.candidates,
                  "Pick the best of these strategies on the data first");
  cmd->add_option("--out", a.out, "Metrics JSON path (default: stdout only)");
  add_symbols(cmd, c);
  add_threads(cmd, c);
  return cmd;
}

int run_eval(const EvalArgs& a, const Common& c) {
  const msra::Alphabet alphabet(c.symbols);
  const auto model = msra::model::load_checkpoint(a.model);
  const auto data = msra::synth::read_dataset(a.data);
  msra::GroupingStrategy strategy = msra::GroupingStrategy::parse(a.strategy);
  if (!a.candidates.empty()) {
    std::vector<msra::GroupingStrategy> cands;
    for (const auto& n : a.candidates) {
      cands.push_back(msra::GroupingStrategy::parse(n));
    }
    std::vector<msra::StrategySample> samples;
    for (const auto& r : data) {
      const auto x = msra::softmax_grid(
          msra::model::forward_model(msra::model::ImageView::of(r), model));
      samples.push_back({msra::argmax_grid(x),
                         msra::TargetSet::from_strings(r.targets, alphabet)});
    }
    const auto sel = msra::select_strategy(cands, samples, alphabet);
    for (const auto& s : sel.all) {
      std::cout << "strategy " << s.strategy.name() << " score " << s.score
                << "\n";
    }
    strategy = sel.best;
    std::cout << "selected " << strategy.name() << "\n";
  }
  const auto ev =
      msra::model::evaluate(model, data, strategy, alphabet, c.threads);
  msra::print_metrics_table(std::cout, ev.metrics);
  const std::string js = msra::metrics_json(ev.metrics);
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw msra::Error("cannot write " + a.out);
    out << js << '\n';
  } else {
    std::cout << js << '\n';
  }
  return kExitOk;
}

// --- decode -----------------------------------------------------------------

struct DecodeArgs {
  std::vector<std::string> grids;
  std::string model;
  std::string data;
  std::string strategy = "rows";
};

CLI::App* setup_decode(CLI::App& app, DecodeArgs& a, Common& c) {
  auto* cmd = app.add_subcommand(
      "decode", "Print the decoded sequences of grid files or dataset images");
  cmd->add_option("--grid", a.grids, "Grid JSON file(s)");
  cmd->add_option("--model", a.model, "Checkpoint, used with --data");
  cmd->add_option("--data", a.data, "Dataset JSONL, used with --model");
  cmd->add_option("--strategy", a.strategy)->capture_default_str();
  add_symbols(cmd, c);
  return cmd;
}

int run_decode(const DecodeArgs& a, const Common& c) {
  const msra::Alphabet alphabet(c.symbols);
  const auto strategy = msra::GroupingStrategy::parse(a.strategy);
  if (a.grids.empty() == a.data.empty()) {
    throw msra::InvalidInput("give either --grid or --model with --data");
  }
  auto emit = [&](const msra::ProbGrid& x) {
    if (x.classes() != alphabet.size()) {
      throw msra::InvalidInput("grid has " + std::to_string(x.classes()) +
                               " classes but the alphabet has " +
                               std::to_string(alphabet.size()));
    }
    const auto d = msra::decode_with_strategy(msra::argmax_grid(x), strategy,
                                              alphabet);
    std::cout << json(d.strings(alphabet)).dump() << "\n";
  };
  for (const auto& g : a.grids) emit(read_grid_file(g));
  if (!a.data.empty()) {
    if (a.model.empty()) throw msra::InvalidInput("--data needs --model");
    const auto model = msra::model::load_checkpoint(a.model);
    for (const auto& r : msra::synth::read_dataset(a.data)) {
      emit(msra::softmax_grid(
          msra::model::forward_model(msra::model::ImageView::of(r), model)));
    }
  }
  return kExitOk;
}

// --- gradcheck / oraclecheck ------------------------------------------------

struct CheckArgs {
  int trials = 0;
  std::uint64_t seed = 7;
  double tolerance = 0.0;
  double eps = 1e-6;
};

void print_report(const char* name, const msra::certify::Report& r,
                  double tolerance) {
  std::printf("%s: trials %d max_rel_err %.3e tolerance %.1e %s (%.2f s)\n",
              name, r.trials, r.max_rel_err, tolerance,
              r.within(tolerance) ? "ok" : "EXCEEDED", r.seconds);
  if (!r.within(tolerance)) {
    std::printf("  worst trial %d: %s\n", r.worst_trial, r.worst.c_str());
  }
}

CLI::App* setup_gradcheck(CLI::App& app, CheckArgs& a, Common& c) {
  auto* cmd = app.add_subcommand(
      "gradcheck", "Compare analytic gradients with central differences");
  a.trials = 50;
  a.tolerance = 1e-5;
  cmd->add_option("--trials", a.trials)->capture_default_str();
  cmd->add_option("--seed", a.seed)->capture_default_str();
  cmd->add_option("--tolerance", a.tolerance)->capture_default_str();
  cmd->add_option("--fd-eps", a.eps, "Finite-difference step")
      ->capture_default_str();
  add_lambda(cmd, c);
  return cmd;
}

int run_gradcheck(const CheckArgs& a, const Common& c) {
  const auto r =
      msra::certify::gradient_suite(a.trials, a.seed, c.lambda(), a.eps);
  print_report("grad_wrt_probs", r.probs, a.tolerance);
  print_report("grad_wrt_logits", r.logits, a.tolerance);
  return r.probs.within(a.tolerance) && r.logits.within(a.tolerance)
             ? kExitOk
             : kExitCertification;
}

CLI::App* setup_oraclecheck(CLI::App& app, CheckArgs& a, Common& c) {
  auto* cmd = app.add_subcommand(
      "oraclecheck", "Compare the lattice with brute-force path enumeration");
  a.trials = 200;
  a.tolerance = 1e-9;
  cmd->add_option("--trials", a.trials)->capture_default_str();
  cmd->add_option("--seed", a.seed)->capture_default_str();
  cmd->add_option("--tolerance", a.tolerance)->capture_default_str();
  add_lambda(cmd, c);
  return cmd;
}

int run_oraclecheck(const CheckArgs& a, const Common& c) {
  const auto r = msra::certify::oracle_suite(a.trials, a.seed, c.lambda());
  print_report("forward vs oracle", r, a.tolerance);
  return r.within(a.tolerance) ? kExitOk : kExitCertification;
}

// --- dump-alpha -------------------------------------------------------------

struct DumpArgs {
  std::string grid;
  std::string label;
  std::string out;
};

CLI::App* setup_dump(CLI::App& app, DumpArgs& a, Common& c) {
  auto* cmd = app.add_subcommand("dump-alpha",
                                 "Write the alpha/beta lattice of one label");
  cmd->add_option("--grid", a.grid, "Grid JSON file")->required();
  cmd->add_option("--label", a.label, "Target text")->required();
  cmd->add_option("--out", a.out, "CSV path (default: stdout)");
  add_lambda(cmd, c);
  add_symbols(cmd, c);
  return cmd;
}

int run_dump(const DumpArgs& a, const Common& c) {
  const msra::Alphabet alphabet(c.symbols);
  const msra::ProbGrid x = read_grid_file(a.grid);
  const msra::LabelSequence l(alphabet.encode(a.label));
  if (l.max_class() >= x.classes()) {
    throw msra::InvalidInput("label uses a class outside the grid");
  }
  const auto fwd = msra::forward(x, l, c.lambda());
  const auto bwd = msra::backward(x, l, c.lambda());
  if (a.out.empty()) {
    msra::write_alpha_beta_csv(std::cout, fwd.alpha, bwd);
  } else {
    std::ofstream out(a.out);
    if (!out) throw msra::Error("cannot write " + a.out);
    msra::write_alpha_beta_csv(out, fwd.alpha, bwd);
  }
  std::cerr << "log p = " << fwd.log_prob << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-sequence 2D-CTC toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style configuration file");

  Common common;
  GenArgs gen;
  TrainArgs train;
  EvalArgs eval;
  DecodeArgs decode;
  CheckArgs grad;
  CheckArgs orc;
  DumpArgs dump;
  auto* gen_cmd = setup_gen(app, gen, common);
  auto* train_cmd = setup_train(app, train, common);
  auto* eval_cmd = setup_eval(app, eval, common);
  auto* decode_cmd = setup_decode(app, decode, common);
  auto* grad_cmd = setup_gradcheck(app, grad, common);
  auto* orc_cmd = setup_oraclecheck(app, orc, common);
  auto* dump_cmd = setup_dump(app, dump, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  // Echoed as a config section, so it can be fed back through --config.
  CLI::App* chosen = app.get_subcommands().front();
  std::cerr << "# resolved config\n[" << chosen->get_name() << "]\n"
            << chosen->config_to_str(true, false);

  try {
    if (*gen_cmd) return run_gen(gen, common);
    if (*train_cmd) return run_train(train, common);
    if (*eval_cmd) return run_eval(eval, common);
    if (*decode_cmd) return run_decode(decode, common);
    if (*grad_cmd) return run_gradcheck(grad, common);
    if (*orc_cmd) return run_oraclecheck(orc, common);
    if (*dump_cmd) return run_dump(dump, common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
