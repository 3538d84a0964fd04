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

#include "msra/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "msra/parallel.hpp"

namespace msra::model {

PatchClassifier PatchClassifier::create(int classes, int hidden, int patch_h,
                                        int patch_w, std::uint64_t seed,
                                        double init_scale) {
  if (classes < 2 || hidden < 0 || patch_h <= 0 || patch_w <= 0) {
    throw InvalidInput("invalid patch classifier dimensions");
  }
  PatchClassifier m;
  m.classes = classes;
  m.hidden = hidden;
  m.patch_h = patch_h;
  m.patch_w = patch_w;
  m.params.assign(m.param_count(), 0.0);
  std::mt19937_64 rng(seed);
  // Glorot-uniform bound for a fan_in x fan_out layer, times init_scale.
  auto fill = [&](std::size_t offset, std::size_t fan_out, std::size_t fan_in) {
    const double bound =
        init_scale * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t n = 0; n < fan_out * fan_in; ++n) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      m.params[offset + n] = (2.0 * u - 1.0) * bound;
    }
  };
  const auto n_in = static_cast<std::size_t>(m.inputs());
  const auto q = static_cast<std::size_t>(classes);
  if (hidden == 0) {
    fill(0, q, n_in);
  } else {
    const auto h = static_cast<std::size_t>(hidden);
    fill(0, h, n_in);
    fill(h * n_in + h, q, h);
  }
  return m;
}

std::size_t PatchClassifier::param_count() const {
  const auto n_in = static_cast<std::size_t>(inputs());
  const auto q = static_cast<std::size_t>(classes);
  if (hidden == 0) return q * n_in + q;
  const auto h = static_cast<std::size_t>(hidden);
  return h * n_in + h + q * h + q;
}

GridShape PatchClassifier::grid_shape(int image_h, int image_w) const {
  if (image_h <= 0 || image_w <= 0 || image_h % patch_h != 0 ||
      image_w % patch_w != 0) {
    throw InvalidInput("image " + std::to_string(image_h) + "x" +
                       std::to_string(image_w) + " is not divisible into " +
                       std::to_string(patch_h) + "x" + std::to_string(patch_w) +
                       " patches");
  }
  return {image_h / patch_h, image_w / patch_w, classes};
}

namespace {

// Non-zero inputs of one patch, already scaled to [0, 1].
struct SparsePatch {
  std::vector<std::uint32_t> index;
  std::vector<double> value;
};

SparsePatch extract_patch(const ImageView& img, const PatchClassifier& m,
                          int pi, int pj) {
  SparsePatch p;
  for (int y = 0; y < m.patch_h; ++y) {
    const auto row = static_cast<std::size_t>(pi * m.patch_h + y) *
                     static_cast<std::size_t>(img.width);
    for (int x = 0; x < m.patch_w; ++x) {
      const std::uint8_t v =
          img.pixels[row + static_cast<std::size_t>(pj * m.patch_w + x)];
      if (v == 0) continue;
      p.index.push_back(static_cast<std::uint32_t>(y * m.patch_w + x));
      p.value.push_back(v / 255.0);
    }
  }
  return p;
}

void check_image(const ImageView& img) {
  if (img.pixels.size() != static_cast<std::size_t>(img.height) *
                               static_cast<std::size_t>(img.width)) {
    throw InvalidInput("image pixel count does not match its dimensions");
  }
}

// Pre-activations of the first layer: out[r] = bias[r] + W[r] . patch.
void affine_sparse(const double* w, const double* bias, std::size_t rows,
                   std::size_t cols, const SparsePatch& p, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = bias[r];
    const double* wr = w + r * cols;
    for (std::size_t n = 0; n < p.index.size(); ++n) {
      acc += wr[p.index[n]] * p.value[n];
    }
    out[r] = acc;
  }
}

}  // namespace

LogitsGrid forward_model(const ImageView& img, const PatchClassifier& m) {
  check_image(img);
  if (m.params.size() != m.param_count()) {
    throw InvalidInput("model parameter vector has the wrong size");
  }
  const GridShape shape = m.grid_shape(img.height, img.width);
  LogitsGrid out(shape);
  const auto n_in = static_cast<std::size_t>(m.inputs());
  const auto q = static_cast<std::size_t>(m.classes);
  const auto h = static_cast<std::size_t>(m.hidden);
  std::vector<double> act(h);
  for (int i = 0; i < shape.height; ++i) {
    for (int j = 0; j < shape.width; ++j) {
      const SparsePatch p = extract_patch(img, m, i, j);
      double* z = out.cell(i, j).data();
      if (h == 0) {
        affine_sparse(m.params.data(), m.params.data() + q * n_in, q, n_in, p, z);
        continue;
      }
      affine_sparse(m.params.data(), m.params.data() + h * n_in, h, n_in, p,
                    act.data());
      for (double& a : act) a = std::max(a, 0.0);
      const double* w2 = m.params.data() + h * n_in + h;
      const double* b2 = w2 + q * h;
      for (std::size_t k = 0; k < q; ++k) {
        double acc = b2[k];
        for (std::size_t r = 0; r < h; ++r) acc += w2[k * h + r] * act[r];
        z[k] = acc;
      }
    }
  }
  return out;
}

std::vector<double> backward_model(const ImageView& img,
                                   const PatchClassifier& m,
                                   const GridGradient& logit_grad) {
  check_image(img);
  const GridShape shape = m.grid_shape(img.height, img.width);
  if (!(logit_grad.shape() == shape)) {
    throw InvalidInput("logit gradient shape does not match the model output");
  }
  const auto n_in = static_cast<std::size_t>(m.inputs());
  const auto q = static_cast<std::size_t>(m.classes);
  const auto h = static_cast<std::size_t>(m.hidden);
  std::vector<double> grad(m.param_count(), 0.0);
  std::vector<double> pre(h), act(h), dact(h);
  for (int i = 0; i < shape.height; ++i) {
    for (int j = 0; j < shape.width; ++j) {
      const auto g = logit_grad.cell(i, j);
      if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) {
        continue;
      }
      const SparsePatch p = extract_patch(img, m, i, j);
      if (h == 0) {
        double* dw = grad.data();
        double* db = grad.data() + q * n_in;
        for (std::size_t k = 0; k < q; ++k) {
          db[k] += g[k];
          double* row = dw + k * n_in;
          for (std::size_t n = 0; n < p.index.size(); ++n) {
            row[p.index[n]] += g[k] * p.value[n];
          }
        }
        continue;
      }
      affine_sparse(m.params.data(), m.params.data() + h * n_in, h, n_in, p,
                    pre.data());
      for (std::size_t r = 0; r < h; ++r) act[r] = std::max(pre[r], 0.0);
      const double* w2 = m.params.data() + h * n_in + h;
      double* dw1 = grad.data();
      double* db1 = grad.data() + h * n_in;
      double* dw2 = db1 + h;
      double* db2 = dw2 + q * h;
      std::fill(dact.begin(), dact.end(), 0.0);
      for (std::size_t k = 0; k < q; ++k) {
        db2[k] += g[k];
        for (std::size_t r = 0; r < h; ++r) {
          dw2[k * h + r] += g[k] * act[r];
          dact[r] += w2[k * h + r] * g[k];
        }
      }
      for (std::size_t r = 0; r < h; ++r) {
        if (pre[r] <= 0.0) continue;
        db1[r] += dact[r];
        double* row = dw1 + r * n_in;
        for (std::size_t n = 0; n < p.index.size(); ++n) {
          row[p.index[n]] += dact[r] * p.value[n];
        }
      }
    }
  }
  return grad;
}

void adadelta_step(std::span<double> params, std::span<const double> grads,
                   AdadeltaState& state) {
  if (params.size() != grads.size() ||
      params.size() != state.mean_sq_grad.size() ||
      params.size() != state.mean_sq_update.size()) {
    throw InvalidInput("ADADELTA shapes do not match");
  }
  const double rho = state.rho;
  const double eps = state.eps;
  for (std::size_t n = 0; n < params.size(); ++n) {
    const double g = grads[n];
    double& eg2 = state.mean_sq_grad[n];
    double& ed2 = state.mean_sq_update[n];
    eg2 = rho * eg2 + (1.0 - rho) * g * g;
    const double delta = -std::sqrt(ed2 + eps) / std::sqrt(eg2 + eps) * g;
    ed2 = rho * ed2 + (1.0 - rho) * delta * delta;
    params[n] += delta;
  }
}

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidInput("epochs must be >= 0");
  if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("rho must lie in (0, 1)");
  if (!(eps > 0.0)) throw InvalidInput("eps must be > 0");
  if (hidden < 0) throw InvalidInput("hidden must be >= 0");
  if (threads < 1) throw InvalidInput("threads must be >= 1");
  lambda.validate();
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["rho"] = rho;
  j["eps"] = eps;
  j["lambda_horizontal"] = lambda.horizontal;
  j["lambda_vertical"] = lambda.vertical;
  j["seed"] = seed;
  j["loss_variant"] = loss_variant == SetLossVariant::kMeanProbability
                          ? "mean-probability"
                          : "sum-log";
  j["hidden"] = hidden;
  j["init_scale"] = init_scale;
  j["threads"] = threads;
  j["eval_strategy"] = eval_strategy.name();
  return j;
}

namespace {

struct SampleGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

SampleGrad sample_gradient(const PatchClassifier& model,
                           const synth::SampleRecord& r,
                           const Alphabet& alphabet, const TrainConfig& cfg,
                           bool with_grad) {
  const ImageView img = ImageView::of(r);
  const LogitsGrid z = forward_model(img, model);
  for (double v : z.data()) {
    if (!std::isfinite(v)) throw TrainingDiverged("non-finite logits");
  }
  const TargetSet targets = TargetSet::from_strings(r.targets, alphabet);
  if (!with_grad) {
    return {set_loss(softmax_grid(z), targets, cfg.lambda, cfg.loss_variant,
                     GridCheck::kRelaxed)
                .loss,
            {}};
  }
  LossGradient lg = grad_wrt_logits(z, targets, cfg.lambda, cfg.loss_variant);
  return {lg.loss, backward_model(img, model, lg.gradient)};
}

}  // namespace

double dataset_loss(const PatchClassifier& model,
                    const std::vector<synth::SampleRecord>& data,
                    const Alphabet& alphabet, const TrainConfig& config) {
  if (data.empty()) throw InvalidInput("empty dataset");
  std::vector<double> losses(data.size());
  parallel_for(data.size(), config.threads, [&](std::size_t n) {
    losses[n] = sample_gradient(model, data[n], alphabet, config, false).loss;
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) /
         static_cast<double>(data.size());
}

TrainResult train(const std::vector<synth::SampleRecord>& data,
                  const std::vector<synth::SampleRecord>& heldout,
                  const TrainConfig& config, const Alphabet& alphabet,
                  const std::function<void(const EpochLog&)>& progress) {
  config.validate();
  TrainResult result{PatchClassifier::create(alphabet.size(), config.hidden, 28,
                                             28, config.seed, config.init_scale),
                     {}};
  if (config.epochs == 0) return result;
  if (data.empty()) throw InvalidInput("training set is empty");

  PatchClassifier& model = result.model;
  AdadeltaState state(model.param_count(), config.rho, config.eps);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<SampleGrad> slots(batch);
  std::vector<double> grad(model.param_count());

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t n = order.size(); n > 1; --n) {
      std::swap(order[n - 1], order[shuffle_rng() % n]);
    }
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      parallel_for(count, config.threads, [&](std::size_t b) {
        slots[b] = sample_gradient(model, data[order[start + b]], alphabet,
                                   config, true);
      });
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = 0; b < count; ++b) {
        if (!std::isfinite(slots[b].loss)) {
          throw TrainingDiverged(
              "non-finite loss at epoch " + std::to_string(epoch) +
              ", sample " + std::to_string(order[start + b]));
        }
        loss_sum += slots[b].loss;
        for (std::size_t n = 0; n < grad.size(); ++n) grad[n] += slots[b].grad[n];
      }
      for (double& g : grad) {
        g /= static_cast<double>(count);
        if (!std::isfinite(g)) {
          throw TrainingDiverged("non-finite gradient at epoch " +
                                 std::to_string(epoch));
        }
      }
      adadelta_step(model.params, grad, state);
    }
    EpochLog log;
    log.epoch = epoch;
    log.mean_loss = loss_sum / static_cast<double>(order.size());
    if (!heldout.empty()) {
      log.heldout = evaluate(model, heldout, config.eval_strategy, alphabet,
                             config.threads)
                        .metrics;
    }
    if (config.checkpoint_path) {
      save_checkpoint(*config.checkpoint_path, model, config.to_json());
    }
    if (progress) progress(log);
    result.epochs.push_back(log);
  }
  return result;
}

Evaluation evaluate(const GridProducer& producer,
                    const std::vector<synth::SampleRecord>& data,
                    const GroupingStrategy& strategy, const Alphabet& alphabet,
                    int threads) {
  if (data.empty()) throw InvalidInput("cannot evaluate an empty dataset");
  Evaluation ev;
  ev.reports.resize(data.size());
  ev.predictions.resize(data.size());
  parallel_for(data.size(), threads, [&](std::size_t n) {
    const ProbGrid x = producer(data[n]);
    ev.predictions[n] =
        decode_with_strategy(argmax_grid(x), strategy, alphabet).strings(alphabet);
    ev.reports[n] = match_sets(ev.predictions[n], data[n].targets);
  });
  ev.metrics = aggregate(ev.reports);
  return ev;
}

Evaluation evaluate(const PatchClassifier& model,
                    const std::vector<synth::SampleRecord>& data,
                    const GroupingStrategy& strategy, const Alphabet& alphabet,
                    int threads) {
  return evaluate(
      [&](const synth::SampleRecord& r) {
        return softmax_grid(forward_model(ImageView::of(r), model));
      },
      data, strategy, alphabet, threads);
}

namespace {

constexpr const char* kCheckpointFormat = "msra2d-checkpoint";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r = (r << 8) | ((v >> (8 * b)) & 0xff);
    return r;
  }
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const PatchClassifier& model,
                     const nlohmann::ordered_json& config) {
  nlohmann::ordered_json header;
  header["format"] = kCheckpointFormat;
  header["version"] = 1;
  header["patch_h"] = model.patch_h;
  header["patch_w"] = model.patch_w;
  header["classes"] = model.classes;
  header["hidden"] = model.hidden;
  header["param_count"] = model.params.size();
  header["config"] = config;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << header.dump() << '\n';
  for (double v : model.params) {
    std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

PatchClassifier load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("checkpoint has no header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad checkpoint header: ") + e.what());
  }
  if (header.value("format", "") != kCheckpointFormat) {
    throw InvalidInput("not a checkpoint file: " + path.string());
  }
  PatchClassifier m;
  m.patch_h = header.at("patch_h").get<int>();
  m.patch_w = header.at("patch_w").get<int>();
  m.classes = header.at("classes").get<int>();
  m.hidden = header.at("hidden").get<int>();
  const auto count = header.at("param_count").get<std::size_t>();
  if (count != m.param_count()) {
    throw InvalidInput("checkpoint parameter count does not match its shapes");
  }
  m.params.resize(count);
  for (double& v : m.params) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
      throw InvalidInput("checkpoint parameter block is truncated");
    }
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  return m;
}

}  // namespace msra::model
