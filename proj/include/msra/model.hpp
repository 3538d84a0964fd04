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

// Per-patch classifier producing a logits grid, trained against the set loss
// with ADADELTA.

#ifndef MSRA_MODEL_HPP_
#define MSRA_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "msra/core.hpp"
#include "msra/decode.hpp"
#include "msra/lattice.hpp"
#include "msra/metrics.hpp"
#include "msra/synthgen.hpp"

namespace msra::model {

struct ImageView {
  int height = 0;
  int width = 0;
  std::span<const std::uint8_t> pixels;

  static ImageView of(const synth::SampleRecord& r) {
    return {r.height, r.width, r.pixels};
  }
};

// Each patch_h x patch_w patch, scaled to [0, 1], goes through an affine map
// (optionally preceded by one ReLU hidden layer) to `classes` logits.
//
// Parameter layout, all row-major:
//   hidden == 0:  W[classes x inputs], b[classes]
//   hidden  > 0:  W1[hidden x inputs], b1[hidden], W2[classes x hidden],
//                 b2[classes]
struct PatchClassifier {
  int patch_h = 28;
  int patch_w = 28;
  int classes = 11;
  int hidden = 0;
  std::vector<double> params;

  // Weights Glorot-uniform scaled by init_scale, biases zero.
  static PatchClassifier create(int classes, int hidden, int patch_h,
                                int patch_w, std::uint64_t seed,
                                double init_scale);

  int inputs() const { return patch_h * patch_w; }
  std::size_t param_count() const;
  GridShape grid_shape(int image_h, int image_w) const;
};

LogitsGrid forward_model(const ImageView& img, const PatchClassifier& model);

// Gradient of the loss w.r.t. every parameter given d loss / d logits.
std::vector<double> backward_model(const ImageView& img,
                                   const PatchClassifier& model,
                                   const GridGradient& logit_grad);

struct AdadeltaState {
  double rho = 0.95;
  double eps = 1e-6;
  std::vector<double> mean_sq_grad;
  std::vector<double> mean_sq_update;

  AdadeltaState(std::size_t n, double rho_, double eps_)
      : rho(rho_), eps(eps_), mean_sq_grad(n, 0.0), mean_sq_update(n, 0.0) {}
};

void adadelta_step(std::span<double> params, std::span<const double> grads,
                   AdadeltaState& state);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  double rho = 0.95;
  double eps = 1e-6;
  LambdaParams lambda;
  std::uint64_t seed = 7;
  SetLossVariant loss_variant = SetLossVariant::kMeanProbability;
  // The affine-only classifier (hidden = 0) never separates some bitmap
  // digits from blank; 64 units do.
  int hidden = 64;
  double init_scale = 1.0;
  int threads = 1;
  GroupingStrategy eval_strategy = GroupingStrategy::rows();
  // Written after every epoch when set.
  std::optional<std::filesystem::path> checkpoint_path;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<DatasetMetrics> heldout;
};

struct TrainResult {
  PatchClassifier model;
  std::vector<EpochLog> epochs;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

// Mean set loss of `model` over `data`.
double dataset_loss(const PatchClassifier& model,
                    const std::vector<synth::SampleRecord>& data,
                    const Alphabet& alphabet, const TrainConfig& config);

// Held-out metrics are computed after every epoch when `heldout` is
// non-empty; `progress`, when set, receives each epoch's log.
TrainResult train(const std::vector<synth::SampleRecord>& data,
                  const std::vector<synth::SampleRecord>& heldout,
                  const TrainConfig& config, const Alphabet& alphabet,
                  const std::function<void(const EpochLog&)>& progress = {});

struct Evaluation {
  DatasetMetrics metrics;
  std::vector<MatchReport> reports;
  std::vector<std::vector<std::string>> predictions;
};

using GridProducer = std::function<ProbGrid(const synth::SampleRecord&)>;

Evaluation evaluate(const GridProducer& producer,
                    const std::vector<synth::SampleRecord>& data,
                    const GroupingStrategy& strategy, const Alphabet& alphabet,
                    int threads = 1);

Evaluation evaluate(const PatchClassifier& model,
                    const std::vector<synth::SampleRecord>& data,
                    const GroupingStrategy& strategy, const Alphabet& alphabet,
                    int threads = 1);

// One JSON header line (shapes and config) followed by the parameters as raw
// little-endian float64.
void save_checkpoint(const std::filesystem::path& path,
                     const PatchClassifier& model,
                     const nlohmann::ordered_json& config);
PatchClassifier load_checkpoint(const std::filesystem::path& path);

}  // namespace msra::model

#endif  // MSRA_MODEL_HPP_
