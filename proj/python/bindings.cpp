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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msra/certify.hpp"
#include "msra/decode.hpp"
#include "msra/lattice.hpp"
#include "msra/metrics.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <class Grid>
Grid to_grid(const Array& a) {
  if (a.ndim() != 3) throw msra::InvalidInput("expected an H x W x Q array");
  const msra::GridShape shape{static_cast<int>(a.shape(0)),
                              static_cast<int>(a.shape(1)),
                              static_cast<int>(a.shape(2))};
  return Grid(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

template <class Grid>
Array to_array(const Grid& g) {
  Array out({g.height(), g.width(), g.classes()});
  std::copy(g.data().begin(), g.data().end(), out.mutable_data());
  return out;
}

msra::TargetSet to_targets(const std::vector<std::vector<int>>& labels) {
  std::vector<msra::LabelSequence> seqs;
  for (const auto& l : labels) seqs.emplace_back(l);
  return msra::TargetSet(std::move(seqs));
}

msra::SetLossVariant to_variant(const std::string& name) {
  if (name == "mean") return msra::SetLossVariant::kMeanProbability;
  if (name == "sum-log") return msra::SetLossVariant::kSumLog;
  throw msra::InvalidInput("unknown loss variant '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_msra2d, m) {
  // Translators are tried newest first, so the base class goes first.
  py::register_exception<msra::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<msra::InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<msra::InfeasibleTarget>(m, "InfeasibleTarget",
                                                 PyExc_ValueError);

  m.def(
      "sequence_log_prob",
      [](const Array& x, const std::vector<int>& label, double lambda_h,
         double lambda_v) {
        return msra::sequence_log_prob(to_grid<msra::ProbGrid>(x),
                                       msra::LabelSequence(label),
                                       {lambda_h, lambda_v});
      },
      py::arg("x"), py::arg("label"), py::arg("lambda_h") = 0.9,
      py::arg("lambda_v") = 0.1);

  m.def(
      "set_loss",
      [](const Array& x, const std::vector<std::vector<int>>& targets,
         double lambda_h, double lambda_v, const std::string& variant) {
        return msra::set_loss(to_grid<msra::ProbGrid>(x), to_targets(targets),
                              {lambda_h, lambda_v}, to_variant(variant))
            .loss;
      },
      py::arg("x"), py::arg("targets"), py::arg("lambda_h") = 0.9,
      py::arg("lambda_v") = 0.1, py::arg("variant") = "mean");

  m.def(
      "grad_wrt_probs",
      [](const Array& x, const std::vector<std::vector<int>>& targets,
         double lambda_h, double lambda_v, const std::string& variant) {
        const auto g = msra::grad_wrt_probs(
            to_grid<msra::ProbGrid>(x), to_targets(targets),
            {lambda_h, lambda_v}, to_variant(variant));
        return py::make_tuple(g.loss, to_array(g.gradient));
      },
      py::arg("x"), py::arg("targets"), py::arg("lambda_h") = 0.9,
      py::arg("lambda_v") = 0.1, py::arg("variant") = "mean");

  m.def(
      "grad_wrt_logits",
      [](const Array& z, const std::vector<std::vector<int>>& targets,
         double lambda_h, double lambda_v, const std::string& variant) {
        const auto g = msra::grad_wrt_logits(
            to_grid<msra::LogitsGrid>(z), to_targets(targets),
            {lambda_h, lambda_v}, to_variant(variant));
        return py::make_tuple(g.loss, to_array(g.gradient));
      },
      py::arg("z"), py::arg("targets"), py::arg("lambda_h") = 0.9,
      py::arg("lambda_v") = 0.1, py::arg("variant") = "mean");

  m.def(
      "decode",
      [](const Array& x, const std::string& strategy, const std::string& symbols) {
        const msra::Alphabet alphabet(symbols);
        return msra::decode_with_strategy(
                   msra::argmax_grid(to_grid<msra::ProbGrid>(x)),
                   msra::GroupingStrategy::parse(strategy), alphabet)
            .strings(alphabet);
      },
      py::arg("x"), py::arg("strategy") = "rows",
      py::arg("symbols") = "-0123456789");

  m.def(
      "match_sets",
      [](const std::vector<std::string>& predictions,
         const std::vector<std::string>& truths) {
        const auto r = msra::match_sets(predictions, truths);
        py::list pairs;
        for (const auto& p : r.pairs) {
          pairs.append(py::make_tuple(
              p.truth, p.prediction ? py::cast(*p.prediction) : py::none(), p.ned));
        }
        py::dict d;
        d["pairs"] = pairs;
        d["exact_matches"] = r.exact_matches;
        d["image_exact"] = r.image_exact;
        return d;
      },
      py::arg("predictions"), py::arg("truths"));

  m.def(
      "evaluate_sets",
      [](const std::vector<std::pair<std::vector<std::string>,
                                     std::vector<std::string>>>& samples) {
        std::vector<msra::MatchReport> reports;
        for (const auto& [pred, truth] : samples) {
          reports.push_back(msra::match_sets(pred, truth));
        }
        const auto a = msra::aggregate(reports);
        py::dict d;
        d["ned_percent"] = a.ned_percent;
        d["sa_percent"] = a.sa_percent;
        d["ia_percent"] = a.ia_percent;
        d["images"] = a.images;
        d["sequences"] = a.sequences;
        return d;
      },
      py::arg("samples"));

  m.def(
      "oracle_check",
      [](int trials, std::uint64_t seed) {
        return msra::certify::oracle_suite(trials, seed, {}).max_rel_err;
      },
      py::arg("trials") = 50, py::arg("seed") = 7);
}
