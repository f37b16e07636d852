/*
 * Copyright 2026 The ANRS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <string>
#include <vector>

#include "anrs/aspect.hpp"
#include "anrs/checkpoint.hpp"
#include "anrs/cli.hpp"
#include "anrs/config.hpp"
#include "anrs/errors.hpp"
#include "anrs/evaluation.hpp"
#include "anrs/pipeline.hpp"
#include "anrs/synthetic.hpp"
#include "anrs/training.hpp"

namespace py = pybind11;

namespace anrs {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor ToTensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array ToArray(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

RankedImpression Impression(std::vector<int> labels, std::vector<double> scores) {
  if (labels.size() != scores.size()) {
    throw ShapeError("labels and scores differ in length");
  }
  return {std::move(scores), std::move(labels)};
}

py::dict ReportDict(const MetricReport& r) {
  py::dict d;
  d["AUC"] = r.auc;
  d["MRR"] = r.mrr;
  d["nDCG@5"] = r.ndcg5;
  d["nDCG@10"] = r.ndcg10;
  d["impressions"] = r.impressions;
  d["auc_excluded"] = r.auc_excluded;
  d["rank_excluded"] = r.rank_excluded;
  return d;
}

SyntheticOptions OptionsFrom(const py::dict& kwargs) {
  SyntheticOptions o;
  for (const auto& [key, value] : kwargs) {
    const std::string k = py::str(key);
    if (k == "clusters") o.clusters = value.cast<std::size_t>();
    else if (k == "words_per_cluster") o.words_per_cluster = value.cast<std::size_t>();
    else if (k == "news") o.news = value.cast<std::size_t>();
    else if (k == "users") o.users = value.cast<std::size_t>();
    else if (k == "dim") o.dim = value.cast<std::size_t>();
    else if (k == "categories") o.categories = value.cast<std::size_t>();
    else if (k == "history") o.history = value.cast<std::size_t>();
    else if (k == "train_impressions") o.train_impressions = value.cast<std::size_t>();
    else if (k == "test_impressions") o.test_impressions = value.cast<std::size_t>();
    else if (k == "candidates") o.candidates = value.cast<std::size_t>();
    else if (k == "off_cluster_words") o.off_cluster_words = value.cast<double>();
    else if (k == "label_noise") o.label_noise = value.cast<double>();
    else if (k == "seed") o.seed = value.cast<std::uint64_t>();
    else throw InputError("unknown synthetic option '" + k + "'");
  }
  return o;
}

py::dict EpochDict(const EpochLog& e) {
  py::dict d;
  d["epoch"] = e.epoch;
  d["U"] = e.loss.recommendation;
  d["J"] = e.loss.aspect;
  d["F"] = e.loss.orthogonality;
  d["total"] = e.loss.total;
  d["batches"] = e.batches;
  if (e.validation) d["validation"] = ReportDict(*e.validation);
  return d;
}

py::dict ExperimentDict(const Config& config, const Prepared& prepared) {
  ExperimentResult r;
  {
    py::gil_scoped_release release;
    r = RunExperiment(config, prepared);
  }
  py::dict d;
  py::list epochs;
  for (const EpochLog& e : r.training.epochs) epochs.append(EpochDict(e));
  d["epochs"] = epochs;
  d["best_epoch"] = r.training.best_epoch;
  d["samples"] = r.samples.samples;
  if (r.test) d["test"] = ReportDict(*r.test);
  return d;
}

}  // namespace
}  // namespace anrs

PYBIND11_MODULE(_core, m) {
  using namespace anrs;
  m.doc() = "ANRS news recommender core";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<CompatibilityError>(m, "CompatibilityError");
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<Config>(m, "Config")
      .def(py::init<>())
      .def_static("load", &LoadConfig, py::arg("path"))
      .def_static("parse", [](const std::string& text) { return ParseConfig(text); })
      .def_static("keys", &ConfigKeys)
      .def("__getitem__",
           [](const Config& c, const std::string& k) { return GetConfigValue(c, k); })
      .def("__setitem__",
           [](Config& c, const std::string& k, const py::object& v) {
             SetConfigValue(c, k, py::str(v).cast<std::string>());
           })
      .def("set",
           [](Config& c, const std::string& k, const py::object& v) -> Config& {
             SetConfigValue(c, k, py::str(v).cast<std::string>());
             return c;
           },
           py::return_value_policy::reference_internal)
      .def("validate", [](const Config& c) { ValidateConfig(c); })
      .def("dump", &DumpConfig)
      .def("__eq__", [](const Config& a, const Config& b) { return a == b; })
      .def("__repr__", [](const Config& c) { return "<anrs.Config seed=" + GetConfigValue(c, "seed") + ">"; });

  m.def("auc",
        [](std::vector<int> labels, std::vector<double> scores) {
          return Auc(Impression(std::move(labels), std::move(scores)));
        },
        py::arg("labels"), py::arg("scores"));
  m.def("mrr",
        [](std::vector<int> labels, std::vector<double> scores) {
          return Mrr(Impression(std::move(labels), std::move(scores)));
        },
        py::arg("labels"), py::arg("scores"));
  m.def("ndcg",
        [](std::vector<int> labels, std::vector<double> scores, std::size_t k) {
          return NdcgAt(Impression(std::move(labels), std::move(scores)), k);
        },
        py::arg("labels"), py::arg("scores"), py::arg("k"));
  m.def("summarize",
        [](const std::vector<std::pair<std::vector<int>, std::vector<double>>>& imps) {
          std::vector<RankedImpression> all;
          for (const auto& [labels, scores] : imps) all.push_back(Impression(labels, scores));
          return ReportDict(Summarize(all));
        },
        py::arg("impressions"), "Per-impression averages of every metric.");

  m.def("click_probability",
        [](double positive, const std::vector<double>& negatives) {
          return ClickProbability(positive, negatives);
        },
        py::arg("positive"), py::arg("negatives"));
  m.def("orthogonality_penalty",
        [](const Array& a) { return OrthogonalityPenalty(ToTensor(a)); },
        py::arg("aspects"));
  m.def("kmeans",
        [](const Array& points, std::size_t k, std::uint64_t seed) {
          if (points.ndim() != 2) throw ShapeError("points must be 2-D");
          std::vector<std::vector<double>> rows;
          for (py::ssize_t i = 0; i < points.shape(0); ++i) {
            rows.emplace_back(points.data(i, 0), points.data(i, 0) + points.shape(1));
          }
          return ToArray(KMeans(rows, k, seed));
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 1);

  m.def("write_synthetic",
        [](const std::filesystem::path& dir, Config& config, const py::kwargs& kwargs) {
          UseSyntheticPaths(config, WriteSynthetic(GenerateSynthetic(OptionsFrom(kwargs)), dir));
        },
        py::arg("dir"), py::arg("config"),
        "Generate a two-cluster corpus under dir and point config at it.");
  m.def("run_synthetic",
        [](const Config& config, const py::kwargs& kwargs) {
          const Prepared p = PrepareSynthetic(GenerateSynthetic(OptionsFrom(kwargs)), config);
          return ExperimentDict(config, p);
        },
        py::arg("config"), "Train and evaluate on an in-memory synthetic corpus.");
  m.def("preprocess",
        [](const Config& config) {
          const Prepared p = Preprocess(config);
          py::dict d;
          d["cache_hit"] = p.cache_hit;
          d["news"] = p.corpus.news.size();
          d["vocabulary"] = p.corpus.vocab.size();
          d["train_impressions"] = p.corpus.train.size();
          d["valid_impressions"] = p.corpus.valid.size();
          d["test_impressions"] = p.corpus.test.size();
          return d;
        },
        py::arg("config"));
  m.def("train",
        [](const Config& config) { return ExperimentDict(config, LoadPrepared(config)); },
        py::arg("config"), "Train from the preprocessed cache of config.run_dir.");

  m.def("load_checkpoint",
        [](const std::filesystem::path& path) {
          Checkpoint c = LoadCheckpoint(path);
          py::dict params;
          for (auto& [name, tensor] : c.params.Named()) params[py::str(name)] = ToArray(*tensor);
          py::dict d;
          d["config"] = c.config;
          d["vocab_hash"] = c.vocab_hash;
          d["params"] = params;
          return d;
        },
        py::arg("path"));

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = RunCli(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the anrs command line; returns (code, stdout, stderr).");
}
