// Copyright 2026 The aprank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "aprank/adversarial.h"
#include "aprank/bpr.h"
#include "aprank/dataset.h"
#include "aprank/errors.h"
#include "aprank/evaluator.h"
#include "aprank/factor_model.h"
#include "aprank/probe.h"
#include "aprank/synthetic.h"
#include "aprank/training.h"

namespace py = pybind11;

namespace aprank {
namespace {

// Copies a row-major parameter block into a fresh (rows, k) array.
py::array_t<double> ToArray(std::span<const double> data, std::size_t rows,
                            std::size_t k) {
  py::array_t<double> out({rows, k});
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

void FromArray(const py::array_t<double, py::array::c_style |
                                             py::array::forcecast>& src,
               std::span<double> dst, std::size_t rows, std::size_t k) {
  if (src.ndim() != 2 || static_cast<std::size_t>(src.shape(0)) != rows ||
      static_cast<std::size_t>(src.shape(1)) != k) {
    throw DimensionError("array shape does not match the model");
  }
  std::copy(src.data(), src.data() + dst.size(), dst.begin());
}

py::dict HistoryRow(const EpochRecord& r) {
  py::dict d;
  d["epoch"] = r.epoch;
  d["stage"] = StageName(r.stage);
  d["loss"] = r.loss;
  d["val_hr"] = r.val_hr;
  d["val_ndcg"] = r.val_ndcg;
  d["emb_norm"] = r.emb_norm;
  d["seconds"] = r.seconds;
  d["mean_batch_ladv_gain"] = r.ladv_gain;
  return d;
}

py::dict ProbeRowDict(const ProbeRow& r) {
  py::dict d;
  d["epsilon"] = r.epsilon;
  d["mode"] = ProbeModeName(r.mode);
  d["repeat"] = r.repeat;
  d["hr"] = r.hr;
  d["ndcg"] = r.ndcg;
  d["train_acc"] = r.train_accuracy;
  d["ndcg_drop_pct"] = r.ndcg_drop_pct;
  return d;
}

EvalTarget ParseTarget(const std::string& name) {
  if (name == "test") return EvalTarget::kTest;
  if (name == "validation") return EvalTarget::kValidation;
  throw std::invalid_argument("target must be 'test' or 'validation'");
}

py::dict ReportDict(const EvalReport& r) {
  py::dict d;
  py::dict hr;
  py::dict ndcg;
  for (const auto& m : r.metrics) {
    hr[py::int_(m.cutoff)] = m.hr;
    ndcg[py::int_(m.cutoff)] = m.ndcg;
  }
  d["hr"] = hr;
  d["ndcg"] = ndcg;
  d["n_users"] = r.n_users_evaluated;
  std::vector<UserId> users;
  std::vector<std::size_t> ranks;
  for (const auto& u : r.per_user) {
    users.push_back(u.user);
    ranks.push_back(u.rank);
  }
  d["users"] = py::array(py::cast(users));
  d["ranks"] = py::array(py::cast(ranks));
  return d;
}

}  // namespace
}  // namespace aprank

PYBIND11_MODULE(_core, m) {
  using namespace aprank;
  m.doc() = "Matrix factorization with BPR and adversarial personalized ranking.";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError",
                                         PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_ArithmeticError);

  py::class_<InteractionDataset>(m, "Dataset")
      .def_property_readonly("n_users", &InteractionDataset::n_users)
      .def_property_readonly("n_items", &InteractionDataset::n_items)
      .def_property_readonly("n_interactions",
                             &InteractionDataset::n_interactions)
      .def_property_readonly("sparsity", &InteractionDataset::Sparsity)
      .def("positives",
           [](const InteractionDataset& d, UserId u) {
             auto p = d.Positives(u);
             return std::vector<ItemId>(p.begin(), p.end());
           })
      .def("item_counts", &InteractionDataset::ItemCounts);

  py::class_<SplitDataset>(m, "Split")
      .def_readonly("train", &SplitDataset::train)
      .def_readonly("validation", &SplitDataset::validation)
      .def_readonly("test", &SplitDataset::test)
      .def_readonly("n_excluded_users", &SplitDataset::n_excluded_users)
      .def_property_readonly("n_users", &SplitDataset::n_users)
      .def_property_readonly("n_items", &SplitDataset::n_items);

  m.def(
      "ingest",
      [](const std::string& path, std::size_t min_item, std::size_t min_user,
         bool merge_repeats) {
        IngestOptions o;
        o.min_item_interactions = min_item;
        o.min_user_interactions = min_user;
        o.merge_repeats = merge_repeats;
        return Ingest(ReadInteractionsFile(path), o);
      },
      py::arg("path"), py::arg("min_item") = 0, py::arg("min_user") = 0,
      py::arg("merge_repeats") = true);
  m.def(
      "synthetic",
      [](std::size_t n_users, std::size_t n_items, std::uint64_t seed) {
        SyntheticOptions o;
        o.n_users = n_users;
        o.n_items = n_items;
        o.seed = seed;
        return Ingest(GenerateInteractions(o));
      },
      py::arg("n_users") = 2000, py::arg("n_items") = 1500,
      py::arg("seed") = 1,
      "Ingested synthetic log with latent-factor structure.");
  m.def("split_leave_one_out", &SplitLeaveOneOut, py::arg("data"),
        py::arg("with_validation") = true, py::arg("seed") = 0);
  m.def("write_split", &WriteSplit, py::arg("split"), py::arg("prefix"));
  m.def("read_split", &ReadSplit, py::arg("prefix"));

  py::class_<FactorModel>(m, "Model")
      .def(py::init<std::size_t, std::size_t, std::size_t>(),
           py::arg("n_users"), py::arg("n_items"), py::arg("k"))
      .def_static("init", &FactorModel::Init, py::arg("n_users"),
                  py::arg("n_items"), py::arg("k"), py::arg("seed"))
      .def_property_readonly("n_users", &FactorModel::n_users)
      .def_property_readonly("n_items", &FactorModel::n_items)
      .def_property_readonly("k", &FactorModel::k)
      .def_property(
          "users",
          [](const FactorModel& f) {
            return ToArray(f.user_data(), f.n_users(), f.k());
          },
          [](FactorModel& f,
             const py::array_t<double, py::array::c_style |
                                           py::array::forcecast>& a) {
            FromArray(a, f.user_data(), f.n_users(), f.k());
          })
      .def_property(
          "items",
          [](const FactorModel& f) {
            return ToArray(f.item_data(), f.n_items(), f.k());
          },
          [](FactorModel& f,
             const py::array_t<double, py::array::c_style |
                                           py::array::forcecast>& a) {
            FromArray(a, f.item_data(), f.n_items(), f.k());
          })
      .def_property_readonly(
          "stage", [](const FactorModel& f) { return StageName(f.stage); })
      .def("predict", &FactorModel::Predict, py::arg("user"), py::arg("item"))
      .def("embedding_norm", &FactorModel::EmbeddingNorm)
      .def("save", [](const FactorModel& f,
                      const std::string& path) { SaveModel(f, path); })
      .def_static("load",
                  [](const std::string& path) { return LoadModel(path); });

  py::enum_<OptimizerKind>(m, "Optimizer")
      .value("SGD", OptimizerKind::kSgd)
      .value("ADAGRAD", OptimizerKind::kAdagrad);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("factors", &TrainConfig::factors)
      .def_readwrite("eta", &TrainConfig::eta)
      .def_readwrite("lambda_reg", &TrainConfig::lambda_reg)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("optimizer", &TrainConfig::optimizer)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("eval_interval", &TrainConfig::eval_interval)
      .def_readwrite("patience", &TrainConfig::patience);

  py::class_<AprConfig>(m, "AprConfig")
      .def(py::init<>())
      .def_readwrite("base", &AprConfig::base)
      .def_readwrite("epsilon", &AprConfig::epsilon)
      .def_readwrite("lambda_adv", &AprConfig::lambda_adv);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("best_model", &TrainResult::best_model)
      .def_readonly("best_epoch", &TrainResult::best_epoch)
      .def_readonly("best_val_ndcg", &TrainResult::best_val_ndcg)
      .def_readonly("stopped_early", &TrainResult::stopped_early)
      .def_property_readonly("history", [](const TrainResult& r) {
        py::list rows;
        for (const auto& h : r.history) rows.append(HistoryRow(h));
        return rows;
      });

  m.def(
      "train_bpr",
      [](const SplitDataset& split, const TrainConfig& config,
         std::optional<FactorModel> init) {
        py::gil_scoped_release release;
        return init ? TrainBpr(split, std::move(*init), config)
                    : TrainBpr(split, config);
      },
      py::arg("split"), py::arg("config"), py::arg("init") = py::none());
  m.def(
      "train_apr",
      [](const SplitDataset& split, FactorModel init, const AprConfig& config) {
        py::gil_scoped_release release;
        return TrainApr(split, std::move(init), config);
      },
      py::arg("split"), py::arg("init"), py::arg("config"));

  m.def(
      "evaluate",
      [](const py::object& model, const SplitDataset& split,
         const std::vector<std::size_t>& cutoffs, const std::string& target,
         std::size_t threads) {
        EvalTarget t = ParseTarget(target);
        if (py::isinstance<py::str>(model)) {
          if (model.cast<std::string>() != "itempop") {
            throw std::invalid_argument("model must be a Model or 'itempop'");
          }
          return ReportDict(
              Evaluate(ItemPopScorer(split.train), split, cutoffs, t, threads));
        }
        const auto& m = model.cast<const FactorModel&>();
        return ReportDict(Evaluate(ModelScorer(m), split, cutoffs, t, threads));
      },
      py::arg("model"), py::arg("split"),
      py::arg("cutoffs") = std::vector<std::size_t>{50, 100},
      py::arg("target") = "test", py::arg("threads") = 0,
      "HR and NDCG keyed by cutoff, plus per-user ranks.");

  m.def(
      "probe",
      [](const FactorModel& model, const SplitDataset& split,
         const std::vector<double>& epsilons,
         const std::vector<std::string>& modes, std::size_t repeats,
         std::uint64_t seed, std::size_t cutoff) {
        ProbeOptions o;
        o.epsilons = epsilons;
        o.modes.clear();
        for (const auto& name : modes) o.modes.push_back(ParseProbeMode(name));
        o.repeats = repeats;
        o.seed = seed;
        o.cutoff = cutoff;
        ProbeResult r = ProbeSweep(model, split, o);
        py::dict d;
        d["base_hr"] = r.base_hr;
        d["base_ndcg"] = r.base_ndcg;
        d["base_train_acc"] = r.base_train_accuracy;
        py::list rows;
        py::list agg;
        for (const auto& row : r.rows) rows.append(ProbeRowDict(row));
        for (const auto& row : r.aggregated) agg.append(ProbeRowDict(row));
        d["rows"] = rows;
        d["aggregated"] = agg;
        return d;
      },
      py::arg("model"), py::arg("split"), py::arg("epsilons"),
      py::arg("modes") = std::vector<std::string>{"adversarial", "random"},
      py::arg("repeats") = 5, py::arg("seed") = 0, py::arg("cutoff") = 100);

  m.def("paired_significance", [](const std::vector<double>& a,
                                  const std::vector<double>& b) {
    return PairedSignificance(a, b);
  });
}
