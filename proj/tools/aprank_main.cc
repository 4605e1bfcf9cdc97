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


// aprank: split, train, probe and evaluate matrix factorization rankers.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aprank/adversarial.h"
#include "aprank/bpr.h"
#include "aprank/config.h"
#include "aprank/dataset.h"
#include "aprank/errors.h"
#include "aprank/evaluator.h"
#include "aprank/factor_model.h"
#include "aprank/probe.h"
#include "aprank/rng.h"
#include "aprank/training.h"

namespace aprank {
namespace {

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void Close(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw std::runtime_error("error writing " + path);
}

// Comma-separated list; empty fields are errors.
template <typename T, typename Parse>
std::vector<T> ParseList(const std::string& text, const char* what,
                         Parse parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.empty()) {
      throw std::invalid_argument(std::string("empty entry in ") + what);
    }
    try {
      std::size_t used = 0;
      out.push_back(parse(field, used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::logic_error&) {
      throw std::invalid_argument(std::string("bad ") + what + " '" + field +
                                  "'");
    }
  }
  if (out.empty()) {
    throw std::invalid_argument(std::string("empty ") + what + " list");
  }
  return out;
}

std::vector<double> ParseEpsilons(const std::string& text) {
  return ParseList<double>(text, "epsilon", [](const std::string& s,
                                               std::size_t& used) {
    return std::stod(s, &used);
  });
}

std::vector<std::size_t> ParseCutoffs(const std::string& text) {
  auto cutoffs = ParseList<std::size_t>(
      text, "cutoff", [](const std::string& s, std::size_t& used) {
        if (s.front() == '-') throw std::invalid_argument(s);
        return static_cast<std::size_t>(std::stoull(s, &used));
      });
  for (auto c : cutoffs) {
    if (c == 0) throw std::invalid_argument("cutoff must be >= 1");
  }
  return cutoffs;
}

// ---------------------------------------------------------------- split

struct SplitArgs {
  std::string input;
  std::string prefix;
  std::size_t min_item = 0;
  std::size_t min_user = 0;
  bool no_merge = false;
  bool validation = true;
  std::uint64_t seed = 0;
};

int RunSplit(const SplitArgs& a) {
  IngestOptions opt;
  opt.min_item_interactions = a.min_item;
  opt.min_user_interactions = a.min_user;
  opt.merge_repeats = !a.no_merge;
  InteractionDataset data = Ingest(ReadInteractionsFile(a.input), opt);
  SplitDataset split = SplitLeaveOneOut(data, a.validation, a.seed);
  WriteSplit(split, a.prefix);

  nlohmann::ordered_json summary;
  summary["Interaction#"] = data.n_interactions();
  summary["Item#"] = data.n_items();
  summary["User#"] = data.n_users();
  summary["Sparsity"] = data.Sparsity();
  summary["train_interactions"] = split.train.n_interactions();
  summary["validation_users"] = split.n_validation_users();
  summary["test_users"] = split.n_test_users();
  summary["excluded_users"] = split.n_excluded_users;
  summary["seed"] = a.seed;
  std::string text = summary.dump(2);
  std::string path = a.prefix + ".summary.json";
  auto out = OpenOutput(path);
  out << text << '\n';
  Close(out, path);
  std::cout << text << '\n';
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string stage = "bpr";
  std::string config;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string init;
  std::string output;
  std::string history;
};

void CheckShape(const FactorModel& m, const SplitDataset& split,
                std::size_t k, const std::string& path) {
  if (m.n_users() != split.n_users() || m.n_items() != split.n_items() ||
      m.k() != k) {
    std::ostringstream msg;
    msg << path << ": checkpoint is " << m.n_users() << "x" << m.n_items()
        << "x" << m.k() << ", expected " << split.n_users() << "x"
        << split.n_items() << "x" << k;
    throw DimensionError(msg.str());
  }
}

int RunTrain(const TrainArgs& a) {
  ExperimentConfig config;
  if (!a.config.empty()) config = LoadConfig(a.config);
  for (const auto& [key, value] : a.overrides) {
    ApplySetting(config, key, value);
  }
  SplitDataset split = ReadSplit(a.data);
  const std::size_t k = config.apr.base.factors;

  std::optional<FactorModel> init;
  if (!a.init.empty()) {
    init = LoadModel(a.init);
    CheckShape(*init, split, k, a.init);
  }

  TrainResult result;
  if (a.stage == "bpr") {
    TrainConfig c = config.BprStage();
    result = init ? TrainBpr(split, std::move(*init), c) : TrainBpr(split, c);
  } else {
    std::vector<EpochRecord> pre_history;
    if (!init) {
      TrainConfig pre = config.BprStage();
      pre.epochs = config.pretrain_epochs;
      TrainResult bpr = TrainBpr(split, pre);
      pre_history = std::move(bpr.history);
      init = std::move(bpr.model);
    }
    AprConfig apr = config.apr;
    // Keep the APR sampler independent of the pretraining one.
    if (!pre_history.empty()) {
      apr.base.seed = SubstreamSeed(apr.base.seed, "apr");
    }
    result = TrainApr(split, std::move(*init), apr);
    for (auto& r : result.history) r.epoch += config.pretrain_epochs;
    result.history.insert(result.history.begin(), pre_history.begin(),
                          pre_history.end());
  }

  SaveModel(result.model, a.output);
  SaveModel(result.best_model, a.output + ".best");
  std::string history = a.history.empty() ? a.output + ".history.csv"
                                          : a.history;
  WriteHistoryCsv(history, result.history);

  std::cerr << "best epoch " << result.best_epoch;
  if (result.best_val_ndcg) {
    std::cerr << " val_ndcg@100 " << *result.best_val_ndcg;
  }
  if (result.stopped_early) std::cerr << " (early stop)";
  std::cerr << '\n';
  return 0;
}

// ---------------------------------------------------------------- probe

struct ProbeArgs {
  std::string checkpoint;
  std::string data;
  std::string epsilons;
  std::string modes = "adversarial,random";
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  std::size_t cutoff = 100;
  bool fresh_negatives = false;
  std::string output;
};

int RunProbe(const ProbeArgs& a) {
  ProbeOptions opt;
  opt.epsilons = ParseEpsilons(a.epsilons);
  opt.modes = ParseList<ProbeMode>(
      a.modes, "mode", [](const std::string& s, std::size_t& used) {
        used = s.size();
        return ParseProbeMode(s);
      });
  opt.repeats = a.repeats;
  opt.seed = a.seed;
  opt.cutoff = a.cutoff;
  opt.fresh_accuracy_negatives = a.fresh_negatives;
  SplitDataset split = ReadSplit(a.data);
  FactorModel model = LoadModel(a.checkpoint);
  CheckShape(model, split, model.k(), a.checkpoint);
  ProbeResult r = ProbeSweep(model, split, opt);

  auto out = OpenOutput(a.output);
  WriteProbeCsv(out, r.rows, opt.cutoff);
  Close(out, a.output);
  std::string agg_path = a.output + ".agg.csv";
  auto agg = OpenOutput(agg_path);
  WriteProbeCsv(agg, r.aggregated, opt.cutoff);
  Close(agg, agg_path);
  std::cerr << "base hr@" << opt.cutoff << " " << r.base_hr << " ndcg@"
            << opt.cutoff << " " << r.base_ndcg << " train_acc "
            << r.base_train_accuracy << '\n';
  return 0;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string model;
  std::string data;
  std::string cutoffs = "50,100";
  std::string target = "test";
  std::string output;
  std::string per_user;
};

int RunEval(const EvalArgs& a) {
  auto cutoffs = ParseCutoffs(a.cutoffs);
  EvalTarget target;
  if (a.target == "test") {
    target = EvalTarget::kTest;
  } else if (a.target == "validation") {
    target = EvalTarget::kValidation;
  } else {
    throw std::invalid_argument("target must be test or validation");
  }
  SplitDataset split = ReadSplit(a.data);
  EvalReport report;
  if (a.model == "itempop") {
    report = Evaluate(ItemPopScorer(split.train), split, cutoffs, target);
  } else {
    FactorModel model = LoadModel(a.model);
    CheckShape(model, split, model.k(), a.model);
    report = Evaluate(ModelScorer(model), split, cutoffs, target);
  }
  auto out = OpenOutput(a.output);
  WriteEvalCsv(out, report);
  Close(out, a.output);
  if (!a.per_user.empty()) {
    auto per = OpenOutput(a.per_user);
    WritePerUserCsv(per, report);
    Close(per, a.per_user);
  }
  for (const auto& m : report.metrics) {
    std::cerr << "hr@" << m.cutoff << " " << m.hr << " ndcg@" << m.cutoff
              << " " << m.ndcg << '\n';
  }
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Adversarial personalized ranking for matrix factorization"};
  app.require_subcommand(1);

  SplitArgs split;
  auto* s = app.add_subcommand("split", "Ingest a log and write a split");
  s->add_option("input", split.input, "user item [timestamp] lines")
      ->required();
  s->add_option("prefix", split.prefix, "Output prefix")->required();
  s->add_option("--min-item", split.min_item,
                "Drop items with fewer interactions");
  s->add_option("--min-user", split.min_user,
                "Then drop users with fewer interactions");
  s->add_flag("--no-merge", split.no_merge,
              "Reject repeated user-item pairs instead of merging");
  s->add_flag("!--no-validation", split.validation,
              "Hold out a test item only");
  s->add_option("--seed", split.seed);

  TrainArgs train;
  std::map<std::string, std::string> flag_values;
  auto* t = app.add_subcommand("train", "Train MF with BPR or APR");
  t->add_option("--data", train.data, "Split prefix")->required();
  t->add_option("--stage", train.stage)
      ->check(CLI::IsMember({"bpr", "apr"}));
  t->add_option("--config", train.config, "key = value manifest");
  t->add_option("--init", train.init, "Starting checkpoint");
  t->add_option("--output", train.output, "Final checkpoint")->required();
  t->add_option("--history", train.history,
                "History CSV (default <output>.history.csv)");
  std::vector<std::string> sets;
  t->add_option("--set", sets, "key=value, applied after all other settings");
  // Every manifest key is also a flag of the same name.
  for (const auto& key : ConfigKeys()) {
    t->add_option("--" + key, flag_values[key]);
  }

  ProbeArgs probe;
  auto* p = app.add_subcommand("probe", "Embedding perturbation sweep");
  p->add_option("--checkpoint", probe.checkpoint)->required();
  p->add_option("--data", probe.data, "Split prefix")->required();
  p->add_option("--epsilons", probe.epsilons, "e.g. 0,0.5,1,2")->required();
  p->add_option("--modes", probe.modes);
  p->add_option("--repeats", probe.repeats);
  p->add_option("--seed", probe.seed);
  p->add_option("--cutoff", probe.cutoff);
  p->add_flag("--fresh-negatives", probe.fresh_negatives,
              "Accuracy on newly sampled negatives");
  p->add_option("--output", probe.output)->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Leave-one-out HR/NDCG");
  e->add_option("model", eval.model, "Checkpoint path or 'itempop'")
      ->required();
  e->add_option("--data", eval.data, "Split prefix")->required();
  e->add_option("--cutoffs", eval.cutoffs);
  e->add_option("--target", eval.target, "test or validation");
  e->add_option("--output", eval.output)->required();
  e->add_option("--per-user", eval.per_user, "Per-user rank CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return RunSplit(split);
    if (*t) {
      for (const auto& key : ConfigKeys()) {
        if (t->count("--" + key) > 0) {
          train.overrides.emplace_back(key, flag_values[key]);
        }
      }
      for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
          throw FormatError("--set expects key=value, got '" + kv + "'");
        }
        train.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
      }
      return RunTrain(train);
    }
    if (*p) return RunProbe(probe);
    if (*e) return RunEval(eval);
  } catch (const std::exception& ex) {
    std::cerr << "aprank: " << ex.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace
}  // namespace aprank

int main(int argc, char** argv) { return aprank::Main(argc, argv); }
