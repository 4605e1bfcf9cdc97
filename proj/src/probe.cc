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

#include "aprank/probe.h"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "aprank/adversarial.h"
#include "aprank/evaluator.h"
#include "aprank/rng.h"

namespace aprank {
namespace {

void RandomDirection(Rng& rng, double epsilon, std::span<double> out) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double norm = 0.0;
  while (norm == 0.0) {
    for (double& x : out) x = gauss(rng);
    norm = std::sqrt(Dot(out, out));
  }
  if (epsilon == 0.0) {
    for (double& x : out) x = 0.0;
    return;
  }
  double scale = epsilon / norm;
  std::vector<double> dir(out.begin(), out.end());
  while (true) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = dir[k] * scale;
    if (std::sqrt(Dot(out, out)) <= epsilon) break;
    scale = std::nextafter(scale, 0.0);
  }
}

struct ProbeCell {
  double hr;
  double ndcg;
  double accuracy;
};

}  // namespace

PerturbationField RandomPerturbations(const FactorModel& model,
                                      std::span<const UserId> users,
                                      std::span<const ItemId> items,
                                      double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  PerturbationField field(model.k(), epsilon);
  Rng rng(seed);
  for (UserId u : users) RandomDirection(rng, epsilon, field.users().Upsert(u));
  for (ItemId i : items) RandomDirection(rng, epsilon, field.items().Upsert(i));
  return field;
}

PerturbationField AdvPerturbationsGlobal(const FactorModel& model,
                                         std::span<const Triplet> reduced_set,
                                         double epsilon) {
  return BuildAdvPerturbations(model, reduced_set, epsilon, 1.0);
}

double TripletAccuracy(const FactorModel& model,
                       const PerturbationField& field,
                       std::span<const Triplet> triplets) {
  if (triplets.empty()) {
    throw std::invalid_argument("triplet accuracy of an empty set");
  }
  std::size_t correct = 0;
  for (const auto& t : triplets) {
    if (PredictPerturbed(model, field, t.u, t.i) >
        PredictPerturbed(model, field, t.u, t.j)) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(triplets.size());
}

const char* ProbeModeName(ProbeMode mode) {
  return mode == ProbeMode::kAdversarial ? "adversarial" : "random";
}

ProbeMode ParseProbeMode(const std::string& name) {
  if (name == "adversarial" || name == "adv") return ProbeMode::kAdversarial;
  if (name == "random") return ProbeMode::kRandom;
  throw std::invalid_argument("unknown probe mode '" + name + "'");
}

const ProbeRow& ProbeResult::Aggregated(double epsilon, ProbeMode mode) const {
  for (const auto& r : aggregated) {
    if (r.epsilon == epsilon && r.mode == mode) return r;
  }
  throw std::out_of_range("no aggregated probe row for that epsilon/mode");
}

ProbeResult ProbeSweep(const FactorModel& model, const SplitDataset& split,
                       const ProbeOptions& options) {
  if (options.epsilons.empty()) {
    throw std::invalid_argument("probe needs at least one epsilon");
  }
  for (double e : options.epsilons) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw std::invalid_argument("epsilon must be finite and >= 0");
    }
  }
  if (options.modes.empty()) {
    throw std::invalid_argument("probe needs at least one mode");
  }
  if (options.repeats == 0) {
    throw std::invalid_argument("repeats must be >= 1");
  }

  Rng reduced_rng = MakeRng(options.seed, "probe.reduced");
  const std::vector<Triplet> reduced =
      SampleReducedSet(split.train, reduced_rng);
  std::vector<Triplet> fresh;
  if (options.fresh_accuracy_negatives) {
    Rng fresh_rng = MakeRng(options.seed, "probe.accuracy");
    fresh = SampleReducedSet(split.train, fresh_rng);
  }
  const std::vector<Triplet>& accuracy_set =
      options.fresh_accuracy_negatives ? fresh : reduced;
  const std::size_t cutoffs[] = {options.cutoff};

  auto measure = [&](const PerturbationField& field) {
    auto report = Evaluate(PerturbedModelScorer(model, field), split, cutoffs);
    const auto& m = report.At(options.cutoff);
    return ProbeCell{m.hr, m.ndcg, TripletAccuracy(model, field, accuracy_set)};
  };

  ProbeResult result;
  result.reduced_set_size = reduced.size();
  {
    auto base = measure(PerturbationField(model.k(), 0.0));
    result.base_hr = base.hr;
    result.base_ndcg = base.ndcg;
    result.base_train_accuracy = base.accuracy;
  }
  auto drop = [&](double ndcg) {
    if (result.base_ndcg == 0.0) return 0.0;
    return 100.0 * (result.base_ndcg - ndcg) / result.base_ndcg;
  };

  // The adversarial gradient does not depend on epsilon; only its scaling.
  const PerturbationField gradient = AdvGradientAtZero(model, reduced, 1.0);
  std::vector<UserId> users;
  std::vector<ItemId> items;
  {
    std::unordered_set<UserId> seen_users;
    std::unordered_set<ItemId> seen_items;
    for (const auto& t : reduced) {
      if (seen_users.insert(t.u).second) users.push_back(t.u);
      if (seen_items.insert(t.i).second) items.push_back(t.i);
      if (seen_items.insert(t.j).second) items.push_back(t.j);
    }
  }

  for (double epsilon : options.epsilons) {
    for (ProbeMode mode : options.modes) {
      if (mode == ProbeMode::kAdversarial) {
        auto cell = measure(NormalizeRows(gradient, epsilon));
        ProbeRow row{epsilon,   mode,          0,
                     cell.hr,   cell.ndcg,     cell.accuracy,
                     drop(cell.ndcg)};
        result.rows.push_back(row);
        result.aggregated.push_back(row);
        continue;
      }
      ProbeRow mean{epsilon, mode, 0, 0.0, 0.0, 0.0, 0.0};
      for (std::size_t r = 0; r < options.repeats; ++r) {
        auto field = RandomPerturbations(
            model, users, items, epsilon,
            SubstreamSeed(options.seed, "probe.random", r));
        auto cell = measure(field);
        ProbeRow row{epsilon,   mode,          r,
                     cell.hr,   cell.ndcg,     cell.accuracy,
                     drop(cell.ndcg)};
        result.rows.push_back(row);
        mean.hr += cell.hr;
        mean.ndcg += cell.ndcg;
        mean.train_accuracy += cell.accuracy;
      }
      double n = static_cast<double>(options.repeats);
      mean.hr /= n;
      mean.ndcg /= n;
      mean.train_accuracy /= n;
      mean.ndcg_drop_pct = drop(mean.ndcg);
      result.aggregated.push_back(mean);
    }
  }
  return result;
}

void WriteProbeCsv(std::ostream& out, std::span<const ProbeRow> rows,
                   std::size_t cutoff) {
  auto precision = out.precision(10);
  out << "epsilon,mode,repeat,hr@" << cutoff << ",ndcg@" << cutoff
      << ",train_acc,ndcg_drop_pct\n";
  for (const auto& r : rows) {
    out << r.epsilon << ',' << ProbeModeName(r.mode) << ',' << r.repeat << ','
        << r.hr << ',' << r.ndcg << ',' << r.train_accuracy << ','
        << r.ndcg_drop_pct << '\n';
  }
  out.precision(precision);
}

}  // namespace aprank
