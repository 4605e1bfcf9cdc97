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

// Robustness probe: perturb a trained model's embeddings by epsilon per
// vector, adversarially or at random, and measure how far test ranking
// quality and training-triplet accuracy fall. The model itself is never
// modified.

#ifndef APRANK_PROBE_H_
#define APRANK_PROBE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "aprank/dataset.h"
#include "aprank/factor_model.h"

namespace aprank {

// Isotropic random direction per listed entity (normalized N(0, I) draw)
// scaled to norm epsilon. Entities are processed users first, then items,
// each in the given order.
PerturbationField RandomPerturbations(const FactorModel& model,
                                      std::span<const UserId> users,
                                      std::span<const ItemId> items,
                                      double epsilon, std::uint64_t seed);

// Fast-gradient field maximizing the BPR loss summed over all of
// `reduced_set`, normalized per entity vector. Any positive adversarial
// weight gives the same field; 1 is used.
PerturbationField AdvPerturbationsGlobal(const FactorModel& model,
                                         std::span<const Triplet> reduced_set,
                                         double epsilon);

// Fraction of triplets with s(u,i) > s(u,j) under the perturbed model.
// Ties count as wrong. Throws std::invalid_argument on an empty set.
double TripletAccuracy(const FactorModel& model,
                       const PerturbationField& field,
                       std::span<const Triplet> triplets);

enum class ProbeMode { kAdversarial, kRandom };

const char* ProbeModeName(ProbeMode mode);
ProbeMode ParseProbeMode(const std::string& name);

struct ProbeOptions {
  std::vector<double> epsilons;
  std::vector<ProbeMode> modes{ProbeMode::kAdversarial, ProbeMode::kRandom};
  std::size_t repeats = 5;  // random mode only
  std::uint64_t seed = 0;
  std::size_t cutoff = 100;
  // Measure accuracy on a second, independently sampled reduced set instead
  // of the one the adversarial field is built from.
  bool fresh_accuracy_negatives = false;
};

struct ProbeRow {
  double epsilon;
  ProbeMode mode;
  std::size_t repeat;  // 0 for adversarial and for aggregated rows
  double hr;
  double ndcg;
  double train_accuracy;
  double ndcg_drop_pct;  // 100 * (base - ndcg) / base
};

struct ProbeResult {
  double base_hr = 0.0;
  double base_ndcg = 0.0;
  double base_train_accuracy = 0.0;
  std::vector<ProbeRow> rows;        // one per (epsilon, mode, repeat)
  std::vector<ProbeRow> aggregated;  // repeats averaged
  std::size_t reduced_set_size = 0;

  // Throws std::out_of_range if absent.
  const ProbeRow& Aggregated(double epsilon, ProbeMode mode) const;
};

// Samples one negative per training interaction (the reduced set), then for
// every (epsilon, mode) evaluates test HR/NDCG at `cutoff` and accuracy on
// the reduced set. Random repeat r always uses the same direction stream,
// so adding repeats leaves earlier rows unchanged. Throws
// std::invalid_argument on an empty epsilon list or negative epsilon.
ProbeResult ProbeSweep(const FactorModel& model, const SplitDataset& split,
                       const ProbeOptions& options);

// `epsilon,mode,repeat,hr@K,ndcg@K,train_acc,ndcg_drop_pct`
void WriteProbeCsv(std::ostream& out, std::span<const ProbeRow> rows,
                   std::size_t cutoff = 100);

}  // namespace aprank

#endif  // APRANK_PROBE_H_
