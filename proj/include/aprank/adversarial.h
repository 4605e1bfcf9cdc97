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

// Adversarial personalized ranking on matrix factorization.
//
// Each mini-batch runs two phases. First the adversary builds Delta_adv: the
// gradient of the batch adversarial objective
//
//   L_adv(Delta) = sum_batch -lambda_adv * ln sigmoid(margin(Theta + Delta))
//
// is taken at Delta = 0, summed per user and item row over every role the
// row plays in the batch, and rescaled to L2 norm epsilon row by row (a
// single fast-gradient step). Then, with Delta_adv frozen, the parameters
// take one optimizer step on
//
//   sum_batch BPR(Theta) + lambda_adv * -ln sigmoid(margin(Theta + Delta_adv)).

#ifndef APRANK_ADVERSARIAL_H_
#define APRANK_ADVERSARIAL_H_

#include <span>

#include "aprank/bpr.h"
#include "aprank/dataset.h"
#include "aprank/factor_model.h"
#include "aprank/training.h"

namespace aprank {

struct AprConfig {
  TrainConfig base{.patience = 20};
  double epsilon = 0.5;     // per-vector max norm of Delta
  double lambda_adv = 1.0;  // weight of the adversarial term

  // Throws std::invalid_argument.
  void Validate() const;
};

// l_adv for one triplet: -lambda_adv * ln sigmoid(margin(Theta + Delta)).
double AdvInstanceObjective(const FactorModel& model,
                            const PerturbationField& field, const Triplet& t,
                            double lambda_adv);

// Sum of AdvInstanceObjective over `batch`.
double AdvBatchObjective(const FactorModel& model,
                         const PerturbationField& field,
                         std::span<const Triplet> batch, double lambda_adv);

// Gradient of AdvBatchObjective with respect to Delta at Delta = 0, one row
// per touched user and item. The field's epsilon is left at 0.
PerturbationField AdvGradientAtZero(const FactorModel& model,
                                    std::span<const Triplet> batch,
                                    double lambda_adv);

// Rescales each row of `gradient` to norm epsilon. Rows with zero norm are
// dropped (Delta = 0 there).
PerturbationField NormalizeRows(const PerturbationField& gradient,
                                double epsilon);

// NormalizeRows(AdvGradientAtZero(...), epsilon).
PerturbationField BuildAdvPerturbations(const FactorModel& model,
                                        std::span<const Triplet> batch,
                                        double epsilon, double lambda_adv);

// BPR instance loss plus the adversarial term at `field`.
double AprInstanceLoss(const FactorModel& model,
                       const PerturbationField& field, const Triplet& t,
                       const AprConfig& config);

// Gradient of AprInstanceLoss with the field held constant.
TripletGradient AprGradients(const FactorModel& model,
                             const PerturbationField& field, const Triplet& t,
                             const AprConfig& config);

// Builds Delta_adv for the batch, then applies one optimizer update from the
// summed APR row gradients. With lambda_adv == 0 this is BprBatchStep.
BatchStats AprBatchStep(FactorModel& model, std::span<const Triplet> batch,
                        const AprConfig& config, OptimizerState& state);

// Continues `pretrained` with APR using a fresh optimizer state. Tracks
// validation NDCG@100 and keeps the best checkpoint; stops after
// `config.base.patience` evaluations without improvement. Throws
// DimensionError if the model does not match the split.
TrainResult TrainApr(const SplitDataset& split, FactorModel pretrained,
                     const AprConfig& config);

}  // namespace aprank

#endif  // APRANK_ADVERSARIAL_H_
