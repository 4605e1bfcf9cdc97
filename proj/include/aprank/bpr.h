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

// Bayesian Personalized Ranking for matrix factorization. For a triplet
// (u, i, j) with margin x = s(u,i) - s(u,j) the instance loss is
//
//   -ln sigmoid(x) + lambda_reg * (|p_u|^2 + |q_i|^2 + |q_j|^2).

#ifndef APRANK_BPR_H_
#define APRANK_BPR_H_

#include <span>
#include <vector>

#include "aprank/dataset.h"
#include "aprank/factor_model.h"
#include "aprank/training.h"

namespace aprank {

// -ln sigmoid(x), computed without overflow for any finite x.
double NegLogSigmoid(double x);
double Sigmoid(double x);

// Gradient of one instance loss, restricted to the three rows it touches.
// When i == j the item parts are meaningless; callers never produce that.
struct TripletGradient {
  std::vector<double> user;      // d/dp_u
  std::vector<double> pos_item;  // d/dq_i
  std::vector<double> neg_item;  // d/dq_j
};

double BprInstanceLoss(const FactorModel& model, const Triplet& t,
                       double lambda_reg);

TripletGradient BprGradients(const FactorModel& model, const Triplet& t,
                             double lambda_reg);

// Sums instance gradients per touched row (an item used as positive in one
// instance and negative in another gets both), then applies one optimizer
// update per row.
BatchStats BprBatchStep(FactorModel& model, std::span<const Triplet> batch,
                        const TrainConfig& config, OptimizerState& state);

// Trains `initial` with BPR; history rows carry stage "bpr".
TrainResult TrainBpr(const SplitDataset& split, FactorModel initial,
                     const TrainConfig& config);
// Same, starting from FactorModel::Init(..., config.seed).
TrainResult TrainBpr(const SplitDataset& split, const TrainConfig& config);

}  // namespace aprank

#endif  // APRANK_BPR_H_
