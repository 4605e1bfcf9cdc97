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

#include "aprank/bpr.h"

#include <cmath>

#include "aprank/internal/instance_grad.h"

namespace aprank {

namespace internal {

double AccumulateBprInstance(const FactorModel& model, const Triplet& t,
                             double lambda_reg, SparseRows& user_grad,
                             SparseRows& item_grad) {
  auto p = model.User(t.u);
  auto qi = model.Item(t.i);
  auto qj = model.Item(t.j);
  double margin = Dot(p, qi) - Dot(p, qj);
  double coeff = -Sigmoid(-margin);

  std::size_t su = user_grad.UpsertSlot(t.u);
  std::size_t si = item_grad.UpsertSlot(t.i);
  std::size_t sj = item_grad.UpsertSlot(t.j);
  auto gu = user_grad.Row(su);
  auto gi = item_grad.Row(si);
  auto gj = item_grad.Row(sj);
  AddMarginGradient(coeff, p, qi, qj, gu, gi, gj);
  AddL2Gradient(lambda_reg, p, qi, qj, gu, gi, gj);

  double loss = NegLogSigmoid(margin);
  if (lambda_reg != 0.0) {
    loss += lambda_reg * (Dot(p, p) + Dot(qi, qi) + Dot(qj, qj));
  }
  return loss;
}

}  // namespace internal

double NegLogSigmoid(double x) {
  if (x >= 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double BprInstanceLoss(const FactorModel& model, const Triplet& t,
                       double lambda_reg) {
  auto p = model.User(t.u);
  auto qi = model.Item(t.i);
  auto qj = model.Item(t.j);
  double margin = Dot(p, qi) - Dot(p, qj);
  double loss = NegLogSigmoid(margin);
  if (lambda_reg != 0.0) {
    loss += lambda_reg * (Dot(p, p) + Dot(qi, qi) + Dot(qj, qj));
  }
  return loss;
}

TripletGradient BprGradients(const FactorModel& model, const Triplet& t,
                             double lambda_reg) {
  const std::size_t k = model.k();
  TripletGradient g{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0),
                    std::vector<double>(k, 0.0)};
  auto p = model.User(t.u);
  auto qi = model.Item(t.i);
  auto qj = model.Item(t.j);
  double coeff = -Sigmoid(-(Dot(p, qi) - Dot(p, qj)));
  internal::AddMarginGradient(coeff, p, qi, qj, g.user, g.pos_item,
                              g.neg_item);
  internal::AddL2Gradient(lambda_reg, p, qi, qj, g.user, g.pos_item,
                          g.neg_item);
  return g;
}

BatchStats BprBatchStep(FactorModel& model, std::span<const Triplet> batch,
                        const TrainConfig& config, OptimizerState& state) {
  BatchStats stats;
  for (const Triplet& t : batch) {
    stats.loss_sum += internal::AccumulateBprInstance(
        model, t, config.lambda_reg, state.user_grad, state.item_grad);
  }
  stats.instances = batch.size();
  ApplyAccumulated(model, state);
  return stats;
}

TrainResult TrainBpr(const SplitDataset& split, FactorModel initial,
                     const TrainConfig& config) {
  return RunTraining(
      split, std::move(initial), config, TrainingStage::kBpr,
      [&config](FactorModel& model, std::span<const Triplet> batch,
                OptimizerState& state) {
        return BprBatchStep(model, batch, config, state);
      });
}

TrainResult TrainBpr(const SplitDataset& split, const TrainConfig& config) {
  config.Validate();
  return TrainBpr(split,
                  FactorModel::Init(split.n_users(), split.n_items(),
                                    config.factors, config.seed),
                  config);
}

}  // namespace aprank
