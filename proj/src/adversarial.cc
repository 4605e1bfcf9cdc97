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

#include "aprank/adversarial.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "aprank/errors.h"
#include "aprank/internal/instance_grad.h"

namespace aprank {
namespace {

// Row plus optional perturbation, written into `out`.
std::span<const double> Shifted(std::span<const double> row,
                                std::span<const double> delta,
                                std::span<double> out) {
  if (delta.empty()) return row;
  for (std::size_t k = 0; k < row.size(); ++k) out[k] = row[k] + delta[k];
  return out;
}

struct PerturbedRows {
  explicit PerturbedRows(std::size_t k) : buffer(3 * k), k(k) {}

  void Load(const FactorModel& model, const PerturbationField& field,
            const Triplet& t) {
    std::span<double> b(buffer);
    p = Shifted(model.User(t.u), field.User(t.u), b.subspan(0, k));
    qi = Shifted(model.Item(t.i), field.Item(t.i), b.subspan(k, k));
    qj = Shifted(model.Item(t.j), field.Item(t.j), b.subspan(2 * k, k));
  }

  double Margin() const { return Dot(p, qi) - Dot(p, qj); }

  std::vector<double> buffer;
  std::size_t k;
  std::span<const double> p, qi, qj;
};

double L2Norm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

void NormalizeInto(const SparseRows& grad, double epsilon, SparseRows& out) {
  for (std::size_t s = 0; s < grad.size(); ++s) {
    auto g = grad.Row(s);
    double peak = 0.0;
    for (double x : g) {
      if (!std::isfinite(x)) {
        throw NumericalError("non-finite adversarial gradient");
      }
      peak = std::max(peak, std::abs(x));
    }
    if (peak == 0.0 || epsilon == 0.0) continue;
    // Dividing by the peak first keeps the squared norm from overflowing.
    auto d = out.Upsert(grad.ids()[s]);
    for (std::size_t k = 0; k < g.size(); ++k) d[k] = g[k] / peak;
    std::vector<double> unit(d.begin(), d.end());
    double scale = epsilon / L2Norm(unit);
    // Keep the computed norm at or below epsilon despite rounding.
    while (true) {
      for (std::size_t k = 0; k < g.size(); ++k) d[k] = unit[k] * scale;
      if (L2Norm(d) <= epsilon) break;
      scale = std::nextafter(scale, 0.0);
    }
  }
}

}  // namespace

namespace internal {

double AccumulateAdvInstance(const FactorModel& model,
                             const PerturbationField& field, const Triplet& t,
                             double lambda_adv, SparseRows& user_grad,
                             SparseRows& item_grad) {
  thread_local PerturbedRows rows(0);
  if (rows.k != model.k()) rows = PerturbedRows(model.k());
  rows.Load(model, field, t);
  double margin = rows.Margin();
  double coeff = -lambda_adv * Sigmoid(-margin);

  std::size_t su = user_grad.UpsertSlot(t.u);
  std::size_t si = item_grad.UpsertSlot(t.i);
  std::size_t sj = item_grad.UpsertSlot(t.j);
  AddMarginGradient(coeff, rows.p, rows.qi, rows.qj, user_grad.Row(su),
                    item_grad.Row(si), item_grad.Row(sj));
  return lambda_adv * NegLogSigmoid(margin);
}

}  // namespace internal

void AprConfig::Validate() const {
  base.Validate();
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be >= 0");
  }
  if (!(lambda_adv >= 0.0) || !std::isfinite(lambda_adv)) {
    throw std::invalid_argument("lambda_adv must be >= 0");
  }
}

double AdvInstanceObjective(const FactorModel& model,
                            const PerturbationField& field, const Triplet& t,
                            double lambda_adv) {
  if (lambda_adv == 0.0) return 0.0;
  PerturbedRows rows(model.k());
  rows.Load(model, field, t);
  return lambda_adv * NegLogSigmoid(rows.Margin());
}

double AdvBatchObjective(const FactorModel& model,
                         const PerturbationField& field,
                         std::span<const Triplet> batch, double lambda_adv) {
  double s = 0.0;
  for (const auto& t : batch) {
    s += AdvInstanceObjective(model, field, t, lambda_adv);
  }
  return s;
}

PerturbationField AdvGradientAtZero(const FactorModel& model,
                                    std::span<const Triplet> batch,
                                    double lambda_adv) {
  PerturbationField grad(model.k(), 0.0);
  if (lambda_adv == 0.0) return grad;
  for (const auto& t : batch) {
    auto p = model.User(t.u);
    auto qi = model.Item(t.i);
    auto qj = model.Item(t.j);
    double coeff = -lambda_adv * Sigmoid(-(Dot(p, qi) - Dot(p, qj)));
    std::size_t su = grad.users().UpsertSlot(t.u);
    std::size_t si = grad.items().UpsertSlot(t.i);
    std::size_t sj = grad.items().UpsertSlot(t.j);
    // l_adv is maximized, so the ascent direction is +gradient.
    internal::AddMarginGradient(coeff, p, qi, qj, grad.users().Row(su),
                                grad.items().Row(si), grad.items().Row(sj));
  }
  return grad;
}

PerturbationField NormalizeRows(const PerturbationField& gradient,
                                double epsilon) {
  PerturbationField field(gradient.k(), epsilon);
  NormalizeInto(gradient.users(), epsilon, field.users());
  NormalizeInto(gradient.items(), epsilon, field.items());
  return field;
}

PerturbationField BuildAdvPerturbations(const FactorModel& model,
                                        std::span<const Triplet> batch,
                                        double epsilon, double lambda_adv) {
  if (epsilon == 0.0 || lambda_adv == 0.0) {
    return PerturbationField(model.k(), epsilon);
  }
  return NormalizeRows(AdvGradientAtZero(model, batch, lambda_adv), epsilon);
}

double AprInstanceLoss(const FactorModel& model,
                       const PerturbationField& field, const Triplet& t,
                       const AprConfig& config) {
  double loss = BprInstanceLoss(model, t, config.base.lambda_reg);
  if (config.lambda_adv != 0.0) {
    loss += AdvInstanceObjective(model, field, t, config.lambda_adv);
  }
  return loss;
}

TripletGradient AprGradients(const FactorModel& model,
                             const PerturbationField& field, const Triplet& t,
                             const AprConfig& config) {
  TripletGradient g = BprGradients(model, t, config.base.lambda_reg);
  if (config.lambda_adv == 0.0) return g;
  PerturbedRows rows(model.k());
  rows.Load(model, field, t);
  double coeff = -config.lambda_adv * Sigmoid(-rows.Margin());
  internal::AddMarginGradient(coeff, rows.p, rows.qi, rows.qj, g.user,
                              g.pos_item, g.neg_item);
  return g;
}

BatchStats AprBatchStep(FactorModel& model, std::span<const Triplet> batch,
                        const AprConfig& config, OptimizerState& state) {
  const double lambda_adv = config.lambda_adv;
  // Phase 1 completes before any parameter is written.
  PerturbationField field =
      BuildAdvPerturbations(model, batch, config.epsilon, lambda_adv);

  BatchStats stats;
  for (const Triplet& t : batch) {
    stats.loss_sum += internal::AccumulateBprInstance(
        model, t, config.base.lambda_reg, state.user_grad, state.item_grad);
    if (lambda_adv == 0.0) continue;
    double adv = internal::AccumulateAdvInstance(
        model, field, t, lambda_adv, state.user_grad, state.item_grad);
    auto p = model.User(t.u);
    double base = lambda_adv * NegLogSigmoid(Dot(p, model.Item(t.i)) -
                                             Dot(p, model.Item(t.j)));
    stats.loss_sum += adv;
    stats.ladv_gain_sum += adv - base;
  }
  stats.instances = batch.size();
  ApplyAccumulated(model, state);
  return stats;
}

TrainResult TrainApr(const SplitDataset& split, FactorModel pretrained,
                     const AprConfig& config) {
  config.Validate();
  return RunTraining(
      split, std::move(pretrained), config.base, TrainingStage::kApr,
      [&config](FactorModel& model, std::span<const Triplet> batch,
                OptimizerState& state) {
        return AprBatchStep(model, batch, config, state);
      });
}

}  // namespace aprank
