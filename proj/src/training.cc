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

#include "aprank/training.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "aprank/errors.h"
#include "aprank/evaluator.h"
#include "aprank/rng.h"

namespace aprank {
namespace {

constexpr double kAdagradEpsilon = 1e-8;
constexpr std::size_t kValidationCutoff = 100;

bool RowFinite(std::span<const double> row) {
  for (double x : row) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

const char* OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adagrad";
}

OptimizerKind ParseOptimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adagrad") return OptimizerKind::kAdagrad;
  throw std::invalid_argument("unknown optimizer '" + name +
                              "' (expected sgd or adagrad)");
}

void TrainConfig::Validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("eta must be > 0");
  }
  if (!(lambda_reg >= 0.0) || !std::isfinite(lambda_reg)) {
    throw std::invalid_argument("lambda_reg must be >= 0");
  }
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (factors == 0) throw std::invalid_argument("factors must be >= 1");
}

OptimizerState::OptimizerState(OptimizerKind kind, double eta,
                               std::size_t n_users, std::size_t n_items,
                               std::size_t k)
    : user_grad(k), item_grad(k), kind_(kind), eta_(eta), k_(k) {
  if (kind_ == OptimizerKind::kAdagrad) {
    user_accum_.assign(n_users * k, 0.0);
    item_accum_.assign(n_items * k, 0.0);
  }
}

void OptimizerState::Update(std::span<double> accum, std::span<double> row,
                            std::span<const double> grad) {
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t k = 0; k < row.size(); ++k) row[k] -= eta_ * grad[k];
    return;
  }
  for (std::size_t k = 0; k < row.size(); ++k) {
    accum[k] += grad[k] * grad[k];
    row[k] -= eta_ * grad[k] / std::sqrt(accum[k] + kAdagradEpsilon);
  }
}

void OptimizerState::UpdateUser(UserId u, std::span<double> row,
                                std::span<const double> grad) {
  std::span<double> accum;
  if (!user_accum_.empty()) {
    accum = std::span<double>(user_accum_).subspan(u * k_, k_);
  }
  Update(accum, row, grad);
}

void OptimizerState::UpdateItem(ItemId i, std::span<double> row,
                                std::span<const double> grad) {
  std::span<double> accum;
  if (!item_accum_.empty()) {
    accum = std::span<double>(item_accum_).subspan(i * k_, k_);
  }
  Update(accum, row, grad);
}

void ApplyAccumulated(FactorModel& model, OptimizerState& state) {
  auto& ug = state.user_grad;
  auto& ig = state.item_grad;
  for (std::size_t s = 0; s < ug.size(); ++s) {
    UserId u = ug.ids()[s];
    state.UpdateUser(u, model.User(u), ug.Row(s));
  }
  for (std::size_t s = 0; s < ig.size(); ++s) {
    ItemId i = ig.ids()[s];
    state.UpdateItem(i, model.Item(i), ig.Row(s));
  }
  for (UserId u : ug.ids()) {
    if (!RowFinite(model.User(u))) {
      throw NumericalError("non-finite embedding for user " +
                           std::to_string(u));
    }
  }
  for (ItemId i : ig.ids()) {
    if (!RowFinite(model.Item(i))) {
      throw NumericalError("non-finite embedding for item " +
                           std::to_string(i));
    }
  }
  ug.Clear();
  ig.Clear();
}

TrainResult RunTraining(const SplitDataset& split, FactorModel model,
                        const TrainConfig& config, TrainingStage stage,
                        const BatchStepFn& step) {
  config.Validate();
  if (model.n_users() != split.n_users() ||
      model.n_items() != split.n_items()) {
    throw DimensionError("model shape does not match the dataset");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t cutoffs[] = {kValidationCutoff};
  const bool track_validation =
      config.eval_interval > 0 && split.n_validation_users() > 0;
  auto validate = [&](const FactorModel& m) {
    return Evaluate(ModelScorer(m), split, cutoffs, EvalTarget::kValidation)
        .At(kValidationCutoff);
  };

  TrainResult result;
  model.stage = stage;
  if (track_validation && config.epochs > 0) {
    result.best_val_ndcg = validate(model).ndcg;
    result.best_model = model;
  }

  OptimizerState state = OptimizerState::For(model, config);
  Rng rng = MakeRng(config.seed, "sampler");
  const std::size_t m = split.train.n_interactions();
  const std::size_t n_batches = (m + config.batch_size - 1) / config.batch_size;
  std::vector<Triplet> batch;
  batch.reserve(config.batch_size);
  std::size_t stale_evals = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double loss_sum = 0.0;
    double gain_sum = 0.0;
    bool has_gain = false;
    for (std::size_t b = 0; b < n_batches; ++b) {
      std::size_t size = std::min(config.batch_size, m - b * config.batch_size);
      batch.clear();
      for (std::size_t n = 0; n < size; ++n) {
        batch.push_back(SampleTriplet(split.train, rng));
      }
      BatchStats stats;
      try {
        stats = step(model, batch, state);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at epoch " +
                             std::to_string(epoch) + ", batch " +
                             std::to_string(b + 1));
      }
      loss_sum += stats.loss_sum;
      if (stage == TrainingStage::kApr) {
        gain_sum += stats.ladv_gain_sum / static_cast<double>(size);
        has_gain = true;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.stage = stage;
    rec.loss = m > 0 ? loss_sum / static_cast<double>(m) : 0.0;
    rec.emb_norm = model.EmbeddingNorm();
    if (has_gain) rec.ladv_gain = gain_sum / static_cast<double>(n_batches);

    bool stop = false;
    if (track_validation &&
        (epoch % config.eval_interval == 0 || epoch == config.epochs)) {
      auto val = validate(model);
      rec.val_hr = val.hr;
      rec.val_ndcg = val.ndcg;
      if (val.ndcg > *result.best_val_ndcg) {
        result.best_val_ndcg = val.ndcg;
        result.best_model = model;
        result.best_epoch = epoch;
        stale_evals = 0;
      } else if (config.patience > 0 && ++stale_evals >= config.patience) {
        stop = true;
      }
    }
    rec.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    result.history.push_back(rec);
    if (stop) {
      result.stopped_early = true;
      break;
    }
  }

  result.model = std::move(model);
  if (!result.best_val_ndcg) {
    result.best_model = result.model;
    result.best_epoch = result.history.size();
  }
  return result;
}

void WriteHistoryCsv(std::ostream& out, std::span<const EpochRecord> history) {
  bool with_gain = false;
  for (const auto& r : history) with_gain |= r.ladv_gain.has_value();
  auto precision = out.precision(10);
  out << "epoch,stage,loss,val_hr@100,val_ndcg@100,emb_norm,seconds";
  if (with_gain) out << ",mean_batch_ladv_gain";
  out << '\n';
  for (const auto& r : history) {
    out << r.epoch << ',' << StageName(r.stage) << ',' << r.loss << ',';
    if (r.val_hr) out << *r.val_hr;
    out << ',';
    if (r.val_ndcg) out << *r.val_ndcg;
    out << ',' << r.emb_norm << ',' << r.seconds;
    if (with_gain) {
      out << ',';
      if (r.ladv_gain) out << *r.ladv_gain;
    }
    out << '\n';
  }
  out.precision(precision);
}

void WriteHistoryCsv(const std::string& path,
                     std::span<const EpochRecord> history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  WriteHistoryCsv(out, history);
}

}  // namespace aprank
