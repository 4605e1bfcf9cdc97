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

// Shared pieces of the BPR and APR trainers: hyperparameters, the
// per-row optimizer, sparse batch gradients and the epoch loop.

#ifndef APRANK_TRAINING_H_
#define APRANK_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aprank/dataset.h"
#include "aprank/factor_model.h"
#include "aprank/sparse_rows.h"

namespace aprank {

enum class OptimizerKind { kSgd, kAdagrad };

const char* OptimizerName(OptimizerKind kind);
OptimizerKind ParseOptimizer(const std::string& name);

struct TrainConfig {
  std::size_t factors = 64;
  double eta = 0.05;
  double lambda_reg = 0.0;  // L2 on the rows an instance touches
  std::size_t batch_size = 512;
  std::size_t epochs = 0;
  OptimizerKind optimizer = OptimizerKind::kAdagrad;
  std::uint64_t seed = 0;
  // Validation NDCG@100 every `eval_interval` epochs; 0 disables it.
  std::size_t eval_interval = 20;
  // Stop after this many evaluations without improvement; 0 disables it.
  std::size_t patience = 0;

  // Throws std::invalid_argument.
  void Validate() const;
};

// Per-coordinate optimizer state for P and Q. Adagrad accumulators persist
// across calls; SGD keeps none.
class OptimizerState {
 public:
  OptimizerState(OptimizerKind kind, double eta, std::size_t n_users,
                 std::size_t n_items, std::size_t k);

  static OptimizerState For(const FactorModel& model, const TrainConfig& c) {
    return OptimizerState(c.optimizer, c.eta, model.n_users(),
                          model.n_items(), model.k());
  }

  void UpdateUser(UserId u, std::span<double> row,
                  std::span<const double> grad);
  void UpdateItem(ItemId i, std::span<double> row,
                  std::span<const double> grad);

  OptimizerKind kind() const { return kind_; }

  // Scratch for batch gradient accumulation.
  SparseRows user_grad;
  SparseRows item_grad;

 private:
  void Update(std::span<double> accum, std::span<double> row,
              std::span<const double> grad);

  OptimizerKind kind_;
  double eta_;
  std::size_t k_;
  std::vector<double> user_accum_;
  std::vector<double> item_accum_;
};

// Applies the summed row gradients held in `state.user_grad/item_grad`,
// then clears them. Throws NumericalError if an updated row is not finite.
void ApplyAccumulated(FactorModel& model, OptimizerState& state);

struct BatchStats {
  double loss_sum = 0.0;        // summed per-instance objective
  double ladv_gain_sum = 0.0;   // summed l_adv(Delta_adv) - l_adv(0)
  std::size_t instances = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  TrainingStage stage = TrainingStage::kBpr;
  double loss = 0.0;  // mean per-instance objective over the epoch
  std::optional<double> val_hr;
  std::optional<double> val_ndcg;
  double emb_norm = 0.0;
  double seconds = 0.0;
  std::optional<double> ladv_gain;  // APR only: mean batch l_adv gain
};

struct TrainResult {
  FactorModel model;       // parameters after the last epoch run
  FactorModel best_model;  // best validation NDCG@100 seen, else `model`
  std::size_t best_epoch = 0;
  std::optional<double> best_val_ndcg;
  bool stopped_early = false;
  std::vector<EpochRecord> history;
};

using BatchStepFn = std::function<BatchStats(
    FactorModel&, std::span<const Triplet>, OptimizerState&)>;

// Epoch loop: ceil(M / S) batches of freshly sampled triplets per epoch,
// validation tracking and early stopping. `step` performs one batch update.
TrainResult RunTraining(const SplitDataset& split, FactorModel model,
                        const TrainConfig& config, TrainingStage stage,
                        const BatchStepFn& step);

// `epoch,stage,loss,val_hr@100,val_ndcg@100,emb_norm,seconds` with an extra
// `mean_batch_ladv_gain` column when any record carries one.
void WriteHistoryCsv(std::ostream& out, std::span<const EpochRecord> history);
void WriteHistoryCsv(const std::string& path,
                     std::span<const EpochRecord> history);

}  // namespace aprank

#endif  // APRANK_TRAINING_H_
