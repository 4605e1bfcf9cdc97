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

// Leave-one-out evaluation over the full item catalogue. Each evaluated user
// ranks every item it has not interacted with in training; the held-out item
// scores HR@K = [rank <= K] and NDCG@K = [rank <= K] / log2(rank + 1).

#ifndef APRANK_EVALUATOR_H_
#define APRANK_EVALUATOR_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "aprank/dataset.h"
#include "aprank/factor_model.h"

namespace aprank {

// Scores every item for one user. Implementations are read-only and may be
// called from several threads at once.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::size_t n_users() const = 0;
  virtual std::size_t n_items() const = 0;
  // `out` has n_items() entries.
  virtual void Score(UserId u, std::span<double> out) const = 0;
};

class ModelScorer : public Scorer {
 public:
  explicit ModelScorer(const FactorModel& model) : model_(model) {}
  std::size_t n_users() const override { return model_.n_users(); }
  std::size_t n_items() const override { return model_.n_items(); }
  void Score(UserId u, std::span<double> out) const override;

 private:
  const FactorModel& model_;
};

// Scores with (p_u + Delta_u) . (q_i + Delta_i). Keeps its own perturbed copy
// of the parameters; the source model is not touched.
class PerturbedModelScorer : public Scorer {
 public:
  PerturbedModelScorer(const FactorModel& model,
                       const PerturbationField& field)
      : perturbed_(Materialize(model, field)) {}
  std::size_t n_users() const override { return perturbed_.n_users(); }
  std::size_t n_items() const override { return perturbed_.n_items(); }
  void Score(UserId u, std::span<double> out) const override;

 private:
  FactorModel perturbed_;
};

// Non-personalized popularity: score(i) = training interaction count of i.
class ItemPopScorer : public Scorer {
 public:
  explicit ItemPopScorer(const InteractionDataset& train);
  std::size_t n_users() const override { return n_users_; }
  std::size_t n_items() const override { return counts_.size(); }
  void Score(UserId u, std::span<double> out) const override;

 private:
  std::size_t n_users_;
  std::vector<double> counts_;
};

// 1-based rank of `test_item` among the items not in `excluded` (sorted).
// Ties are broken by item index: an equal-scoring item with a smaller index
// ranks ahead. Throws std::invalid_argument if test_item is excluded.
std::size_t RankOfTestItem(std::span<const double> scores, ItemId test_item,
                           std::span<const ItemId> excluded);

struct UserMetrics {
  double hr;
  double ndcg;
};

UserMetrics ComputeUserMetrics(std::size_t rank, std::size_t cutoff);

enum class EvalTarget { kTest, kValidation };

struct CutoffMetrics {
  std::size_t cutoff;
  double hr;
  double ndcg;
};

struct UserRank {
  UserId user;
  std::size_t rank;
};

struct EvalReport {
  std::vector<CutoffMetrics> metrics;  // in the order cutoffs were given
  std::size_t n_users_evaluated = 0;
  double elapsed_seconds = 0.0;
  std::vector<UserRank> per_user;  // ascending user index

  // Throws std::out_of_range if `cutoff` was not evaluated.
  const CutoffMetrics& At(std::size_t cutoff) const;
  std::vector<double> PerUserNdcg(std::size_t cutoff) const;
};

// Averages user metrics over every user holding a `target` item. Training
// positives are excluded from the candidates; the other held-out item stays
// a candidate. Thread count 0 reads APR_THREADS (default 1). Throws
// DimensionError if the scorer does not match the split and
// std::invalid_argument for a zero cutoff.
EvalReport Evaluate(const Scorer& scorer, const SplitDataset& split,
                    std::span<const std::size_t> cutoffs,
                    EvalTarget target = EvalTarget::kTest,
                    std::size_t threads = 0);

// Threads from the APR_THREADS environment variable, at least 1.
std::size_t EvalThreadsFromEnv();

// Two-sided paired t-test on a[k] - b[k]. With zero variance of the
// differences the result is 0 if their mean is nonzero, else 1. Throws
// std::invalid_argument unless both have the same length >= 2.
double PairedSignificance(std::span<const double> a,
                          std::span<const double> b);

// Pairwise (cascade) summation.
double PairwiseSum(std::span<const double> values);

// `cutoff,hr,ndcg,n_users`
void WriteEvalCsv(std::ostream& out, const EvalReport& report);
// `user,rank` followed by one `ndcg@K` column per cutoff.
void WritePerUserCsv(std::ostream& out, const EvalReport& report);

}  // namespace aprank

#endif  // APRANK_EVALUATOR_H_
