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

// Matrix factorization parameters: user embeddings P (n_users x K) and item
// embeddings Q (n_items x K), both row-major doubles. The score of (u, i) is
// the inner product of their rows.

#ifndef APRANK_FACTOR_MODEL_H_
#define APRANK_FACTOR_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aprank/dataset.h"
#include "aprank/sparse_rows.h"

namespace aprank {

enum class TrainingStage : std::uint32_t { kBpr = 0, kApr = 1 };

const char* StageName(TrainingStage stage);

inline double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

class FactorModel {
 public:
  FactorModel() = default;
  // Zero-initialized. Throws std::invalid_argument if any dimension is 0.
  FactorModel(std::size_t n_users, std::size_t n_items, std::size_t k);

  // Entries i.i.d. N(0, 0.01^2) drawn from the "init" substream of `seed`.
  static FactorModel Init(std::size_t n_users, std::size_t n_items,
                          std::size_t k, std::uint64_t seed);

  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }
  std::size_t k() const { return k_; }

  std::span<const double> User(UserId u) const {
    return std::span<const double>(users_).subspan(u * k_, k_);
  }
  std::span<double> User(UserId u) {
    return std::span<double>(users_).subspan(u * k_, k_);
  }
  std::span<const double> Item(ItemId i) const {
    return std::span<const double>(items_).subspan(i * k_, k_);
  }
  std::span<double> Item(ItemId i) {
    return std::span<double>(items_).subspan(i * k_, k_);
  }

  std::span<const double> user_data() const { return users_; }
  std::span<double> user_data() { return users_; }
  std::span<const double> item_data() const { return items_; }
  std::span<double> item_data() { return items_; }

  // p_u . q_i. Throws std::out_of_range on bad indices.
  double Predict(UserId u, ItemId i) const;

  // ||P||_F^2 + ||Q||_F^2.
  double EmbeddingNorm() const;

  bool AllFinite() const;

  // Checkpoint metadata.
  TrainingStage stage = TrainingStage::kBpr;
  std::uint64_t seed = 0;

  bool operator==(const FactorModel& other) const;

 private:
  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  std::size_t k_ = 0;
  std::vector<double> users_;
  std::vector<double> items_;
};

// Per-entity perturbation vectors Delta_u / Delta_i under a per-vector L2
// bound epsilon. Entities without a stored vector have Delta = 0.
class PerturbationField {
 public:
  PerturbationField() = default;
  PerturbationField(std::size_t k, double epsilon)
      : epsilon_(epsilon), users_(k), items_(k) {}

  double epsilon() const { return epsilon_; }
  std::size_t k() const { return users_.k(); }
  bool empty() const { return users_.empty() && items_.empty(); }

  SparseRows& users() { return users_; }
  const SparseRows& users() const { return users_; }
  SparseRows& items() { return items_; }
  const SparseRows& items() const { return items_; }

  std::span<const double> User(UserId u) const { return users_.Find(u); }
  std::span<const double> Item(ItemId i) const { return items_.Find(i); }

 private:
  double epsilon_ = 0.0;
  SparseRows users_;
  SparseRows items_;
};

// (p_u + Delta_u) . (q_i + Delta_i).
double PredictPerturbed(const FactorModel& model,
                        const PerturbationField& field, UserId u, ItemId i);

// Copy of `model` with the field added to the touched rows.
FactorModel Materialize(const FactorModel& model,
                        const PerturbationField& field);

// Binary checkpoint: "APRANKMF" magic, u32 format version, u32 stage, u64
// n_users, n_items, K, seed, then P and Q as row-major little-endian
// IEEE-754 doubles.
void SaveModel(const FactorModel& model, const std::string& path);
// Throws FormatError on bad magic, version or truncation.
FactorModel LoadModel(const std::string& path);
// Also throws DimensionError unless the shape matches.
FactorModel LoadModel(const std::string& path, std::size_t n_users,
                      std::size_t n_items, std::size_t k);

}  // namespace aprank

#endif  // APRANK_FACTOR_MODEL_H_
