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

#ifndef APRANK_SPARSE_ROWS_H_
#define APRANK_SPARSE_ROWS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace aprank {

// A set of K-wide rows keyed by entity index, stored contiguously in
// insertion order. Spans returned by Upsert are invalidated by the next
// insertion.
class SparseRows {
 public:
  explicit SparseRows(std::size_t k = 0) : k_(k) {}

  std::size_t k() const { return k_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  std::span<const std::uint32_t> ids() const { return ids_; }

  // Slot of `id`, appending a zero row if it did not exist yet.
  std::size_t UpsertSlot(std::uint32_t id) {
    auto [it, inserted] = slot_.emplace(id, ids_.size());
    if (inserted) {
      ids_.push_back(id);
      data_.resize(data_.size() + k_, 0.0);
    }
    return it->second;
  }

  std::span<double> Upsert(std::uint32_t id) { return Row(UpsertSlot(id)); }

  // Empty span when `id` is absent.
  std::span<const double> Find(std::uint32_t id) const {
    auto it = slot_.find(id);
    if (it == slot_.end()) return {};
    return Row(it->second);
  }

  std::span<double> Row(std::size_t slot) {
    return std::span<double>(data_).subspan(slot * k_, k_);
  }
  std::span<const double> Row(std::size_t slot) const {
    return std::span<const double>(data_).subspan(slot * k_, k_);
  }

  void Clear() {
    ids_.clear();
    data_.clear();
    slot_.clear();
  }

 private:
  std::size_t k_;
  std::vector<std::uint32_t> ids_;
  std::vector<double> data_;
  std::unordered_map<std::uint32_t, std::size_t> slot_;
};

}  // namespace aprank

#endif  // APRANK_SPARSE_ROWS_H_
