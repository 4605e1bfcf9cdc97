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

// Implicit-feedback interaction data: ingestion with repeat merging and
// count filters, leave-one-out splits, and (u, i, j) triplet sampling.

#ifndef APRANK_DATASET_H_
#define APRANK_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aprank/rng.h"

namespace aprank {

using UserId = std::uint32_t;
using ItemId = std::uint32_t;

struct RawInteraction {
  std::string user_token;
  std::string item_token;
  std::optional<std::int64_t> timestamp;
};

// Parses `user item [timestamp]` lines. Blank lines and lines starting with
// '#' are skipped. Throws DataError naming `source` and the line number.
std::vector<RawInteraction> ReadInteractions(std::istream& in,
                                             std::string_view source);
std::vector<RawInteraction> ReadInteractionsFile(const std::string& path);

// Token <-> dense index bijection; indices are assigned in first-seen order.
class IdMap {
 public:
  std::uint32_t Add(const std::string& token);
  std::optional<std::uint32_t> Find(const std::string& token) const;
  const std::string& Token(std::uint32_t index) const {
    return tokens_.at(index);
  }
  std::size_t size() const { return tokens_.size(); }
  std::span<const std::string> tokens() const { return tokens_; }

  bool operator==(const IdMap& other) const { return tokens_ == other.tokens_; }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> tokens_;
};

struct Interaction {
  UserId user;
  ItemId item;
  std::optional<std::int64_t> timestamp;

  bool operator==(const Interaction&) const = default;
};

// Immutable deduplicated interaction set with per-user sorted positives.
// Interactions keep the order they were first observed in.
class InteractionDataset {
 public:
  InteractionDataset() = default;
  // Throws DataError on out-of-range indices, duplicate pairs or a mix of
  // timestamped and untimestamped interactions.
  InteractionDataset(std::size_t n_users, std::size_t n_items,
                     std::vector<Interaction> interactions, IdMap users = {},
                     IdMap items = {});

  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }
  std::size_t n_interactions() const { return interactions_.size(); }
  bool has_timestamps() const { return has_timestamps_; }

  std::span<const Interaction> interactions() const { return interactions_; }
  // Sorted item indices of user `u`.
  std::span<const ItemId> Positives(UserId u) const;
  bool Contains(UserId u, ItemId i) const;
  // Training interaction counts per item.
  std::vector<std::size_t> ItemCounts() const;

  const IdMap& user_map() const { return user_map_; }
  const IdMap& item_map() const { return item_map_; }

  // Fraction of the user-item matrix that is empty.
  double Sparsity() const;

  bool operator==(const InteractionDataset& other) const;

 private:
  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  bool has_timestamps_ = false;
  std::vector<Interaction> interactions_;
  std::vector<std::size_t> offsets_;  // CSR over users, size n_users + 1
  std::vector<ItemId> items_;         // sorted within each user
  IdMap user_map_;
  IdMap item_map_;
};

struct IngestOptions {
  std::size_t min_item_interactions = 0;
  std::size_t min_user_interactions = 0;
  // Collapse repeated (user, item) records into the earliest one. When off,
  // a repeated pair is a DataError.
  bool merge_repeats = true;
};

// Merges repeats, applies the item-count filter then the user-count filter
// (one pass each) and compacts ids. Throws DataError("empty dataset ...")
// when nothing survives.
InteractionDataset Ingest(std::span<const RawInteraction> records,
                          const IngestOptions& options = {});

// Token-level records for `data`, in interaction order.
std::vector<RawInteraction> ToRecords(const InteractionDataset& data);

struct SplitDataset {
  InteractionDataset train;
  std::vector<std::optional<ItemId>> validation;  // indexed by user
  std::vector<std::optional<ItemId>> test;        // indexed by user
  // Held-out timestamps, kept so the split can be written back out.
  std::vector<std::optional<std::int64_t>> validation_time;
  std::vector<std::optional<std::int64_t>> test_time;
  std::size_t n_excluded_users = 0;  // too few interactions to hold out

  std::size_t n_users() const { return train.n_users(); }
  std::size_t n_items() const { return train.n_items(); }
  std::size_t n_test_users() const;
  std::size_t n_validation_users() const;
};

// Leave-one-out: the latest interaction per user becomes the test item (the
// larger item index wins timestamp ties); without timestamps a seeded
// uniform pick is used. With `with_validation` a further uniformly drawn
// training interaction is held out. Users with fewer than 2 interactions
// (3 with validation) are kept in training only.
SplitDataset SplitLeaveOneOut(const InteractionDataset& data,
                              bool with_validation, std::uint64_t seed);

// Writes <prefix>.train/.valid/.test as `user item [timestamp]` lines with
// dense indices and <prefix>.user.map/.item.map as `token index` lines.
void WriteSplit(const SplitDataset& split, const std::string& prefix);
SplitDataset ReadSplit(const std::string& prefix);

struct Triplet {
  UserId u;
  ItemId i;  // observed
  ItemId j;  // unobserved

  bool operator==(const Triplet&) const = default;
};

// Draws j uniformly from the items `u` has not interacted with. Throws
// DataError("no negative available ...") if u has interacted with every item.
ItemId SampleNegative(const InteractionDataset& train, UserId u, Rng& rng);

// (u, i) uniform over training interactions, j uniform over non-positives.
Triplet SampleTriplet(const InteractionDataset& train, Rng& rng);
// i uniform over the positives of `u`.
Triplet SampleTripletForUser(const InteractionDataset& train, UserId u,
                             Rng& rng);

// One triplet per training interaction, in interaction order.
std::vector<Triplet> SampleReducedSet(const InteractionDataset& train,
                                      Rng& rng);

}  // namespace aprank

#endif  // APRANK_DATASET_H_
