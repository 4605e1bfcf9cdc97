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

#include "aprank/dataset.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "aprank/errors.h"

namespace aprank {
namespace {

template <typename T>
bool ParseInteger(std::string_view text, T* out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, *out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' ||
                                 line[pos] == '\r')) {
      ++pos;
    }
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' &&
           line[pos] != '\r') {
      ++pos;
    }
    if (pos > start) fields.push_back(line.substr(start, pos - start));
  }
  return fields;
}

std::string LineError(std::string_view source, std::size_t line,
                      std::string_view what) {
  std::ostringstream os;
  os << source << ":" << line << ": " << what;
  return os.str();
}

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

}  // namespace

std::vector<RawInteraction> ReadInteractions(std::istream& in,
                                             std::string_view source) {
  std::vector<RawInteraction> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = SplitFields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() < 2 || fields.size() > 3) {
      throw DataError(LineError(source, line_no,
                                "expected `user item [timestamp]`"));
    }
    RawInteraction r{std::string(fields[0]), std::string(fields[1]),
                     std::nullopt};
    if (fields.size() == 3) {
      std::int64_t ts = 0;
      if (!ParseInteger(fields[2], &ts)) {
        throw DataError(LineError(source, line_no, "bad timestamp"));
      }
      r.timestamp = ts;
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RawInteraction> ReadInteractionsFile(const std::string& path) {
  auto in = OpenInput(path);
  return ReadInteractions(in, path);
}

std::uint32_t IdMap::Add(const std::string& token) {
  auto [it, inserted] =
      index_.emplace(token, static_cast<std::uint32_t>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::optional<std::uint32_t> IdMap::Find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

InteractionDataset::InteractionDataset(std::size_t n_users,
                                       std::size_t n_items,
                                       std::vector<Interaction> interactions,
                                       IdMap users, IdMap items)
    : n_users_(n_users),
      n_items_(n_items),
      interactions_(std::move(interactions)),
      user_map_(std::move(users)),
      item_map_(std::move(items)) {
  has_timestamps_ =
      !interactions_.empty() && interactions_.front().timestamp.has_value();
  offsets_.assign(n_users_ + 1, 0);
  for (const auto& x : interactions_) {
    if (x.user >= n_users_ || x.item >= n_items_) {
      throw DataError("interaction index out of range");
    }
    if (x.timestamp.has_value() != has_timestamps_) {
      throw DataError("either every interaction has a timestamp or none does");
    }
    ++offsets_[x.user + 1];
  }
  for (std::size_t u = 0; u < n_users_; ++u) offsets_[u + 1] += offsets_[u];
  items_.resize(interactions_.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& x : interactions_) items_[cursor[x.user]++] = x.item;
  for (std::size_t u = 0; u < n_users_; ++u) {
    auto first = items_.begin() + static_cast<std::ptrdiff_t>(offsets_[u]);
    auto last = items_.begin() + static_cast<std::ptrdiff_t>(offsets_[u + 1]);
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) {
      throw DataError("duplicate interaction for user " + std::to_string(u));
    }
  }
}

std::span<const ItemId> InteractionDataset::Positives(UserId u) const {
  return std::span<const ItemId>(items_).subspan(
      offsets_.at(u), offsets_.at(u + 1) - offsets_.at(u));
}

bool InteractionDataset::Contains(UserId u, ItemId i) const {
  auto pos = Positives(u);
  return std::binary_search(pos.begin(), pos.end(), i);
}

std::vector<std::size_t> InteractionDataset::ItemCounts() const {
  std::vector<std::size_t> counts(n_items_, 0);
  for (ItemId i : items_) ++counts[i];
  return counts;
}

double InteractionDataset::Sparsity() const {
  if (n_users_ == 0 || n_items_ == 0) return 1.0;
  return 1.0 - static_cast<double>(interactions_.size()) /
                   (static_cast<double>(n_users_) * n_items_);
}

bool InteractionDataset::operator==(const InteractionDataset& other) const {
  return n_users_ == other.n_users_ && n_items_ == other.n_items_ &&
         interactions_ == other.interactions_ &&
         user_map_ == other.user_map_ && item_map_ == other.item_map_;
}

InteractionDataset Ingest(std::span<const RawInteraction> records,
                          const IngestOptions& options) {
  // Provisional ids in first-seen order over all records.
  IdMap raw_users;
  IdMap raw_items;
  struct Merged {
    std::uint32_t user;
    std::uint32_t item;
    std::optional<std::int64_t> timestamp;
  };
  std::vector<Merged> merged;
  std::unordered_map<std::uint64_t, std::size_t> pair_index;
  bool timestamped = !records.empty() && records.front().timestamp.has_value();

  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto& r = records[n];
    if (r.user_token.empty() || r.item_token.empty()) {
      throw DataError("record " + std::to_string(n + 1) + ": empty token");
    }
    if (r.timestamp.has_value() != timestamped) {
      throw DataError("record " + std::to_string(n + 1) +
                      ": either every record has a timestamp or none does");
    }
    std::uint32_t u = raw_users.Add(r.user_token);
    std::uint32_t i = raw_items.Add(r.item_token);
    std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | i;
    auto [it, inserted] = pair_index.emplace(key, merged.size());
    if (inserted) {
      merged.push_back({u, i, r.timestamp});
      continue;
    }
    if (!options.merge_repeats) {
      throw DataError("record " + std::to_string(n + 1) +
                      ": repeated interaction (" + r.user_token + ", " +
                      r.item_token + ")");
    }
    auto& kept = merged[it->second];
    if (timestamped && *r.timestamp < *kept.timestamp) {
      kept.timestamp = r.timestamp;
    }
  }

  std::vector<std::size_t> item_count(raw_items.size(), 0);
  for (const auto& m : merged) ++item_count[m.item];
  std::vector<std::size_t> user_count(raw_users.size(), 0);
  for (const auto& m : merged) {
    if (item_count[m.item] >= options.min_item_interactions) {
      ++user_count[m.user];
    }
  }

  IdMap users;
  IdMap items;
  std::vector<Interaction> kept;
  for (const auto& m : merged) {
    if (item_count[m.item] < options.min_item_interactions) continue;
    if (user_count[m.user] < options.min_user_interactions) continue;
    UserId u = users.Add(raw_users.Token(m.user));
    ItemId i = items.Add(raw_items.Token(m.item));
    kept.push_back({u, i, m.timestamp});
  }
  if (kept.empty()) {
    throw DataError("empty dataset after preprocessing");
  }
  std::size_t n_users = users.size();
  std::size_t n_items = items.size();
  return InteractionDataset(n_users, n_items, std::move(kept),
                            std::move(users), std::move(items));
}

std::vector<RawInteraction> ToRecords(const InteractionDataset& data) {
  std::vector<RawInteraction> out;
  out.reserve(data.n_interactions());
  for (const auto& x : data.interactions()) {
    out.push_back({data.user_map().Token(x.user),
                   data.item_map().Token(x.item), x.timestamp});
  }
  return out;
}

std::size_t SplitDataset::n_test_users() const {
  return static_cast<std::size_t>(
      std::count_if(test.begin(), test.end(),
                    [](const auto& t) { return t.has_value(); }));
}

std::size_t SplitDataset::n_validation_users() const {
  return static_cast<std::size_t>(
      std::count_if(validation.begin(), validation.end(),
                    [](const auto& t) { return t.has_value(); }));
}

SplitDataset SplitLeaveOneOut(const InteractionDataset& data,
                              bool with_validation, std::uint64_t seed) {
  const std::size_t n_users = data.n_users();
  Rng rng = MakeRng(seed, "split");

  // Timestamp per (user, item) in sorted-positive order.
  std::vector<std::vector<std::optional<std::int64_t>>> times(n_users);
  for (UserId u = 0; u < n_users; ++u) {
    times[u].resize(data.Positives(u).size());
  }
  for (const auto& x : data.interactions()) {
    auto pos = data.Positives(x.user);
    auto at = std::lower_bound(pos.begin(), pos.end(), x.item) - pos.begin();
    times[x.user][static_cast<std::size_t>(at)] = x.timestamp;
  }

  SplitDataset split;
  split.test.assign(n_users, std::nullopt);
  split.validation.assign(n_users, std::nullopt);
  split.test_time.assign(n_users, std::nullopt);
  split.validation_time.assign(n_users, std::nullopt);
  const std::size_t min_needed = with_validation ? 3 : 2;

  for (UserId u = 0; u < n_users; ++u) {
    auto pos = data.Positives(u);
    if (pos.size() < min_needed) {
      ++split.n_excluded_users;
      continue;
    }
    std::size_t test_at = 0;
    if (data.has_timestamps()) {
      for (std::size_t k = 1; k < pos.size(); ++k) {
        // Items are sorted, so >= prefers the larger index on ties.
        if (*times[u][k] >= *times[u][test_at]) test_at = k;
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, pos.size() - 1);
      test_at = pick(rng);
    }
    split.test[u] = pos[test_at];
    split.test_time[u] = times[u][test_at];
    if (with_validation) {
      std::uniform_int_distribution<std::size_t> pick(0, pos.size() - 2);
      std::size_t k = pick(rng);
      if (k >= test_at) ++k;
      split.validation[u] = pos[k];
      split.validation_time[u] = times[u][k];
    }
  }

  std::vector<Interaction> train;
  train.reserve(data.n_interactions());
  for (const auto& x : data.interactions()) {
    if (split.test[x.user] == x.item || split.validation[x.user] == x.item) {
      continue;
    }
    train.push_back(x);
  }
  split.train = InteractionDataset(n_users, data.n_items(), std::move(train),
                                   data.user_map(), data.item_map());
  return split;
}

namespace {

void WriteLine(std::ostream& out, UserId u, ItemId i,
               const std::optional<std::int64_t>& ts) {
  out << u << '\t' << i;
  if (ts) out << '\t' << *ts;
  out << '\n';
}

void WriteHeldOut(const std::string& path,
                  const std::vector<std::optional<ItemId>>& items,
                  const std::vector<std::optional<std::int64_t>>& times) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (UserId u = 0; u < items.size(); ++u) {
    if (items[u]) WriteLine(out, u, *items[u], times[u]);
  }
  if (!out) throw DataError("write failed: " + path);
}

void WriteMap(const std::string& path, const IdMap& map,
              std::size_t fallback_size) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  if (map.size() == 0) {
    // Datasets built directly from indices have no tokens; use the index.
    for (std::size_t k = 0; k < fallback_size; ++k) {
      out << k << '\t' << k << '\n';
    }
  } else {
    for (std::size_t k = 0; k < map.size(); ++k) {
      out << map.Token(static_cast<std::uint32_t>(k)) << '\t' << k << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

IdMap ReadMap(const std::string& path) {
  auto in = OpenInput(path);
  IdMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = SplitFields(line);
    if (fields.empty()) continue;
    std::uint32_t index = 0;
    if (fields.size() != 2 || !ParseInteger(fields[1], &index)) {
      throw DataError(LineError(path, line_no, "expected `token index`"));
    }
    if (index != map.size() || map.Add(std::string(fields[0])) != index) {
      throw DataError(LineError(path, line_no, "indices must be dense"));
    }
  }
  return map;
}

std::vector<Interaction> ReadIndexed(const std::string& path,
                                     std::size_t n_users,
                                     std::size_t n_items) {
  auto in = OpenInput(path);
  std::vector<Interaction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = SplitFields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    Interaction x{0, 0, std::nullopt};
    std::int64_t ts = 0;
    bool ok = (fields.size() == 2 || fields.size() == 3) &&
              ParseInteger(fields[0], &x.user) &&
              ParseInteger(fields[1], &x.item) &&
              (fields.size() == 2 || ParseInteger(fields[2], &ts));
    if (!ok) {
      throw DataError(LineError(path, line_no, "expected `user item [ts]`"));
    }
    if (x.user >= n_users || x.item >= n_items) {
      throw DataError(LineError(path, line_no, "index out of range"));
    }
    if (fields.size() == 3) x.timestamp = ts;
    out.push_back(x);
  }
  return out;
}

}  // namespace

void WriteSplit(const SplitDataset& split, const std::string& prefix) {
  {
    std::ofstream out(prefix + ".train");
    if (!out) throw DataError("cannot write " + prefix + ".train");
    for (const auto& x : split.train.interactions()) {
      WriteLine(out, x.user, x.item, x.timestamp);
    }
    if (!out) throw DataError("write failed: " + prefix + ".train");
  }
  WriteHeldOut(prefix + ".valid", split.validation, split.validation_time);
  WriteHeldOut(prefix + ".test", split.test, split.test_time);
  WriteMap(prefix + ".user.map", split.train.user_map(), split.n_users());
  WriteMap(prefix + ".item.map", split.train.item_map(), split.n_items());
}

SplitDataset ReadSplit(const std::string& prefix) {
  IdMap users = ReadMap(prefix + ".user.map");
  IdMap items = ReadMap(prefix + ".item.map");
  const std::size_t n_users = users.size();
  const std::size_t n_items = items.size();

  SplitDataset split;
  split.train = InteractionDataset(
      n_users, n_items, ReadIndexed(prefix + ".train", n_users, n_items),
      std::move(users), std::move(items));
  auto held_out = [&](const std::string& path,
                      std::vector<std::optional<ItemId>>* target,
                      std::vector<std::optional<std::int64_t>>* times) {
    target->assign(n_users, std::nullopt);
    times->assign(n_users, std::nullopt);
    for (const auto& x : ReadIndexed(path, n_users, n_items)) {
      if ((*target)[x.user]) {
        throw DataError(path + ": more than one held-out item for user " +
                        std::to_string(x.user));
      }
      if (split.train.Contains(x.user, x.item)) {
        throw DataError(path + ": held-out item also in training for user " +
                        std::to_string(x.user));
      }
      (*target)[x.user] = x.item;
      (*times)[x.user] = x.timestamp;
    }
  };
  held_out(prefix + ".valid", &split.validation, &split.validation_time);
  held_out(prefix + ".test", &split.test, &split.test_time);
  split.n_excluded_users = n_users - split.n_test_users();
  return split;
}

ItemId SampleNegative(const InteractionDataset& train, UserId u, Rng& rng) {
  auto pos = train.Positives(u);
  if (pos.size() >= train.n_items()) {
    throw DataError("no negative available for user " + std::to_string(u));
  }
  std::uniform_int_distribution<ItemId> pick(
      0, static_cast<ItemId>(train.n_items() - 1));
  while (true) {
    ItemId j = pick(rng);
    if (!std::binary_search(pos.begin(), pos.end(), j)) return j;
  }
}

Triplet SampleTriplet(const InteractionDataset& train, Rng& rng) {
  if (train.n_interactions() == 0) throw DataError("no training interactions");
  std::uniform_int_distribution<std::size_t> pick(0,
                                                  train.n_interactions() - 1);
  const auto& x = train.interactions()[pick(rng)];
  return {x.user, x.item, SampleNegative(train, x.user, rng)};
}

Triplet SampleTripletForUser(const InteractionDataset& train, UserId u,
                             Rng& rng) {
  auto pos = train.Positives(u);
  if (pos.empty()) {
    throw DataError("user " + std::to_string(u) + " has no positives");
  }
  std::uniform_int_distribution<std::size_t> pick(0, pos.size() - 1);
  ItemId i = pos[pick(rng)];
  return {u, i, SampleNegative(train, u, rng)};
}

std::vector<Triplet> SampleReducedSet(const InteractionDataset& train,
                                      Rng& rng) {
  std::vector<Triplet> out;
  out.reserve(train.n_interactions());
  for (const auto& x : train.interactions()) {
    out.push_back({x.user, x.item, SampleNegative(train, x.user, rng)});
  }
  return out;
}

}  // namespace aprank
