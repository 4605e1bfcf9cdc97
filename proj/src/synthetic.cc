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

#include "aprank/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "aprank/rng.h"

namespace aprank {
namespace {

// Indices of the `count` largest keys.
std::vector<std::size_t> TopK(const std::vector<double>& keys,
                              std::size_t count) {
  std::vector<std::size_t> idx(keys.size());
  std::iota(idx.begin(), idx.end(), 0);
  count = std::min(count, keys.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count),
                    idx.end(), [&](std::size_t a, std::size_t b) {
                      return keys[a] > keys[b] || (keys[a] == keys[b] && a < b);
                    });
  idx.resize(count);
  return idx;
}

void EmitUser(std::size_t u, const std::vector<std::size_t>& items, Rng& rng,
              std::vector<RawInteraction>& out) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t n = 0; n < order.size(); ++n) {
    out.push_back({"u" + std::to_string(u), "i" + std::to_string(items[order[n]]),
                   static_cast<std::int64_t>(n + 1)});
  }
}

}  // namespace

std::vector<RawInteraction> GenerateInteractions(
    const SyntheticOptions& options) {
  if (options.n_users == 0 || options.n_items == 0 ||
      options.latent_dim == 0) {
    throw std::invalid_argument("synthetic dataset needs nonzero dimensions");
  }
  Rng rng = MakeRng(options.seed, "synthetic");
  std::normal_distribution<double> gauss(
      0.0, 1.0 / std::sqrt(static_cast<double>(options.latent_dim)));
  std::vector<double> users(options.n_users * options.latent_dim);
  std::vector<double> items(options.n_items * options.latent_dim);
  for (double& x : users) x = gauss(rng);
  for (double& x : items) x = gauss(rng);

  std::vector<std::size_t> pop_rank(options.n_items);
  std::iota(pop_rank.begin(), pop_rank.end(), 1);
  std::shuffle(pop_rank.begin(), pop_rank.end(), rng);
  std::vector<double> log_pop(options.n_items);
  for (std::size_t i = 0; i < options.n_items; ++i) {
    log_pop[i] = -options.popularity_exponent *
                 std::log(static_cast<double>(pop_rank[i]));
  }

  double extra = std::max(0.0, options.mean_interactions -
                                   static_cast<double>(options.min_interactions));
  std::geometric_distribution<std::size_t> extra_count(1.0 / (1.0 + extra));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<RawInteraction> out;
  std::vector<double> keys(options.n_items);
  const std::size_t d = options.latent_dim;
  for (std::size_t u = 0; u < options.n_users; ++u) {
    std::size_t n = std::min(options.n_items,
                             options.min_interactions + extra_count(rng));
    for (std::size_t i = 0; i < options.n_items; ++i) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        dot += users[u * d + k] * items[i * d + k];
      }
      double logit = options.affinity * std::sqrt(static_cast<double>(d)) * dot +
                     log_pop[i];
      // Gumbel-top-k draws without replacement from softmax(logit).
      double v = unif(rng);
      while (v == 0.0) v = unif(rng);
      keys[i] = logit - std::log(-std::log(v));
    }
    EmitUser(u, TopK(keys, n), rng, out);
  }
  return out;
}

std::vector<RawInteraction> GenerateBlockInteractions(
    std::size_t blocks, std::size_t users_per_block,
    std::size_t items_per_block, std::size_t per_user, std::uint64_t seed) {
  if (per_user > items_per_block) {
    throw std::invalid_argument("per_user exceeds block size");
  }
  Rng rng = MakeRng(seed, "synthetic.blocks");
  std::vector<RawInteraction> out;
  std::vector<std::size_t> pool(items_per_block);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t n = 0; n < users_per_block; ++n) {
      std::size_t u = b * users_per_block + n;
      std::iota(pool.begin(), pool.end(), b * items_per_block);
      std::shuffle(pool.begin(), pool.end(), rng);
      std::vector<std::size_t> chosen(pool.begin(),
                                      pool.begin() +
                                          static_cast<std::ptrdiff_t>(per_user));
      EmitUser(u, chosen, rng, out);
    }
  }
  return out;
}

}  // namespace aprank
