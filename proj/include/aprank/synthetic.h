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

// Synthetic implicit-feedback logs for tests and desk-scale experiments.

#ifndef APRANK_SYNTHETIC_H_
#define APRANK_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aprank/dataset.h"

namespace aprank {

// Users and items get latent vectors; each user draws a set of distinct
// items without replacement with probability proportional to
// exp(affinity * <x_u, y_i> + log popularity_i). Popularity follows a
// power law over a random item order. Interactions of a user carry
// increasing timestamps in a random order.
struct SyntheticOptions {
  std::size_t n_users = 2000;
  std::size_t n_items = 1500;
  std::size_t latent_dim = 4;
  double mean_interactions = 20.0;  // per user, including the minimum
  std::size_t min_interactions = 5;
  double popularity_exponent = 0.8;
  double affinity = 4.0;
  std::uint64_t seed = 1;
};

std::vector<RawInteraction> GenerateInteractions(const SyntheticOptions& options);

// Block-diagonal log: `blocks` user groups, each interacting only with its
// own item group. Every user takes `per_user` distinct items of its block.
std::vector<RawInteraction> GenerateBlockInteractions(
    std::size_t blocks, std::size_t users_per_block,
    std::size_t items_per_block, std::size_t per_user, std::uint64_t seed);

}  // namespace aprank

#endif  // APRANK_SYNTHETIC_H_
