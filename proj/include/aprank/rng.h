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

#ifndef APRANK_RNG_H_
#define APRANK_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace aprank {

using Rng = std::mt19937_64;

// Seed for the named substream `name` of `root`. Consumers that draw from
// different substreams never shift each other's sequences.
std::uint64_t SubstreamSeed(std::uint64_t root, std::string_view name);

// Same, with an integer suffix (e.g. one stream per probe repeat).
std::uint64_t SubstreamSeed(std::uint64_t root, std::string_view name,
                            std::uint64_t index);

inline Rng MakeRng(std::uint64_t root, std::string_view name) {
  return Rng(SubstreamSeed(root, name));
}

}  // namespace aprank

#endif  // APRANK_RNG_H_
