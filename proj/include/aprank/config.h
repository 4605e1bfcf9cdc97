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

// Flat `key = value` experiment manifests. Keys mirror the TrainConfig and
// AprConfig field names; unknown keys are errors.

#ifndef APRANK_CONFIG_H_
#define APRANK_CONFIG_H_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "aprank/adversarial.h"

namespace aprank {

struct ExperimentConfig {
  // `apr.base` carries the settings shared by both stages. `patience`
  // applies to the APR stage only.
  AprConfig apr;
  // BPR epochs run first when APR training starts without a checkpoint.
  std::size_t pretrain_epochs = 0;

  TrainConfig BprStage() const;
};

// Recognized keys, in documentation order.
std::vector<std::string> ConfigKeys();

// Throws FormatError naming the key for unknown keys or unparsable values.
void ApplySetting(ExperimentConfig& config, std::string_view key,
                  std::string_view value);

// Comments start with '#'. Throws FormatError with `source:line`.
ExperimentConfig ParseConfig(std::istream& in, std::string_view source);
ExperimentConfig LoadConfig(const std::string& path);

void WriteConfig(std::ostream& out, const ExperimentConfig& config);

}  // namespace aprank

#endif  // APRANK_CONFIG_H_
