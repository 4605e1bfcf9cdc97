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

#include "aprank/config.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "aprank/errors.h"

namespace aprank {
namespace {

std::string_view Trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value) {
  throw FormatError("bad value '" + std::string(value) + "' for key '" +
                    std::string(key) + "'");
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) BadValue(key, value);
  return out;
}

}  // namespace

TrainConfig ExperimentConfig::BprStage() const {
  TrainConfig c = apr.base;
  c.patience = 0;
  return c;
}

std::vector<std::string> ConfigKeys() {
  return {"factors",       "eta",      "lambda_reg", "batch_size",
          "epochs",        "optimizer", "seed",      "eval_interval",
          "patience",      "epsilon",  "lambda_adv", "pretrain_epochs"};
}

void ApplySetting(ExperimentConfig& config, std::string_view key,
                  std::string_view value) {
  key = Trim(key);
  value = Trim(value);
  TrainConfig& base = config.apr.base;
  if (key == "factors") {
    base.factors = ParseNumber<std::size_t>(key, value);
  } else if (key == "eta") {
    base.eta = ParseNumber<double>(key, value);
  } else if (key == "lambda_reg") {
    base.lambda_reg = ParseNumber<double>(key, value);
  } else if (key == "batch_size") {
    base.batch_size = ParseNumber<std::size_t>(key, value);
  } else if (key == "epochs") {
    base.epochs = ParseNumber<std::size_t>(key, value);
  } else if (key == "optimizer") {
    try {
      base.optimizer = ParseOptimizer(std::string(value));
    } catch (const std::invalid_argument&) {
      BadValue(key, value);
    }
  } else if (key == "seed") {
    base.seed = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "eval_interval") {
    base.eval_interval = ParseNumber<std::size_t>(key, value);
  } else if (key == "patience") {
    base.patience = ParseNumber<std::size_t>(key, value);
  } else if (key == "epsilon") {
    config.apr.epsilon = ParseNumber<double>(key, value);
  } else if (key == "lambda_adv") {
    config.apr.lambda_adv = ParseNumber<double>(key, value);
  } else if (key == "pretrain_epochs") {
    config.pretrain_epochs = ParseNumber<std::size_t>(key, value);
  } else {
    throw FormatError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig ParseConfig(std::istream& in, std::string_view source) {
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = Trim(view);
    if (view.empty()) continue;
    auto eq = view.find('=');
    std::ostringstream where;
    where << source << ":" << line_no << ": ";
    if (eq == std::string_view::npos) {
      throw FormatError(where.str() + "expected key = value");
    }
    try {
      ApplySetting(config, view.substr(0, eq), view.substr(eq + 1));
    } catch (const FormatError& e) {
      throw FormatError(where.str() + e.what());
    }
  }
  return config;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return ParseConfig(in, path);
}

void WriteConfig(std::ostream& out, const ExperimentConfig& config) {
  const TrainConfig& b = config.apr.base;
  auto precision = out.precision(17);
  out << "factors = " << b.factors << '\n'
      << "eta = " << b.eta << '\n'
      << "lambda_reg = " << b.lambda_reg << '\n'
      << "batch_size = " << b.batch_size << '\n'
      << "epochs = " << b.epochs << '\n'
      << "optimizer = " << OptimizerName(b.optimizer) << '\n'
      << "seed = " << b.seed << '\n'
      << "eval_interval = " << b.eval_interval << '\n'
      << "patience = " << b.patience << '\n'
      << "epsilon = " << config.apr.epsilon << '\n'
      << "lambda_adv = " << config.apr.lambda_adv << '\n'
      << "pretrain_epochs = " << config.pretrain_epochs << '\n';
  out.precision(precision);
}

}  // namespace aprank
