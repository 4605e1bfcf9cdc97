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

#include <sstream>

#include "aprank/errors.h"
#include "doctest.h"

namespace aprank {
namespace {

ExperimentConfig Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseConfig(in, "test.cfg");
}

TEST_CASE("parse a manifest") {
  auto c = Parse(
      "# comment line\n"
      "factors = 16\n"
      "eta=0.01   # trailing comment\n"
      "\n"
      "optimizer = sgd\n"
      "epsilon = 0.25\n"
      "lambda_adv = 2\n"
      "pretrain_epochs = 7\n"
      "patience = 3\n");
  CHECK(c.apr.base.factors == 16);
  CHECK(c.apr.base.eta == 0.01);
  CHECK(c.apr.base.optimizer == OptimizerKind::kSgd);
  CHECK(c.apr.epsilon == 0.25);
  CHECK(c.apr.lambda_adv == 2.0);
  CHECK(c.pretrain_epochs == 7);
  CHECK(c.apr.base.patience == 3);
  CHECK(c.BprStage().patience == 0);
  CHECK(c.BprStage().factors == 16);
}

TEST_CASE("defaults") {
  auto c = Parse("");
  CHECK(c.apr.epsilon == 0.5);
  CHECK(c.apr.lambda_adv == 1.0);
  CHECK(c.apr.base.batch_size == 512);
  CHECK(c.apr.base.optimizer == OptimizerKind::kAdagrad);
}

TEST_CASE("malformed manifests") {
  CHECK_THROWS_WITH_AS(Parse("factors = 8\nwidth = 3\n"),
                       doctest::Contains("test.cfg:2"), FormatError);
  CHECK_THROWS_WITH_AS(Parse("width = 3\n"), doctest::Contains("width"),
                       FormatError);
  CHECK_THROWS_WITH_AS(Parse("eta = fast\n"), doctest::Contains("eta"),
                       FormatError);
  CHECK_THROWS_AS(Parse("factors = 8x\n"), FormatError);
  CHECK_THROWS_AS(Parse("factors = -1\n"), FormatError);
  CHECK_THROWS_AS(Parse("optimizer = adam\n"), FormatError);
  CHECK_THROWS_AS(Parse("just words\n"), FormatError);
  CHECK_THROWS_AS(LoadConfig("/nonexistent/aprank.cfg"), FormatError);
}

TEST_CASE("settings applied after the file win") {
  auto c = Parse("epsilon = 0.25\n");
  ApplySetting(c, "epsilon", "1.5");
  CHECK(c.apr.epsilon == 1.5);
  CHECK_THROWS_AS(ApplySetting(c, "gamma", "1"), FormatError);
}

TEST_CASE("write then parse round trip") {
  ExperimentConfig c;
  c.apr.base.factors = 32;
  c.apr.base.eta = 0.1 / 3;
  c.apr.base.lambda_reg = 1e-3;
  c.apr.base.seed = 12345678901234ULL;
  c.apr.base.optimizer = OptimizerKind::kSgd;
  c.apr.epsilon = 0.7;
  c.pretrain_epochs = 9;
  std::ostringstream out;
  WriteConfig(out, c);
  auto back = Parse(out.str());
  CHECK(back.apr.base.factors == 32);
  CHECK(back.apr.base.eta == c.apr.base.eta);
  CHECK(back.apr.base.lambda_reg == 1e-3);
  CHECK(back.apr.base.seed == 12345678901234ULL);
  CHECK(back.apr.base.optimizer == OptimizerKind::kSgd);
  CHECK(back.apr.epsilon == 0.7);
  CHECK(back.pretrain_epochs == 9);
  CHECK(ConfigKeys().size() == 12);
}

}  // namespace
}  // namespace aprank
