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


#include "aprank/evaluator.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "aprank/errors.h"
#include "aprank/rng.h"
#include "doctest.h"
#include "test_util.h"

namespace aprank {
namespace {

using testing::MakeDataset;
using testing::MakeModel;
using testing::MakeSplit;

FactorModel RandomModel(std::size_t n_users, std::size_t n_items,
                        std::size_t k, std::uint64_t seed) {
  FactorModel m(n_users, n_items, k);
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double& x : m.user_data()) x = g(rng);
  for (double& x : m.item_data()) x = g(rng);
  return m;
}

// Random split: each user holds a few training items and one test item.
SplitDataset RandomSplit(std::size_t n_users, std::size_t n_items,
                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Interaction> xs;
  std::vector<std::optional<ItemId>> test(n_users);
  for (UserId u = 0; u < n_users; ++u) {
    std::vector<ItemId> items(n_items);
    std::iota(items.begin(), items.end(), 0);
    std::shuffle(items.begin(), items.end(), rng);
    std::size_t n = 1 + u % 5;
    for (std::size_t k = 0; k < n; ++k) xs.push_back({u, items[k], std::nullopt});
    if (u % 7 != 3) test[u] = items[n];
  }
  return MakeSplit(InteractionDataset(n_users, n_items, xs), test);
}

// Rank by sorting all candidates: score descending, then index ascending.
std::size_t SortRank(const std::vector<double>& scores, ItemId test,
                     const std::vector<ItemId>& excluded) {
  std::vector<ItemId> cand;
  for (ItemId i = 0; i < scores.size(); ++i) {
    if (std::find(excluded.begin(), excluded.end(), i) == excluded.end()) {
      cand.push_back(i);
    }
  }
  std::sort(cand.begin(), cand.end(), [&](ItemId a, ItemId b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  });
  return static_cast<std::size_t>(
             std::find(cand.begin(), cand.end(), test) - cand.begin()) +
         1;
}

TEST_CASE("rank of the held-out item") {
  std::vector<double> s{0.1, 0.9, 0.5, 0.3};
  std::vector<ItemId> none;
  CHECK(RankOfTestItem(s, 1, none) == 1);
  CHECK(RankOfTestItem(s, 0, none) == 4);
  std::vector<ItemId> ex{1, 2};
  CHECK(RankOfTestItem(s, 3, ex) == 1);
  CHECK_THROWS_AS(RankOfTestItem(s, 2, ex), std::invalid_argument);

  std::vector<double> flat(6, 1.0);
  std::vector<ItemId> ex0{0};
  CHECK(RankOfTestItem(flat, 1, ex0) == 1);
  CHECK(RankOfTestItem(flat, 5, ex0) == 5);
}

TEST_CASE("rank agrees with a full sort") {
  Rng rng(5);
  std::uniform_int_distribution<int> coarse(0, 9);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> scores(50);
    // Coarse scores force plenty of ties.
    for (double& x : scores) x = rep % 2 ? coarse(rng) : std::ldexp(coarse(rng), -3) + rng() * 1e-20;
    std::vector<ItemId> excluded;
    for (ItemId i = 0; i < 50; ++i) {
      if (rng() % 5 == 0) excluded.push_back(i);
    }
    ItemId test;
    do {
      test = static_cast<ItemId>(rng() % 50);
    } while (std::find(excluded.begin(), excluded.end(), test) != excluded.end());
    CHECK(RankOfTestItem(scores, test, excluded) ==
          SortRank(scores, test, excluded));
  }
}

TEST_CASE("user metrics") {
  auto a = ComputeUserMetrics(1, 5);
  CHECK(a.hr == 1.0);
  CHECK(a.ndcg == 1.0);
  auto b = ComputeUserMetrics(3, 100);
  CHECK(b.hr == 1.0);
  CHECK(b.ndcg == 0.5);
  auto c = ComputeUserMetrics(101, 100);
  CHECK(c.hr == 0.0);
  CHECK(c.ndcg == 0.0);
  auto d = ComputeUserMetrics(100, 100);
  CHECK(d.ndcg == doctest::Approx(1.0 / std::log2(101.0)));
}

TEST_CASE("single user ranked first") {
  auto m = MakeModel({{1, 0}}, {{0.5, 0}, {2, 0}, {0.1, 0}});
  auto split = MakeSplit(MakeDataset(1, 3, {{0, 0}}), {1});
  const std::size_t cut[] = {100};
  auto r = Evaluate(ModelScorer(m), split, cut);
  CHECK(r.n_users_evaluated == 1);
  CHECK(r.At(100).hr == 1.0);
  CHECK(r.At(100).ndcg == 1.0);
  CHECK_THROWS_AS(r.At(50), std::out_of_range);
}

TEST_CASE("evaluation matches a naive loop") {
  auto split = RandomSplit(20, 40, 3);
  auto m = RandomModel(20, 40, 6, 4);
  const std::size_t cuts[] = {1, 5, 10, 40};
  auto r = Evaluate(ModelScorer(m), split, cuts, EvalTarget::kTest, 1);

  for (std::size_t c = 0; c < 4; ++c) {
    double hr = 0.0;
    double ndcg = 0.0;
    double n = 0.0;
    for (UserId u = 0; u < 20; ++u) {
      if (!split.test[u]) continue;
      ItemId t = *split.test[u];
      double st = m.Predict(u, t);
      std::size_t rank = 1;
      for (ItemId j = 0; j < 40; ++j) {
        if (j == t || split.train.Contains(u, j)) continue;
        double sj = m.Predict(u, j);
        if (sj > st || (sj == st && j < t)) ++rank;
      }
      if (rank <= cuts[c]) {
        hr += 1.0;
        ndcg += 1.0 / std::log2(rank + 1.0);
      }
      n += 1.0;
    }
    CHECK(r.metrics[c].cutoff == cuts[c]);
    CHECK(std::abs(r.metrics[c].hr - hr / n) <= 1e-12);
    CHECK(std::abs(r.metrics[c].ndcg - ndcg / n) <= 1e-12);
    CHECK(r.n_users_evaluated == static_cast<std::size_t>(n));
  }
  // Every candidate is within the largest cutoff.
  CHECK(r.At(40).hr == 1.0);
}

TEST_CASE("metrics are monotone in the cutoff") {
  auto split = RandomSplit(60, 80, 8);
  auto m = RandomModel(60, 80, 4, 9);
  const std::size_t cuts[] = {1, 3, 10, 30, 100};
  auto r = Evaluate(ModelScorer(m), split, cuts);
  for (std::size_t c = 1; c < 5; ++c) {
    CHECK(r.metrics[c].hr >= r.metrics[c - 1].hr);
    CHECK(r.metrics[c].ndcg >= r.metrics[c - 1].ndcg);
  }
  for (const auto& u : r.per_user) {
    auto prev = ComputeUserMetrics(u.rank, 1);
    for (std::size_t c : cuts) {
      auto cur = ComputeUserMetrics(u.rank, c);
      CHECK(cur.hr >= prev.hr);
      CHECK(cur.ndcg >= prev.ndcg);
      prev = cur;
    }
  }
}

TEST_CASE("threads do not change the report") {
  auto split = RandomSplit(97, 50, 10);
  auto m = RandomModel(97, 50, 5, 11);
  const std::size_t cuts[] = {10, 50};
  auto one = Evaluate(ModelScorer(m), split, cuts, EvalTarget::kTest, 1);
  auto four = Evaluate(ModelScorer(m), split, cuts, EvalTarget::kTest, 4);
  CHECK(one.metrics[0].ndcg == four.metrics[0].ndcg);
  CHECK(one.metrics[1].hr == four.metrics[1].hr);
  REQUIRE(one.per_user.size() == four.per_user.size());
  for (std::size_t k = 0; k < one.per_user.size(); ++k) {
    CHECK(one.per_user[k].user == four.per_user[k].user);
    CHECK(one.per_user[k].rank == four.per_user[k].rank);
  }
}

TEST_CASE("thread count from the environment") {
  ::setenv("APR_THREADS", "3", 1);
  CHECK(EvalThreadsFromEnv() == 3);
  ::setenv("APR_THREADS", "zero", 1);
  CHECK(EvalThreadsFromEnv() == 1);
  ::unsetenv("APR_THREADS");
  CHECK(EvalThreadsFromEnv() == 1);
}

TEST_CASE("zero field scorer matches the plain model") {
  auto split = RandomSplit(30, 25, 12);
  auto m = RandomModel(30, 25, 3, 13);
  const std::size_t cuts[] = {5, 20};
  PerturbationField zero(3, 0.0);
  auto a = Evaluate(ModelScorer(m), split, cuts);
  auto b = Evaluate(PerturbedModelScorer(m, zero), split, cuts);
  CHECK(a.metrics[0].ndcg == b.metrics[0].ndcg);
  CHECK(a.metrics[1].hr == b.metrics[1].hr);
}

TEST_CASE("validation target") {
  auto split = MakeSplit(MakeDataset(1, 4, {{0, 0}}), {2});
  split.validation[0] = 3;
  // Item 2 (the test item) stays a candidate when ranking the validation
  // item.
  auto m = MakeModel({{1}}, {{0}, {0.1}, {5}, {4}});
  const std::size_t cut[] = {1, 3};
  auto r = Evaluate(ModelScorer(m), split, cut, EvalTarget::kValidation);
  CHECK(r.At(1).hr == 0.0);
  CHECK(r.At(3).ndcg == doctest::Approx(1.0 / std::log2(3.0)));
  REQUIRE(r.per_user.size() == 1);
  CHECK(r.per_user[0].rank == 2);
}

TEST_CASE("evaluation errors") {
  auto split = RandomSplit(10, 12, 1);
  const std::size_t zero[] = {0};
  const std::size_t ok[] = {5};
  auto m = RandomModel(10, 12, 2, 1);
  CHECK_THROWS_AS(Evaluate(ModelScorer(m), split, zero), std::invalid_argument);
  auto wrong = RandomModel(10, 13, 2, 1);
  CHECK_THROWS_AS(Evaluate(ModelScorer(wrong), split, ok), DimensionError);
}

TEST_CASE("popularity scorer") {
  auto train = MakeDataset(4, 5, {{0, 2}, {1, 2}, {2, 2}, {0, 4}, {1, 4}, {3, 0}});
  ItemPopScorer pop(train);
  std::vector<double> s(5);
  pop.Score(1, s);
  CHECK(s == std::vector<double>{1, 0, 3, 0, 2});
  // Item 2 has the top count, so it heads every user's ranking.
  auto split = MakeSplit(train, {std::nullopt, std::nullopt, std::nullopt, 2});
  const std::size_t cut[] = {1};
  CHECK(Evaluate(pop, split, cut).At(1).hr == 1.0);
  // Unseen items rank last, ordered by index.
  std::vector<ItemId> ex{2};
  CHECK(RankOfTestItem(s, 1, ex) == 3);
  CHECK(RankOfTestItem(s, 3, ex) == 4);
}

TEST_CASE("paired significance") {
  std::vector<double> a{0.3, 0.1, 0.5, 0.2};
  CHECK(PairedSignificance(a, a) == 1.0);
  std::vector<double> shifted{1.3, 1.1, 1.5, 1.2};
  CHECK(PairedSignificance(shifted, a) == 0.0);
  std::vector<double> one{1.0};
  CHECK_THROWS_AS(PairedSignificance(one, one), std::invalid_argument);
  std::vector<double> three{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(PairedSignificance(a, three), std::invalid_argument);

  // n = 1000 Gaussian-shaped differences with mean 0.1 and sample std 1.
  // Reference p from tests/oracles/freeze_values.py (scipy t distribution).
  const double reference = 0.001612599991270277;
  const std::size_t n = 1000;
  boost::math::normal gauss;
  std::vector<double> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    z[k] = boost::math::quantile(gauss, (k + 0.5) / n);
  }
  double mean = std::accumulate(z.begin(), z.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : z) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / (n - 1));
  std::vector<double> x(n);
  std::vector<double> y(n, 0.25);
  for (std::size_t k = 0; k < n; ++k) x[k] = 0.25 + 0.1 + (z[k] - mean) / sd;
  double p = PairedSignificance(x, y);
  CHECK(std::abs(p - reference) <= 0.1 * reference);
}

TEST_CASE("pairwise summation") {
  std::vector<double> v(1000, 0.1);
  CHECK(PairwiseSum(v) == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(PairwiseSum(std::vector<double>{}) == 0.0);
}

TEST_CASE("csv output") {
  EvalReport r;
  r.metrics = {{50, 0.5, 0.25}, {100, 0.75, 0.3}};
  r.n_users_evaluated = 4;
  r.per_user = {{0, 1}, {2, 120}};
  std::ostringstream out;
  WriteEvalCsv(out, r);
  CHECK(out.str() == "cutoff,hr,ndcg,n_users\n50,0.5,0.25,4\n100,0.75,0.3,4\n");
  std::ostringstream per;
  WritePerUserCsv(per, r);
  CHECK(per.str() == "user,rank,ndcg@50,ndcg@100\n0,1,1,1\n2,120,0,0\n");
}

}  // namespace
}  // namespace aprank
