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
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "aprank/errors.h"

namespace aprank {

void ModelScorer::Score(UserId u, std::span<double> out) const {
  auto p = model_.User(u);
  for (ItemId i = 0; i < out.size(); ++i) out[i] = Dot(p, model_.Item(i));
}

void PerturbedModelScorer::Score(UserId u, std::span<double> out) const {
  auto p = perturbed_.User(u);
  for (ItemId i = 0; i < out.size(); ++i) out[i] = Dot(p, perturbed_.Item(i));
}

ItemPopScorer::ItemPopScorer(const InteractionDataset& train)
    : n_users_(train.n_users()) {
  auto counts = train.ItemCounts();
  counts_.assign(counts.begin(), counts.end());
}

void ItemPopScorer::Score(UserId, std::span<double> out) const {
  std::copy(counts_.begin(), counts_.end(), out.begin());
}

std::size_t RankOfTestItem(std::span<const double> scores, ItemId test_item,
                           std::span<const ItemId> excluded) {
  if (test_item >= scores.size()) {
    throw std::invalid_argument("test item out of range");
  }
  if (std::binary_search(excluded.begin(), excluded.end(), test_item)) {
    throw std::invalid_argument("test item is among the excluded items");
  }
  const double target = scores[test_item];
  std::size_t ahead = 0;
  auto next_excluded = excluded.begin();
  for (ItemId j = 0; j < scores.size(); ++j) {
    if (next_excluded != excluded.end() && *next_excluded == j) {
      ++next_excluded;
      continue;
    }
    if (scores[j] > target || (scores[j] == target && j < test_item)) ++ahead;
  }
  return ahead + 1;
}

UserMetrics ComputeUserMetrics(std::size_t rank, std::size_t cutoff) {
  if (rank == 0 || rank > cutoff) return {0.0, 0.0};
  return {1.0, 1.0 / std::log2(static_cast<double>(rank) + 1.0)};
}

const CutoffMetrics& EvalReport::At(std::size_t cutoff) const {
  for (const auto& m : metrics) {
    if (m.cutoff == cutoff) return m;
  }
  throw std::out_of_range("cutoff " + std::to_string(cutoff) +
                          " not evaluated");
}

std::vector<double> EvalReport::PerUserNdcg(std::size_t cutoff) const {
  std::vector<double> out;
  out.reserve(per_user.size());
  for (const auto& r : per_user) {
    out.push_back(ComputeUserMetrics(r.rank, cutoff).ndcg);
  }
  return out;
}

std::size_t EvalThreadsFromEnv() {
  const char* env = std::getenv("APR_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  long n = std::strtol(env, &end, 10);
  if (end == env || n < 1) return 1;
  return static_cast<std::size_t>(n);
}

double PairwiseSum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  std::size_t half = values.size() / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

EvalReport Evaluate(const Scorer& scorer, const SplitDataset& split,
                    std::span<const std::size_t> cutoffs, EvalTarget target,
                    std::size_t threads) {
  auto start = std::chrono::steady_clock::now();
  if (scorer.n_users() != split.n_users() ||
      scorer.n_items() != split.n_items()) {
    throw DimensionError("scorer shape does not match the dataset");
  }
  for (std::size_t k : cutoffs) {
    if (k == 0) throw std::invalid_argument("cutoff must be >= 1");
  }
  const auto& held_out =
      target == EvalTarget::kTest ? split.test : split.validation;

  std::vector<UserId> users;
  for (UserId u = 0; u < held_out.size(); ++u) {
    if (held_out[u]) users.push_back(u);
  }
  std::vector<std::size_t> ranks(users.size(), 0);

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> scores(scorer.n_items());
    for (std::size_t n = begin; n < end; ++n) {
      UserId u = users[n];
      scorer.Score(u, scores);
      ranks[n] = RankOfTestItem(scores, *held_out[u], split.train.Positives(u));
    }
  };
  if (threads == 0) threads = EvalThreadsFromEnv();
  threads = std::max<std::size_t>(1, std::min(threads, users.size()));
  if (threads == 1) {
    work(0, users.size());
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (users.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      std::size_t b = t * chunk;
      std::size_t e = std::min(users.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  report.n_users_evaluated = users.size();
  report.per_user.reserve(users.size());
  for (std::size_t n = 0; n < users.size(); ++n) {
    report.per_user.push_back({users[n], ranks[n]});
  }
  std::vector<double> hr(users.size());
  std::vector<double> ndcg(users.size());
  for (std::size_t k : cutoffs) {
    for (std::size_t n = 0; n < users.size(); ++n) {
      auto m = ComputeUserMetrics(ranks[n], k);
      hr[n] = m.hr;
      ndcg[n] = m.ndcg;
    }
    double denom = users.empty() ? 1.0 : static_cast<double>(users.size());
    report.metrics.push_back(
        {k, PairwiseSum(hr) / denom, PairwiseSum(ndcg) / denom});
  }
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

double PairedSignificance(std::span<const double> a,
                          std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument(
        "paired test needs two lists of equal length >= 2");
  }
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t k = 0; k < n; ++k) diff[k] = a[k] - b[k];
  double mean = PairwiseSum(diff) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t k = 0; k < n; ++k) {
    sq[k] = (diff[k] - mean) * (diff[k] - mean);
  }
  double var = PairwiseSum(sq) / static_cast<double>(n - 1);
  if (var == 0.0) return mean != 0.0 ? 0.0 : 1.0;
  double t = mean / std::sqrt(var / static_cast<double>(n));
  boost::math::students_t dist(static_cast<double>(n - 1));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

void WriteEvalCsv(std::ostream& out, const EvalReport& report) {
  auto precision = out.precision(10);
  out << "cutoff,hr,ndcg,n_users\n";
  for (const auto& m : report.metrics) {
    out << m.cutoff << ',' << m.hr << ',' << m.ndcg << ','
        << report.n_users_evaluated << '\n';
  }
  out.precision(precision);
}

void WritePerUserCsv(std::ostream& out, const EvalReport& report) {
  auto precision = out.precision(10);
  out << "user,rank";
  for (const auto& m : report.metrics) out << ",ndcg@" << m.cutoff;
  out << '\n';
  for (const auto& r : report.per_user) {
    out << r.user << ',' << r.rank;
    for (const auto& m : report.metrics) {
      out << ',' << ComputeUserMetrics(r.rank, m.cutoff).ndcg;
    }
    out << '\n';
  }
  out.precision(precision);
}

}  // namespace aprank
