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


#include "aprank/adversarial.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "aprank/bpr.h"
#include "aprank/errors.h"
#include "aprank/evaluator.h"
#include "aprank/probe.h"
#include "aprank/rng.h"
#include "aprank/synthetic.h"
#include "doctest.h"
#include "gradient_check.h"
#include "test_util.h"

namespace aprank {
namespace {

using testing::MakeModel;

double RowNorm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

// Copy of `field` with every row multiplied by `s`.
PerturbationField Scaled(const PerturbationField& field, double s) {
  PerturbationField out(field.k(), field.epsilon() * std::abs(s));
  for (std::size_t n = 0; n < field.users().size(); ++n) {
    auto src = field.users().Row(n);
    auto dst = out.users().Upsert(field.users().ids()[n]);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = s * src[k];
  }
  for (std::size_t n = 0; n < field.items().size(); ++n) {
    auto src = field.items().Row(n);
    auto dst = out.items().Upsert(field.items().ids()[n]);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = s * src[k];
  }
  return out;
}

FactorModel RandomModel(std::size_t n_users, std::size_t n_items,
                        std::size_t k, double sd, std::uint64_t seed) {
  FactorModel m(n_users, n_items, k);
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  for (double& x : m.user_data()) x = g(rng);
  for (double& x : m.item_data()) x = g(rng);
  return m;
}

std::vector<Triplet> RandomBatch(const FactorModel& m, std::size_t n, Rng& rng) {
  std::uniform_int_distribution<UserId> user(0, static_cast<UserId>(m.n_users() - 1));
  std::uniform_int_distribution<ItemId> item(0, static_cast<ItemId>(m.n_items() - 1));
  std::vector<Triplet> out;
  while (out.size() < n) {
    Triplet t{user(rng), item(rng), item(rng)};
    if (t.i != t.j) out.push_back(t);
  }
  return out;
}

// A BPR model trained to a low loss on a small synthetic log.
struct Trained {
  SplitDataset split;
  FactorModel model;
};

const Trained& SmallConvergedModel() {
  static const Trained t = [] {
    SyntheticOptions opt;
    opt.n_users = 300;
    opt.n_items = 200;
    opt.seed = 4;
    auto split = SplitLeaveOneOut(Ingest(GenerateInteractions(opt)), true, 1);
    TrainConfig c;
    c.factors = 16;
    c.epochs = 150;
    c.eval_interval = 0;
    c.seed = 2;
    auto model = TrainBpr(split, c).model;
    return Trained{std::move(split), std::move(model)};
  }();
  return t;
}

TEST_CASE("adversarial objective") {
  auto m = RandomModel(3, 4, 5, 0.5, 1);
  Triplet t{1, 2, 0};
  PerturbationField zero(5, 0.0);
  double x = m.Predict(1, 2) - m.Predict(1, 0);
  CHECK(AdvInstanceObjective(m, zero, t, 2.5) ==
        doctest::Approx(2.5 * NegLogSigmoid(x)).epsilon(1e-15));
  CHECK(AdvInstanceObjective(m, zero, t, 1.0) ==
        doctest::Approx(BprInstanceLoss(m, t, 0.0)).epsilon(1e-15));

  Rng rng(2);
  auto field = testing::RandomTripletField(t, 5, 0.7, rng);
  CHECK(AdvInstanceObjective(m, field, t, 0.0) == 0.0);
  double oracle = 1.5 * BprInstanceLoss(Materialize(m, field), t, 0.0);
  CHECK(AdvInstanceObjective(m, field, t, 1.5) ==
        doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("3-4-5 normalization") {
  PerturbationField grad(2, 0.0);
  auto row = grad.users().Upsert(0);
  row[0] = 3.0;
  row[1] = 4.0;
  auto delta = NormalizeRows(grad, 0.5);
  REQUIRE(delta.users().size() == 1);
  CHECK(delta.User(0)[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(delta.User(0)[1] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(delta.epsilon() == 0.5);
}

TEST_CASE("zero rows are dropped") {
  PerturbationField grad(3, 0.0);
  grad.items().Upsert(4);
  auto row = grad.items().Upsert(7);
  row[2] = -2.0;
  auto delta = NormalizeRows(grad, 1.0);
  CHECK(delta.Item(4).empty());
  CHECK(delta.Item(7)[2] == -1.0);
  CHECK(NormalizeRows(grad, 0.0).empty());
}

TEST_CASE("huge gradients normalize and non-finite ones are rejected") {
  PerturbationField grad(2, 0.0);
  auto row = grad.users().Upsert(3);
  row[0] = 3e300;
  row[1] = 4e300;
  auto delta = NormalizeRows(grad, 0.5);
  CHECK(delta.User(3)[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(delta.User(3)[1] == doctest::Approx(0.4).epsilon(1e-15));
  row[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(NormalizeRows(grad, 0.5), NumericalError);
  row[1] = std::nan("");
  CHECK_THROWS_AS(NormalizeRows(grad, 0.5), NumericalError);
}

TEST_CASE("all-zero model gives an empty field") {
  FactorModel m(3, 5, 4);
  std::vector<Triplet> batch{{0, 1, 2}, {2, 4, 3}};
  CHECK(BuildAdvPerturbations(m, batch, 0.5, 1.0).empty());
}

TEST_CASE("gradient at zero sums every role of an entity") {
  auto m = RandomModel(2, 4, 3, 0.4, 5);
  std::vector<Triplet> batch{{0, 1, 2}, {1, 3, 1}, {0, 2, 1}};
  auto grad = AdvGradientAtZero(m, batch, 2.0);
  // Manual: d/dDelta of -lambda ln sigmoid(margin) at 0.
  std::vector<double> item1(3, 0.0);
  std::vector<double> user0(3, 0.0);
  for (const auto& t : batch) {
    double c = -2.0 * Sigmoid(-(m.Predict(t.u, t.i) - m.Predict(t.u, t.j)));
    for (std::size_t k = 0; k < 3; ++k) {
      if (t.i == 1) item1[k] += c * m.User(t.u)[k];
      if (t.j == 1) item1[k] -= c * m.User(t.u)[k];
      if (t.u == 0) user0[k] += c * (m.Item(t.i)[k] - m.Item(t.j)[k]);
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(grad.Item(1)[k] == doctest::Approx(item1[k]).epsilon(1e-14));
    CHECK(grad.User(0)[k] == doctest::Approx(user0[k]).epsilon(1e-14));
  }
  CHECK(AdvGradientAtZero(m, batch, 0.0).empty());
}

TEST_CASE("directional derivative along the field") {
  auto m = RandomModel(1, 2, 2, 0.8, 9);
  std::vector<Triplet> batch{{0, 0, 1}};
  const double eps = 0.1;
  auto grad = AdvGradientAtZero(m, batch, 1.0);
  auto delta = NormalizeRows(grad, eps);
  double expected = 0.0;
  for (std::size_t n = 0; n < grad.users().size(); ++n) {
    expected += eps * RowNorm(grad.users().Row(n));
  }
  for (std::size_t n = 0; n < grad.items().size(); ++n) {
    expected += eps * RowNorm(grad.items().Row(n));
  }
  const double h = 1e-6;
  double up = AdvBatchObjective(m, Scaled(delta, h), batch, 1.0);
  double down = AdvBatchObjective(m, Scaled(delta, -h), batch, 1.0);
  double fd = (up - down) / (2.0 * h);
  CHECK(std::abs(fd - expected) <= 1e-4 * std::abs(expected));
}

TEST_CASE("built vectors have norm epsilon") {
  Rng rng(13);
  std::size_t checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    auto m = RandomModel(6, 9, 1 + rep % 9, 0.3, 100 + rep);
    auto batch = RandomBatch(m, 5, rng);
    double eps = std::ldexp(1.0, rep % 7 - 4) * (1.0 + rep / 300.0);
    auto f = BuildAdvPerturbations(m, batch, eps, 1.0);
    for (const auto* rows : {&f.users(), &f.items()}) {
      for (std::size_t n = 0; n < rows->size(); ++n) {
        double norm = RowNorm(rows->Row(n));
        CHECK(std::abs(norm - eps) <= 1e-12);
        CHECK(norm <= eps);
        ++checked;
      }
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("APR loss") {
  auto m = RandomModel(3, 5, 4, 0.6, 21);
  Triplet t{2, 4, 1};
  Rng rng(4);
  auto field = testing::RandomTripletField(t, 4, 0.5, rng);
  AprConfig c;
  c.base.lambda_reg = 0.03;
  c.lambda_adv = 0.0;
  CHECK(AprInstanceLoss(m, field, t, c) == BprInstanceLoss(m, t, 0.03));

  c.lambda_adv = 0.7;
  c.base.lambda_reg = 0.0;
  PerturbationField zero(4, 0.0);
  CHECK(AprInstanceLoss(m, zero, t, c) ==
        doctest::Approx(1.7 * BprInstanceLoss(m, t, 0.0)).epsilon(1e-15));

  c.base.lambda_reg = 0.02;
  double oracle = BprInstanceLoss(m, t, 0.02) +
                  0.7 * BprInstanceLoss(Materialize(m, field), t, 0.0);
  CHECK(AprInstanceLoss(m, field, t, c) ==
        doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("APR gradients") {
  auto m = RandomModel(3, 5, 6, 0.6, 22);
  Triplet t{0, 3, 2};
  Rng rng(5);
  auto field = testing::RandomTripletField(t, 6, 0.5, rng);
  AprConfig c;
  c.base.lambda_reg = 0.05;
  c.lambda_adv = 0.0;
  auto a = AprGradients(m, field, t, c);
  auto b = BprGradients(m, t, 0.05);
  CHECK(a.user == b.user);
  CHECK(a.pos_item == b.pos_item);
  CHECK(a.neg_item == b.neg_item);

  c.lambda_adv = 1.0;
  c.base.lambda_reg = 0.0;
  PerturbationField zero(6, 0.0);
  auto doubled = AprGradients(m, zero, t, c);
  auto single = BprGradients(m, t, 0.0);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(doubled.user[k] == doctest::Approx(2.0 * single.user[k]).epsilon(1e-15));
    CHECK(doubled.pos_item[k] ==
          doctest::Approx(2.0 * single.pos_item[k]).epsilon(1e-15));
    CHECK(doubled.neg_item[k] ==
          doctest::Approx(2.0 * single.neg_item[k]).epsilon(1e-15));
  }

  AprConfig fd;
  fd.epsilon = 0.5;
  fd.lambda_adv = 1.0;
  fd.base.lambda_reg = 0.01;
  CHECK(testing::AprGradientCheck(100, 8, fd, 31) <= 1e-5);
}

TEST_CASE("zero adversarial weight reproduces the BPR step bit for bit") {
  for (auto opt : {OptimizerKind::kSgd, OptimizerKind::kAdagrad}) {
    auto m = RandomModel(5, 8, 4, 0.3, 40);
    Rng rng(6);
    AprConfig c;
    c.base.optimizer = opt;
    c.base.lambda_reg = 0.01;
    c.lambda_adv = 0.0;
    auto bpr_model = m;
    auto apr_state = OptimizerState::For(m, c.base);
    auto bpr_state = OptimizerState::For(m, c.base);
    for (int step = 0; step < 20; ++step) {
      auto batch = RandomBatch(m, 7, rng);
      auto sa = AprBatchStep(m, batch, c, apr_state);
      auto sb = BprBatchStep(bpr_model, batch, c.base, bpr_state);
      CHECK(sa.loss_sum == sb.loss_sum);
    }
    CHECK(m == bpr_model);
  }
}

TEST_CASE("zero epsilon doubles the SGD step") {
  auto m = RandomModel(3, 6, 4, 0.3, 41);
  std::vector<Triplet> batch{{0, 1, 2}, {1, 2, 5}, {2, 0, 1}};
  AprConfig c;
  c.base.optimizer = OptimizerKind::kSgd;
  c.base.eta = 0.1;
  c.epsilon = 0.0;
  c.lambda_adv = 1.0;
  auto apr = m;
  auto bpr = m;
  auto sa = OptimizerState::For(m, c.base);
  auto sb = OptimizerState::For(m, c.base);
  AprBatchStep(apr, batch, c, sa);
  BprBatchStep(bpr, batch, c.base, sb);
  for (std::size_t n = 0; n < m.user_data().size(); ++n) {
    double da = apr.user_data()[n] - m.user_data()[n];
    double db = bpr.user_data()[n] - m.user_data()[n];
    CHECK(da == doctest::Approx(2.0 * db).epsilon(1e-12));
  }
  for (std::size_t n = 0; n < m.item_data().size(); ++n) {
    double da = apr.item_data()[n] - m.item_data()[n];
    double db = bpr.item_data()[n] - m.item_data()[n];
    CHECK(da == doctest::Approx(2.0 * db).epsilon(1e-12));
  }
}

TEST_CASE("hand-worked two-triplet step") {
  // Fixture from tests/oracles/freeze_values.py (50-digit arithmetic).
  auto m = MakeModel({{0.1, -0.2}, {0.3, 0.05}},
                     {{0.2, 0.1}, {-0.1, 0.4}, {0.05, -0.3}});
  std::vector<Triplet> batch{{0, 0, 1}, {1, 1, 2}};
  AprConfig c;
  c.base.optimizer = OptimizerKind::kSgd;
  c.base.eta = 0.1;
  c.base.lambda_reg = 0.01;
  c.epsilon = 0.5;
  c.lambda_adv = 1.0;

  auto delta = BuildAdvPerturbations(m, batch, c.epsilon, c.lambda_adv);
  const double du[2][2] = {{-0.3535533905932737622, 0.3535533905932737622},
                           {0.1047645443654367304, -0.48890120703870474186}};
  const double di[3][2] = {{-0.22360679774997896964, 0.44721359549995793928},
                           {-0.32467371983693642967, -0.38024594100035638898},
                           {0.49319696191607186668, 0.082199493652678644446}};
  for (UserId u = 0; u < 2; ++u) {
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(delta.User(u)[k] - du[u][k]) <= 1e-12);
    }
  }
  for (ItemId i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(delta.Item(i)[k] - di[i][k]) <= 1e-12);
    }
  }

  auto state = OptimizerState::For(m, c.base);
  AprBatchStep(m, batch, c, state);
  const double p[2][2] = {{0.13438633282527021361, -0.18727954530177194387},
                          {0.23170699503584008206, 0.099839589698984218463}};
  const double q[3][2] = {{0.1915662814087245141, 0.098006821992324428134},
                          {-0.051334186004858278689, 0.375426905673186858},
                          {0.0096679045961337645904, -0.27463372766551128614}};
  for (UserId u = 0; u < 2; ++u) {
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(m.User(u)[k] - p[u][k]) <= 1e-12);
    }
  }
  for (ItemId i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(m.Item(i)[k] - q[i][k]) <= 1e-12);
    }
  }
}

TEST_CASE("zero APR epochs return the pretrained model") {
  const auto& t = SmallConvergedModel();
  AprConfig c;
  c.base.factors = 16;
  auto r = TrainApr(t.split, t.model, c);
  CHECK(r.history.empty());
  CHECK(r.model == t.model);
  CHECK(r.model.stage == TrainingStage::kApr);
}

TEST_CASE("zero-weight APR training equals continued BPR") {
  const auto& t = SmallConvergedModel();
  AprConfig c;
  c.base.factors = 16;
  c.base.epochs = 6;
  c.base.eval_interval = 2;
  c.base.patience = 0;
  c.base.seed = 77;
  c.lambda_adv = 0.0;
  auto apr = TrainApr(t.split, t.model, c);
  auto bpr = TrainBpr(t.split, t.model, c.base);
  CHECK(apr.model.user_data().size() == bpr.model.user_data().size());
  CHECK(std::equal(apr.model.user_data().begin(), apr.model.user_data().end(),
                   bpr.model.user_data().begin()));
  CHECK(std::equal(apr.model.item_data().begin(), apr.model.item_data().end(),
                   bpr.model.item_data().begin()));
  REQUIRE(apr.history.size() == bpr.history.size());
  for (std::size_t e = 0; e < apr.history.size(); ++e) {
    CHECK(apr.history[e].loss == bpr.history[e].loss);
    CHECK(apr.history[e].val_ndcg == bpr.history[e].val_ndcg);
    CHECK(apr.history[e].emb_norm == bpr.history[e].emb_norm);
    CHECK(apr.history[e].stage == TrainingStage::kApr);
  }
}

TEST_CASE("APR rejects mismatched models and bad settings") {
  const auto& t = SmallConvergedModel();
  AprConfig c;
  c.base.epochs = 1;
  auto wrong = FactorModel::Init(t.split.n_users(), t.split.n_items() + 2, 16, 1);
  CHECK_THROWS_AS(TrainApr(t.split, wrong, c), DimensionError);
  c.epsilon = -0.1;
  CHECK_THROWS_AS(TrainApr(t.split, t.model, c), std::invalid_argument);
  c.epsilon = 0.5;
  c.lambda_adv = -1.0;
  CHECK_THROWS_AS(TrainApr(t.split, t.model, c), std::invalid_argument);
}

TEST_CASE("patience stops a stalled run") {
  const auto& t = SmallConvergedModel();
  AprConfig c;
  c.base.factors = 16;
  c.base.epochs = 200;
  c.base.eval_interval = 1;
  c.base.patience = 2;
  c.base.eta = 5.0;  // large enough to hurt validation quickly
  auto r = TrainApr(t.split, t.model, c);
  CHECK(r.stopped_early);
  CHECK(r.history.size() < 200);
  // The best checkpoint is never worse than the starting point.
  const std::size_t cut[] = {100};
  double start = Evaluate(ModelScorer(t.model), t.split, cut,
                          EvalTarget::kValidation).At(100).ndcg;
  CHECK(*r.best_val_ndcg >= start);
}

TEST_CASE("small adversarial steps increase the batch objective") {
  const auto& t = SmallConvergedModel();
  std::vector<double> norms;
  for (UserId u = 0; u < t.model.n_users(); ++u) norms.push_back(RowNorm(t.model.User(u)));
  for (ItemId i = 0; i < t.model.n_items(); ++i) norms.push_back(RowNorm(t.model.Item(i)));
  std::nth_element(norms.begin(), norms.begin() + norms.size() / 2, norms.end());
  const double eps = 0.01 * norms[norms.size() / 2];

  Rng rng(55);
  int ascents = 0;
  for (int b = 0; b < 100; ++b) {
    std::vector<Triplet> batch;
    for (int n = 0; n < 64; ++n) batch.push_back(SampleTriplet(t.split.train, rng));
    auto delta = BuildAdvPerturbations(t.model, batch, eps, 1.0);
    PerturbationField zero(t.model.k(), 0.0);
    ascents += AdvBatchObjective(t.model, delta, batch, 1.0) >=
               AdvBatchObjective(t.model, zero, batch, 1.0);
  }
  CHECK(ascents >= 95);
}

TEST_CASE("adversarial fields beat random ones of the same norm") {
  const auto& t = SmallConvergedModel();
  Rng rng(56);
  std::vector<double> adv_gain;
  std::vector<double> rand_gain;
  const double eps = 0.5;
  for (int b = 0; b < 200; ++b) {
    std::vector<Triplet> batch;
    for (int n = 0; n < 64; ++n) batch.push_back(SampleTriplet(t.split.train, rng));
    PerturbationField zero(t.model.k(), 0.0);
    double base = AdvBatchObjective(t.model, zero, batch, 1.0);
    auto adv = BuildAdvPerturbations(t.model, batch, eps, 1.0);
    std::vector<UserId> users(adv.users().ids().begin(), adv.users().ids().end());
    std::vector<ItemId> items(adv.items().ids().begin(), adv.items().ids().end());
    auto rnd = RandomPerturbations(t.model, users, items, eps, 1000 + b);
    adv_gain.push_back(AdvBatchObjective(t.model, adv, batch, 1.0) - base);
    rand_gain.push_back(AdvBatchObjective(t.model, rnd, batch, 1.0) - base);
  }
  double mean_diff = 0.0;
  for (int b = 0; b < 200; ++b) mean_diff += adv_gain[b] - rand_gain[b];
  CHECK(mean_diff > 0.0);
  // One-sided: half the two-sided p-value when the mean is positive.
  CHECK(PairedSignificance(adv_gain, rand_gain) / 2.0 < 0.01);
}

}  // namespace
}  // namespace aprank
