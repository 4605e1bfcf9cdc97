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

#include "aprank/factor_model.h"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "aprank/errors.h"
#include "aprank/rng.h"

namespace aprank {
namespace {

constexpr std::array<char, 8> kMagic = {'A', 'P', 'R', 'A', 'N', 'K', 'M', 'F'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr double kInitStddev = 0.01;

void PutU64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes;
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

void PutU32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> bytes;
  for (int b = 0; b < 4; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t GetU64(std::istream& in, const std::string& path) {
  std::array<unsigned char, 8> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw FormatError(path + ": truncated checkpoint");
  }
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[b];
  return v;
}

std::uint32_t GetU32(std::istream& in, const std::string& path) {
  std::array<unsigned char, 4> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw FormatError(path + ": truncated checkpoint");
  }
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | bytes[b];
  return v;
}

void CheckRange(const FactorModel& model, UserId u, ItemId i) {
  if (u >= model.n_users() || i >= model.n_items()) {
    throw std::out_of_range("user or item index out of range");
  }
}

}  // namespace

const char* StageName(TrainingStage stage) {
  return stage == TrainingStage::kApr ? "apr" : "bpr";
}

FactorModel::FactorModel(std::size_t n_users, std::size_t n_items,
                         std::size_t k)
    : n_users_(n_users), n_items_(n_items), k_(k) {
  if (n_users == 0 || n_items == 0 || k == 0) {
    throw std::invalid_argument(
        "factor model needs at least one user, one item and K >= 1");
  }
  users_.assign(n_users * k, 0.0);
  items_.assign(n_items * k, 0.0);
}

FactorModel FactorModel::Init(std::size_t n_users, std::size_t n_items,
                              std::size_t k, std::uint64_t seed) {
  FactorModel model(n_users, n_items, k);
  Rng rng = MakeRng(seed, "init");
  std::normal_distribution<double> gauss(0.0, kInitStddev);
  for (double& x : model.users_) x = gauss(rng);
  for (double& x : model.items_) x = gauss(rng);
  model.seed = seed;
  return model;
}

double FactorModel::Predict(UserId u, ItemId i) const {
  CheckRange(*this, u, i);
  return Dot(User(u), Item(i));
}

double FactorModel::EmbeddingNorm() const {
  double s = 0.0;
  for (double x : users_) s += x * x;
  for (double x : items_) s += x * x;
  return s;
}

bool FactorModel::AllFinite() const {
  for (double x : users_) {
    if (!std::isfinite(x)) return false;
  }
  for (double x : items_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool FactorModel::operator==(const FactorModel& other) const {
  if (n_users_ != other.n_users_ || n_items_ != other.n_items_ ||
      k_ != other.k_) {
    return false;
  }
  // Bitwise, so -0.0 and NaN payloads count.
  return std::memcmp(users_.data(), other.users_.data(),
                     users_.size() * sizeof(double)) == 0 &&
         std::memcmp(items_.data(), other.items_.data(),
                     items_.size() * sizeof(double)) == 0;
}

double PredictPerturbed(const FactorModel& model,
                        const PerturbationField& field, UserId u, ItemId i) {
  CheckRange(model, u, i);
  auto p = model.User(u);
  auto q = model.Item(i);
  auto du = field.User(u);
  auto di = field.Item(i);
  double s = 0.0;
  for (std::size_t k = 0; k < model.k(); ++k) {
    double pk = du.empty() ? p[k] : p[k] + du[k];
    double qk = di.empty() ? q[k] : q[k] + di[k];
    s += pk * qk;
  }
  return s;
}

FactorModel Materialize(const FactorModel& model,
                        const PerturbationField& field) {
  FactorModel out = model;
  const auto& users = field.users();
  for (std::size_t s = 0; s < users.size(); ++s) {
    auto row = out.User(users.ids()[s]);
    auto d = users.Row(s);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] += d[k];
  }
  const auto& items = field.items();
  for (std::size_t s = 0; s < items.size(); ++s) {
    auto row = out.Item(items.ids()[s]);
    auto d = items.Row(s);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] += d[k];
  }
  return out;
}

void SaveModel(const FactorModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out.write(kMagic.data(), kMagic.size());
  PutU32(out, kFormatVersion);
  PutU32(out, static_cast<std::uint32_t>(model.stage));
  PutU64(out, model.n_users());
  PutU64(out, model.n_items());
  PutU64(out, model.k());
  PutU64(out, model.seed);
  for (double x : model.user_data()) PutU64(out, std::bit_cast<std::uint64_t>(x));
  for (double x : model.item_data()) PutU64(out, std::bit_cast<std::uint64_t>(x));
  if (!out) throw FormatError("write failed: " + path);
}

FactorModel LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::array<char, 8> magic;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError(path + ": not an aprank checkpoint (bad magic)");
  }
  std::uint32_t version = GetU32(in, path);
  if (version != kFormatVersion) {
    throw FormatError(path + ": unsupported checkpoint version " +
                      std::to_string(version));
  }
  std::uint32_t stage = GetU32(in, path);
  if (stage > 1) throw FormatError(path + ": unknown training stage");
  std::uint64_t n_users = GetU64(in, path);
  std::uint64_t n_items = GetU64(in, path);
  std::uint64_t k = GetU64(in, path);
  std::uint64_t seed = GetU64(in, path);
  if (n_users == 0 || n_items == 0 || k == 0 || k > (1u << 20) ||
      n_users > (1ull << 32) || n_items > (1ull << 32)) {
    throw FormatError(path + ": implausible dimensions");
  }
  FactorModel model(n_users, n_items, k);
  model.stage = static_cast<TrainingStage>(stage);
  model.seed = seed;
  for (double& x : model.user_data()) x = std::bit_cast<double>(GetU64(in, path));
  for (double& x : model.item_data()) x = std::bit_cast<double>(GetU64(in, path));
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path + ": trailing bytes after parameters");
  }
  return model;
}

FactorModel LoadModel(const std::string& path, std::size_t n_users,
                      std::size_t n_items, std::size_t k) {
  FactorModel model = LoadModel(path);
  if (model.n_users() != n_users || model.n_items() != n_items ||
      model.k() != k) {
    throw DimensionError(
        path + ": checkpoint is " + std::to_string(model.n_users()) + "x" +
        std::to_string(model.n_items()) + " K=" + std::to_string(model.k()) +
        ", expected " + std::to_string(n_users) + "x" +
        std::to_string(n_items) + " K=" + std::to_string(k));
  }
  return model;
}

}  // namespace aprank
