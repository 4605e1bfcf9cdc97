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

// Per-instance gradient kernels shared by the BPR and APR batch steps. Both
// trainers go through these so that a zero adversarial weight reproduces the
// BPR arithmetic exactly.

#ifndef APRANK_INTERNAL_INSTANCE_GRAD_H_
#define APRANK_INTERNAL_INSTANCE_GRAD_H_

#include <span>

#include "aprank/dataset.h"
#include "aprank/factor_model.h"
#include "aprank/sparse_rows.h"

namespace aprank::internal {

// d/dTheta of coeff * margin, where margin = p.qi - p.qj evaluated at
// (p, qi, qj):  gu += coeff (qi - qj),  gi += coeff p,  gj -= coeff p.
inline void AddMarginGradient(double coeff, std::span<const double> p,
                              std::span<const double> qi,
                              std::span<const double> qj,
                              std::span<double> gu, std::span<double> gi,
                              std::span<double> gj) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    gu[k] += coeff * (qi[k] - qj[k]);
    gi[k] += coeff * p[k];
    gj[k] -= coeff * p[k];
  }
}

inline void AddL2Gradient(double lambda_reg, std::span<const double> p,
                          std::span<const double> qi,
                          std::span<const double> qj, std::span<double> gu,
                          std::span<double> gi, std::span<double> gj) {
  if (lambda_reg == 0.0) return;
  const double c = 2.0 * lambda_reg;
  for (std::size_t k = 0; k < p.size(); ++k) {
    gu[k] += c * p[k];
    gi[k] += c * qi[k];
    gj[k] += c * qj[k];
  }
}

// Adds the BPR instance gradient (loss part plus L2) into the row buffers
// and returns the instance loss.
double AccumulateBprInstance(const FactorModel& model, const Triplet& t,
                             double lambda_reg, SparseRows& user_grad,
                             SparseRows& item_grad);

// Adds the gradient of lambda_adv * -ln sigmoid(margin(Theta + Delta)) with
// Delta held fixed, and returns that term's value.
double AccumulateAdvInstance(const FactorModel& model,
                             const PerturbationField& field, const Triplet& t,
                             double lambda_adv, SparseRows& user_grad,
                             SparseRows& item_grad);

}  // namespace aprank::internal

#endif  // APRANK_INTERNAL_INSTANCE_GRAD_H_
