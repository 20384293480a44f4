// tisdrm/dynamic_model.h

// Copyright 2026  The tisdrm Authors
//
// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Dirichlet-multinomial transition model adapted online with exponential
// forgetting. Row r holds the pseudo-counts alpha[r][q] of r -> q; the start
// sentinel owns row 0, playable stroke id i owns row i. Columns are playable
// strokes only.

#ifndef TISDRM_DYNAMIC_MODEL_H_
#define TISDRM_DYNAMIC_MODEL_H_

#include <iostream>
#include <memory>
#include <vector>

#include "tisdrm/common.h"
#include "tisdrm/core.h"

namespace tisdrm {

/// Which cells forget on every observed transition: all of them (the update
/// as written quantifies over every (r, q)) or only the active row.
enum class DecayScope { kGlobal, kRow };

/// Dense (|S|+1) x |S| pseudo-count matrix.
class AlphaMatrix {
 public:
  AlphaMatrix() = default;
  AlphaMatrix(std::size_t num_strokes, double fill)
      : cols_(num_strokes), data_((num_strokes + 1) * num_strokes, fill) {}

  std::size_t rows() const { return cols_ + 1; }
  std::size_t cols() const { return cols_; }
  double operator()(StrokeId r, StrokeId q) const {
    return data_[r.value * cols_ + StrokeVocabulary::Index(q)];
  }
  double &operator()(StrokeId r, StrokeId q) {
    return data_[r.value * cols_ + StrokeVocabulary::Index(q)];
  }
  const double *Row(StrokeId r) const { return data_.data() + r.value * cols_; }
  std::vector<double> &data() { return data_; }
  const std::vector<double> &data() const { return data_; }

  double Total() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
  }

  bool operator==(const AlphaMatrix &) const = default;

 private:
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// alpha0[r][q] = C(r -> q) + eps_dir over all training sequences pooled
/// across talas, with the sentinel row fixed at 1. Transitions out of the
/// sentinel (sequence openings) are not counted.
inline AlphaMatrix InitAlpha(const std::vector<StrokeSequence> &corpus,
                             const StrokeVocabulary &vocab, double eps_dir) {
  Require(eps_dir > 0.0, ErrorKind::kInvalidArgument, "eps_dir must be positive");
  AlphaMatrix alpha(vocab.size(), eps_dir);
  for (std::size_t q = 0; q < vocab.size(); ++q)
    alpha(StrokeId::Start(), StrokeVocabulary::FromIndex(q)) = 1.0;
  if (corpus.empty())
    std::clog << "warning: empty corpus, Dirichlet parameters left at eps_dir\n";
  for (const auto &seq : corpus) {
    ValidateSequence(vocab, seq);
    for (std::size_t k = 1; k < seq.size(); ++k)
      alpha(seq.strokes[k - 1], seq.strokes[k]) += 1.0;
  }
  return alpha;
}

/// Value-semantic Dirichlet state. Copies share the underlying matrix;
/// Update() always produces a fresh one.
class DirichletState {
 public:
  DirichletState() = default;
  DirichletState(AlphaMatrix alpha, double rho,
                 DecayScope scope = DecayScope::kGlobal)
      : alpha_(std::make_shared<const AlphaMatrix>(std::move(alpha))),
        rho_(rho),
        scope_(scope) {
    Require(rho > 0.0 && rho < 1.0, ErrorKind::kInvalidArgument,
            "rho must lie in (0, 1)");
    for (double v : alpha_->data())
      Require(v > 0.0, ErrorKind::kInvalidArgument,
              "Dirichlet parameters must be strictly positive");
  }

  const AlphaMatrix &alpha() const { return *alpha_; }
  double rho() const { return rho_; }
  DecayScope scope() const { return scope_; }
  std::size_t num_strokes() const { return alpha_->cols(); }

  /// alpha' = (1 - rho) alpha + rho * delta(r = prev, q = next).
  DirichletState Update(StrokeId prev, StrokeId next) const {
    Require(prev.value < alpha_->rows() && !next.is_start() &&
                next.value <= alpha_->cols(),
            ErrorKind::kVocabularyMismatch, "transition outside the model");
    // Evaluated as v + rho (delta - v).
    AlphaMatrix a = *alpha_;
    const double hit = a(prev, next);
    if (scope_ == DecayScope::kGlobal) {
      for (double &v : a.data()) v -= rho_ * v;
    } else {
      for (std::size_t q = 0; q < a.cols(); ++q) {
        double &v = a(prev, StrokeVocabulary::FromIndex(q));
        v -= rho_ * v;
      }
    }
    a(prev, next) = hit + rho_ * (1.0 - hit);
    DirichletState out(*this);
    out.alpha_ = std::make_shared<const AlphaMatrix>(std::move(a));
    return out;
  }

  /// P_dyn(q | prev) = alpha[prev][q] / sum_s alpha[prev][s].
  Distribution Predict(StrokeId prev) const {
    Require(prev.value < alpha_->rows(), ErrorKind::kVocabularyMismatch,
            "previous stroke outside the model");
    const double *row = alpha_->Row(prev);
    const std::size_t n = alpha_->cols();
    double z = 0.0;
    for (std::size_t q = 0; q < n; ++q) z += row[q];
    Distribution p(row, row + n);
    for (double &v : p) v /= z;
    return p;
  }

 private:
  std::shared_ptr<const AlphaMatrix> alpha_;
  double rho_ = 0.03;
  DecayScope scope_ = DecayScope::kGlobal;
};

}  // namespace tisdrm

#endif  // TISDRM_DYNAMIC_MODEL_H_
