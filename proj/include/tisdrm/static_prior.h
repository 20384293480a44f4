// tisdrm/static_prior.h

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

// Per-tala n-gram stroke models, the windowed tala posterior, and their
// tala-independent mixture
//
//   P_TI(s | h) = sum_tau P(tau | u) * P_ngram(s | tau, context),
//
// where u is the most recent W_tau strokes of h and context its last n-1
// strokes (padded with the start sentinel).

#ifndef TISDRM_STATIC_PRIOR_H_
#define TISDRM_STATIC_PRIOR_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tisdrm/common.h"
#include "tisdrm/core.h"

namespace tisdrm {

/// Seam for anything that predicts the next stroke from the history. The
/// history passed in starts with the start sentinel.
class NextStrokePrior {
 public:
  virtual ~NextStrokePrior() = default;
  virtual Distribution Prob(std::span<const StrokeId> history) const = 0;
};

namespace internal {

struct KeyHash {
  std::size_t operator()(const std::vector<StrokeId> &key) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (StrokeId s : key) {
      h ^= s.value + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

}  // namespace internal

using StrokeKey = std::vector<StrokeId>;
template <class V>
using KeyMap = std::unordered_map<StrokeKey, V, internal::KeyHash>;

/// Counts per (context -> next) for one tala.
struct NGramTable {
  /// context -> dense count vector over playable strokes
  KeyMap<std::vector<std::uint64_t>> next_counts;
  /// context -> total count
  KeyMap<std::uint64_t> context_totals;
};

class NGramPrior {
 public:
  NGramPrior() = default;
  NGramPrior(int order, double laplace_k, std::size_t vocab_size,
             std::vector<std::string> talas)
      : order_(order),
        laplace_k_(laplace_k),
        vocab_size_(vocab_size),
        talas_(std::move(talas)),
        tables_(talas_.size()) {
    Require(order >= 1, ErrorKind::kInvalidArgument, "n-gram order must be >= 1");
    Require(laplace_k > 0.0, ErrorKind::kInvalidArgument,
            "laplace_k must be positive");
  }

  int order() const { return order_; }
  double laplace_k() const { return laplace_k_; }
  std::size_t vocab_size() const { return vocab_size_; }
  const std::vector<std::string> &talas() const { return talas_; }
  const NGramTable &table(std::size_t tau) const { return tables_[tau]; }

  void AddCount(std::size_t tau, const StrokeKey &context, StrokeId next,
                std::uint64_t count) {
    Require(context.size() == static_cast<std::size_t>(order_ - 1),
            ErrorKind::kInvalidArgument, "context length must be order-1");
    auto &row = tables_[tau].next_counts[context];
    if (row.empty()) row.assign(vocab_size_, 0);
    row[StrokeVocabulary::Index(next)] += count;
    tables_[tau].context_totals[context] += count;
  }

  std::uint64_t Count(std::size_t tau, const StrokeKey &context,
                      StrokeId next) const {
    const auto &m = tables_[tau].next_counts;
    auto it = m.find(context);
    return it == m.end() ? 0 : it->second[StrokeVocabulary::Index(next)];
  }

  /// The n-1 strokes preceding the end of `history`, left-padded with the
  /// start sentinel. `history` may or may not start with the sentinel.
  StrokeKey Context(std::span<const StrokeId> history) const {
    const std::size_t need = order_ - 1;
    StrokeKey ctx(need, StrokeId::Start());
    std::size_t take = std::min(need, history.size());
    std::copy(history.end() - take, history.end(), ctx.end() - take);
    return ctx;
  }

  /// Laplace-smoothed P(. | tau, context).
  Distribution Conditional(std::size_t tau, const StrokeKey &context) const {
    const double denom_extra = laplace_k_ * static_cast<double>(vocab_size_);
    Distribution p(vocab_size_);
    const auto &t = tables_[tau];
    auto it = t.next_counts.find(context);
    if (it == t.next_counts.end()) {
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(vocab_size_));
      return p;
    }
    const double total = static_cast<double>(t.context_totals.at(context));
    for (std::size_t q = 0; q < vocab_size_; ++q)
      p[q] = (static_cast<double>(it->second[q]) + laplace_k_) /
             (total + denom_extra);
    return p;
  }

  bool operator==(const NGramPrior &o) const {
    if (order_ != o.order_ || laplace_k_ != o.laplace_k_ ||
        vocab_size_ != o.vocab_size_ || talas_ != o.talas_)
      return false;
    for (std::size_t t = 0; t < tables_.size(); ++t)
      if (tables_[t].next_counts != o.tables_[t].next_counts) return false;
    return true;
  }

 private:
  int order_ = 3;
  double laplace_k_ = 1.0;
  std::size_t vocab_size_ = 0;
  std::vector<std::string> talas_;
  std::vector<NGramTable> tables_;
};

/// Window counts C(tau, u) for |u| <= W_tau, and the tala prior P(tau).
class TalaPosteriorTable {
 public:
  TalaPosteriorTable() = default;
  TalaPosteriorTable(std::size_t window, double laplace_k,
                     std::vector<std::string> talas,
                     std::vector<double> tala_prior)
      : window_(window),
        laplace_k_(laplace_k),
        talas_(std::move(talas)),
        tala_prior_(std::move(tala_prior)),
        counts_(talas_.size()) {
    Require(!talas_.empty(), ErrorKind::kInvalidArgument, "empty tala set");
    Require(talas_.size() == tala_prior_.size(), ErrorKind::kInvalidArgument,
            "tala prior size mismatch");
    Require(window >= 1, ErrorKind::kInvalidArgument, "W_tau must be >= 1");
    Require(laplace_k >= 0.0, ErrorKind::kInvalidArgument,
            "laplace_k must be non-negative");
  }

  std::size_t window() const { return window_; }
  double laplace_k() const { return laplace_k_; }
  const std::vector<std::string> &talas() const { return talas_; }
  const std::vector<double> &tala_prior() const { return tala_prior_; }
  const KeyMap<std::uint64_t> &counts(std::size_t tau) const {
    return counts_[tau];
  }

  void AddCount(std::size_t tau, const StrokeKey &window, std::uint64_t c) {
    Require(!window.empty() && window.size() <= window_,
            ErrorKind::kInvalidArgument, "window length out of range");
    counts_[tau][window] += c;
  }

  std::uint64_t Count(std::size_t tau, const StrokeKey &u) const {
    if (u.empty()) return 0;
    auto it = counts_[tau].find(u);
    return it == counts_[tau].end() ? 0 : it->second;
  }

  /// The most recent min(W, |history|) playable strokes of `history`, where W
  /// is W_tau unless a shorter `window` is given.
  StrokeKey Window(std::span<const StrokeId> history,
                   std::size_t window = 0) const {
    std::size_t skip = 0;
    while (skip < history.size() && history[skip].is_start()) ++skip;
    std::size_t avail = history.size() - skip;
    std::size_t take = std::min(window == 0 ? window_ : window, avail);
    return StrokeKey(history.end() - take, history.end());
  }

  /// P(tau | u) = (C(tau,u)+k) P(tau) / sum_tau' (C(tau',u)+k) P(tau').
  std::vector<double> Posterior(const StrokeKey &u) const {
    Require(u.size() <= window_, ErrorKind::kInvalidArgument,
            "window longer than W_tau; truncate the history first");
    std::vector<double> post(talas_.size());
    double z = 0.0;
    for (std::size_t t = 0; t < talas_.size(); ++t) {
      post[t] = (static_cast<double>(Count(t, u)) + laplace_k_) * tala_prior_[t];
      z += post[t];
    }
    if (z <= 0.0) {
      // Only reachable with laplace_k == 0 and an unseen window.
      return tala_prior_;
    }
    for (double &p : post) p /= z;
    return post;
  }

  bool operator==(const TalaPosteriorTable &o) const {
    return window_ == o.window_ && laplace_k_ == o.laplace_k_ &&
           talas_ == o.talas_ && tala_prior_ == o.tala_prior_ &&
           counts_ == o.counts_;
  }

 private:
  std::size_t window_ = 16;
  double laplace_k_ = 1.0;
  std::vector<std::string> talas_;
  std::vector<double> tala_prior_;
  std::vector<KeyMap<std::uint64_t>> counts_;
};

namespace internal {

inline std::vector<std::string> CorpusTalas(
    const std::vector<StrokeSequence> &corpus) {
  std::vector<std::string> talas;
  for (const auto &s : corpus) {
    Require(s.tala_label.has_value(), ErrorKind::kInvalidArgument,
            "training sequence has no tala label");
    if (std::find(talas.begin(), talas.end(), *s.tala_label) == talas.end())
      talas.push_back(*s.tala_label);
  }
  return talas;
}

inline std::size_t TalaIndex(const std::vector<std::string> &talas,
                             const std::string &name) {
  return std::find(talas.begin(), talas.end(), name) - talas.begin();
}

}  // namespace internal

/// Counts (context -> next) per tala, sliding over every sequence with the
/// context padded by the start sentinel.
inline NGramPrior TrainPrior(const std::vector<StrokeSequence> &corpus,
                             const StrokeVocabulary &vocab, int order,
                             double laplace_k) {
  Require(!corpus.empty(), ErrorKind::kInvalidArgument, "empty training corpus");
  auto talas = internal::CorpusTalas(corpus);
  NGramPrior prior(order, laplace_k, vocab.size(), talas);
  for (const auto &seq : corpus) {
    ValidateSequence(vocab, seq);
    std::size_t tau = internal::TalaIndex(talas, *seq.tala_label);
    std::span<const StrokeId> all(seq.strokes);
    for (std::size_t k = 0; k < seq.size(); ++k)
      prior.AddCount(tau, prior.Context(all.first(k)), seq.strokes[k], 1);
  }
  return prior;
}

/// Counts every contiguous window of length 1..W_tau per tala; P(tau) is the
/// tala's share of training strokes.
inline TalaPosteriorTable TrainTalaPosterior(
    const std::vector<StrokeSequence> &corpus, const StrokeVocabulary &vocab,
    std::size_t window, double laplace_k) {
  Require(!corpus.empty(), ErrorKind::kInvalidArgument, "empty training corpus");
  auto talas = internal::CorpusTalas(corpus);
  std::vector<double> strokes(talas.size(), 0.0);
  double total = 0.0;
  for (const auto &seq : corpus) {
    ValidateSequence(vocab, seq);
    strokes[internal::TalaIndex(talas, *seq.tala_label)] +=
        static_cast<double>(seq.size());
    total += static_cast<double>(seq.size());
  }
  for (double &s : strokes) s /= total;
  TalaPosteriorTable table(window, laplace_k, talas, strokes);
  for (const auto &seq : corpus) {
    std::size_t tau = internal::TalaIndex(talas, *seq.tala_label);
    for (std::size_t b = 0; b < seq.size(); ++b)
      for (std::size_t len = 1; len <= window && b + len <= seq.size(); ++len)
        table.AddCount(tau,
                       StrokeKey(seq.strokes.begin() + b,
                                 seq.strokes.begin() + b + len),
                       1);
  }
  return table;
}

/// The tala-independent static prior. Both parts must have been trained on
/// the same tala set.
class TalaIndependentPrior : public NextStrokePrior {
 public:
  /// `window` shortens the posterior window below the trained W_tau; 0 keeps
  /// the trained one.
  TalaIndependentPrior(const NGramPrior &prior, const TalaPosteriorTable &table,
                       std::size_t window = 0)
      : prior_(&prior),
        table_(&table),
        window_(window == 0 ? table.window() : window) {
    Require(prior.talas() == table.talas(), ErrorKind::kInvalidArgument,
            "n-gram prior and tala posterior cover different tala sets");
    Require(window_ <= table.window(), ErrorKind::kInvalidArgument,
            "posterior window exceeds the trained W_tau");
  }

  Distribution Prob(std::span<const StrokeId> history) const override {
    return Prob(history, nullptr);
  }

  /// Same as Prob(), optionally reporting the tala posterior used.
  Distribution Prob(std::span<const StrokeId> history,
                    std::vector<double> *posterior_out) const {
    for (StrokeId s : history)
      Require(s.value <= prior_->vocab_size(), ErrorKind::kVocabularyMismatch,
              "history stroke id " + std::to_string(s.value) +
                  " outside the model vocabulary");
    auto post = table_->Posterior(table_->Window(history, window_));
    auto ctx = prior_->Context(history);
    Distribution mix(prior_->vocab_size(), 0.0);
    for (std::size_t t = 0; t < post.size(); ++t) {
      auto p = prior_->Conditional(t, ctx);
      for (std::size_t q = 0; q < mix.size(); ++q) mix[q] += post[t] * p[q];
    }
    if (posterior_out) *posterior_out = std::move(post);
    return mix;
  }

 private:
  const NGramPrior *prior_;
  const TalaPosteriorTable *table_;
  std::size_t window_;
};

}  // namespace tisdrm

#endif  // TISDRM_STATIC_PRIOR_H_
