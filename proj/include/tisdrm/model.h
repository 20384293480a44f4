// tisdrm/model.h

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

#ifndef TISDRM_MODEL_H_
#define TISDRM_MODEL_H_

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tisdrm/common.h"
#include "tisdrm/core.h"
#include "tisdrm/dynamic_model.h"
#include "tisdrm/static_prior.h"

namespace tisdrm {

struct TrainConfig {
  int order = 3;
  double laplace_k = 1.0;
  std::size_t w_tau = 16;
  double tau_laplace_k = 1.0;
  double eps_dir = 1.0;
};

/// Everything the rescorer needs from training: the per-tala n-gram priors,
/// the tala posterior table and the initial Dirichlet parameters.
struct TiSdrmModel {
  StrokeVocabulary vocab;
  NGramPrior prior;
  TalaPosteriorTable posterior;
  AlphaMatrix alpha0;
  double eps_dir = 1.0;

  TalaIndependentPrior StaticPrior() const {
    return TalaIndependentPrior(prior, posterior);
  }

  bool operator==(const TiSdrmModel &) const = default;
};

inline TiSdrmModel TrainModel(const std::vector<StrokeSequence> &corpus,
                              const StrokeVocabulary &vocab,
                              const TrainConfig &cfg = {}) {
  TiSdrmModel m;
  m.vocab = vocab;
  m.prior = TrainPrior(corpus, vocab, cfg.order, cfg.laplace_k);
  m.posterior = TrainTalaPosterior(corpus, vocab, cfg.w_tau, cfg.tau_laplace_k);
  m.alpha0 = InitAlpha(corpus, vocab, cfg.eps_dir);
  m.eps_dir = cfg.eps_dir;
  return m;
}

namespace internal {

template <class V>
std::vector<std::pair<StrokeKey, V>> Sorted(const KeyMap<V> &m) {
  std::vector<std::pair<StrokeKey, V>> out(m.begin(), m.end());
  std::sort(out.begin(), out.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });
  return out;
}

}  // namespace internal

/// Writes the `tiprior v1` text model. Entries are sorted, so equal models
/// produce identical bytes.
inline void WriteModel(std::ostream &os, const TiSdrmModel &m) {
  const auto &v = m.vocab;
  os << "tiprior v1\n"
     << "order " << m.prior.order() << '\n'
     << "laplace_k " << FormatDouble(m.prior.laplace_k()) << '\n'
     << "w_tau " << m.posterior.window() << '\n'
     << "tau_laplace_k " << FormatDouble(m.posterior.laplace_k()) << '\n'
     << "eps_dir " << FormatDouble(m.eps_dir) << '\n'
     << "vocab " << v.size() << '\n';
  for (const auto &s : v.Symbols()) os << "sym " << s << '\n';
  const auto &talas = m.prior.talas();
  os << "talas " << talas.size() << '\n';
  for (std::size_t t = 0; t < talas.size(); ++t)
    os << "tala " << talas[t] << ' '
       << FormatDouble(m.posterior.tala_prior()[t]) << '\n';
  for (std::size_t t = 0; t < talas.size(); ++t) {
    for (const auto &[ctx, row] : internal::Sorted(m.prior.table(t).next_counts))
      for (std::size_t q = 0; q < row.size(); ++q) {
        if (row[q] == 0) continue;
        os << "count " << talas[t];
        for (StrokeId s : ctx) os << ' ' << v.Name(s);
        os << ' ' << v.Name(StrokeVocabulary::FromIndex(q)) << ' ' << row[q]
           << '\n';
      }
  }
  for (std::size_t t = 0; t < talas.size(); ++t)
    for (const auto &[win, c] : internal::Sorted(m.posterior.counts(t))) {
      os << "taucount " << talas[t];
      for (StrokeId s : win) os << ' ' << v.Name(s);
      os << ' ' << c << '\n';
    }
  for (std::size_t r = 0; r < m.alpha0.rows(); ++r)
    for (std::size_t q = 0; q < m.alpha0.cols(); ++q) {
      StrokeId rid(static_cast<std::uint32_t>(r));
      StrokeId qid = StrokeVocabulary::FromIndex(q);
      double def = rid.is_start() ? 1.0 : m.eps_dir;
      double val = m.alpha0(rid, qid);
      if (val != def)
        os << "alpha " << v.Name(rid) << ' ' << v.Name(qid) << ' '
           << FormatDouble(val) << '\n';
    }
}

inline TiSdrmModel ReadModel(std::istream &is) {
  std::string line;
  int lineno = 0;
  std::vector<std::string> toks;
  auto next = [&]() {
    while (std::getline(is, line)) {
      ++lineno;
      toks = SplitWhitespace(line);
      if (!toks.empty() && toks[0][0] != '#') return true;
    }
    return false;
  };
  auto where = [&]() { return "model line " + std::to_string(lineno); };
  auto expect = [&](const char *key, std::size_t n) {
    Require(next() && toks[0] == key && toks.size() == n, ErrorKind::kParse,
            where() + ": expected '" + key + "'");
  };
  Require(next() && toks.size() == 2 && toks[0] == "tiprior" && toks[1] == "v1",
          ErrorKind::kParse, "missing 'tiprior v1' header");
  TrainConfig cfg;
  expect("order", 2);
  cfg.order = ParseInt<int>(toks[1]);
  expect("laplace_k", 2);
  cfg.laplace_k = ParseDouble(toks[1]);
  expect("w_tau", 2);
  cfg.w_tau = ParseInt<std::size_t>(toks[1]);
  expect("tau_laplace_k", 2);
  cfg.tau_laplace_k = ParseDouble(toks[1]);
  expect("eps_dir", 2);
  cfg.eps_dir = ParseDouble(toks[1]);
  expect("vocab", 2);
  TiSdrmModel m;
  auto nsym = ParseInt<std::size_t>(toks[1]);
  for (std::size_t i = 0; i < nsym; ++i) {
    expect("sym", 2);
    m.vocab.Add(toks[1]);
  }
  expect("talas", 2);
  auto ntala = ParseInt<std::size_t>(toks[1]);
  std::vector<std::string> talas;
  std::vector<double> tala_prior;
  for (std::size_t i = 0; i < ntala; ++i) {
    expect("tala", 3);
    talas.push_back(toks[1]);
    tala_prior.push_back(ParseDouble(toks[2]));
  }
  m.eps_dir = cfg.eps_dir;
  m.prior = NGramPrior(cfg.order, cfg.laplace_k, m.vocab.size(), talas);
  m.posterior =
      TalaPosteriorTable(cfg.w_tau, cfg.tau_laplace_k, talas, tala_prior);
  m.alpha0 = AlphaMatrix(m.vocab.size(), cfg.eps_dir);
  for (std::size_t q = 0; q < m.vocab.size(); ++q)
    m.alpha0(StrokeId::Start(), StrokeVocabulary::FromIndex(q)) = 1.0;
  auto tala_index = [&](const std::string &name) {
    auto t = internal::TalaIndex(talas, name);
    Require(t < talas.size(), ErrorKind::kParse,
            where() + ": unknown tala '" + name + "'");
    return t;
  };
  auto sym = [&](const std::string &name) {
    return name == kStartSymbol ? StrokeId::Start() : m.vocab.Id(name);
  };
  while (next()) {
    if (toks[0] == "count") {
      Require(toks.size() == static_cast<std::size_t>(cfg.order) + 3,
              ErrorKind::kParse, where() + ": malformed count line");
      StrokeKey ctx;
      for (std::size_t i = 2; i < toks.size() - 2; ++i)
        ctx.push_back(sym(toks[i]));
      m.prior.AddCount(tala_index(toks[1]), ctx, m.vocab.Id(toks[toks.size() - 2]),
                       ParseInt<std::uint64_t>(toks.back()));
    } else if (toks[0] == "taucount") {
      Require(toks.size() >= 4, ErrorKind::kParse,
              where() + ": malformed taucount line");
      StrokeKey win;
      for (std::size_t i = 2; i < toks.size() - 1; ++i)
        win.push_back(m.vocab.Id(toks[i]));
      m.posterior.AddCount(tala_index(toks[1]), win,
                           ParseInt<std::uint64_t>(toks.back()));
    } else if (toks[0] == "alpha" && toks.size() == 4) {
      StrokeId r = sym(toks[1]);
      StrokeId q = m.vocab.Id(toks[2]);
      double val = ParseDouble(toks[3]);
      Require(val > 0.0, ErrorKind::kParse,
              where() + ": alpha entries must be positive");
      m.alpha0(r, q) = val;
    } else {
      Fail(ErrorKind::kParse, where() + ": unrecognized line '" + line + "'");
    }
  }
  return m;
}

}  // namespace tisdrm

#endif  // TISDRM_MODEL_H_
