// tisdrm/rescorer.h

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

// Rhythm-aware lattice rescoring by history-preserving state expansion.
//
// Every path prefix through the acoustic lattice becomes its own expanded
// state (node, history, Dirichlet parameters), so states reaching the same
// acoustic node with different histories are never merged. States are
// explored best-first by accumulated score; each expansion computes
//
//   P_dyn   from the state's Dirichlet parameters,
//   P_TI    from the tala-independent static prior,
//   D       = JSD(P_dyn, P_TI),
//   C       = acoustic confidence over the node's outgoing arcs,
//   lambda  = C * D / log 2   (or a fixed value),
//   P_comb  = (1 - lambda) P_TI + lambda P_dyn,
//
// and scores each outgoing arc labelled q as w_ac + beta * log P_comb(q).
// After each expansion the queue is pruned to a score band of delta_beam
// below its best entry and then to its k_beam best entries. The answer is
// the history of the best surviving terminal state.
//
// Because the Dirichlet parameters are updated along each path, the expanded
// lattice is a tree rooted at the start state.

#ifndef TISDRM_RESCORER_H_
#define TISDRM_RESCORER_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tisdrm/common.h"
#include "tisdrm/core.h"
#include "tisdrm/dynamic_model.h"
#include "tisdrm/fusion.h"
#include "tisdrm/lattice.h"
#include "tisdrm/model.h"
#include "tisdrm/static_prior.h"

namespace tisdrm {

/// kGlobal prunes all queued states together; kFrontier prunes each history
/// depth separately.
enum class BeamScope { kGlobal, kFrontier };

struct RescoreConfig {
  double rho = 0.03;
  double beta = 0.5;
  /// Effective memory of the dynamic model in strokes. It is the companion
  /// of rho (20/32/40 strokes go with rho 0.05/0.03/0.02) and does not
  /// truncate anything: the dynamic prediction only reads the previous
  /// stroke through alpha.
  std::size_t w_dyn = 32;
  /// Tala posterior window; at most the window the model was trained with.
  std::size_t w_tau = 16;
  std::size_t k_beam = 150;
  double delta_beam = 10.0;
  LambdaMode lambda_mode;
  double eps_jsd = 1e-8;
  DecayScope decay_scope = DecayScope::kGlobal;
  BeamScope beam_scope = BeamScope::kGlobal;
  /// Record full per-expansion probability traces in the diagnostics.
  bool trace = false;

  /// Copy of this config under which nothing is ever pruned.
  RescoreConfig Exhaustive() const {
    RescoreConfig out = *this;
    out.k_beam = std::numeric_limits<std::size_t>::max();
    out.delta_beam = std::numeric_limits<double>::infinity();
    return out;
  }
};

using StateId = std::uint32_t;
inline constexpr StateId kNoState = std::numeric_limits<StateId>::max();

struct ExpandedState {
  NodeId node = 0;
  /// Full history in model stroke ids, starting with the start sentinel.
  std::vector<StrokeId> history;
  /// Released (reset) once the state has been expanded or pruned.
  std::optional<DirichletState> alpha;
  double acc_score = 0.0;
  StateId parent = kNoState;
  /// Acoustic arc taken from the parent, and its rescored weight.
  ArcId arc = 0;
  double arc_weight = 0.0;
  /// P_comb of the arc label under the parent's combined model.
  double arc_prob = 1.0;
  /// Fusion quantities computed when this state was expanded.
  double confidence = 0.0;
  double divergence = 0.0;
  double lambda = 0.0;
  bool expanded = false;
  bool pruned = false;

  std::size_t depth() const { return history.size() - 1; }
};

struct ExpandedLattice {
  std::vector<ExpandedState> states;
  StateId start = 0;
  /// Surviving states whose acoustic node is final, in creation order.
  std::vector<StateId> terminals;

  /// Acoustic arc ids from the start state to `s`.
  std::vector<ArcId> ArcChain(StateId s) const {
    std::vector<ArcId> chain;
    for (; states[s].parent != kNoState; s = states[s].parent)
      chain.push_back(states[s].arc);
    return {chain.rbegin(), chain.rend()};
  }
};

/// One full expansion record, kept only when RescoreConfig::trace is set.
struct ExpansionTrace {
  StateId state = 0;
  NodeId node = 0;
  double confidence = 0.0;
  double divergence = 0.0;
  double lambda = 0.0;
  std::vector<double> tala_posterior;
  Distribution p_static;
  Distribution p_dyn;
  Distribution p_comb;
};

/// Per-stroke view along the returned path.
struct StrokeTrace {
  std::string stroke;
  double confidence = 0.0;
  double divergence = 0.0;
  double lambda = 0.0;
  double p_comb = 0.0;
  double arc_weight = 0.0;
};

struct RescoreDiagnostics {
  std::size_t pops = 0;
  std::size_t pushes = 0;
  std::size_t pruned_band = 0;
  std::size_t pruned_capacity = 0;
  std::size_t max_queue = 0;
  /// Queue size after each pruning step.
  std::vector<std::size_t> queue_sizes;
  std::vector<StrokeTrace> best_path;
  std::vector<ExpansionTrace> expansions;
};

struct RescoreResult {
  StrokeSequence best;  // in the lattice's vocabulary
  StateId best_state = 0;
  double best_score = 0.0;
  ExpandedLattice expanded;
  RescoreDiagnostics diagnostics;
};

/// Best surviving terminal state: highest accumulated score, ties broken by
/// the lexicographically smallest acoustic arc-id chain.
inline StateId ViterbiExpanded(const ExpandedLattice &exp) {
  Require(!exp.terminals.empty(), ErrorKind::kNoTerminal,
          "expanded lattice has no terminal state");
  StateId best = exp.terminals.front();
  for (StateId s : exp.terminals) {
    double a = exp.states[s].acc_score, b = exp.states[best].acc_score;
    if (a > b || (a == b && s != best && exp.ArcChain(s) < exp.ArcChain(best)))
      best = s;
  }
  return best;
}

namespace internal {

struct QueueEntry {
  double score;
  std::uint64_t seq;
  StateId state;
  bool operator<(const QueueEntry &o) const {
    if (score != o.score) return score > o.score;
    return seq < o.seq;
  }
};

}  // namespace internal

/// Rescores `lat` with an arbitrary static prior. `alpha0` and the prior
/// must share `vocab`; lattice symbols are mapped into it by name.
inline RescoreResult Rescore(const Lattice &lat, const StrokeVocabulary &vocab,
                             const NextStrokePrior &static_prior,
                             const AlphaMatrix &alpha0,
                             const RescoreConfig &cfg) {
  Require(cfg.k_beam >= 1, ErrorKind::kInvalidArgument, "k_beam must be >= 1");
  Require(cfg.delta_beam >= 0.0, ErrorKind::kInvalidArgument,
          "delta_beam must be >= 0");
  Require(cfg.beta >= 0.0, ErrorKind::kInvalidArgument, "beta must be >= 0");
  Require(alpha0.cols() == vocab.size(), ErrorKind::kVocabularyMismatch,
          "Dirichlet parameters do not match the model vocabulary");

  std::vector<StrokeId> label(lat.arcs().size());
  for (ArcId a = 0; a < lat.arcs().size(); ++a) {
    const auto &name = lat.vocab().Name(lat.arc(a).label);
    auto id = vocab.Find(name);
    Require(id.has_value(), ErrorKind::kVocabularyMismatch,
            "lattice stroke '" + name + "' is not in the model vocabulary");
    label[a] = *id;
  }

  RescoreResult res;
  auto &states = res.expanded.states;
  auto &diag = res.diagnostics;
  std::set<internal::QueueEntry> queue;
  std::uint64_t seq = 0;

  ExpandedState root;
  root.node = lat.start();
  root.history = {StrokeId::Start()};
  root.alpha = DirichletState(alpha0, cfg.rho, cfg.decay_scope);
  states.push_back(std::move(root));
  queue.insert({0.0, seq++, 0});

  auto drop = [&](std::set<internal::QueueEntry>::iterator it) {
    states[it->state].pruned = true;
    states[it->state].alpha.reset();
    return queue.erase(it);
  };

  auto prune = [&]() {
    if (queue.empty()) return;
    if (cfg.beam_scope == BeamScope::kGlobal) {
      const double floor = queue.begin()->score - cfg.delta_beam;
      while (!queue.empty() && std::prev(queue.end())->score < floor) {
        drop(std::prev(queue.end()));
        ++diag.pruned_band;
      }
      while (queue.size() > cfg.k_beam) {
        drop(std::prev(queue.end()));
        ++diag.pruned_capacity;
      }
    } else {
      std::map<std::size_t, std::pair<double, std::size_t>> seen;  // best, kept
      for (auto it = queue.begin(); it != queue.end();) {
        auto depth = states[it->state].depth();
        auto [pos, fresh] = seen.try_emplace(depth, it->score, 0);
        auto &[best, kept] = pos->second;
        if (it->score < best - cfg.delta_beam) {
          it = drop(it);
          ++diag.pruned_band;
        } else if (kept >= cfg.k_beam) {
          it = drop(it);
          ++diag.pruned_capacity;
        } else {
          ++kept;
          ++it;
        }
      }
    }
  };

  std::vector<double> scores;
  std::vector<double> posterior;
  while (!queue.empty()) {
    const StateId sid = queue.begin()->state;
    queue.erase(queue.begin());
    ++diag.pops;
    states[sid].expanded = true;
    if (lat.IsFinal(states[sid].node)) res.expanded.terminals.push_back(sid);

    const auto &out = lat.Out(states[sid].node);
    if (out.empty()) {
      states[sid].alpha.reset();
      continue;
    }
    // Copies: pushing children may reallocate `states`.
    const std::vector<StrokeId> history = states[sid].history;
    const DirichletState alpha = *states[sid].alpha;
    const double acc = states[sid].acc_score;
    const StrokeId prev = history.back();

    Distribution p_dyn = alpha.Predict(prev);
    Distribution p_static;
    if (auto *ti = dynamic_cast<const TalaIndependentPrior *>(&static_prior))
      p_static = ti->Prob(history, &posterior);
    else
      p_static = static_prior.Prob(history);
    Require(p_static.size() == vocab.size(), ErrorKind::kVocabularyMismatch,
            "static prior returned a distribution of the wrong size");
    const double d = Jsd(p_dyn, p_static, cfg.eps_jsd);
    scores.clear();
    for (ArcId a : out) scores.push_back(lat.arc(a).w_ac);
    const double c = AcousticConfidence(scores);
    const double lambda =
        cfg.lambda_mode.adaptive() ? LambdaK(c, d) : *cfg.lambda_mode.fixed;
    Distribution p_comb = Combine(p_static, p_dyn, lambda);

    states[sid].confidence = c;
    states[sid].divergence = d;
    states[sid].lambda = lambda;
    if (cfg.trace)
      diag.expansions.push_back(
          {sid, states[sid].node, c, d, lambda, posterior, p_static, p_dyn,
           p_comb});

    for (ArcId a : out) {
      const StrokeId q = label[a];
      const double pq = p_comb[StrokeVocabulary::Index(q)];
      const double w = lat.arc(a).w_ac + cfg.beta * std::log(pq);
      ExpandedState child;
      child.node = lat.arc(a).dst;
      child.history = history;
      child.history.push_back(q);
      child.alpha = alpha.Update(prev, q);
      child.acc_score = acc + w;
      child.parent = sid;
      child.arc = a;
      child.arc_weight = w;
      child.arc_prob = pq;
      Require(states.size() < kNoState, ErrorKind::kOverflow,
              "too many expanded states");
      auto cid = static_cast<StateId>(states.size());
      states.push_back(std::move(child));
      queue.insert({states[cid].acc_score, seq++, cid});
      ++diag.pushes;
    }
    states[sid].alpha.reset();
    diag.max_queue = std::max(diag.max_queue, queue.size());
    prune();
    diag.queue_sizes.push_back(queue.size());
  }

  if (res.expanded.terminals.empty())
    Fail(ErrorKind::kNoTerminal,
         "no terminal state survived pruning; widen the beam (k_beam=" +
             std::to_string(cfg.k_beam) +
             ", delta_beam=" + FormatDouble(cfg.delta_beam) + ")");
  res.best_state = ViterbiExpanded(res.expanded);
  res.best_score = states[res.best_state].acc_score;
  for (ArcId a : res.expanded.ArcChain(res.best_state))
    res.best.strokes.push_back(lat.arc(a).label);

  // Walk the winning chain for the per-stroke diagnostics.
  std::vector<StateId> chain;
  for (StateId s = res.best_state; states[s].parent != kNoState;
       s = states[s].parent)
    chain.push_back(s);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto &child = states[*it];
    const auto &parent = states[child.parent];
    diag.best_path.push_back({vocab.Name(child.history.back()),
                              parent.confidence, parent.divergence,
                              parent.lambda, child.arc_prob,
                              child.arc_weight});
  }
  return res;
}

inline RescoreResult Rescore(const Lattice &lat, const TiSdrmModel &model,
                             const RescoreConfig &cfg) {
  Require(cfg.w_tau >= 1 && cfg.w_tau <= model.posterior.window(),
          ErrorKind::kInvalidArgument,
          "w_tau must lie in [1, " + std::to_string(model.posterior.window()) +
              "] for this model");
  TalaIndependentPrior prior(model.prior, model.posterior, cfg.w_tau);
  return Rescore(lat, model.vocab, prior, model.alpha0, cfg);
}

/// Debug dump in the lattice text format: node ids are expanded-state ids,
/// arcs carry rescored weights, and each state gets a `# history` comment.
inline void WriteExpandedLattice(std::ostream &os, const ExpandedLattice &exp,
                                 const StrokeVocabulary &vocab) {
  os << "lattice v1\n" << "vocab " << vocab.size() << '\n';
  for (const auto &s : vocab.Symbols()) os << "sym " << s << '\n';
  os << "start " << exp.start << '\n' << "final";
  for (StateId t : exp.terminals) os << ' ' << t;
  os << '\n';
  for (StateId s = 0; s < exp.states.size(); ++s) {
    const auto &st = exp.states[s];
    os << "# history " << s << (st.pruned ? " pruned" : "");
    for (StrokeId h : st.history) os << ' ' << vocab.Name(h);
    os << '\n';
    if (st.parent != kNoState)
      os << "arc " << st.parent << ' ' << s << ' '
         << vocab.Name(st.history.back()) << ' ' << FormatDouble(st.arc_weight)
         << '\n';
  }
}

}  // namespace tisdrm

#endif  // TISDRM_RESCORER_H_
