// tisdrm/lattice.h

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

// Stroke lattices: a DAG of stroke-labelled arcs carrying acoustic
// log-scores (natural log). Arcs are per stroke, there are no blank or
// frame-level arcs.

#ifndef TISDRM_LATTICE_H_
#define TISDRM_LATTICE_H_

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tisdrm/common.h"
#include "tisdrm/core.h"

namespace tisdrm {

using NodeId = std::uint32_t;
using ArcId = std::uint32_t;

struct LatticeArc {
  NodeId src = 0;
  NodeId dst = 0;
  StrokeId label;
  double w_ac = 0.0;
  bool operator==(const LatticeArc &) const = default;
};

class Lattice {
 public:
  Lattice() = default;

  /// Builds and validates. Throws kMalformedLattice on any violated
  /// invariant.
  Lattice(StrokeVocabulary vocab, std::size_t num_nodes, NodeId start,
          std::vector<NodeId> finals, std::vector<LatticeArc> arcs)
      : vocab_(std::move(vocab)),
        num_nodes_(num_nodes),
        start_(start),
        finals_(std::move(finals)),
        arcs_(std::move(arcs)) {
    std::sort(finals_.begin(), finals_.end());
    finals_.erase(std::unique(finals_.begin(), finals_.end()), finals_.end());
    Index();
    Validate();
  }

  const StrokeVocabulary &vocab() const { return vocab_; }
  std::size_t num_nodes() const { return num_nodes_; }
  NodeId start() const { return start_; }
  const std::vector<NodeId> &finals() const { return finals_; }
  bool IsFinal(NodeId v) const { return is_final_[v]; }
  const std::vector<LatticeArc> &arcs() const { return arcs_; }
  const LatticeArc &arc(ArcId a) const { return arcs_[a]; }
  /// Outgoing arc ids of v, ascending.
  const std::vector<ArcId> &Out(NodeId v) const { return out_[v]; }
  /// Nodes in a topological order (start first).
  const std::vector<NodeId> &TopoOrder() const { return topo_; }

  bool operator==(const Lattice &o) const {
    return vocab_ == o.vocab_ && num_nodes_ == o.num_nodes_ &&
           start_ == o.start_ && finals_ == o.finals_ && arcs_ == o.arcs_;
  }

 private:
  void Index() {
    out_.assign(num_nodes_, {});
    is_final_.assign(num_nodes_, false);
    for (NodeId f : finals_) {
      Require(f < num_nodes_, ErrorKind::kMalformedLattice,
              "final node " + std::to_string(f) + " out of range");
      is_final_[f] = true;
    }
    for (ArcId a = 0; a < arcs_.size(); ++a) {
      const auto &arc = arcs_[a];
      Require(arc.src < num_nodes_ && arc.dst < num_nodes_,
              ErrorKind::kMalformedLattice,
              "arc " + std::to_string(a) + " references a missing node");
      out_[arc.src].push_back(a);
    }
  }

  void Validate() {
    Require(num_nodes_ > 0, ErrorKind::kMalformedLattice, "lattice has no nodes");
    Require(start_ < num_nodes_, ErrorKind::kMalformedLattice,
            "start node out of range");
    Require(!finals_.empty(), ErrorKind::kMalformedLattice,
            "lattice has no final node");
    std::vector<int> indeg(num_nodes_, 0);
    for (const auto &arc : arcs_) {
      Require(vocab_.IsPlayable(arc.label), ErrorKind::kMalformedLattice,
              "arc label must be a playable stroke");
      Require(std::isfinite(arc.w_ac), ErrorKind::kMalformedLattice,
              "arc score must be finite");
      ++indeg[arc.dst];
    }
    Require(indeg[start_] == 0, ErrorKind::kMalformedLattice,
            "start node has incoming arcs");
    // Kahn's algorithm; a leftover node means a cycle.
    topo_.clear();
    std::vector<NodeId> stack;
    for (NodeId v = 0; v < num_nodes_; ++v)
      if (indeg[v] == 0) stack.push_back(v);
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      topo_.push_back(v);
      for (ArcId a : out_[v])
        if (--indeg[arcs_[a].dst] == 0) stack.push_back(arcs_[a].dst);
    }
    Require(topo_.size() == num_nodes_, ErrorKind::kMalformedLattice,
            "lattice contains a cycle");
    // Every node must be reachable from start and co-reachable to a final.
    std::vector<char> fwd(num_nodes_, 0), bwd(num_nodes_, 0);
    fwd[start_] = 1;
    for (NodeId v : topo_)
      if (fwd[v])
        for (ArcId a : out_[v]) fwd[arcs_[a].dst] = 1;
    for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
      NodeId v = *it;
      if (is_final_[v]) bwd[v] = 1;
      for (ArcId a : out_[v])
        if (bwd[arcs_[a].dst]) bwd[v] = 1;
    }
    for (NodeId v = 0; v < num_nodes_; ++v)
      Require(fwd[v] && bwd[v], ErrorKind::kMalformedLattice,
              "node " + std::to_string(v) +
                  " does not lie on a start-to-final path");
  }

  StrokeVocabulary vocab_;
  std::size_t num_nodes_ = 0;
  NodeId start_ = 0;
  std::vector<NodeId> finals_;
  std::vector<LatticeArc> arcs_;
  std::vector<std::vector<ArcId>> out_;
  std::vector<bool> is_final_;
  std::vector<NodeId> topo_;
};

/// One complete start-to-final path.
struct LatticePath {
  std::vector<ArcId> arcs;
  StrokeSequence strokes;
  /// Sum of arc scores, accumulated left to right along the path.
  double w_ac = 0.0;
};

/// All start-to-final paths in lexicographic arc-id order. Throws kOverflow
/// once more than `max_paths` paths exist.
inline std::vector<LatticePath> EnumeratePaths(const Lattice &lat,
                                               std::size_t max_paths) {
  std::vector<LatticePath> paths;
  LatticePath cur;
  // Explicit DFS stack of (node, next out-arc position).
  std::vector<std::pair<NodeId, std::size_t>> stack{{lat.start(), 0}};
  std::vector<double> prefix{0.0};
  auto emit = [&]() {
    if (paths.size() >= max_paths)
      Fail(ErrorKind::kOverflow, "lattice has more than " +
                                     std::to_string(max_paths) + " paths");
    cur.w_ac = prefix.back();
    paths.push_back(cur);
  };
  if (lat.IsFinal(lat.start())) emit();
  while (!stack.empty()) {
    auto &[v, pos] = stack.back();
    const auto &out = lat.Out(v);
    if (pos == out.size()) {
      stack.pop_back();
      prefix.pop_back();
      if (!cur.arcs.empty()) {
        cur.arcs.pop_back();
        cur.strokes.strokes.pop_back();
      }
      continue;
    }
    ArcId a = out[pos++];
    const auto &arc = lat.arc(a);
    cur.arcs.push_back(a);
    cur.strokes.strokes.push_back(arc.label);
    prefix.push_back(prefix.back() + arc.w_ac);
    stack.emplace_back(arc.dst, 0);
    if (lat.IsFinal(arc.dst)) emit();
  }
  return paths;
}

/// Best acoustic path. Ties go to the lexicographically smallest arc-id
/// sequence.
inline LatticePath ViterbiAcoustic(const Lattice &lat) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const std::size_t n = lat.num_nodes();
  std::vector<double> best(n, kNegInf);
  std::vector<std::vector<ArcId>> chain(n);
  std::vector<bool> reached(n, false);
  best[lat.start()] = 0.0;
  reached[lat.start()] = true;
  for (NodeId v : lat.TopoOrder()) {
    if (!reached[v]) continue;
    for (ArcId a : lat.Out(v)) {
      const auto &arc = lat.arc(a);
      double s = best[v] + arc.w_ac;
      NodeId d = arc.dst;
      bool better = !reached[d] || s > best[d];
      if (!better && s == best[d]) {
        std::vector<ArcId> cand = chain[v];
        cand.push_back(a);
        better = cand < chain[d];
      }
      if (better) {
        reached[d] = true;
        best[d] = s;
        chain[d] = chain[v];
        chain[d].push_back(a);
      }
    }
  }
  std::optional<NodeId> winner;
  for (NodeId f : lat.finals()) {
    if (!reached[f]) continue;
    if (!winner || best[f] > best[*winner] ||
        (best[f] == best[*winner] && chain[f] < chain[*winner]))
      winner = f;
  }
  Require(winner.has_value(), ErrorKind::kNoTerminal,
          "no final node is reachable");
  LatticePath path;
  path.arcs = chain[*winner];
  path.w_ac = best[*winner];
  for (ArcId a : path.arcs) path.strokes.strokes.push_back(lat.arc(a).label);
  return path;
}

// ---------------------------------------------------------------------------
// Synthetic lattices standing in for CTC decoder output.

struct LatticeGenConfig {
  /// Parallel arcs per true stroke, the true arc included.
  int branching = 3;
  /// Std-dev of the Gaussian perturbation applied to every clean logit.
  double noise_sigma = 1.0;
  /// Clean log-odds advantage of the true arc over its competitors; also the
  /// clean penalty of deletion and insertion arcs.
  double margin = 2.0;
  double p_del = 0.0;
  double p_ins = 0.0;
  /// Optional confusion weights truth -> competitor. Strokes without a row
  /// draw competitors uniformly.
  std::map<StrokeId, std::map<StrokeId, double>> confusion;
  std::uint64_t rng_seed = 0;
};

namespace internal {

inline double LogSumExp(const std::vector<double> &xs) {
  double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Draws k distinct strokes other than `truth`, weighted by the confusion row.
inline std::vector<StrokeId> DrawCompetitors(const StrokeVocabulary &vocab,
                                             const LatticeGenConfig &cfg,
                                             StrokeId truth, int k,
                                             std::mt19937_64 &rng) {
  std::vector<StrokeId> pool;
  std::vector<double> weight;
  auto row = cfg.confusion.find(truth);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    StrokeId s = StrokeVocabulary::FromIndex(i);
    if (s == truth) continue;
    double w = 1.0;
    if (row != cfg.confusion.end()) {
      auto it = row->second.find(s);
      w = it == row->second.end() ? 0.0 : it->second;
    }
    if (w > 0.0) {
      pool.push_back(s);
      weight.push_back(w);
    }
  }
  std::vector<StrokeId> out;
  while (static_cast<int>(out.size()) < k && !pool.empty()) {
    double total = 0.0;
    for (double w : weight) total += w;
    double u = Uniform01(rng) * total;
    std::size_t pick = pool.size() - 1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (u < weight[i]) {
        pick = i;
        break;
      }
      u -= weight[i];
    }
    out.push_back(pool[pick]);
    pool.erase(pool.begin() + pick);
    weight.erase(weight.begin() + pick);
  }
  // A sparse confusion row falls back to uniform draws for the remainder.
  for (std::size_t i = 0; static_cast<int>(out.size()) < k && i < vocab.size();
       ++i) {
    StrokeId s = StrokeVocabulary::FromIndex(UniformIndex(rng, vocab.size()));
    if (s != truth && std::find(out.begin(), out.end(), s) == out.end())
      out.push_back(s);
  }
  for (std::size_t i = 0; static_cast<int>(out.size()) < k && i < vocab.size();
       ++i) {
    StrokeId s = StrokeVocabulary::FromIndex(i);
    if (s != truth && std::find(out.begin(), out.end(), s) == out.end())
      out.push_back(s);
  }
  return out;
}

}  // namespace internal

/// Builds a lattice that contains the true path. Stage i joins chain nodes i
/// and i+1 with the true arc plus branching-1 competitors; their scores are
/// the log-softmax of perturbed logits (truth: margin + noise, competitor:
/// noise). With probability p_del a skip arc (chain i -> i+2, labelled
/// truth[i]) is added, and with probability p_ins an extra node splits
/// stage i into truth[i] followed by a spurious stroke. Those extra arcs score
/// -margin + noise, capped at 0.
inline Lattice GenerateLattice(const StrokeSequence &truth,
                               const StrokeVocabulary &vocab,
                               const LatticeGenConfig &cfg) {
  ValidateSequence(vocab, truth);
  Require(cfg.branching >= 1, ErrorKind::kInvalidArgument,
          "branching must be >= 1");
  Require(static_cast<std::size_t>(cfg.branching) <= vocab.size(),
          ErrorKind::kInvalidArgument,
          "branching " + std::to_string(cfg.branching) +
              " exceeds vocabulary size " + std::to_string(vocab.size()));
  Require(cfg.noise_sigma >= 0.0, ErrorKind::kInvalidArgument,
          "noise_sigma must be non-negative");
  Require(cfg.p_del >= 0.0 && cfg.p_del <= 1.0 && cfg.p_ins >= 0.0 &&
              cfg.p_ins <= 1.0,
          ErrorKind::kInvalidArgument, "p_del/p_ins must be in [0,1]");

  auto rng = SplitRng(cfg.rng_seed, /*stream=*/2);
  const std::size_t k = truth.size();
  std::size_t num_nodes = k + 1;
  std::vector<LatticeArc> arcs;
  auto extra_score = [&]() {
    return std::min(0.0, -cfg.margin + cfg.noise_sigma * StandardNormal(rng));
  };
  for (std::size_t i = 0; i < k; ++i) {
    StrokeId t = truth.strokes[i];
    auto src = static_cast<NodeId>(i);
    auto dst = static_cast<NodeId>(i + 1);
    std::vector<StrokeId> labels{t};
    auto comp = internal::DrawCompetitors(vocab, cfg, t, cfg.branching - 1, rng);
    labels.insert(labels.end(), comp.begin(), comp.end());
    std::vector<double> logits;
    for (std::size_t j = 0; j < labels.size(); ++j)
      logits.push_back((j == 0 ? cfg.margin : 0.0) +
                       cfg.noise_sigma * StandardNormal(rng));
    double lse = internal::LogSumExp(logits);
    // Emit in a shuffled order so arc ids do not reveal the truth.
    std::vector<std::size_t> order(labels.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    for (std::size_t j = order.size(); j > 1; --j)
      std::swap(order[j - 1], order[UniformIndex(rng, j)]);
    for (std::size_t j : order)
      arcs.push_back({src, dst, labels[j], logits[j] - lse});

    if (i + 1 < k && Uniform01(rng) < cfg.p_del)
      arcs.push_back({src, static_cast<NodeId>(i + 2), t, extra_score()});
    if (Uniform01(rng) < cfg.p_ins) {
      auto mid = static_cast<NodeId>(num_nodes++);
      double w_first = std::min(0.0, cfg.noise_sigma * StandardNormal(rng));
      StrokeId spurious =
          StrokeVocabulary::FromIndex(UniformIndex(rng, vocab.size()));
      arcs.push_back({src, mid, t, w_first});
      arcs.push_back({mid, dst, spurious, extra_score()});
    }
  }
  return Lattice(vocab, num_nodes, 0, {static_cast<NodeId>(k)},
                 std::move(arcs));
}

// ---------------------------------------------------------------------------
// Text format:
//
//   lattice v1
//   vocab <count>          followed by <count> lines `sym <name>`
//   vocab <path>           alternatively, a vocabulary file
//   start <node>
//   final <node> [<node> ...]
//   arc <src> <dst> <symbol> <w_ac>
//
// The node count is one past the largest id mentioned. Lines starting with
// '#' are comments. Scores use the shortest decimal
// form that re-parses to the same double.

inline void WriteLattice(std::ostream &os, const Lattice &lat) {
  const auto &vocab = lat.vocab();
  os << "lattice v1\n" << "vocab " << vocab.size() << '\n';
  for (const auto &s : vocab.Symbols()) os << "sym " << s << '\n';
  os << "start " << lat.start() << '\n'
     << "final";
  for (NodeId f : lat.finals()) os << ' ' << f;
  os << '\n';
  for (const auto &arc : lat.arcs())
    os << "arc " << arc.src << ' ' << arc.dst << ' ' << vocab.Name(arc.label)
       << ' ' << FormatDouble(arc.w_ac) << '\n';
}

/// Reads a lattice. A `vocab <path>` header is resolved relative to
/// `base_dir`.
inline Lattice ReadLattice(std::istream &is, const std::string &base_dir = ".") {
  std::string line;
  int lineno = 0;
  auto next = [&](std::vector<std::string> &toks) {
    while (std::getline(is, line)) {
      ++lineno;
      toks = SplitWhitespace(line);
      if (!toks.empty() && toks[0][0] != '#') return true;
    }
    return false;
  };
  auto where = [&]() { return "lattice line " + std::to_string(lineno); };
  std::vector<std::string> toks;
  Require(next(toks) && toks.size() == 2 && toks[0] == "lattice" &&
              toks[1] == "v1",
          ErrorKind::kParse, "missing 'lattice v1' header");
  Require(next(toks) && toks.size() == 2 && toks[0] == "vocab",
          ErrorKind::kParse, where() + ": expected 'vocab'");
  StrokeVocabulary vocab;
  if (!toks[1].empty() &&
      std::all_of(toks[1].begin(), toks[1].end(),
                  [](char c) { return c >= '0' && c <= '9'; })) {
    auto count = ParseInt<std::size_t>(toks[1]);
    for (std::size_t i = 0; i < count; ++i) {
      Require(next(toks) && toks.size() == 2 && toks[0] == "sym",
              ErrorKind::kParse, where() + ": expected 'sym <name>'");
      vocab.Add(toks[1]);
    }
  } else {
    std::string path = toks[1];
    if (!path.empty() && path[0] != '/') path = base_dir + "/" + path;
    vocab = ReadFile<StrokeVocabulary>(
        path, [](std::istream &s) { return ReadVocabulary(s); });
  }
  std::optional<NodeId> start;
  std::vector<NodeId> finals;
  std::vector<LatticeArc> arcs;
  bool have_final = false;
  while (next(toks)) {
    if (toks[0] == "start" && toks.size() == 2) {
      start = ParseInt<NodeId>(toks[1]);
    } else if (toks[0] == "final" && toks.size() >= 2) {
      for (std::size_t i = 1; i < toks.size(); ++i)
        finals.push_back(ParseInt<NodeId>(toks[i]));
      have_final = true;
    } else if (toks[0] == "arc" && toks.size() == 5) {
      arcs.push_back({ParseInt<NodeId>(toks[1]), ParseInt<NodeId>(toks[2]),
                      vocab.Id(toks[3]), ParseDouble(toks[4])});
    } else {
      Fail(ErrorKind::kParse, where() + ": unrecognized line '" + line + "'");
    }
  }
  Require(start && have_final, ErrorKind::kParse,
          "lattice is missing a start or final line");
  std::size_t num_nodes = *start + 1;
  for (NodeId f : finals) num_nodes = std::max<std::size_t>(num_nodes, f + 1);
  for (const auto &arc : arcs)
    num_nodes = std::max<std::size_t>(num_nodes, std::max(arc.src, arc.dst) + 1);
  return Lattice(std::move(vocab), num_nodes, *start, std::move(finals),
                 std::move(arcs));
}

}  // namespace tisdrm

#endif  // TISDRM_LATTICE_H_
