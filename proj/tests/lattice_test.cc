// tests/lattice_test.cc

// Copyright 2026  The tisdrm Authors
//
// See ../COPYING for clarification regarding multiple authors
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

#include <functional>
#include <sstream>

#include <gtest/gtest.h>

#include "tisdrm/lattice.h"

namespace tisdrm {
namespace {

StrokeVocabulary Vocab() { return DefaultVocabulary(); }

LatticeArc Arc(const StrokeVocabulary &v, NodeId s, NodeId d, const char *sym,
               double w) {
  return {s, d, v.Id(sym), w};
}

// Independent recursive enumeration: (labels, score) per path.
void Dfs(const Lattice &lat, NodeId v, std::vector<StrokeId> &labels,
         double score, std::vector<std::pair<std::vector<StrokeId>, double>> &out) {
  if (lat.IsFinal(v)) out.push_back({labels, score});
  for (ArcId a = 0; a < lat.arcs().size(); ++a) {
    if (lat.arc(a).src != v) continue;
    labels.push_back(lat.arc(a).label);
    Dfs(lat, lat.arc(a).dst, labels, score + lat.arc(a).w_ac, out);
    labels.pop_back();
  }
}

TEST(Lattice, SingleChain) {
  auto v = Vocab();
  Lattice lat(v, 3, 0, {2}, {Arc(v, 0, 1, "Dha", -1.0), Arc(v, 1, 2, "Tin", -2.0)});
  auto paths = EnumeratePaths(lat, 10);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].strokes.strokes,
            (std::vector<StrokeId>{v.Id("Dha"), v.Id("Tin")}));
  EXPECT_EQ(paths[0].w_ac, -3.0);
  EXPECT_EQ(ViterbiAcoustic(lat).strokes.strokes, paths[0].strokes.strokes);
}

TEST(Lattice, DiamondHasTwoPathsAndViterbiPicksBetterArc) {
  auto v = Vocab();
  Lattice lat(v, 2, 0, {1}, {Arc(v, 0, 1, "Dha", -2.0), Arc(v, 0, 1, "Tin", -1.0)});
  EXPECT_EQ(EnumeratePaths(lat, 10).size(), 2u);
  auto best = ViterbiAcoustic(lat);
  EXPECT_EQ(best.strokes.strokes, (std::vector<StrokeId>{v.Id("Tin")}));
  EXPECT_EQ(best.w_ac, -1.0);
}

TEST(Lattice, ViterbiTieBreaksOnArcIds) {
  auto v = Vocab();
  Lattice lat(v, 2, 0, {1}, {Arc(v, 0, 1, "Na", -1.0), Arc(v, 0, 1, "Dha", -1.0)});
  EXPECT_EQ(ViterbiAcoustic(lat).arcs, (std::vector<ArcId>{0}));
}

TEST(Lattice, ThreeStagesTwoArcsEach) {
  auto v = Vocab();
  std::vector<LatticeArc> arcs;
  std::mt19937_64 rng(4);
  for (NodeId s = 0; s < 3; ++s) {
    arcs.push_back({s, s + 1, v.Id("Dha"), -Uniform01(rng)});
    arcs.push_back({s, s + 1, v.Id("Na"), -Uniform01(rng)});
  }
  Lattice lat(v, 4, 0, {3}, arcs);
  auto paths = EnumeratePaths(lat, 100);
  ASSERT_EQ(paths.size(), 8u);
  std::vector<std::pair<std::vector<StrokeId>, double>> oracle;
  std::vector<StrokeId> labels;
  Dfs(lat, 0, labels, 0.0, oracle);
  ASSERT_EQ(oracle.size(), 8u);
  for (const auto &p : paths) {
    double sum = 0.0;
    for (ArcId a : p.arcs) sum += lat.arc(a).w_ac;
    EXPECT_EQ(p.w_ac, sum);
    bool found = false;
    for (const auto &[l, s] : oracle) found = found || (l == p.strokes.strokes && s == p.w_ac);
    EXPECT_TRUE(found);
  }
  EXPECT_THROW(EnumeratePaths(lat, 7), Error);
}

TEST(Lattice, RejectsMalformedGraphs) {
  auto v = Vocab();
  // Cycle.
  EXPECT_THROW(Lattice(v, 3, 0, {2},
                       {Arc(v, 0, 1, "Dha", 0), Arc(v, 1, 2, "Na", 0),
                        Arc(v, 2, 1, "Na", 0)}),
               Error);
  // Incoming arc at start.
  EXPECT_THROW(Lattice(v, 2, 0, {1}, {Arc(v, 0, 1, "Dha", 0), Arc(v, 1, 0, "Na", 0)}),
               Error);
  // Dead-end node.
  EXPECT_THROW(Lattice(v, 3, 0, {1}, {Arc(v, 0, 1, "Dha", 0), Arc(v, 0, 2, "Na", 0)}),
               Error);
  // Sentinel label.
  EXPECT_THROW(Lattice(v, 2, 0, {1}, {{0, 1, StrokeId::Start(), 0.0}}), Error);
  // Non-finite score.
  EXPECT_THROW(Lattice(v, 2, 0, {1}, {Arc(v, 0, 1, "Dha", std::nan(""))}), Error);
}

TEST(Lattice, ViterbiMatchesEnumerationOnRandomLattices) {
  auto v = Vocab();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LatticeArc> arcs;
    for (NodeId s = 0; s < 5; ++s)
      for (int b = 0; b < 3; ++b)
        arcs.push_back({s, s + 1,
                        StrokeVocabulary::FromIndex(UniformIndex(rng, v.size())),
                        -3.0 * Uniform01(rng)});
    if (trial % 2) arcs.push_back({0, 2, v.Id("Ka"), -Uniform01(rng)});
    Lattice lat(v, 6, 0, {5}, arcs);
    auto paths = EnumeratePaths(lat, 1000);
    const LatticePath *best = &paths[0];
    for (const auto &p : paths)
      if (p.w_ac > best->w_ac) best = &p;
    auto vit = ViterbiAcoustic(lat);
    EXPECT_EQ(vit.arcs, best->arcs);
    EXPECT_EQ(vit.strokes, best->strokes);
  }
}

TEST(Generator, ZeroNoiseSingleBranchSpellsTruth) {
  auto v = Vocab();
  auto truth = MakeSequence(v, {"Dha", "Dhin", "Dhin", "Dha"});
  LatticeGenConfig cfg;
  cfg.branching = 1;
  cfg.noise_sigma = 0.0;
  auto lat = GenerateLattice(truth, v, cfg);
  auto paths = EnumeratePaths(lat, 10);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].strokes.strokes, truth.strokes);
}

TEST(Generator, TruthIsAlwaysAPath) {
  auto v = Vocab();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    StrokeSequence truth;
    for (int i = 0; i < 6; ++i)
      truth.strokes.push_back(StrokeVocabulary::FromIndex(UniformIndex(rng, v.size())));
    LatticeGenConfig cfg;
    cfg.branching = 1 + static_cast<int>(UniformIndex(rng, 4));
    cfg.p_del = 0.3;
    cfg.p_ins = 0.3;
    cfg.rng_seed = trial;
    auto lat = GenerateLattice(truth, v, cfg);
    bool found = false;
    for (const auto &p : EnumeratePaths(lat, 100000))
      found = found || p.strokes.strokes == truth.strokes;
    EXPECT_TRUE(found);
    for (const auto &a : lat.arcs()) EXPECT_LE(a.w_ac, 0.0);
  }
}

TEST(Generator, ByteIdenticalRegeneration) {
  auto v = Vocab();
  auto truth = MakeSequence(v, {"Dha", "Dhin", "Dhin", "Dha", "Na", "Tin"});
  LatticeGenConfig cfg;
  cfg.p_del = 0.2;
  cfg.p_ins = 0.2;
  cfg.rng_seed = 77;
  std::stringstream a, b;
  WriteLattice(a, GenerateLattice(truth, v, cfg));
  WriteLattice(b, GenerateLattice(truth, v, cfg));
  EXPECT_EQ(a.str(), b.str());
  cfg.rng_seed = 78;
  std::stringstream c;
  WriteLattice(c, GenerateLattice(truth, v, cfg));
  EXPECT_NE(a.str(), c.str());
}

TEST(Generator, RejectsExcessBranching) {
  auto v = Vocab();
  LatticeGenConfig cfg;
  cfg.branching = static_cast<int>(v.size()) + 1;
  EXPECT_THROW(GenerateLattice(MakeSequence(v, {"Dha"}), v, cfg), Error);
}

TEST(Generator, ConfusionTableRestrictsCompetitors) {
  auto v = Vocab();
  LatticeGenConfig cfg;
  cfg.branching = 2;
  cfg.confusion[v.Id("Dha")] = {{v.Id("Dhin"), 1.0}};
  auto lat = GenerateLattice(MakeSequence(v, {"Dha", "Dha"}), v, cfg);
  for (const auto &a : lat.arcs())
    EXPECT_TRUE(a.label == v.Id("Dha") || a.label == v.Id("Dhin"));
}

TEST(TextFormat, RoundTripsExactly) {
  auto v = Vocab();
  LatticeGenConfig cfg;
  cfg.p_del = 0.3;
  cfg.p_ins = 0.3;
  cfg.rng_seed = 3;
  auto lat = GenerateLattice(MakeSequence(v, {"Dha", "Tin", "Na", "Ka"}), v, cfg);
  std::stringstream ss;
  WriteLattice(ss, lat);
  std::string text = ss.str();
  auto back = ReadLattice(ss);
  EXPECT_EQ(back, lat);
  std::stringstream again;
  WriteLattice(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(TextFormat, ParseErrors) {
  std::stringstream no_header("start 0\n");
  EXPECT_THROW(ReadLattice(no_header), Error);
  std::stringstream bad_sym(
      "lattice v1\nvocab 1\nsym Dha\nstart 0\nfinal 1\narc 0 1 Na -1\n");
  EXPECT_THROW(ReadLattice(bad_sym), Error);
  std::stringstream cyc(
      "lattice v1\nvocab 1\nsym Dha\nstart 0\nfinal 2\narc 0 1 Dha -1\n"
      "arc 1 2 Dha -1\narc 2 1 Dha -1\n");
  EXPECT_THROW(ReadLattice(cyc), Error);
  std::stringstream ok(
      "lattice v1\n# comment\nvocab 2\nsym Dha\nsym Na\nstart 0\nfinal 1\n"
      "arc 0 1 Na -0.5\n");
  auto lat = ReadLattice(ok);
  EXPECT_EQ(lat.arcs().size(), 1u);
  EXPECT_EQ(lat.arc(0).w_ac, -0.5);
}

}  // namespace
}  // namespace tisdrm
