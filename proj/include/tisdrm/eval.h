// tisdrm/eval.h

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

// Stroke Error Rate and the synthetic benchmark harness.

#ifndef TISDRM_EVAL_H_
#define TISDRM_EVAL_H_

#include <cstdio>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tisdrm/common.h"
#include "tisdrm/core.h"
#include "tisdrm/lattice.h"
#include "tisdrm/model.h"
#include "tisdrm/rescorer.h"

namespace tisdrm {

struct EditStats {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_length = 0;

  std::size_t Errors() const { return substitutions + deletions + insertions; }
  double Ser() const {
    return ref_length == 0 ? 0.0
                           : static_cast<double>(Errors()) /
                                 static_cast<double>(ref_length);
  }
  EditStats &operator+=(const EditStats &o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_length += o.ref_length;
    return *this;
  }
  bool operator==(const EditStats &) const = default;
};

/// Unit-cost Levenshtein alignment of hyp against ref. Among optimal
/// alignments the backtrace prefers substitution/match, then insertion,
/// then deletion, so the S/D/I split is deterministic.
inline EditStats Ser(std::span<const StrokeId> ref,
                     std::span<const StrokeId> hyp) {
  Require(!ref.empty(), ErrorKind::kInvalidArgument, "empty reference");
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t & {
    return d[i * (m + 1) + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                           at(i, j - 1) + 1, at(i - 1, j) + 1});
  EditStats st;
  st.ref_length = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      std::size_t cost = ref[i - 1] == hyp[j - 1] ? 0 : 1;
      if (at(i, j) == at(i - 1, j - 1) + cost) {
        st.substitutions += cost;
        --i, --j;
        continue;
      }
    }
    if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
      ++st.insertions;
      --j;
    } else {
      ++st.deletions;
      --i;
    }
  }
  return st;
}

inline EditStats Ser(const StrokeSequence &ref, const StrokeSequence &hyp) {
  return Ser(ref.strokes, hyp.strokes);
}

// ---------------------------------------------------------------------------
// Benchmark harness.

/// One rescoring configuration in the sweep.
struct BenchRow {
  std::string name;
  LambdaMode lambda_mode;
  std::optional<double> beta;  // overrides the suite beta
};

inline std::vector<BenchRow> DefaultSweep() {
  std::vector<BenchRow> rows{{"adaptive", LambdaMode::Adaptive(), {}}};
  for (double v : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    auto mode = LambdaMode::Fixed(v);
    rows.push_back({mode.ToString(), mode, {}});
  }
  return rows;
}

/// Lattice noise of the standard suite: three arcs per stroke and light
/// deletion/insertion branches, tuned for an acoustic-only SER of roughly
/// 20-30%.
inline LatticeGenConfig StandardLatticeConfig() {
  LatticeGenConfig cfg;
  cfg.branching = 3;
  cfg.noise_sigma = 1.0;
  cfg.margin = 1.5;
  cfg.p_del = 0.05;
  cfg.p_ins = 0.05;
  return cfg;
}

struct BenchmarkSuiteConfig {
  std::uint64_t seed = 20260101;
  std::vector<std::string> talas{"tintal", "ektal", "jhaptal", "keherva"};
  std::size_t train_per_tala = 24;
  std::size_t test_per_tala = 15;
  int cycles = 4;
  /// Applied to every tala able to host the tihai; shorter cycles only get
  /// substitutions.
  double p_tihai = 0.3;
  double p_sub = 0.03;
  LatticeGenConfig lattice = StandardLatticeConfig();
  TrainConfig train;
  RescoreConfig rescore;
  std::vector<BenchRow> rows = DefaultSweep();
  /// Adds small/medium/large datasets trained on 1/3, 2/3 and all of the
  /// symbolic training corpus.
  bool data_efficiency = false;
};

struct BenchmarkRowResult {
  std::string dataset;
  std::string config;
  EditStats pooled;
  std::vector<EditStats> per_sequence;
  double ser = 0.0;
  double improvement_abs = 0.0;
  double improvement_rel = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRowResult> rows;
  std::size_t test_sequences = 0;
  std::size_t test_strokes = 0;
  std::vector<std::pair<std::string, std::size_t>> train_strokes;

  const BenchmarkRowResult &Row(const std::string &dataset,
                                const std::string &config) const {
    for (const auto &r : rows)
      if (r.dataset == dataset && r.config == config) return r;
    Fail(ErrorKind::kInvalidArgument,
         "no benchmark row " + dataset + "/" + config);
  }
};

struct BenchmarkData {
  StrokeVocabulary vocab;
  std::vector<StrokeSequence> train;
  std::vector<StrokeSequence> test;
  std::vector<Lattice> lattices;
};

/// Builds the symbolic corpora and the test lattices. Seeds are split per
/// (purpose, index) from the suite seed.
inline BenchmarkData GenerateBenchmarkData(const BenchmarkSuiteConfig &suite) {
  BenchmarkData data;
  data.vocab = DefaultVocabulary();
  auto all_talas = BuiltinTalas(data.vocab);
  auto subs = UniformSubstitutions(data.vocab);
  auto tihai = DefaultTihai(data.vocab);
  auto draw_seed = [&](std::uint64_t stream, std::uint64_t index) {
    return SplitRng(suite.seed, stream, index)();
  };
  auto make = [&](std::size_t per_tala, std::uint64_t stream,
                  std::vector<StrokeSequence> &out) {
    // Interleave talas so that prefixes of the corpus stay balanced.
    for (std::size_t i = 0; i < per_tala; ++i)
      for (std::size_t t = 0; t < suite.talas.size(); ++t) {
        const auto &tala = FindTala(all_talas, suite.talas[t]);
        DeviationConfig dev;
        dev.p_sub = suite.p_sub;
        dev.substitutions = subs;
        if (tihai.Span() <= static_cast<std::size_t>(tala.matras))
          dev.p_tihai = suite.p_tihai;
        out.push_back(GenerateSequence(tala, suite.cycles, dev,
                                       draw_seed(stream, out.size()),
                                       data.vocab));
      }
  };
  make(suite.train_per_tala, 11, data.train);
  make(suite.test_per_tala, 12, data.test);
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    LatticeGenConfig lc = suite.lattice;
    lc.rng_seed = draw_seed(13, i);
    data.lattices.push_back(GenerateLattice(data.test[i], data.vocab, lc));
  }
  return data;
}

/// Acoustic-only baseline plus every configured rescoring row, per dataset.
inline BenchmarkReport RunBenchmark(const BenchmarkSuiteConfig &suite) {
  BenchmarkData data = GenerateBenchmarkData(suite);
  BenchmarkReport report;
  report.test_sequences = data.test.size();
  for (const auto &s : data.test) report.test_strokes += s.size();

  std::vector<std::pair<std::string, std::size_t>> datasets;
  if (suite.data_efficiency) {
    const std::size_t n = data.train.size();
    datasets = {{"small", (n + 2) / 3}, {"medium", (2 * n + 2) / 3},
                {"large", n}};
  } else {
    datasets = {{"synthetic", data.train.size()}};
  }

  std::vector<EditStats> baseline;
  EditStats baseline_pooled;
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    auto hyp = ViterbiAcoustic(data.lattices[i]).strokes;
    baseline.push_back(Ser(data.test[i], hyp));
    baseline_pooled += baseline.back();
  }

  for (const auto &[name, count] : datasets) {
    std::vector<StrokeSequence> train(data.train.begin(),
                                      data.train.begin() + count);
    std::size_t strokes = 0;
    for (const auto &s : train) strokes += s.size();
    report.train_strokes.emplace_back(name, strokes);
    TiSdrmModel model = TrainModel(train, data.vocab, suite.train);

    BenchmarkRowResult base{name, "baseline", baseline_pooled, baseline};
    base.ser = baseline_pooled.Ser();
    report.rows.push_back(base);
    for (const auto &row : suite.rows) {
      RescoreConfig rc = suite.rescore;
      rc.lambda_mode = row.lambda_mode;
      if (row.beta) rc.beta = *row.beta;
      BenchmarkRowResult r{name, row.name, {}, {}};
      for (std::size_t i = 0; i < data.test.size(); ++i) {
        auto hyp = Rescore(data.lattices[i], model, rc).best;
        r.per_sequence.push_back(Ser(data.test[i], hyp));
        r.pooled += r.per_sequence.back();
      }
      r.ser = r.pooled.Ser();
      r.improvement_abs = base.ser - r.ser;
      r.improvement_rel = base.ser > 0.0 ? r.improvement_abs / base.ser : 0.0;
      report.rows.push_back(std::move(r));
    }
  }
  return report;
}

namespace internal {

inline std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline void WriteReportHeader(std::ostream &os, const BenchmarkReport &r) {
  os << "# aggregation: pooled (sum of S+D+I over sum of reference strokes)\n"
     << "# test set: " << r.test_sequences << " sequences, " << r.test_strokes
     << " strokes\n";
  for (const auto &[name, strokes] : r.train_strokes)
    os << "# training data '" << name << "': " << strokes << " strokes\n";
}

}  // namespace internal

/// Columns: dataset/config, SER, improvement-absolute, improvement-relative.
inline void WriteReportTsv(std::ostream &os, const BenchmarkReport &r) {
  internal::WriteReportHeader(os, r);
  os << "dataset/config\tSER\timprovement_abs\timprovement_rel\n";
  for (const auto &row : r.rows)
    os << row.dataset << '/' << row.config << '\t'
       << internal::Fixed(row.ser, 6) << '\t'
       << internal::Fixed(row.improvement_abs, 6) << '\t'
       << internal::Fixed(row.improvement_rel, 6) << '\n';
}

/// Aligned plain-text table, one block per dataset.
inline void WriteReportTable(std::ostream &os, const BenchmarkReport &r) {
  internal::WriteReportHeader(os, r);
  auto line = [&](const std::string &a, const std::string &b,
                  const std::string &c, const std::string &d,
                  const std::string &e) {
    os << std::left << std::setw(12) << a << std::setw(14) << b << std::right
       << std::setw(10) << c << std::setw(16) << d << std::setw(22) << e
       << '\n';
  };
  line("Dataset", "Config", "SER (%)", "Improvement (%)", "S / D / I of N");
  std::string last;
  for (const auto &row : r.rows) {
    if (row.dataset != last && !last.empty()) os << '\n';
    last = row.dataset;
    std::string counts = std::to_string(row.pooled.substitutions) + " / " +
                         std::to_string(row.pooled.deletions) + " / " +
                         std::to_string(row.pooled.insertions) + " of " +
                         std::to_string(row.pooled.ref_length);
    line(row.dataset, row.config, internal::Fixed(100.0 * row.ser, 2),
         row.config == "baseline"
             ? std::string("-")
             : internal::Fixed(100.0 * row.improvement_rel, 2),
         counts);
  }
}

}  // namespace tisdrm

#endif  // TISDRM_EVAL_H_
