// tools/tisdrm.cc

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

// Command-line driver: corpus and lattice generation, training, rescoring,
// benchmarking and SER scoring.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tisdrm/tisdrm.h"

namespace {

using namespace tisdrm;
namespace fs = std::filesystem;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "-" means stdout.
class Output {
 public:
  explicit Output(const std::string &path) {
    if (path != "-") {
      if (fs::path(path).has_parent_path())
        fs::create_directories(fs::path(path).parent_path());
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) Fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
    }
  }
  std::ostream &os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

StrokeVocabulary LoadVocab(const std::string &path) {
  if (path.empty()) return DefaultVocabulary();
  return ReadFile<StrokeVocabulary>(
      path, [](std::istream &is) { return ReadVocabulary(is); });
}

std::vector<StrokeSequence> LoadSequences(const std::string &path,
                                          const StrokeVocabulary &vocab) {
  return ReadFile<std::vector<StrokeSequence>>(
      path, [&](std::istream &is) { return ReadSequences(is, vocab); });
}

// ---------------------------------------------------------------------------

struct GenCorpusArgs {
  std::string tala;
  std::string tala_file;
  std::string vocab;
  int cycles = 3;
  int count = 1;
  std::uint64_t seed = 0;
  double p_tihai = 0.0;
  double p_sub = 0.0;
  std::vector<int> tihai_cycles;
  std::string out = "-";
};

void GenCorpus(const GenCorpusArgs &a) {
  auto vocab = LoadVocab(a.vocab);
  auto talas = a.tala_file.empty()
                   ? BuiltinTalas(vocab)
                   : ReadFile<std::vector<TalaSpec>>(
                         a.tala_file,
                         [&](std::istream &is) { return ReadTalas(is, vocab); });
  const TalaSpec *tala = nullptr;
  for (const auto &t : talas)
    if (t.name == a.tala) tala = &t;
  if (!tala) {
    std::string known;
    for (const auto &t : talas) known += " " + t.name;
    throw UsageError("unknown tala '" + a.tala + "'; available:" + known);
  }
  DeviationConfig dev;
  dev.p_tihai = a.p_tihai;
  dev.p_sub = a.p_sub;
  dev.forced_tihai_cycles.insert(a.tihai_cycles.begin(), a.tihai_cycles.end());
  dev.substitutions = UniformSubstitutions(vocab);
  Output out(a.out);
  for (int i = 0; i < a.count; ++i) {
    auto seq = GenerateSequence(*tala, a.cycles, dev,
                                SplitRng(a.seed, 21, i)(), vocab);
    out.os() << FormatSequence(seq, vocab) << '\n';
  }
}

struct GenLatticeArgs {
  std::string corpus;
  std::string vocab;
  std::uint64_t seed = 0;
  std::string out_dir;
  LatticeGenConfig cfg = StandardLatticeConfig();
};

void GenLattice(const GenLatticeArgs &a) {
  auto vocab = LoadVocab(a.vocab);
  auto seqs = LoadSequences(a.corpus, vocab);
  fs::create_directories(a.out_dir);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    LatticeGenConfig cfg = a.cfg;
    cfg.rng_seed = SplitRng(a.seed, 22, i)();
    auto lat = GenerateLattice(seqs[i], vocab, cfg);
    char name[32];
    std::snprintf(name, sizeof(name), "lat_%04zu.lat", i);
    auto path = (fs::path(a.out_dir) / name).string();
    Output out(path);
    WriteLattice(out.os(), lat);
    std::cout << path << '\n';
  }
}

struct TrainArgs {
  std::string corpus;
  std::string vocab;
  std::string out;
  TrainConfig cfg;
};

void Train(const TrainArgs &a) {
  auto vocab = LoadVocab(a.vocab);
  auto corpus = LoadSequences(a.corpus, vocab);
  auto model = TrainModel(corpus, vocab, a.cfg);
  Output out(a.out);
  WriteModel(out.os(), model);
}

struct RescoreArgs {
  std::vector<std::string> lattices;
  std::string model;
  std::string out = "-";
  bool baseline = false;
  std::string lambda = "adaptive";
  std::string decay_scope = "global";
  std::string beam_scope = "global";
  bool verbose = false;
  std::string diag;
  std::string dump_expanded;
  RescoreConfig cfg;
};

void WriteDiagnostics(std::ostream &os, const std::string &lattice,
                      const RescoreResult &r) {
  const auto &d = r.diagnostics;
  os << "lattice " << lattice << '\n'
     << "  score " << FormatDouble(r.best_score) << " pops " << d.pops
     << " pushes " << d.pushes << " pruned_band " << d.pruned_band
     << " pruned_capacity " << d.pruned_capacity << " max_queue "
     << d.max_queue << " states " << r.expanded.states.size() << '\n';
  os << "  k stroke C_k D_k lambda_k P_comb arc_weight\n";
  for (std::size_t k = 0; k < d.best_path.size(); ++k) {
    const auto &t = d.best_path[k];
    os << "  " << k + 1 << ' ' << t.stroke << ' ' << FormatDouble(t.confidence)
       << ' ' << FormatDouble(t.divergence) << ' ' << FormatDouble(t.lambda)
       << ' ' << FormatDouble(t.p_comb) << ' ' << FormatDouble(t.arc_weight)
       << '\n';
  }
}

int RescoreCmd(RescoreArgs a) {
  a.cfg.lambda_mode = LambdaMode::Parse(a.lambda);
  a.cfg.decay_scope =
      a.decay_scope == "row" ? DecayScope::kRow : DecayScope::kGlobal;
  a.cfg.beam_scope =
      a.beam_scope == "frontier" ? BeamScope::kFrontier : BeamScope::kGlobal;
  std::optional<TiSdrmModel> model;
  if (!a.baseline) {
    if (a.model.empty()) throw UsageError("--model is required unless --baseline");
    model = ReadFile<TiSdrmModel>(a.model,
                                  [](std::istream &is) { return ReadModel(is); });
  }
  Output out(a.out);
  std::unique_ptr<Output> diag;
  if (!a.diag.empty()) diag = std::make_unique<Output>(a.diag);
  if (!a.dump_expanded.empty()) fs::create_directories(a.dump_expanded);
  std::vector<std::string> failures;
  for (const auto &path : a.lattices) {
    try {
      auto lat = ReadFile<Lattice>(path, [&](std::istream &is) {
        return ReadLattice(is, fs::path(path).parent_path().string());
      });
      StrokeSequence best;
      if (a.baseline) {
        best = ViterbiAcoustic(lat).strokes;
      } else {
        auto r = Rescore(lat, *model, a.cfg);
        best = r.best;
        if (a.verbose) WriteDiagnostics(std::cerr, path, r);
        if (diag) WriteDiagnostics(diag->os(), path, r);
        if (!a.dump_expanded.empty()) {
          Output dump((fs::path(a.dump_expanded) /
                       (fs::path(path).stem().string() + ".expanded.lat"))
                          .string());
          WriteExpandedLattice(dump.os(), r.expanded, model->vocab);
        }
      }
      out.os() << FormatSequence(best, lat.vocab()) << '\n';
    } catch (const Error &e) {
      failures.push_back(path + ": " + e.what());
      out.os() << "# failed " << path << '\n';
    }
  }
  for (const auto &f : failures) std::cerr << "error: " << f << '\n';
  return failures.empty() ? 0 : kExitRuntime;
}

struct BenchArgs {
  BenchmarkSuiteConfig suite;
  std::string talas = "tintal,ektal,jhaptal,keherva";
  std::string out_tsv = "-";
  std::string out_table;
};

void Bench(BenchArgs a) {
  a.suite.talas.clear();
  std::stringstream ss(a.talas);
  for (std::string t; std::getline(ss, t, ',');)
    if (!t.empty()) a.suite.talas.push_back(t);
  auto vocab = DefaultVocabulary();
  auto builtins = BuiltinTalas(vocab);
  for (const auto &t : a.suite.talas) {
    bool ok = false;
    for (const auto &b : builtins) ok = ok || b.name == t;
    if (!ok) throw UsageError("unknown tala '" + t + "' in --talas");
  }
  auto report = RunBenchmark(a.suite);
  {
    Output tsv(a.out_tsv);
    WriteReportTsv(tsv.os(), report);
  }
  if (!a.out_table.empty()) {
    Output table(a.out_table);
    WriteReportTable(table.os(), report);
  }
}

struct SerArgs {
  std::string ref;
  std::string hyp;
  std::string vocab;
};

void SerCmd(const SerArgs &a) {
  auto vocab = LoadVocab(a.vocab);
  auto refs = LoadSequences(a.ref, vocab);
  auto hyps = ReadFile<std::vector<std::string>>(a.hyp, [](std::istream &is) {
    std::vector<std::string> lines;
    for (std::string l; std::getline(is, l);) lines.push_back(l);
    while (!lines.empty() && SplitWhitespace(lines.back()).empty())
      lines.pop_back();
    return lines;
  });
  Require(refs.size() == hyps.size(), ErrorKind::kInvalidArgument,
          "reference and hypothesis files hold different numbers of lines");
  EditStats pooled;
  std::cout << "line\tS\tD\tI\tN\tSER\n";
  for (std::size_t i = 0; i < refs.size(); ++i) {
    StrokeSequence hyp;
    for (const auto &tok : SplitWhitespace(hyps[i]))
      if (tok[0] != '#') hyp.strokes.push_back(vocab.Id(tok));
    auto st = Ser(refs[i], hyp);
    pooled += st;
    std::cout << i + 1 << '\t' << st.substitutions << '\t' << st.deletions
              << '\t' << st.insertions << '\t' << st.ref_length << '\t'
              << FormatDouble(st.Ser()) << '\n';
  }
  std::cout << "pooled\t" << pooled.substitutions << '\t' << pooled.deletions
            << '\t' << pooled.insertions << '\t' << pooled.ref_length << '\t'
            << FormatDouble(pooled.Ser()) << '\n';
}

// Long options are registered with both dashed and underscored spellings so
// config files can use the RescoreConfig field names.
std::string Names(const std::string &dashed) {
  std::string under = dashed;
  for (auto &c : under)
    if (c == '-') c = '_';
  return dashed == under ? "--" + dashed : "--" + dashed + ",--" + under;
}

void AddRescoreFlags(CLI::App *cmd, RescoreConfig &cfg, std::string *lambda,
                     std::string &decay_scope, std::string &beam_scope) {
  cmd->add_option(Names("beta"), cfg.beta, "rhythmic fusion strength")
      ->capture_default_str();
  cmd->add_option(Names("rho"), cfg.rho, "Dirichlet forgetting rate")
      ->capture_default_str();
  cmd->add_option(Names("w-dyn"), cfg.w_dyn,
                  "dynamic-model memory in strokes (pairs with --rho)")
      ->capture_default_str();
  cmd->add_option(Names("w-tau"), cfg.w_tau, "tala posterior window")
      ->capture_default_str();
  cmd->add_option(Names("k-beam"), cfg.k_beam, "beam capacity")
      ->capture_default_str();
  cmd->add_option(Names("delta-beam"), cfg.delta_beam, "beam score band")
      ->capture_default_str();
  cmd->add_option(Names("eps-jsd"), cfg.eps_jsd, "JSD smoothing constant")
      ->capture_default_str();
  if (lambda)
    cmd->add_option("--lambda,--lambda_mode", *lambda, "adaptive | fixed:<v>")
        ->capture_default_str();
  cmd->add_option(Names("decay-scope"), decay_scope, "global | row")
      ->check(CLI::IsMember({"global", "row"}))
      ->capture_default_str();
  cmd->add_option(Names("beam-scope"), beam_scope, "global | frontier")
      ->check(CLI::IsMember({"global", "frontier"}))
      ->capture_default_str();
}

// Rewrites `--config FILE` into `--key=value` tokens placed ahead of the
// remaining arguments of the subcommand, so explicit flags take precedence.
// Lines are `key = value`; blank lines and `#` comments are skipped.
std::vector<std::string> ExpandConfig(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string file;
    std::size_t span = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      span = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      span = 1;
    } else {
      continue;
    }
    std::ifstream in(file);
    if (!in) throw UsageError("cannot open config file '" + file + "'");
    std::vector<std::string> expanded;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto toks = SplitWhitespace(line);
      if (toks.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw UsageError(file + ":" + std::to_string(lineno) +
                         ": expected key = value");
      auto key = SplitWhitespace(line.substr(0, eq));
      auto value = SplitWhitespace(line.substr(eq + 1));
      if (key.size() != 1 || value.size() != 1)
        throw UsageError(file + ":" + std::to_string(lineno) +
                         ": expected key = value");
      std::string v = value[0];
      if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') &&
          v.back() == v.front())
        v = v.substr(1, v.size() - 2);
      expanded.push_back("--" + key[0] + "=" + v);
    }
    args.erase(args.begin() + i, args.begin() + i + span);
    // Insert right after the subcommand name.
    std::size_t at = 1;
    while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;
    at = std::min(at + 1, args.size());
    args.insert(args.begin() + at, expanded.begin(), expanded.end());
    break;
  }
  return args;
}

int Main(int argc, char **argv) {
  CLI::App app{"Rhythm-aware rescoring of tabla stroke lattices"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GenCorpusArgs gc;
  auto *gen_corpus = app.add_subcommand("gen-corpus", "generate tala sequences");
  gen_corpus->add_option("--tala", gc.tala, "tala name")->required();
  gen_corpus->add_option(Names("tala-file"), gc.tala_file,
                         "tala spec file (default: builtin talas)");
  gen_corpus->add_option("--vocab", gc.vocab, "vocabulary file");
  gen_corpus->add_option("--cycles", gc.cycles)->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_corpus->add_option("--count", gc.count, "number of sequences")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gen_corpus->add_option("--seed", gc.seed)->required();
  gen_corpus->add_option(Names("p-tihai"), gc.p_tihai)->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  gen_corpus->add_option(Names("p-sub"), gc.p_sub)->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  gen_corpus->add_option(Names("tihai-cycles"), gc.tihai_cycles,
                         "1-based cycles that always get a tihai")
      ->take_all();
  gen_corpus->add_option("--out", gc.out)->capture_default_str();

  GenLatticeArgs gl;
  auto *gen_lattice =
      app.add_subcommand("gen-lattice", "build synthetic lattices for sequences");
  gen_lattice->add_option("--corpus", gl.corpus)->required()
      ->check(CLI::ExistingFile);
  gen_lattice->add_option("--vocab", gl.vocab);
  gen_lattice->add_option("--seed", gl.seed)->required();
  gen_lattice->add_option(Names("out-dir"), gl.out_dir)->required();
  gen_lattice->add_option("--branching", gl.cfg.branching)->capture_default_str();
  gen_lattice->add_option(Names("noise-sigma"), gl.cfg.noise_sigma)
      ->capture_default_str();
  gen_lattice->add_option("--margin", gl.cfg.margin)->capture_default_str();
  gen_lattice->add_option(Names("p-del"), gl.cfg.p_del)->capture_default_str();
  gen_lattice->add_option(Names("p-ins"), gl.cfg.p_ins)->capture_default_str();

  TrainArgs tr;
  auto *train = app.add_subcommand("train", "train a model from a labelled corpus");
  train->add_option("--corpus", tr.corpus)->required()->check(CLI::ExistingFile);
  train->add_option("--vocab", tr.vocab);
  train->add_option("--out", tr.out)->required();
  train->add_option("--order", tr.cfg.order, "n-gram order")->capture_default_str();
  train->add_option(Names("laplace-k"), tr.cfg.laplace_k)->capture_default_str();
  train->add_option(Names("w-tau"), tr.cfg.w_tau)->capture_default_str();
  train->add_option(Names("tau-laplace-k"), tr.cfg.tau_laplace_k)
      ->capture_default_str();
  train->add_option(Names("eps-dir"), tr.cfg.eps_dir)->capture_default_str();

  RescoreArgs rs;
  auto *rescore = app.add_subcommand("rescore", "rescore lattices");
  rescore->add_option("lattices", rs.lattices, "lattice files")->required()
      ->take_all()
      ->check(CLI::ExistingFile);
  rescore->add_option("--model", rs.model, "trained model file");
  rescore->add_option("--out", rs.out, "1-best output, one line per lattice")
      ->capture_default_str();
  rescore->add_flag("--baseline", rs.baseline, "acoustic-only Viterbi");
  rescore->add_flag("--verbose,-v", rs.verbose, "diagnostics to stderr");
  rescore->add_option("--diag", rs.diag, "diagnostics file");
  rescore->add_option(Names("dump-expanded"), rs.dump_expanded,
                      "directory for expanded-lattice dumps");
  AddRescoreFlags(rescore, rs.cfg, &rs.lambda, rs.decay_scope, rs.beam_scope);
  rescore->add_option("--config",
                      "key=value config file; flags override");

  BenchArgs bn;
  auto *bench = app.add_subcommand("bench", "run the synthetic benchmark sweep");
  auto &s = bn.suite;
  bench->add_option("--seed", s.seed)->capture_default_str();
  bench->add_option("--talas", bn.talas, "comma-separated builtin talas")
      ->capture_default_str();
  bench->add_option(Names("train-per-tala"), s.train_per_tala)
      ->capture_default_str();
  bench->add_option(Names("test-per-tala"), s.test_per_tala)
      ->capture_default_str();
  bench->add_option("--cycles", s.cycles)->capture_default_str();
  bench->add_option(Names("p-tihai"), s.p_tihai)->capture_default_str();
  bench->add_option(Names("p-sub"), s.p_sub)->capture_default_str();
  bench->add_option("--branching", s.lattice.branching)->capture_default_str();
  bench->add_option(Names("noise-sigma"), s.lattice.noise_sigma)
      ->capture_default_str();
  bench->add_option("--margin", s.lattice.margin)->capture_default_str();
  bench->add_option(Names("p-del"), s.lattice.p_del)->capture_default_str();
  bench->add_option(Names("p-ins"), s.lattice.p_ins)->capture_default_str();
  bench->add_option("--order", s.train.order)->capture_default_str();
  bench->add_option(Names("eps-dir"), s.train.eps_dir)->capture_default_str();
  std::string bench_decay = "global", bench_beam = "global";
  AddRescoreFlags(bench, s.rescore, nullptr, bench_decay, bench_beam);
  bench->add_option("--config",
                    "key=value config file; flags override");
  bench->add_flag(Names("data-efficiency"), s.data_efficiency,
                  "add small/medium/large training-size datasets");
  bench->add_option(Names("out-tsv"), bn.out_tsv)->capture_default_str();
  bench->add_option(Names("out-table"), bn.out_table);

  SerArgs sa;
  auto *ser = app.add_subcommand("ser", "stroke error rate of hypotheses");
  ser->add_option("--ref", sa.ref)->required()->check(CLI::ExistingFile);
  ser->add_option("--hyp", sa.hyp)->required()->check(CLI::ExistingFile);
  ser->add_option("--vocab", sa.vocab);

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = ExpandConfig(std::move(args));
    std::vector<char *> ptrs;
    for (auto &a : args) ptrs.push_back(a.data());
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen_corpus) GenCorpus(gc);
    if (*gen_lattice) GenLattice(gl);
    if (*train) Train(tr);
    if (*rescore) return RescoreCmd(rs);
    if (*bench) {
      bn.suite.rescore.decay_scope =
          bench_decay == "row" ? DecayScope::kRow : DecayScope::kGlobal;
      bn.suite.rescore.beam_scope =
          bench_beam == "frontier" ? BeamScope::kFrontier : BeamScope::kGlobal;
      Bench(bn);
    }
    if (*ser) SerCmd(sa);
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) { return Main(argc, argv); }
