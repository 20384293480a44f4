// tisdrm/core.h

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

// Stroke vocabulary, stroke sequences, tala specifications and the symbolic
// corpus generator (theka cycles with tihai and substitution deviations).

#ifndef TISDRM_CORE_H_
#define TISDRM_CORE_H_

#include <algorithm>
#include <compare>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "tisdrm/common.h"

namespace tisdrm {

/// Interned stroke symbol. Id 0 is always the start sentinel "<s>"; playable
/// strokes occupy 1..|S|.
struct StrokeId {
  std::uint32_t value = 0;

  constexpr StrokeId() = default;
  constexpr explicit StrokeId(std::uint32_t v) : value(v) {}
  static constexpr StrokeId Start() { return StrokeId(0); }
  constexpr bool is_start() const { return value == 0; }
  friend constexpr auto operator<=>(StrokeId, StrokeId) = default;
};

inline constexpr std::string_view kStartSymbol = "<s>";

class StrokeVocabulary {
 public:
  StrokeVocabulary() : names_{std::string(kStartSymbol)} {
    ids_.emplace(names_[0], StrokeId::Start());
  }

  explicit StrokeVocabulary(const std::vector<std::string> &symbols)
      : StrokeVocabulary() {
    for (const auto &s : symbols) Add(s);
  }

  /// Adds a playable symbol, returning its id. Re-adding an existing symbol
  /// is an error so that ids stay dense and unique.
  StrokeId Add(const std::string &symbol) {
    Require(!symbol.empty(), ErrorKind::kInvalidArgument,
            "empty stroke symbol");
    Require(symbol.find_first_of(" \t\r\n") == std::string::npos,
            ErrorKind::kInvalidArgument,
            "stroke symbol contains whitespace: '" + symbol + "'");
    Require(symbol != kStartSymbol, ErrorKind::kInvalidArgument,
            "'<s>' is reserved for the start sentinel");
    Require(!ids_.count(symbol), ErrorKind::kInvalidArgument,
            "duplicate stroke symbol '" + symbol + "'");
    StrokeId id(static_cast<std::uint32_t>(names_.size()));
    names_.push_back(symbol);
    ids_.emplace(symbol, id);
    return id;
  }

  /// Number of playable strokes |S| (sentinel excluded).
  std::size_t size() const { return names_.size() - 1; }

  bool Contains(StrokeId id) const { return id.value < names_.size(); }
  bool IsPlayable(StrokeId id) const {
    return !id.is_start() && Contains(id);
  }

  std::optional<StrokeId> Find(std::string_view symbol) const {
    auto it = ids_.find(std::string(symbol));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  StrokeId Id(std::string_view symbol) const {
    auto id = Find(symbol);
    if (!id)
      Fail(ErrorKind::kVocabularyMismatch,
           "unknown stroke symbol '" + std::string(symbol) + "'");
    return *id;
  }

  const std::string &Name(StrokeId id) const {
    Require(Contains(id), ErrorKind::kVocabularyMismatch,
            "stroke id " + std::to_string(id.value) + " out of range");
    return names_[id.value];
  }

  /// Position of a playable stroke inside a Distribution.
  static std::size_t Index(StrokeId id) { return id.value - 1; }
  static StrokeId FromIndex(std::size_t i) {
    return StrokeId(static_cast<std::uint32_t>(i + 1));
  }

  /// Playable symbols in id order.
  std::vector<std::string> Symbols() const {
    return {names_.begin() + 1, names_.end()};
  }

  bool operator==(const StrokeVocabulary &other) const {
    return names_ == other.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, StrokeId> ids_;
};

/// Strokes appearing in the canonical Tintal material plus the symbols used
/// by the stand-in thekas of builtin_talas().
inline StrokeVocabulary DefaultVocabulary() {
  return StrokeVocabulary({"Dha", "Dhin", "Tin", "Na", "Ta", "Dhi", "Ge",
                           "Ka", "Ti", "Tu", "Kat", "Dhage", "Tirakita"});
}

struct StrokeSequence {
  std::vector<StrokeId> strokes;
  std::optional<std::string> tala_label;

  std::size_t size() const { return strokes.size(); }
  bool operator==(const StrokeSequence &) const = default;
};

inline StrokeSequence MakeSequence(const StrokeVocabulary &vocab,
                                   const std::vector<std::string> &symbols,
                                   std::optional<std::string> label = {}) {
  StrokeSequence seq;
  seq.tala_label = std::move(label);
  for (const auto &s : symbols) seq.strokes.push_back(vocab.Id(s));
  return seq;
}

inline void ValidateSequence(const StrokeVocabulary &vocab,
                             const StrokeSequence &seq) {
  Require(!seq.strokes.empty(), ErrorKind::kInvalidArgument,
          "stroke sequence is empty");
  for (StrokeId id : seq.strokes)
    Require(vocab.IsPlayable(id), ErrorKind::kVocabularyMismatch,
            "sequence contains non-playable stroke id " +
                std::to_string(id.value));
}

struct TalaSpec {
  std::string name;
  int matras = 0;
  /// 1-based beat indices where each vibhag starts.
  std::vector<int> vibhag_boundaries;
  StrokeSequence theka;
  /// False for the stand-in thekas that only fix the cycle length.
  bool canonical = false;
};

inline void ValidateTala(const StrokeVocabulary &vocab, const TalaSpec &tala) {
  Require(!tala.name.empty(), ErrorKind::kInvalidArgument, "tala has no name");
  Require(tala.matras > 0, ErrorKind::kInvalidArgument,
          "tala '" + tala.name + "' must have a positive cycle length");
  Require(tala.theka.size() == static_cast<std::size_t>(tala.matras),
          ErrorKind::kInvalidArgument,
          "tala '" + tala.name + "': theka length " +
              std::to_string(tala.theka.size()) + " != matras " +
              std::to_string(tala.matras));
  int prev = 0;
  for (int b : tala.vibhag_boundaries) {
    Require(b > prev && b <= tala.matras, ErrorKind::kInvalidArgument,
            "tala '" + tala.name +
                "': vibhag boundaries must be strictly increasing in [1, "
                "matras]");
    prev = b;
  }
  ValidateSequence(vocab, tala.theka);
}

/// Builtin talas. Only Tintal carries its canonical theka; the others are
/// stand-ins with the correct cycle length and vibhag layout (canonical ==
/// false) and should not be read as musicological references.
inline std::vector<TalaSpec> BuiltinTalas(const StrokeVocabulary &vocab) {
  auto make = [&](std::string name, std::vector<int> vibhag,
                  std::vector<std::string> theka, bool canonical) {
    TalaSpec t;
    t.name = std::move(name);
    t.matras = static_cast<int>(theka.size());
    t.vibhag_boundaries = std::move(vibhag);
    t.theka = MakeSequence(vocab, theka, t.name);
    t.canonical = canonical;
    ValidateTala(vocab, t);
    return t;
  };
  return {
      make("tintal", {1, 5, 9, 13},
           {"Dha", "Dhin", "Dhin", "Dha", "Dha", "Dhin", "Dhin", "Dha", "Na",
            "Tin", "Tin", "Na", "Dha", "Tin", "Tin", "Na"},
           true),
      make("ektal", {1, 3, 5, 7, 9, 11},
           {"Dhin", "Dhin", "Dhage", "Tirakita", "Tu", "Na", "Kat", "Ta",
            "Dhage", "Tirakita", "Dhi", "Na"},
           false),
      make("jhaptal", {1, 3, 6, 8},
           {"Dhi", "Na", "Dhi", "Dhi", "Na", "Ti", "Na", "Dhi", "Dhi", "Na"},
           false),
      make("keherva", {1, 5}, {"Dha", "Ge", "Na", "Ti", "Na", "Ka", "Dhi", "Na"},
           false),
      make("rupak", {1, 4, 6}, {"Tin", "Tin", "Na", "Dhi", "Na", "Dhi", "Na"},
           false),
      make("dadra", {1, 4}, {"Dha", "Dhi", "Na", "Dha", "Ti", "Na"}, false),
  };
}

inline const TalaSpec &FindTala(const std::vector<TalaSpec> &talas,
                                std::string_view name) {
  for (const auto &t : talas)
    if (t.name == name) return t;
  std::string known;
  for (const auto &t : talas) known += (known.empty() ? "" : ", ") + t.name;
  Fail(ErrorKind::kInvalidArgument,
       "unknown tala '" + std::string(name) + "' (known: " + known + ")");
}
const TalaSpec &FindTala(std::vector<TalaSpec> &&, std::string_view) = delete;

/// A cadential phrase played `repetitions` times with connectors in between.
struct TihaiSpec {
  StrokeSequence phrase;
  StrokeSequence connector;
  int repetitions = 3;

  std::size_t Span() const {
    return repetitions * phrase.size() + (repetitions - 1) * connector.size();
  }

  /// phrase (connector phrase)^(repetitions-1)
  std::vector<StrokeId> Expand() const {
    std::vector<StrokeId> out;
    for (int r = 0; r < repetitions; ++r) {
      if (r > 0)
        out.insert(out.end(), connector.strokes.begin(),
                   connector.strokes.end());
      out.insert(out.end(), phrase.strokes.begin(), phrase.strokes.end());
    }
    return out;
  }
};

/// The worked tihai: "Dha Tin Tin Na" x3 joined by "Na Na" (4+2+4+2+4).
inline TihaiSpec DefaultTihai(const StrokeVocabulary &vocab) {
  TihaiSpec t;
  t.phrase = MakeSequence(vocab, {"Dha", "Tin", "Tin", "Na"});
  t.connector = MakeSequence(vocab, {"Na", "Na"});
  t.repetitions = 3;
  return t;
}

struct DeviationConfig {
  double p_tihai = 0.0;
  double p_sub = 0.0;
  /// 1-based cycle indices that always receive a tihai.
  std::set<int> forced_tihai_cycles;
  std::optional<TihaiSpec> tihai;  // DefaultTihai() when unset
  /// Candidate replacements per stroke; strokes without an entry are never
  /// substituted.
  std::map<StrokeId, std::vector<StrokeId>> substitutions;
};

/// Substitution table that maps every playable stroke to all other strokes.
inline std::map<StrokeId, std::vector<StrokeId>> UniformSubstitutions(
    const StrokeVocabulary &vocab) {
  std::map<StrokeId, std::vector<StrokeId>> table;
  for (std::size_t i = 0; i < vocab.size(); ++i)
    for (std::size_t j = 0; j < vocab.size(); ++j)
      if (i != j)
        table[StrokeVocabulary::FromIndex(i)].push_back(
            StrokeVocabulary::FromIndex(j));
  return table;
}

/// Generates `cycles` cycles of the tala's theka.
///
/// A tihai is laid out so that its final phrase starts on the next sam: the
/// cycle tail hosts everything up to the last repetition, and the last phrase
/// overwrites the opening beats of the following cycle. When the tihai lands
/// in the last generated cycle, the resolving phrase falls outside the
/// sequence and is dropped, so the length is always cycles * matras.
/// Substitutions are applied after tihai placement.
inline StrokeSequence GenerateSequence(const TalaSpec &tala, int cycles,
                                       const DeviationConfig &dev,
                                       std::uint64_t seed,
                                       const StrokeVocabulary &vocab) {
  ValidateTala(vocab, tala);
  Require(cycles >= 1, ErrorKind::kInvalidArgument, "cycles must be >= 1");
  Require(dev.p_tihai >= 0.0 && dev.p_tihai <= 1.0 && dev.p_sub >= 0.0 &&
              dev.p_sub <= 1.0,
          ErrorKind::kInvalidArgument, "deviation probabilities must be in [0,1]");
  const std::size_t m = tala.matras;
  const bool wants_tihai = dev.p_tihai > 0.0 || !dev.forced_tihai_cycles.empty();
  TihaiSpec tihai = dev.tihai ? *dev.tihai : DefaultTihai(vocab);
  std::vector<StrokeId> expansion;
  std::size_t tail = 0;
  if (wants_tihai) {
    Require(tihai.repetitions >= 1 && !tihai.phrase.strokes.empty(),
            ErrorKind::kInvalidArgument, "tihai needs a non-empty phrase");
    Require(tihai.Span() <= m, ErrorKind::kInvalidArgument,
            "tala '" + tala.name + "' (" + std::to_string(m) +
                " matras) cannot host the tihai layout: required minimum "
                "span is " +
                std::to_string(tihai.Span()) + " matras");
    expansion = tihai.Expand();
    tail = expansion.size() - tihai.phrase.size();
  }

  std::vector<StrokeId> out;
  out.reserve(cycles * m);
  for (int c = 0; c < cycles; ++c)
    out.insert(out.end(), tala.theka.strokes.begin(), tala.theka.strokes.end());

  auto rng = SplitRng(seed, /*stream=*/1);
  if (wants_tihai) {
    for (int c = 1; c <= cycles; ++c) {
      bool apply = dev.forced_tihai_cycles.count(c) > 0;
      if (dev.p_tihai > 0.0 && Uniform01(rng) < dev.p_tihai) apply = true;
      if (!apply) continue;
      std::size_t begin = c * m - tail;
      for (std::size_t i = 0; i < expansion.size() && begin + i < out.size();
           ++i)
        out[begin + i] = expansion[i];
    }
  }
  if (dev.p_sub > 0.0) {
    for (auto &s : out) {
      double u = Uniform01(rng);
      auto it = dev.substitutions.find(s);
      if (u < dev.p_sub && it != dev.substitutions.end() &&
          !it->second.empty())
        s = it->second[UniformIndex(rng, it->second.size())];
    }
  }
  return StrokeSequence{std::move(out), tala.name};
}

// ---------------------------------------------------------------------------
// Text formats.

inline StrokeVocabulary ReadVocabulary(std::istream &is) {
  StrokeVocabulary vocab;
  std::string line;
  while (std::getline(is, line)) {
    auto toks = SplitWhitespace(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    Require(toks.size() == 1, ErrorKind::kParse,
            "vocabulary lines hold exactly one symbol: '" + line + "'");
    vocab.Add(toks[0]);
  }
  return vocab;
}

inline void WriteVocabulary(std::ostream &os, const StrokeVocabulary &vocab) {
  for (const auto &s : vocab.Symbols()) os << s << '\n';
}

/// `tala <name> <matras>` / `vibhag <b1> ...` / `theka <s1> ...` blocks.
inline std::vector<TalaSpec> ReadTalas(std::istream &is,
                                       const StrokeVocabulary &vocab) {
  std::vector<TalaSpec> talas;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto toks = SplitWhitespace(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    const std::string where = "tala file line " + std::to_string(lineno);
    if (toks[0] == "tala") {
      Require(toks.size() == 3, ErrorKind::kParse,
              where + ": expected 'tala <name> <matras>'");
      TalaSpec t;
      t.name = toks[1];
      t.matras = ParseInt<int>(toks[2]);
      t.theka.tala_label = t.name;
      talas.push_back(std::move(t));
      continue;
    }
    Require(!talas.empty(), ErrorKind::kParse,
            where + ": '" + toks[0] + "' before any 'tala' line");
    TalaSpec &t = talas.back();
    if (toks[0] == "vibhag") {
      for (std::size_t i = 1; i < toks.size(); ++i)
        t.vibhag_boundaries.push_back(ParseInt<int>(toks[i]));
    } else if (toks[0] == "theka") {
      for (std::size_t i = 1; i < toks.size(); ++i)
        t.theka.strokes.push_back(vocab.Id(toks[i]));
    } else {
      Fail(ErrorKind::kParse, where + ": unknown keyword '" + toks[0] + "'");
    }
  }
  for (const auto &t : talas) ValidateTala(vocab, t);
  return talas;
}

inline void WriteTalas(std::ostream &os, const std::vector<TalaSpec> &talas,
                       const StrokeVocabulary &vocab) {
  for (const auto &t : talas) {
    os << "tala " << t.name << ' ' << t.matras << '\n' << "vibhag";
    for (int b : t.vibhag_boundaries) os << ' ' << b;
    os << '\n' << "theka";
    for (StrokeId s : t.theka.strokes) os << ' ' << vocab.Name(s);
    os << '\n';
  }
}

/// One sequence per line, optionally led by `#tala=<name>`.
inline std::vector<StrokeSequence> ReadSequences(
    std::istream &is, const StrokeVocabulary &vocab) {
  std::vector<StrokeSequence> seqs;
  std::string line;
  while (std::getline(is, line)) {
    auto toks = SplitWhitespace(line);
    if (toks.empty()) continue;
    StrokeSequence seq;
    std::size_t i = 0;
    if (toks[0].rfind("#tala=", 0) == 0) {
      seq.tala_label = toks[0].substr(6);
      Require(!seq.tala_label->empty(), ErrorKind::kParse,
              "empty tala label in '" + line + "'");
      i = 1;
    } else if (toks[0][0] == '#') {
      continue;
    }
    for (; i < toks.size(); ++i) seq.strokes.push_back(vocab.Id(toks[i]));
    ValidateSequence(vocab, seq);
    seqs.push_back(std::move(seq));
  }
  return seqs;
}

inline std::string FormatSequence(const StrokeSequence &seq,
                                  const StrokeVocabulary &vocab) {
  std::string out;
  if (seq.tala_label) out = "#tala=" + *seq.tala_label;
  for (StrokeId s : seq.strokes) {
    if (!out.empty()) out += ' ';
    out += vocab.Name(s);
  }
  return out;
}

inline void WriteSequences(std::ostream &os,
                           const std::vector<StrokeSequence> &seqs,
                           const StrokeVocabulary &vocab) {
  for (const auto &s : seqs) os << FormatSequence(s, vocab) << '\n';
}

template <class T, class Reader>
T ReadFile(const std::string &path, Reader reader) {
  std::ifstream is(path);
  if (!is) Fail(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  return reader(is);
}

}  // namespace tisdrm

#endif  // TISDRM_CORE_H_
