// tisdrm/common.h

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

#ifndef TISDRM_COMMON_H_
#define TISDRM_COMMON_H_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace tisdrm {

/// Natural log of 2; the upper bound of the Jensen-Shannon divergence in nats.
inline constexpr double kLog2 = std::numbers::ln2;

/// A probability distribution over the playable strokes, indexed by
/// StrokeVocabulary::index().
using Distribution = std::vector<double>;

enum class ErrorKind {
  kInvalidArgument,
  kParse,
  kIo,
  kMalformedLattice,
  kOverflow,
  kVocabularyMismatch,
  kNoTerminal,
};

/// All library failures are reported through this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

inline void Require(bool cond, ErrorKind kind, const std::string &what) {
  if (!cond) Fail(kind, what);
}

/// Shortest decimal representation that parses back to the identical double.
inline std::string FormatDouble(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline double ParseDouble(std::string_view text) {
  double value = 0.0;
  const char *first = text.data();
  const char *last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    Fail(ErrorKind::kParse, "not a number: '" + std::string(text) + "'");
  return value;
}

template <class Int>
Int ParseInt(std::string_view text) {
  Int value{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    Fail(ErrorKind::kParse, "not an integer: '" + std::string(text) + "'");
  return value;
}

inline std::vector<std::string> SplitWhitespace(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream is{std::string(line)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

/// Independent generator for stream `stream` of sequence `index` under a root
/// seed. Every random draw in the library goes through this split.
inline std::mt19937_64 SplitRng(std::uint64_t root, std::uint64_t stream,
                                std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(root),
                    static_cast<std::uint32_t>(root >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform double in [0, 1) built from raw generator bits, so streams are
/// reproducible independently of the standard library's distributions.
inline double Uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal draw (Box-Muller).
inline double StandardNormal(std::mt19937_64 &rng) {
  double u1 = Uniform01(rng);
  double u2 = Uniform01(rng);
  if (u1 <= 0.0) u1 = std::numeric_limits<double>::min();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

inline std::size_t UniformIndex(std::mt19937_64 &rng, std::size_t n) {
  return static_cast<std::size_t>(Uniform01(rng) * static_cast<double>(n)) %
         n;
}

}  // namespace tisdrm

#endif  // TISDRM_COMMON_H_
