// tisdrm/fusion.h

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

// Adaptive static/dynamic interpolation. All logs are natural.

#ifndef TISDRM_FUSION_H_
#define TISDRM_FUSION_H_

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tisdrm/common.h"

namespace tisdrm {

/// Interpolation weight policy: computed per stroke, or pinned.
struct LambdaMode {
  std::optional<double> fixed;  // unset means adaptive

  static LambdaMode Adaptive() { return {}; }
  static LambdaMode Fixed(double v) {
    Require(v >= 0.0 && v <= 1.0, ErrorKind::kInvalidArgument,
            "fixed lambda must lie in [0, 1]");
    return {v};
  }
  bool adaptive() const { return !fixed.has_value(); }

  /// "adaptive" or "fixed:<v>".
  static LambdaMode Parse(const std::string &text) {
    if (text == "adaptive") return Adaptive();
    if (text.rfind("fixed:", 0) == 0) return Fixed(ParseDouble(text.substr(6)));
    Fail(ErrorKind::kInvalidArgument,
         "lambda mode must be 'adaptive' or 'fixed:<v>', got '" + text + "'");
  }
  std::string ToString() const {
    return fixed ? "fixed:" + FormatDouble(*fixed) : "adaptive";
  }
  bool operator==(const LambdaMode &) const = default;
};

struct FusionConfig {
  double beta = 0.5;
  double eps_jsd = 1e-8;
  LambdaMode lambda_mode;
};

/// Jensen-Shannon divergence in nats, after smoothing both inputs by eps
/// and renormalising by (1 + |S| eps). Symmetric by construction: the two
/// KL terms are evaluated with identical code and summed in an order that
/// does not depend on argument position.
inline double Jsd(std::span<const double> p, std::span<const double> q,
                  double eps) {
  Require(p.size() == q.size() && !p.empty(), ErrorKind::kInvalidArgument,
          "JSD support mismatch");
  Require(eps > 0.0, ErrorKind::kInvalidArgument, "JSD eps must be positive");
  const double norm = 1.0 + static_cast<double>(p.size()) * eps;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = (p[i] + eps) / norm;
    const double b = (q[i] + eps) / norm;
    const double m = 0.5 * (a + b);
    // a*log(a/m) + b*log(b/m) is symmetric in (a, b) under IEEE addition.
    total += 0.5 * (a * std::log(a / m) + b * std::log(b / m));
  }
  return std::clamp(total, 0.0, kLog2);
}

/// 1 - H(softmax(scores)) / log(max(|scores|, 2)).
inline double AcousticConfidence(std::span<const double> arc_scores) {
  Require(!arc_scores.empty(), ErrorKind::kInvalidArgument,
          "acoustic confidence needs at least one outgoing arc");
  const auto [lo, hi] = std::minmax_element(arc_scores.begin(), arc_scores.end());
  if (*lo == *hi) return arc_scores.size() == 1 ? 1.0 : 0.0;
  const double mx = *hi;
  double z = 0.0;
  for (double s : arc_scores) z += std::exp(s - mx);
  double h = 0.0;
  for (double s : arc_scores) {
    double p = std::exp(s - mx) / z;
    if (p > 0.0) h -= p * std::log(p);
  }
  const double denom =
      std::log(static_cast<double>(std::max<std::size_t>(arc_scores.size(), 2)));
  return std::clamp(1.0 - h / denom, 0.0, 1.0);
}

/// lambda = c * d / log 2.
inline double LambdaK(double confidence, double divergence) {
  return std::clamp(confidence * divergence / kLog2, 0.0, 1.0);
}

/// (1 - lambda) p_static + lambda p_dyn. Cells where both inputs agree are
/// copied through, and every cell is clamped between its two inputs.
inline Distribution Combine(std::span<const double> p_static,
                            std::span<const double> p_dyn, double lambda) {
  Require(p_static.size() == p_dyn.size(), ErrorKind::kInvalidArgument,
          "combine support mismatch");
  Require(lambda >= 0.0 && lambda <= 1.0, ErrorKind::kInvalidArgument,
          "lambda must lie in [0, 1]");
  Distribution out(p_static.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = p_static[i], b = p_dyn[i];
    if (a == b) {
      out[i] = a;
      continue;
    }
    out[i] = std::clamp((1.0 - lambda) * a + lambda * b, std::min(a, b),
                        std::max(a, b));
  }
  return out;
}

/// sum_k log p_k.
inline double SequenceLogScore(std::span<const double> per_stroke_probs) {
  double s = 0.0;
  for (double p : per_stroke_probs) {
    Require(p > 0.0, ErrorKind::kInvalidArgument,
            "sequence score needs strictly positive probabilities");
    s += std::log(p);
  }
  return s;
}

}  // namespace tisdrm

#endif  // TISDRM_FUSION_H_
