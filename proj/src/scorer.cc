// Copyright 2026 The vpcr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vpcr/scorer.h"

#include <algorithm>
#include <stdexcept>

namespace vpcr {

double GroundingProbability(std::span<const double> b) {
  if (b.empty()) throw std::invalid_argument("alignment row has no null column");
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < b.size(); ++k) best = k == 0 ? b[k] : std::max(best, b[k]);
  return best;
}

double JointGroundingProbability(std::span<const double> b_i, std::span<const double> b_j) {
  if (b_i.size() != b_j.size() || b_i.empty()) {
    throw std::invalid_argument("alignment rows over different label sets");
  }
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < b_i.size(); ++k) {
    const double p = b_i[k] * b_j[k];
    best = k == 0 ? p : std::max(best, p);
  }
  return best;
}

double CombinedScore(double contextual, double visual, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda_vis must lie in [0, 1]");
  }
  return (1.0 - lambda) * contextual + lambda * visual;
}

int GroundingArgmax(std::span<const double> b) {
  if (b.size() < 2) return static_cast<int>(b.size()) - 1;
  int best = 0;
  for (std::size_t k = 1; k + 1 < b.size(); ++k) {
    if (b[k] > b[best]) best = static_cast<int>(k);
  }
  return best;
}

Var ContextualScore(Graph &g, const ModelParameters &m, Var e_p, Var e_n) {
  if (g.value(e_p).size() != g.value(e_n).size()) {
    throw std::invalid_argument("ContextualScore: representation dimensions differ");
  }
  return ApplyFeedForward(g, m.contextual_scorer, g.Concat({e_p, e_n, g.Mul(e_p, e_n)}));
}

AlignmentVars AlignmentDistribution(Graph &g, const ModelParameters &m,
                                    const std::vector<Var> &mentions,
                                    const std::vector<Var> &labels) {
  if (labels.empty()) throw std::invalid_argument("AlignmentDistribution: missing null label");
  const int K = static_cast<int>(labels.size()) - 1;
  std::vector<Var> projected_labels;
  for (Var c : labels) projected_labels.push_back(g.Affine(*m.projection, m.projection_bias, c));
  AlignmentVars out;
  for (Var n : mentions) {
    Var pn = g.Affine(*m.projection, m.projection_bias, n);
    std::vector<Var> row;
    for (Var pc : projected_labels) row.push_back(ApplyFeedForward(g, m.alignment_scorer, g.Mul(pn, pc)));
    Var logits = g.Stack(row);
    Var b = g.Softmax(logits);
    out.logits.push_back(logits);
    out.distribution.push_back(b);
    out.grounding.push_back(GroundingProbability(g, b, K));
  }
  return out;
}

AlignmentResult ToAlignmentResult(const Graph &g, const AlignmentVars &vars) {
  AlignmentResult r;
  const auto n = static_cast<Eigen::Index>(vars.logits.size());
  const Eigen::Index cols = n > 0 ? g.value(vars.logits[0]).size() : 0;
  r.logits.resize(n, cols);
  r.distribution.resize(n, cols);
  r.grounding.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r.logits.row(i) = g.value(vars.logits[i]).transpose();
    r.distribution.row(i) = g.value(vars.distribution[i]).transpose();
    r.grounding(i) = g.scalar(vars.grounding[i]);
  }
  return r;
}

Var GroundingProbability(Graph &g, Var b, int K) {
  if (K == 0) return g.Scalar(0.0);
  return g.MaxPrefix(b, K);
}

Var JointGroundingProbability(Graph &g, Var b_i, Var b_j, int K) {
  if (g.value(b_i).size() != g.value(b_j).size()) {
    throw std::invalid_argument("alignment rows over different label sets");
  }
  if (K == 0) return g.Scalar(0.0);
  return g.MaxPrefix(g.Mul(b_i, b_j), K);
}

Var VisualScore(Graph &g, const ModelParameters &m, Var m_p, Var m_n, Var m_pn) {
  return ApplyFeedForward(g, m.visual_scorer, g.Concat({m_p, m_n, g.Mul(m_p, m_n), m_pn}));
}

Var CombinedScore(Graph &g, Var contextual, Var visual, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda_vis must lie in [0, 1]");
  }
  return g.Add(g.Scale(contextual, 1.0 - lambda), g.Scale(visual, lambda));
}

DialogueScorer::DialogueScorer(Graph &g, const ModelParameters &m, const Dialogue &d,
                               const ContextualVectors *contextual, Options options)
    : g_(g), m_(m), d_(d), options_(options) {
  if (!(options_.lambda >= 0.0 && options_.lambda <= 1.0)) {
    throw std::invalid_argument("lambda_vis must lie in [0, 1]");
  }
  if (options_.lambda > 0.0) options_.visual = true;
  auto ctx = [&](const char *segment, int index) -> const Mat * {
    return contextual ? contextual->Find(d.dialogue_id, segment, index) : nullptr;
  };

  for (int i = 0; i < static_cast<int>(d.pool.size()); ++i) {
    const Tokens &tokens = d.pool.entries[i].tokens;
    const auto enc = EncodeSequence(g, m, EmbedTokens(g, m, tokens, ctx("pool", i)));
    reps_[{RefKind::kPool, i}] = EncodeSpan(g, m, enc, 0, static_cast<int>(tokens.size())).vector;
  }
  // Turns are encoded only if they hold a mention.
  std::map<int, EncodedSequence> turns;
  auto turn_encoding = [&](int turn) -> const EncodedSequence & {
    auto it = turns.find(turn);
    if (it == turns.end()) {
      it = turns.emplace(turn, EncodeSequence(g, m, EmbedTokens(g, m, d.turns.at(turn), ctx("dialogue", turn)))).first;
    }
    return it->second;
  };
  for (const MentionRef &ref : d.order()) {
    if (ref.kind == RefKind::kPool) continue;
    const Span &s = d.Get(ref).span;
    reps_[ref] = EncodeSpan(g, m, turn_encoding(s.turn), s.start, s.end).vector;
  }

  if (options_.visual) {
    K_ = d.label_set.K();
    const auto labels = EncodeObjectLabels(g, m, d.label_set, d.dialogue_id, contextual);
    std::vector<Var> mentions;
    for (const MentionRef &ref : d.order()) mentions.push_back(reps_.at(ref));
    const AlignmentVars align = AlignmentDistribution(g, m, mentions, labels);
    for (std::size_t i = 0; i < d.order().size(); ++i) {
      alignment_[d.order()[i]] = align.distribution[i];
      grounding_[d.order()[i]] = align.grounding[i];
    }
    alignment_logits_ = align.logits;
  }
}

ScoreVars DialogueScorer::Score(const MentionRef &anchor, const MentionRef &candidate) {
  scored_.emplace_back(anchor, candidate);
  ScoreVars s;
  s.contextual = ContextualScore(g_, m_, reps_.at(anchor), reps_.at(candidate));
  if (!options_.visual) {
    // lambda == 0: F = F_c.
    s.fused = s.contextual;
    return s;
  }
  Var joint = JointGroundingProbability(g_, alignment_.at(anchor), alignment_.at(candidate), K_);
  s.visual = VisualScore(g_, m_, grounding_.at(anchor), grounding_.at(candidate), joint);
  s.fused = CombinedScore(g_, s.contextual, s.visual, options_.lambda);
  return s;
}

}  // namespace vpcr
