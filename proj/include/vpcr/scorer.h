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

// Antecedent scoring. The fused score of a (pronoun, candidate) pair mixes a
// contextual score over the two mention representations with a visual score
// computed from how strongly each mention aligns with the image's detected
// object labels:
//
//   F = (1 - lambda) * F_c + lambda * F_v
//
// Alignment rows b are a softmax over the K labels plus a trailing null
// column; the null column is excluded from both grounding maxima.

#ifndef VPCR_SCORER_H_
#define VPCR_SCORER_H_

#include <map>
#include <span>
#include <vector>

#include "vpcr/autodiff.h"
#include "vpcr/corpus.h"
#include "vpcr/encoder.h"
#include "vpcr/model.h"

namespace vpcr {

// Plain-value forms, used for diagnostics and as test oracles' subjects.

// max over the non-null entries of `b` (the last entry is null); 0 if K = 0.
double GroundingProbability(std::span<const double> b);
// max_k b_i[k] * b_j[k] over non-null k. Throws on length mismatch.
double JointGroundingProbability(std::span<const double> b_i, std::span<const double> b_j);
// Throws std::invalid_argument unless lambda is in [0, 1].
double CombinedScore(double contextual, double visual, double lambda);
// Lowest index among the maxima of the non-null columns, or the null index
// when K = 0.
int GroundingArgmax(std::span<const double> b);

struct AlignmentResult {
  Mat logits;        // mentions x (K + 1)
  Mat distribution;  // rows on the simplex
  Vec grounding;     // m_i
};

struct ScorePair {
  double contextual = 0.0;
  double visual = 0.0;
  double fused = 0.0;
};

// Graph forms.

// NN_c([e_p, e_n, e_p * e_n]).
Var ContextualScore(Graph &g, const ModelParameters &m, Var e_p, Var e_n);

struct AlignmentVars {
  std::vector<Var> logits;        // beta rows
  std::vector<Var> distribution;  // b rows
  std::vector<Var> grounding;     // m_i
};

// beta[n][c] = NN_beta(NN_o(e_n) * NN_o(e_c)); b = row softmax; m = max over
// non-null columns. `labels` must end with the null representation.
AlignmentVars AlignmentDistribution(Graph &g, const ModelParameters &m,
                                    const std::vector<Var> &mentions,
                                    const std::vector<Var> &labels);
AlignmentResult ToAlignmentResult(const Graph &g, const AlignmentVars &vars);

Var GroundingProbability(Graph &g, Var b, int K);
Var JointGroundingProbability(Graph &g, Var b_i, Var b_j, int K);
// NN_v([m_p, m_n, m_p * m_n, m_pn]).
Var VisualScore(Graph &g, const ModelParameters &m, Var m_p, Var m_n, Var m_pn);
Var CombinedScore(Graph &g, Var contextual, Var visual, double lambda);

struct ScoreVars {
  Var contextual;
  Var visual;  // invalid when the visual path is disabled
  Var fused;
};

// Encodes every mention of one dialogue once and scores mention pairs.
// Turns are encoded as whole sequences; pool entries and labels standalone.
class DialogueScorer {
 public:
  struct Options {
    double lambda = 0.4;
    // Build the label encodings and alignment rows. With lambda = 0 and this
    // off, the label set is never read.
    bool visual = true;
  };

  DialogueScorer(Graph &g, const ModelParameters &m, const Dialogue &d,
                 const ContextualVectors *contextual, Options options);

  Var Representation(const MentionRef &ref) const { return reps_.at(ref); }
  bool has_visual() const { return options_.visual; }
  // b row and m for a mention; only with the visual path enabled.
  Var Alignment(const MentionRef &ref) const { return alignment_.at(ref); }
  Var Grounding(const MentionRef &ref) const { return grounding_.at(ref); }
  const std::vector<Var> &alignment_logits() const { return alignment_logits_; }

  // Score of `anchor` taking `candidate` as antecedent.
  ScoreVars Score(const MentionRef &anchor, const MentionRef &candidate);
  // Every (anchor, candidate) pair scored so far, in call order.
  const std::vector<std::pair<MentionRef, MentionRef>> &scored_pairs() const { return scored_; }

 private:
  Graph &g_;
  const ModelParameters &m_;
  const Dialogue &d_;
  Options options_;
  int K_ = 0;
  std::map<MentionRef, Var> reps_;
  std::map<MentionRef, Var> alignment_;
  std::map<MentionRef, Var> grounding_;
  std::vector<Var> alignment_logits_;  // in global mention order
  std::vector<std::pair<MentionRef, MentionRef>> scored_;
};

}  // namespace vpcr

#endif  // VPCR_SCORER_H_
