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

#include "vpcr/trainer.h"

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vpcr/synthetic.h"

namespace vpcr {
namespace {

using testing::TinyConfig;
using testing::ToyDialogue;

constexpr MentionRef kPool0{RefKind::kPool, 0};
constexpr MentionRef kPool1{RefKind::kPool, 1};
constexpr MentionRef kCand0{RefKind::kCandidate, 0};

TEST(CandidateSetTest, PoolPlusPrecedingCandidates) {
  const Dialogue d = ToyDialogue();
  const CandidateSet it = BuildCandidateSet(d, 0);
  EXPECT_EQ(it.mentions, (std::vector<MentionRef>{kPool0, kPool1}));
  EXPECT_EQ(it.gold, (std::vector<bool>{true, false}));
  EXPECT_FALSE(it.null_gold);
  EXPECT_EQ(it.size(), 3);

  const CandidateSet his = BuildCandidateSet(d, 2);
  EXPECT_EQ(his.mentions, (std::vector<MentionRef>{kPool0, kPool1, kCand0}));
  EXPECT_EQ(his.GoldMask(), (std::vector<bool>{false, true, false, true}));

  const CandidateSet he = BuildCandidateSet(d, 1);
  EXPECT_TRUE(he.null_gold);
  EXPECT_EQ(he.GoldMask(), (std::vector<bool>{true, false, false, false}));
}

TEST(CandidateSetTest, NeverContainsPronounsOrLaterMentions) {
  for (const Dialogue &d : GenerateOverfitSuite(30, 4)) {
    for (int p = 0; p < static_cast<int>(d.pronouns.size()); ++p) {
      const int pos = d.Position({RefKind::kPronoun, p});
      const CandidateSet c = BuildCandidateSet(d, p);
      EXPECT_EQ(c.mentions.size(), c.gold.size());
      for (const MentionRef &m : c.mentions) {
        EXPECT_TRUE(m.is_noun_phrase());
        if (m.kind == RefKind::kCandidate) EXPECT_LT(d.Position(m), pos);
      }
      const auto mask = c.GoldMask();
      EXPECT_EQ(std::count(mask.begin(), mask.end(), true) > 0, true);
    }
  }
}

TEST(LikelihoodTest, Examples) {
  EXPECT_NEAR(PronounLikelihood(std::vector<double>{0.0, 0.0}, {true, false}), 0.5, 1e-12);
  EXPECT_NEAR(PronounLikelihood(std::vector<double>{1.0, -2.0}, {true, true}), 1.0, 1e-12);
  EXPECT_NEAR(PronounLikelihood(std::vector<double>{std::log(3.0), 0.0}, {true, false}), 0.75,
              1e-12);
  EXPECT_THROW(PronounLikelihood(std::vector<double>{0.0}, {false}), std::invalid_argument);
  EXPECT_THROW(PronounLikelihood(std::vector<double>{0.0}, {true, false}), std::invalid_argument);
}

TEST(LikelihoodTest, LossExamples) {
  EXPECT_NEAR(TrainingLoss(std::vector<double>{0.5}), std::log(2.0), 1e-12);
  EXPECT_NEAR(TrainingLoss(std::vector<double>{0.5, 0.25}), 1.0397, 1e-4);
  EXPECT_THROW(TrainingLoss(std::vector<double>{}), std::invalid_argument);
}

TEST(LikelihoodTest, ShiftInvariantAndStable) {
  const std::vector<double> base = {0.3, -1.2, 2.0, 0.0};
  const std::vector<bool> gold = {false, true, true, false};
  const double j = PronounLikelihood(base, gold);
  for (double shift : {-700.0, -5.0, 5.0, 800.0}) {
    std::vector<double> s = base;
    for (double &x : s) x += shift;
    EXPECT_NEAR(PronounLikelihood(s, gold), j, 1e-12);
  }
}

TEST(LikelihoodTest, GraphLossMatchesPlain) {
  const std::vector<double> s = {0.0, 1.5, -0.5, 0.25};
  const std::vector<bool> gold = {false, true, false, true};
  Graph g;
  const Var in = g.Input(Eigen::Map<const Vec>(s.data(), 4));
  const Var nll = NegativeLogLikelihood(g, in, gold);
  EXPECT_NEAR(g.scalar(nll), -std::log(PronounLikelihood(s, gold)), 1e-12);
  g.Backward(nll);
  // d(-log J)/ds_i = softmax_i - [gold] * softmax_i / J.
  const double j = PronounLikelihood(s, gold);
  double z = 0.0;
  for (double x : s) z += std::exp(x);
  for (int i = 0; i < 4; ++i) {
    const double p = std::exp(s[i]) / z;
    EXPECT_NEAR(g.grad(in)(i), p - (gold[i] ? p / j : 0.0), 1e-12);
  }
}

TEST(DialogueLossTest, OnlyPronounAnchoredPairsAreScored) {
  const Dialogue d = ToyDialogue();
  const ModelParameters m(TinyConfig(), Vocabulary::FromDialogues({d}));
  Graph g;
  const DialogueLoss loss = ComputeDialogueLoss(g, m, d, nullptr);
  EXPECT_EQ(loss.pronouns, 3);
  EXPECT_EQ(loss.scored_pairs.size(), 2u + 3u + 3u);
  for (const auto &[anchor, candidate] : loss.scored_pairs) {
    EXPECT_EQ(anchor.kind, RefKind::kPronoun);
    EXPECT_TRUE(candidate.is_noun_phrase());
  }
  // Mean over pronouns.
  double total = 0.0;
  for (int p = 0; p < 3; ++p) {
    Graph h(false);
    total += h.scalar(ComputeDialogueLoss(h, m, d, nullptr, p).loss);
  }
  EXPECT_NEAR(g.scalar(loss.loss), total / 3.0, 1e-12);
}

TEST(DialogueLossTest, UnannotatedRejected) {
  Dialogue d = ToyDialogue();
  d.pronouns[1].anaphoricity = Anaphoricity::kUnannotated;
  const ModelParameters m(TinyConfig(), Vocabulary::FromDialogues({d}));
  Graph g;
  EXPECT_THROW(ComputeDialogueLoss(g, m, d, nullptr), std::invalid_argument);
}

TEST(GradientCheckTest, AnalyticMatchesNumeric) {
  const Dialogue d = ToyDialogue();
  for (double lambda : {0.0, 0.5, 1.0}) {
    ModelConfig c = TinyConfig();
    c.lambda_vis = lambda;
    ModelParameters m(c, Vocabulary::FromDialogues({d}));
    testing::JitterColumns(m, 3);
    for (int p = 0; p < 3; ++p) {
      const GradientCheckResult r = GradientCheck(m, d, p, 1e-5, 4, 17);
      EXPECT_LE(r.max_relative_error, 1e-4) << "lambda " << lambda << " pronoun " << p;
      EXPECT_GT(r.max_abs_gradient, 0.0);
      EXPECT_GT(r.checked, 0);
    }
  }
}

TEST(GradientCheckTest, NonPositiveEpsilonRejected) {
  const Dialogue d = ToyDialogue();
  ModelParameters m(TinyConfig(), Vocabulary::FromDialogues({d}));
  EXPECT_THROW(GradientCheck(m, d, 0, 0.0, 1, 1), std::invalid_argument);
  EXPECT_THROW(GradientCheck(m, d, 0, -1e-3, 1, 1), std::invalid_argument);
}

bool SameValues(const ModelParameters &a, const ModelParameters &b) {
  for (int i = 0; i < a.params().size(); ++i) {
    if (a.params().at(i).value != b.params().at(i).value) return false;
  }
  return true;
}

TEST(TrainTest, ZeroStepsReturnsInitialization) {
  const auto data = GenerateOverfitSuite(5, 1);
  const ModelParameters init(TinyConfig(), Vocabulary::FromDialogues(data));
  TrainConfig tc;
  tc.max_steps = 0;
  const TrainState s = Train(data, init, tc, [](const ModelParameters &) { return 0.5; });
  EXPECT_TRUE(SameValues(*s.best, init));
  EXPECT_EQ(s.best_step, 0);
  EXPECT_TRUE(s.losses.empty());
}

TEST(TrainTest, Deterministic) {
  const auto data = GenerateOverfitSuite(5, 2);
  const ModelParameters init(TinyConfig(), Vocabulary::FromDialogues(data));
  TrainConfig tc;
  tc.max_steps = 20;
  const TrainState a = Train(data, init, tc, nullptr);
  const TrainState b = Train(data, init, tc, nullptr);
  EXPECT_EQ(a.losses, b.losses);
  EXPECT_TRUE(SameValues(*a.best, *b.best));
  EXPECT_FALSE(SameValues(*a.best, init));
}

TEST(TrainTest, LossHalvesWithinHundredSteps) {
  const auto data = GenerateOverfitSuite(20, 3);
  ModelConfig c = DeskScaleConfig();
  const ModelParameters init(c, Vocabulary::FromDialogues(data));
  TrainConfig tc;
  tc.max_steps = 100;
  const TrainState s = Train(data, init, tc, nullptr);
  const double first = std::accumulate(s.losses.begin(), s.losses.begin() + 20, 0.0) / 20;
  const double last = std::accumulate(s.losses.end() - 20, s.losses.end(), 0.0) / 20;
  EXPECT_LE(last, 0.5 * first) << "first " << first << " last " << last;
}

TEST(TrainTest, KeepsBestValidationSnapshot) {
  const auto data = GenerateOverfitSuite(4, 5);
  const ModelParameters init(TinyConfig(), Vocabulary::FromDialogues(data));
  TrainConfig tc;
  tc.max_steps = 6;
  tc.eval_every = 2;
  int calls = 0;
  const TrainState s = Train(data, init, tc, [&](const ModelParameters &) {
    ++calls;
    return calls == 2 ? 0.9 : 0.1;
  });
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(s.best_step, 4);
  EXPECT_DOUBLE_EQ(s.best_validation_f1, 0.9);
}

TEST(TrainTest, RejectsBadConfig) {
  const auto data = GenerateOverfitSuite(2, 5);
  const ModelParameters init(TinyConfig(), Vocabulary::FromDialogues(data));
  TrainConfig tc;
  tc.max_steps = -1;
  EXPECT_THROW(Train(data, init, tc, nullptr), std::invalid_argument);
  tc.max_steps = 3;
  EXPECT_THROW(Train({}, init, tc, nullptr), std::invalid_argument);
}

TEST(ExpandToAllSpansTest, CoversSpansAndRemapsGold) {
  const Dialogue d = ToyDialogue();
  const Dialogue e = ExpandToAllSpans(d, 3);
  // Turn 0 "is | it | a big dog": spans within [0,1) and [2,5).
  // Turn 1 "he | likes | his | ball": [1,2) and [3,4). The original
  // candidates, here "his ball", are kept.
  EXPECT_EQ(e.candidates.size(), 1u + 6u + 1u + 1u + 1u);
  const MentionRef gold = e.pronouns[2].gold_antecedents[1];
  EXPECT_EQ(e.Get(gold).tokens, (Tokens{"a", "big", "dog"}));
  for (const Mention &m : e.candidates) {
    if (m.span == d.candidates[1].span) continue;
    for (const auto &p : e.pronouns) EXPECT_FALSE(m.span.Overlaps(p.mention.span));
  }
}

}  // namespace
}  // namespace vpcr
