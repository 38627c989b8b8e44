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

// Inference-time antecedent selection, chain clustering and the
// Discussed / Not Discussed / Overall precision-recall report.

#ifndef VPCR_EVALUATOR_H_
#define VPCR_EVALUATOR_H_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vpcr/adjudication.h"
#include "vpcr/corpus.h"
#include "vpcr/encoder.h"
#include "vpcr/model.h"
#include "vpcr/scorer.h"
#include "vpcr/trainer.h"

namespace vpcr {

struct Heatmap {
  std::vector<std::string> mentions;  // global order
  std::vector<std::string> labels;    // K labels then "null"
  Mat distribution;                   // mentions x (K + 1)
  std::vector<int> argmax;            // lowest index on ties

  nlohmann::json ToJson() const;
};

struct Resolution {
  // Selected antecedent per mention in global order; nullopt = null.
  std::vector<std::optional<MentionRef>> selected;
  std::vector<Cluster> chains;  // partition of all mentions
  std::vector<std::vector<MentionRef>> pronoun_antecedents;
  std::optional<Heatmap> heatmap;

  nlohmann::json ToJson(const Dialogue &d) const;
};

enum class LinkScope {
  // Only pronouns select antecedents, among their training candidate set.
  kPronounCandidates,
  // Every mention selects among all earlier mentions.
  kAllMentions,
};

struct ResolveOptions {
  double lambda = 0.4;
  bool heatmap = false;
  LinkScope scope = LinkScope::kPronounCandidates;
};

// Each selecting mention (see LinkScope), in global order, takes the
// highest-scoring antecedent among null (score 0) and its candidates; ties go
// to the earliest candidate, null first. Links are merged into chains and each pronoun's predicted
// antecedents are the noun phrases of its chain that precede it.
Resolution ResolveDialogue(const ModelParameters &m, const Dialogue &d,
                           const ContextualVectors *contextual, const ResolveOptions &options);

struct CategoryScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int pronouns = 0;
  int correct = 0;    // Σ |pred ∩ gold|
  int predicted = 0;  // Σ |pred|
  int gold = 0;       // Σ |gold|
};

struct EvalReport {
  CategoryScore discussed;
  CategoryScore not_discussed;
  CategoryScore overall;

  nlohmann::json ToJson() const;
};

struct PronounOutcome {
  std::vector<MentionRef> gold;
  std::vector<MentionRef> predicted;
};

// Micro-averaged over antecedent links. A pronoun is Discussed when a gold
// antecedent lies in the dialogue and Not Discussed when its gold lies
// entirely in the pool; pronouns without gold count only toward Overall.
EvalReport PrfReport(const std::vector<PronounOutcome> &outcomes);
// Throws std::invalid_argument when the two lists differ in length.
EvalReport PrfReport(const std::vector<std::vector<MentionRef>> &predictions,
                     const std::vector<std::vector<MentionRef>> &golds);

// Resolves every dialogue with lambda = m.config().lambda_vis.
EvalReport Evaluate(const ModelParameters &m, const std::vector<Dialogue> &dialogues,
                    const ContextualVectors *contextual = nullptr,
                    LinkScope scope = LinkScope::kPronounCandidates);

// "start:end:step", inclusive of `end` within 1e-9; a single number is a
// one-point grid and the empty string an empty one.
std::vector<double> ParseGrid(const std::string &text);

struct SweepPoint {
  double lambda = 0.0;
  EvalReport report;
  double validation_f1 = 0.0;
};

// Trains one fresh model per lambda from the same seed, selects on
// `validation` and reports on `test`.
std::vector<SweepPoint> LambdaSweep(const std::vector<Dialogue> &train,
                                    const std::vector<Dialogue> &validation,
                                    const std::vector<Dialogue> &test,
                                    const ModelConfig &model_config,
                                    const TrainConfig &train_config,
                                    const std::vector<double> &grid,
                                    const ContextualVectors *contextual = nullptr);

}  // namespace vpcr

#endif  // VPCR_EVALUATOR_H_
