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

// Training: candidate antecedent sets, the marginal log-likelihood objective
// over gold antecedents, Adam optimization with validation-based snapshot
// selection, and a finite-difference gradient check.

#ifndef VPCR_TRAINER_H_
#define VPCR_TRAINER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "vpcr/autodiff.h"
#include "vpcr/corpus.h"
#include "vpcr/encoder.h"
#include "vpcr/model.h"
#include "vpcr/scorer.h"

namespace vpcr {

// Antecedent candidates of one pronoun. The null antecedent is implicit and
// always sits in front, so score vectors have mentions.size() + 1 entries.
struct CandidateSet {
  std::vector<MentionRef> mentions;  // global order
  std::vector<bool> gold;            // per mention
  bool null_gold = false;

  int size() const { return static_cast<int>(mentions.size()) + 1; }
  // Gold mask over [null, mentions...].
  std::vector<bool> GoldMask() const;
};

// Null, every pool entry and every in-dialogue candidate preceding the
// pronoun. Gold is the annotated antecedents, or null for pronouns that are
// not anaphoric.
CandidateSet BuildCandidateSet(const Dialogue &d, int pronoun_index);

// Σ_gold e^F / Σ_all e^F with max-shifted exponentials. Throws if no
// candidate is gold.
double PronounLikelihood(std::span<const double> scores, const std::vector<bool> &gold);
// Mean of -log J.
double TrainingLoss(std::span<const double> likelihoods);

// -log J as a graph node; `scores` holds [null, mentions...].
Var NegativeLogLikelihood(Graph &g, Var scores, const std::vector<bool> &gold);

struct DialogueLoss {
  Var loss;  // mean over the included pronouns
  int pronouns = 0;
  std::vector<std::pair<MentionRef, MentionRef>> scored_pairs;
};

// Loss over the dialogue's pronouns (or just `only_pronoun`). Throws on
// unannotated pronouns. Returns pronouns = 0 and an invalid loss when the
// dialogue has no pronoun.
DialogueLoss ComputeDialogueLoss(Graph &g, const ModelParameters &m, const Dialogue &d,
                                 const ContextualVectors *contextual,
                                 std::optional<int> only_pronoun = std::nullopt);

// Replaces the candidates with every span of up to `max_width` tokens that
// does not overlap a pronoun, remapping gold antecedents. Used when gold
// mentions are not available; the result is not validated for overlap.
Dialogue ExpandToAllSpans(const Dialogue &d, int max_width);

struct TrainConfig {
  int max_steps = 50000;
  double learning_rate = 1e-3;
  double decay_rate = 0.999;  // applied every decay_every steps
  int decay_every = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int eval_every = 500;
  std::uint64_t shuffle_seed = 1;
  bool exhaustive_spans = false;
  int max_span_width = 4;

  nlohmann::json ToJson() const;
  void MergeJson(const nlohmann::json &j);
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainState {
  std::unique_ptr<ModelParameters> params;
  std::vector<Mat> first_moment;
  std::vector<Mat> second_moment;
  int step = 0;
  std::unique_ptr<ModelParameters> best;  // best validation snapshot
  int best_step = 0;
  double best_validation_f1 = -1.0;
  std::vector<double> losses;  // per step
};

// Validation metric used for snapshot selection; returns overall F1.
using Validator = std::function<double(const ModelParameters &)>;

// Runs Adam from `initial` with one dialogue per step. Evaluates `validate`
// every eval_every steps and after the last step; `best` holds the snapshot
// with the highest score (the initialization when max_steps = 0). A null
// `validate` keeps the final parameters. Throws TrainingDiverged on a
// non-finite loss.
TrainState Train(const std::vector<Dialogue> &train_set, const ModelParameters &initial,
                 const TrainConfig &train_config, const Validator &validate,
                 const ContextualVectors *contextual = nullptr);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  int checked = 0;
  // Largest |analytic| seen; a check over only zero gradients is vacuous.
  double max_abs_gradient = 0.0;
};

// Compares analytic gradients of the loss of `pronoun_index` against central
// differences with step `epsilon` on up to `samples` random scalar
// parameters per tensor. Relative error is |a - n| / max(|a|, |n|, 1e-6).
// Throws std::invalid_argument when epsilon <= 0.
GradientCheckResult GradientCheck(ModelParameters &m, const Dialogue &d, int pronoun_index,
                                  double epsilon, int samples_per_tensor, std::uint64_t seed,
                                  const ContextualVectors *contextual = nullptr);

}  // namespace vpcr

#endif  // VPCR_TRAINER_H_
