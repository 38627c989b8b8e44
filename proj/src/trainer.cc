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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace vpcr {

using nlohmann::json;

std::vector<bool> CandidateSet::GoldMask() const {
  std::vector<bool> mask;
  mask.reserve(mentions.size() + 1);
  mask.push_back(null_gold);
  mask.insert(mask.end(), gold.begin(), gold.end());
  return mask;
}

CandidateSet BuildCandidateSet(const Dialogue &d, int pronoun_index) {
  const PronounInstance &p = d.pronouns.at(pronoun_index);
  const int pos = d.Position({RefKind::kPronoun, pronoun_index});
  const std::set<MentionRef> gold(p.gold_antecedents.begin(), p.gold_antecedents.end());
  CandidateSet c;
  for (const MentionRef &ref : d.order()) {
    if (ref.kind == RefKind::kPronoun) continue;
    if (ref.kind == RefKind::kCandidate && d.Position(ref) >= pos) continue;
    c.mentions.push_back(ref);
    c.gold.push_back(gold.count(ref) > 0);
  }
  c.null_gold = p.anaphoricity != Anaphoricity::kAnaphoric;
  return c;
}

double PronounLikelihood(std::span<const double> scores, const std::vector<bool> &gold) {
  if (scores.size() != gold.size()) throw std::invalid_argument("score/gold size mismatch");
  if (std::none_of(gold.begin(), gold.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("pronoun has no gold candidate");
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double e = std::exp(scores[i] - top);
    den += e;
    if (gold[i]) num += e;
  }
  return num / den;
}

double TrainingLoss(std::span<const double> likelihoods) {
  if (likelihoods.empty()) throw std::invalid_argument("empty batch");
  double total = 0.0;
  for (double j : likelihoods) total -= std::log(j);
  return total / static_cast<double>(likelihoods.size());
}

Var NegativeLogLikelihood(Graph &g, Var scores, const std::vector<bool> &gold) {
  if (static_cast<std::size_t>(g.value(scores).size()) != gold.size()) {
    throw std::invalid_argument("score/gold size mismatch");
  }
  std::vector<Var> gold_scores;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i]) gold_scores.push_back(g.Pick(scores, static_cast<int>(i)));
  }
  if (gold_scores.empty()) throw std::invalid_argument("pronoun has no gold candidate");
  return g.Sub(g.LogSumExp(scores), g.LogSumExp(g.Stack(gold_scores)));
}

DialogueLoss ComputeDialogueLoss(Graph &g, const ModelParameters &m, const Dialogue &d,
                                 const ContextualVectors *contextual,
                                 std::optional<int> only_pronoun) {
  DialogueLoss out;
  std::vector<int> targets;
  for (int i = 0; i < static_cast<int>(d.pronouns.size()); ++i) {
    if (only_pronoun && *only_pronoun != i) continue;
    if (d.pronouns[i].anaphoricity == Anaphoricity::kUnannotated) {
      throw std::invalid_argument("dialogue " + d.dialogue_id + ": pronoun " + std::to_string(i) +
                                  " is unannotated");
    }
    targets.push_back(i);
  }
  if (only_pronoun && targets.empty()) {
    throw std::out_of_range("dialogue " + d.dialogue_id + " has no pronoun " +
                            std::to_string(*only_pronoun));
  }
  if (targets.empty()) return out;

  const double lambda = m.config().lambda_vis;
  DialogueScorer scorer(g, m, d, contextual, {.lambda = lambda, .visual = lambda > 0.0});
  const Var null_score = g.Scalar(0.0);
  std::vector<Var> losses;
  for (int i : targets) {
    const CandidateSet c = BuildCandidateSet(d, i);
    std::vector<Var> scores = {null_score};
    for (const MentionRef &ref : c.mentions) {
      scores.push_back(scorer.Score({RefKind::kPronoun, i}, ref).fused);
    }
    losses.push_back(NegativeLogLikelihood(g, g.Stack(scores), c.GoldMask()));
  }
  out.loss = g.Scale(g.Sum(losses), 1.0 / static_cast<double>(losses.size()));
  out.pronouns = static_cast<int>(losses.size());
  out.scored_pairs = scorer.scored_pairs();
  return out;
}

Dialogue ExpandToAllSpans(const Dialogue &d, int max_width) {
  Dialogue out = d;
  std::set<std::tuple<int, int, int>> spans;
  for (const Mention &m : d.candidates) spans.insert({m.span.turn, m.span.start, m.span.end});
  for (int t = 0; t < static_cast<int>(d.turns.size()); ++t) {
    std::vector<bool> blocked(d.turns[t].size(), false);
    for (const auto &p : d.pronouns) {
      if (p.mention.span.turn == t) blocked[p.mention.span.start] = true;
    }
    const int n = static_cast<int>(d.turns[t].size());
    for (int s = 0; s < n; ++s) {
      for (int e = s + 1; e <= std::min(n, s + max_width); ++e) {
        if (blocked[e - 1]) break;
        if (blocked[s]) break;
        spans.insert({t, s, e});
      }
    }
  }
  std::map<std::tuple<int, int, int>, int> new_index;
  out.candidates.clear();
  for (const auto &[t, s, e] : spans) {
    Mention m;
    m.span = {Segment::kDialogue, t, s, e};
    m.tokens.assign(d.turns[t].begin() + s, d.turns[t].begin() + e);
    new_index[{t, s, e}] = static_cast<int>(out.candidates.size());
    out.candidates.push_back(std::move(m));
  }
  for (auto &p : out.pronouns) {
    for (auto &ref : p.gold_antecedents) {
      if (ref.kind != RefKind::kCandidate) continue;
      const Span &s = d.candidates.at(ref.index).span;
      ref.index = new_index.at({s.turn, s.start, s.end});
    }
  }
  out.Finalize();
  return out;
}

json TrainConfig::ToJson() const {
  return json{{"max_steps", max_steps},
              {"learning_rate", learning_rate},
              {"decay_rate", decay_rate},
              {"decay_every", decay_every},
              {"beta1", beta1},
              {"beta2", beta2},
              {"adam_epsilon", adam_epsilon},
              {"eval_every", eval_every},
              {"shuffle_seed", shuffle_seed},
              {"exhaustive_spans", exhaustive_spans},
              {"max_span_width", max_span_width}};
}

void TrainConfig::MergeJson(const json &j) {
  auto take = [&j](const char *key, auto &field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  take("max_steps", max_steps);
  take("learning_rate", learning_rate);
  take("decay_rate", decay_rate);
  take("decay_every", decay_every);
  take("beta1", beta1);
  take("beta2", beta2);
  take("adam_epsilon", adam_epsilon);
  take("eval_every", eval_every);
  take("shuffle_seed", shuffle_seed);
  take("exhaustive_spans", exhaustive_spans);
  take("max_span_width", max_span_width);
}

TrainState Train(const std::vector<Dialogue> &train_set, const ModelParameters &initial,
                 const TrainConfig &config, const Validator &validate,
                 const ContextualVectors *contextual) {
  if (config.max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
  if (config.eval_every <= 0 || config.decay_every <= 0) {
    throw std::invalid_argument("eval_every and decay_every must be positive");
  }
  TrainState state;
  state.params = std::make_unique<ModelParameters>(initial);
  ParameterSet &params = state.params->params();
  for (int i = 0; i < params.size(); ++i) {
    state.first_moment.push_back(Mat::Zero(params.at(i).value.rows(), params.at(i).value.cols()));
    state.second_moment.push_back(state.first_moment.back());
  }

  std::vector<Dialogue> data;
  data.reserve(train_set.size());
  for (const Dialogue &d : train_set) {
    data.push_back(config.exhaustive_spans ? ExpandToAllSpans(d, config.max_span_width) : d);
  }

  auto evaluate = [&] {
    if (!validate) return;
    const double f1 = validate(*state.params);
    if (f1 > state.best_validation_f1) {
      state.best_validation_f1 = f1;
      state.best_step = state.step;
      state.best = std::make_unique<ModelParameters>(*state.params);
    }
  };

  if (config.max_steps > 0 && data.empty()) throw std::invalid_argument("empty training set");
  std::mt19937_64 rng(config.shuffle_seed);
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  while (state.step < config.max_steps) {
    if (cursor == order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const Dialogue &d = data[order[cursor++]];
    ++state.step;

    Graph g;
    const DialogueLoss loss = ComputeDialogueLoss(g, *state.params, d, contextual);
    if (loss.pronouns == 0) {
      state.losses.push_back(0.0);
    } else {
      const double value = g.scalar(loss.loss);
      if (!std::isfinite(value)) {
        throw TrainingDiverged("non-finite loss at step " + std::to_string(state.step) +
                               " on dialogue " + d.dialogue_id);
      }
      state.losses.push_back(value);
      g.Backward(loss.loss);

      const double lr = config.learning_rate *
                        std::pow(config.decay_rate, (state.step - 1) / config.decay_every);
      const double c1 = 1.0 - std::pow(config.beta1, state.step);
      const double c2 = 1.0 - std::pow(config.beta2, state.step);
      // Adam moments of untouched parameters decay as if their gradient were zero.
      for (int id = 0; id < params.size(); ++id) {
        Parameter &p = params.at(id);
        if (!p.trainable) continue;
        const Mat *grad = g.ParamGrad(id);
        Mat &m1 = state.first_moment[id];
        Mat &m2 = state.second_moment[id];
        if (grad != nullptr) {
          m1 = config.beta1 * m1 + (1.0 - config.beta1) * *grad;
          m2 = config.beta2 * m2 + (1.0 - config.beta2) * grad->cwiseProduct(*grad);
        } else {
          m1 *= config.beta1;
          m2 *= config.beta2;
        }
        p.value.array() -= lr * (m1.array() / c1) /
                           ((m2.array() / c2).sqrt() + config.adam_epsilon);
      }
    }
    if (state.step % config.eval_every == 0) evaluate();
  }
  if (state.step % config.eval_every != 0 || state.step == 0) evaluate();
  if (!state.best) state.best = std::make_unique<ModelParameters>(*state.params);
  return state;
}

namespace {

double LossValue(const ModelParameters &m, const Dialogue &d, int pronoun,
                 const ContextualVectors *contextual) {
  Graph g(false);
  return g.scalar(ComputeDialogueLoss(g, m, d, contextual, pronoun).loss);
}

}  // namespace

GradientCheckResult GradientCheck(ModelParameters &m, const Dialogue &d, int pronoun_index,
                                  double epsilon, int samples_per_tensor, std::uint64_t seed,
                                  const ContextualVectors *contextual) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  Graph g;
  const DialogueLoss loss = ComputeDialogueLoss(g, m, d, contextual, pronoun_index);
  g.Backward(loss.loss);

  GradientCheckResult result;
  std::mt19937_64 rng(seed);
  ParameterSet &params = m.params();
  for (int id = 0; id < params.size(); ++id) {
    Parameter &p = params.at(id);
    if (!p.trainable) continue;
    const Mat *grad = g.ParamGrad(id);
    const Eigen::Index n = p.value.size();
    std::vector<Eigen::Index> picks(static_cast<std::size_t>(n));
    std::iota(picks.begin(), picks.end(), 0);
    std::shuffle(picks.begin(), picks.end(), rng);
    picks.resize(std::min<std::size_t>(picks.size(), static_cast<std::size_t>(samples_per_tensor)));
    for (Eigen::Index k : picks) {
      double &theta = p.value.data()[k];
      const double saved = theta;
      theta = saved + epsilon;
      const double plus = LossValue(m, d, pronoun_index, contextual);
      theta = saved - epsilon;
      const double minus = LossValue(m, d, pronoun_index, contextual);
      theta = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double analytic = grad ? grad->data()[k] : 0.0;
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      result.max_relative_error =
          std::max(result.max_relative_error, std::abs(analytic - numeric) / denom);
      result.max_abs_gradient = std::max(result.max_abs_gradient, std::abs(analytic));
      ++result.checked;
    }
  }
  return result;
}

}  // namespace vpcr
