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

#include "vpcr/evaluator.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vpcr/union_find.h"

namespace vpcr {

using nlohmann::json;

json Heatmap::ToJson() const {
  json rows = json::array();
  for (Eigen::Index i = 0; i < distribution.rows(); ++i) {
    std::vector<double> row(distribution.cols());
    for (Eigen::Index k = 0; k < distribution.cols(); ++k) row[k] = distribution(i, k);
    rows.push_back(row);
  }
  return json{{"mentions", mentions}, {"labels", labels}, {"b", rows}, {"argmax", argmax}};
}

json Resolution::ToJson(const Dialogue &d) const {
  json out;
  out["dialogue_id"] = d.dialogue_id;
  json links = json::array();
  for (std::size_t i = 0; i < selected.size(); ++i) {
    links.push_back({{"mention", MentionRefToJson(d.order()[i])},
                     {"text", d.Get(d.order()[i]).Text()},
                     {"antecedent", selected[i] ? MentionRefToJson(*selected[i]) : json(nullptr)}});
  }
  out["links"] = links;
  out["chains"] = ClustersToJson(chains);
  json pronouns = json::array();
  for (std::size_t i = 0; i < pronoun_antecedents.size(); ++i) {
    json ants = json::array();
    for (const auto &r : pronoun_antecedents[i]) ants.push_back(MentionRefToJson(r));
    pronouns.push_back({{"pronoun_index", i},
                        {"text", d.pronouns[i].mention.Text()},
                        {"predicted_antecedents", ants}});
  }
  out["pronouns"] = pronouns;
  if (heatmap) out["heatmap"] = heatmap->ToJson();
  return out;
}

Resolution ResolveDialogue(const ModelParameters &m, const Dialogue &d,
                           const ContextualVectors *contextual, const ResolveOptions &options) {
  Graph g(false);
  DialogueScorer scorer(g, m, d, contextual,
                        {.lambda = options.lambda, .visual = options.lambda > 0.0 || options.heatmap});
  const auto &order = d.order();
  const int n = static_cast<int>(order.size());
  Resolution r;
  r.selected.resize(n);
  UnionFind uf(n);
  for (int i = 0; i < n; ++i) {
    std::vector<MentionRef> candidates;
    if (options.scope == LinkScope::kAllMentions) {
      candidates.assign(order.begin(), order.begin() + i);
    } else if (order[i].kind == RefKind::kPronoun) {
      candidates = BuildCandidateSet(d, order[i].index).mentions;
    }
    double best = 0.0;  // null antecedent
    for (const MentionRef &c : candidates) {
      const double s = g.scalar(scorer.Score(order[i], c).fused);
      if (s > best) {
        best = s;
        r.selected[i] = c;
      }
    }
    if (r.selected[i]) uf.Union(i, d.Position(*r.selected[i]));
  }
  for (const auto &component : uf.Components()) {
    Cluster c;
    for (int i : component) c.insert(order[i]);
    r.chains.push_back(std::move(c));
  }
  r.pronoun_antecedents.resize(d.pronouns.size());
  for (int p = 0; p < static_cast<int>(d.pronouns.size()); ++p) {
    const int pos = d.Position({RefKind::kPronoun, p});
    const int root = uf.Find(pos);
    for (int j = 0; j < pos; ++j) {
      if (order[j].is_noun_phrase() && uf.Find(j) == root) r.pronoun_antecedents[p].push_back(order[j]);
    }
  }
  if (options.heatmap) {
    Heatmap h;
    for (const auto &ref : order) h.mentions.push_back(d.Get(ref).Text());
    for (const auto &label : d.label_set.labels) {
      Mention tmp;
      tmp.tokens = label;
      h.labels.push_back(tmp.Text());
    }
    h.labels.push_back("null");
    h.distribution.resize(n, d.label_set.K() + 1);
    for (int i = 0; i < n; ++i) {
      const Vec &b = g.value(scorer.Alignment(order[i]));
      h.distribution.row(i) = b.transpose();
      h.argmax.push_back(GroundingArgmax(std::span<const double>(b.data(), b.size())));
    }
    r.heatmap = std::move(h);
  }
  return r;
}

namespace {

void Accumulate(CategoryScore &s, const PronounOutcome &o, int hits) {
  ++s.pronouns;
  s.correct += hits;
  s.predicted += static_cast<int>(o.predicted.size());
  s.gold += static_cast<int>(o.gold.size());
}

void Finish(CategoryScore &s) {
  s.precision = s.predicted > 0 ? static_cast<double>(s.correct) / s.predicted : 0.0;
  s.recall = s.gold > 0 ? static_cast<double>(s.correct) / s.gold : 0.0;
  s.f1 = s.precision + s.recall > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
}

json CategoryJson(const CategoryScore &s) {
  return json{{"precision", s.precision}, {"recall", s.recall},   {"f1", s.f1},
              {"pronouns", s.pronouns},   {"correct", s.correct}, {"predicted", s.predicted},
              {"gold", s.gold}};
}

}  // namespace

json EvalReport::ToJson() const {
  return json{{"discussed", CategoryJson(discussed)},
              {"not_discussed", CategoryJson(not_discussed)},
              {"overall", CategoryJson(overall)}};
}

EvalReport PrfReport(const std::vector<PronounOutcome> &outcomes) {
  EvalReport r;
  for (const auto &o : outcomes) {
    const std::set<MentionRef> gold(o.gold.begin(), o.gold.end());
    const std::set<MentionRef> pred(o.predicted.begin(), o.predicted.end());
    int hits = 0;
    for (const auto &p : pred) hits += gold.count(p) ? 1 : 0;
    PronounOutcome dedup{std::vector<MentionRef>(gold.begin(), gold.end()),
                         std::vector<MentionRef>(pred.begin(), pred.end())};
    Accumulate(r.overall, dedup, hits);
    if (gold.empty()) continue;
    const bool in_dialogue = std::any_of(gold.begin(), gold.end(), [](const MentionRef &m) {
      return m.kind == RefKind::kCandidate;
    });
    Accumulate(in_dialogue ? r.discussed : r.not_discussed, dedup, hits);
  }
  Finish(r.discussed);
  Finish(r.not_discussed);
  Finish(r.overall);
  return r;
}

EvalReport PrfReport(const std::vector<std::vector<MentionRef>> &predictions,
                     const std::vector<std::vector<MentionRef>> &golds) {
  if (predictions.size() != golds.size()) {
    throw std::invalid_argument("predictions cover " + std::to_string(predictions.size()) +
                                " pronouns but golds cover " + std::to_string(golds.size()));
  }
  std::vector<PronounOutcome> outcomes;
  for (std::size_t i = 0; i < golds.size(); ++i) outcomes.push_back({golds[i], predictions[i]});
  return PrfReport(outcomes);
}

EvalReport Evaluate(const ModelParameters &m, const std::vector<Dialogue> &dialogues,
                    const ContextualVectors *contextual, LinkScope scope) {
  std::vector<PronounOutcome> outcomes;
  for (const Dialogue &d : dialogues) {
    const Resolution r = ResolveDialogue(m, d, contextual, {.lambda = m.config().lambda_vis, .scope = scope});
    for (std::size_t i = 0; i < d.pronouns.size(); ++i) {
      if (d.pronouns[i].anaphoricity == Anaphoricity::kUnannotated) {
        throw std::invalid_argument("dialogue " + d.dialogue_id + ": pronoun " +
                                    std::to_string(i) + " is unannotated");
      }
      outcomes.push_back({d.pronouns[i].gold_antecedents, r.pronoun_antecedents[i]});
    }
  }
  return PrfReport(outcomes);
}

std::vector<double> ParseGrid(const std::string &text) {
  if (text.empty()) return {};
  auto number = [&text](const std::string &s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("bad grid '" + text + "'");
    return v;
  };
  std::vector<std::string> parts;
  std::size_t begin = 0;
  while (true) {
    const std::size_t colon = text.find(':', begin);
    parts.push_back(text.substr(begin, colon - begin));
    if (colon == std::string::npos) break;
    begin = colon + 1;
  }
  std::vector<double> grid;
  if (parts.size() == 1) {
    grid.push_back(number(parts[0]));
  } else if (parts.size() == 3) {
    const double start = number(parts[0]), end = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || end < start) throw std::invalid_argument("bad grid '" + text + "'");
    const auto count = static_cast<long>(std::floor((end - start) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      // Snap accumulated error onto the endpoint.
      double v = start + static_cast<double>(i) * step;
      if (std::abs(v - end) <= 1e-9) v = end;
      grid.push_back(v);
    }
  } else {
    throw std::invalid_argument("bad grid '" + text + "'");
  }
  for (double v : grid) {
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("grid value outside [0, 1]");
  }
  return grid;
}

std::vector<SweepPoint> LambdaSweep(const std::vector<Dialogue> &train,
                                    const std::vector<Dialogue> &validation,
                                    const std::vector<Dialogue> &test,
                                    const ModelConfig &model_config,
                                    const TrainConfig &train_config,
                                    const std::vector<double> &grid,
                                    const ContextualVectors *contextual) {
  std::vector<SweepPoint> out;
  if (grid.empty()) return out;
  const Vocabulary vocab = Vocabulary::FromDialogues(train);
  for (double lambda : grid) {
    ModelConfig config = model_config;
    config.lambda_vis = lambda;
    const ModelParameters init(config, vocab);
    auto validate = [&](const ModelParameters &m) {
      return Evaluate(m, validation, contextual).overall.f1;
    };
    TrainState state = Train(train, init, train_config, validate, contextual);
    out.push_back({lambda, Evaluate(*state.best, test, contextual), state.best_validation_f1});
  }
  return out;
}

}  // namespace vpcr
