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

#include "vpcr/adjudication.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vpcr/union_find.h"

namespace vpcr {

using nlohmann::json;

const char *ResponseTypeName(ResponseType t) {
  switch (t) {
    case ResponseType::kNounPhrases:
      return "noun-phrases";
    case ResponseType::kConceptNotPresent:
      return "concept-not-present";
    case ResponseType::kNonReferential:
      return "non-referential";
  }
  return "?";
}

ResponseType ParseResponseType(std::string_view name) {
  if (name == "noun-phrases") return ResponseType::kNounPhrases;
  if (name == "concept-not-present") return ResponseType::kConceptNotPresent;
  if (name == "non-referential") return ResponseType::kNonReferential;
  throw ParseError("unknown response type '" + std::string(name) + "'");
}

FilterResult FilterWorkers(const std::vector<AnnotationRecord> &records) {
  FilterResult result;
  for (const auto &r : records) {
    if (r.checkpoint_passed) result.records.push_back(r);
  }
  if (!records.empty()) {
    result.retained_fraction =
        static_cast<double>(result.records.size()) / static_cast<double>(records.size());
  }
  return result;
}

namespace {

// Connected components over the distinct refs appearing in `groups`.
std::vector<Cluster> MergeIntersecting(const std::vector<std::vector<MentionRef>> &groups) {
  std::map<MentionRef, int> id;
  for (const auto &g : groups) {
    for (const auto &m : g) id.emplace(m, 0);
  }
  std::vector<MentionRef> refs;
  for (auto &[ref, index] : id) {
    index = static_cast<int>(refs.size());
    refs.push_back(ref);
  }
  UnionFind uf(static_cast<int>(refs.size()));
  for (const auto &g : groups) {
    for (std::size_t i = 1; i < g.size(); ++i) uf.Union(id[g[0]], id[g[i]]);
  }
  std::vector<Cluster> out;
  for (const auto &component : uf.Components()) {
    Cluster c;
    for (int i : component) c.insert(refs[i]);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

WorkerClusterSet WorkerClusters(const std::vector<PronounResponse> &responses) {
  std::vector<std::vector<MentionRef>> seeds;
  for (const auto &r : responses) {
    if (r.type != ResponseType::kNounPhrases) continue;
    std::vector<MentionRef> seed = {{RefKind::kPronoun, r.pronoun_index}};
    seed.insert(seed.end(), r.selected.begin(), r.selected.end());
    seeds.push_back(std::move(seed));
  }
  return WorkerClusterSet{MergeIntersecting(seeds)};
}

std::vector<Cluster> AdjudicateLinks(const std::vector<WorkerClusterSet> &worker_sets) {
  std::map<std::pair<MentionRef, MentionRef>, int> votes;
  for (const auto &ws : worker_sets) {
    for (const auto &cluster : ws.clusters) {
      const std::vector<MentionRef> members(cluster.begin(), cluster.end());
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          if (members[i].is_noun_phrase() && members[j].is_noun_phrase()) continue;
          ++votes[{members[i], members[j]}];
        }
      }
    }
  }
  const int workers = static_cast<int>(worker_sets.size());
  std::vector<std::vector<MentionRef>> accepted;
  for (const auto &[link, count] : votes) {
    if (2 * count > workers) accepted.push_back({link.first, link.second});
  }
  return MergeIntersecting(accepted);
}

Anaphoricity VoteAnaphoricity(const std::vector<AnnotationRecord> &records,
                              int pronoun_index) {
  // Indexed in tie-break priority order.
  std::array<int, 3> counts = {0, 0, 0};
  int covered = 0;
  for (const auto &r : records) {
    for (const auto &resp : r.responses) {
      if (resp.pronoun_index != pronoun_index) continue;
      ++covered;
      switch (resp.type) {
        case ResponseType::kNounPhrases:
          ++counts[0];
          break;
        case ResponseType::kConceptNotPresent:
          ++counts[1];
          break;
        case ResponseType::kNonReferential:
          ++counts[2];
          break;
      }
    }
  }
  if (covered == 0) {
    throw std::invalid_argument("no annotation covers pronoun " + std::to_string(pronoun_index));
  }
  const int best = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  static constexpr std::array<Anaphoricity, 3> kTypes = {
      Anaphoricity::kAnaphoric, Anaphoricity::kNoAntecedent, Anaphoricity::kNonReferential};
  return kTypes[best];
}

AdjudicatedDialogue DeriveAntecedents(const std::vector<Cluster> &clusters,
                                      const std::vector<Anaphoricity> &pronoun_types,
                                      const Dialogue &d) {
  AdjudicatedDialogue out;
  out.clusters = clusters;
  out.pronoun_types = pronoun_types;
  out.pronoun_antecedents.resize(pronoun_types.size());
  for (int i = 0; i < static_cast<int>(pronoun_types.size()); ++i) {
    if (pronoun_types[i] != Anaphoricity::kAnaphoric) continue;
    const MentionRef self{RefKind::kPronoun, i};
    const Cluster *home = nullptr;
    for (const auto &c : clusters) {
      if (c.count(self)) home = &c;
    }
    if (home != nullptr) {
      const int pos = d.Position(self);
      for (const MentionRef &m : *home) {
        if (m.is_noun_phrase() && d.Position(m) < pos) out.pronoun_antecedents[i].push_back(m);
      }
      std::sort(out.pronoun_antecedents[i].begin(), out.pronoun_antecedents[i].end(),
                [&d](const MentionRef &a, const MentionRef &b) {
                  return d.Position(a) < d.Position(b);
                });
    }
    if (out.pronoun_antecedents[i].empty()) {
      out.pronoun_types[i] = Anaphoricity::kNoAntecedent;
      out.warnings.push_back("dialogue " + d.dialogue_id + ": anaphoric pronoun " +
                             std::to_string(i) +
                             (home ? " has no preceding noun phrase in its cluster"
                                   : " is in no adjudicated cluster") +
                             "; downgraded to no-antecedent");
    }
  }
  return out;
}

double ComputeIaa(const std::vector<AnnotationRecord> &records,
                  const std::map<std::string, AdjudicatedDialogue> &adjudicated,
                  std::vector<WorkerAgreement> *per_worker) {
  using Key = std::pair<std::string, MentionRef>;
  // worker -> dialogue -> responses
  std::map<std::string, std::map<std::string, std::vector<PronounResponse>>> by_worker;
  for (const auto &r : records) {
    auto &slot = by_worker[r.worker_id][r.dialogue_id];
    slot.insert(slot.end(), r.responses.begin(), r.responses.end());
  }
  double total = 0.0;
  for (const auto &[worker, dialogues] : by_worker) {
    std::vector<std::set<Key>> mine, gold;
    for (const auto &[dialogue_id, responses] : dialogues) {
      for (const auto &c : WorkerClusters(responses).clusters) {
        std::set<Key> k;
        for (const auto &m : c) k.insert({dialogue_id, m});
        mine.push_back(std::move(k));
      }
      auto it = adjudicated.find(dialogue_id);
      if (it == adjudicated.end()) continue;
      for (const auto &c : it->second.clusters) {
        std::set<Key> k;
        for (const auto &m : c) k.insert({dialogue_id, m});
        gold.push_back(std::move(k));
      }
    }
    const double f1 = MucScore(mine, gold).f1;
    total += f1;
    if (per_worker) per_worker->push_back({worker, 100.0 * f1});
  }
  return by_worker.empty() ? 0.0 : 100.0 * total / static_cast<double>(by_worker.size());
}

json CorpusStatistics::ToJson() const {
  return json{{"dialogues", dialogues},
              {"pronouns", pronouns},
              {"pronouns_per_dialogue", pronouns_per_dialogue},
              {"pronoun_forms", pronoun_forms},
              {"anaphoric_pct", anaphoric_pct},
              {"no_antecedent_pct", no_antecedent_pct},
              {"non_referential_pct", non_referential_pct},
              {"mean_antecedents", mean_antecedents},
              {"not_in_dialogue_pct", not_in_dialogue_pct}};
}

CorpusStatistics ComputeCorpusStatistics(const std::vector<Dialogue> &dialogues) {
  CorpusStatistics s;
  s.dialogues = static_cast<int>(dialogues.size());
  int annotated = 0, anaphoric = 0, no_antecedent = 0, non_referential = 0;
  int antecedents = 0, pool_only = 0;
  for (const auto &d : dialogues) {
    for (const auto &p : d.pronouns) {
      ++s.pronouns;
      ++s.pronoun_forms[Lowercase(p.mention.tokens.at(0))];
      switch (p.anaphoricity) {
        case Anaphoricity::kAnaphoric: {
          ++annotated;
          ++anaphoric;
          antecedents += static_cast<int>(p.gold_antecedents.size());
          const bool in_dialogue =
              std::any_of(p.gold_antecedents.begin(), p.gold_antecedents.end(),
                          [](const MentionRef &r) { return r.kind == RefKind::kCandidate; });
          if (!in_dialogue) ++pool_only;
          break;
        }
        case Anaphoricity::kNoAntecedent:
          ++annotated;
          ++no_antecedent;
          break;
        case Anaphoricity::kNonReferential:
          ++annotated;
          ++non_referential;
          break;
        case Anaphoricity::kUnannotated:
          break;
      }
    }
  }
  auto pct = [](int num, int den) { return den > 0 ? 100.0 * num / den : 0.0; };
  if (s.dialogues > 0) s.pronouns_per_dialogue = static_cast<double>(s.pronouns) / s.dialogues;
  s.anaphoric_pct = pct(anaphoric, annotated);
  s.no_antecedent_pct = pct(no_antecedent, annotated);
  s.non_referential_pct = pct(non_referential, annotated);
  if (anaphoric > 0) s.mean_antecedents = static_cast<double>(antecedents) / anaphoric;
  s.not_in_dialogue_pct = pct(pool_only, anaphoric);
  return s;
}

AdjudicationOutput Adjudicate(const std::vector<Dialogue> &dialogues,
                              const std::vector<AnnotationRecord> &records) {
  AdjudicationOutput out;
  std::map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(dialogues.size()); ++i) index[dialogues[i].dialogue_id] = i;
  for (const auto &r : records) {
    if (!index.count(r.dialogue_id)) {
      throw std::invalid_argument("annotation for unknown dialogue_id '" + r.dialogue_id + "'");
    }
  }
  FilterResult filtered = FilterWorkers(records);
  out.retained_fraction = filtered.retained_fraction;
  if (filtered.records.empty()) throw std::invalid_argument("no valid annotations");

  std::map<std::string, std::vector<AnnotationRecord>> by_dialogue;
  for (auto &r : filtered.records) by_dialogue[r.dialogue_id].push_back(r);

  out.dialogues = dialogues;
  for (auto &d : out.dialogues) {
    auto it = by_dialogue.find(d.dialogue_id);
    if (it == by_dialogue.end()) {
      out.warnings.push_back("dialogue " + d.dialogue_id + ": no valid annotations; left as is");
      continue;
    }
    const auto &recs = it->second;
    for (const auto &r : recs) {
      for (const auto &resp : r.responses) {
        if (resp.pronoun_index < 0 || resp.pronoun_index >= static_cast<int>(d.pronouns.size())) {
          throw ValidationError(d.dialogue_id, "responses.pronoun_index",
                                "worker " + r.worker_id + " answered unknown pronoun " +
                                    std::to_string(resp.pronoun_index));
        }
        for (const auto &m : resp.selected) {
          const int n = m.kind == RefKind::kPool ? static_cast<int>(d.pool.size())
                        : m.kind == RefKind::kCandidate ? static_cast<int>(d.candidates.size())
                                                        : -1;
          if (m.index < 0 || m.index >= n) {
            throw ValidationError(d.dialogue_id, "responses.selected",
                                  "worker " + r.worker_id + " selected invalid mention " +
                                      ToString(m));
          }
        }
      }
    }
    std::map<std::string, std::vector<PronounResponse>> per_worker;
    for (const auto &r : recs) {
      auto &slot = per_worker[r.worker_id];
      slot.insert(slot.end(), r.responses.begin(), r.responses.end());
    }
    std::vector<WorkerClusterSet> sets;
    for (const auto &[worker, responses] : per_worker) sets.push_back(WorkerClusters(responses));
    const std::vector<Cluster> clusters = AdjudicateLinks(sets);

    std::vector<Anaphoricity> types;
    for (int i = 0; i < static_cast<int>(d.pronouns.size()); ++i) {
      try {
        types.push_back(VoteAnaphoricity(recs, i));
      } catch (const std::invalid_argument &) {
        throw ValidationError(d.dialogue_id, "pronouns[" + std::to_string(i) + "]",
                              "no annotation covers this pronoun");
      }
    }
    AdjudicatedDialogue adj = DeriveAntecedents(clusters, types, d);
    for (int i = 0; i < static_cast<int>(d.pronouns.size()); ++i) {
      d.pronouns[i].anaphoricity = adj.pronoun_types[i];
      d.pronouns[i].gold_antecedents = adj.pronoun_antecedents[i];
    }
    d.Validate();
    out.warnings.insert(out.warnings.end(), adj.warnings.begin(), adj.warnings.end());
    out.adjudicated.emplace(d.dialogue_id, std::move(adj));
  }
  out.iaa = ComputeIaa(filtered.records, out.adjudicated, &out.per_worker);
  return out;
}

DatasetSplit SplitDataset(const std::vector<Dialogue> &dialogues,
                          const std::vector<double> &ratios, std::uint64_t seed) {
  if (ratios.size() != 3 || std::any_of(ratios.begin(), ratios.end(),
                                        [](double r) { return r < 0.0; })) {
    throw std::invalid_argument("split ratios must be three non-negative numbers");
  }
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (sum <= 0.0) throw std::invalid_argument("split ratios sum to zero");
  std::vector<int> perm(dialogues.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n = static_cast<double>(dialogues.size());
  // Tolerate ratios like 4000/500/500 that divide exactly.
  const auto n_val = static_cast<std::size_t>(n * ratios[1] / sum + 1e-9);
  const auto n_test = static_cast<std::size_t>(n * ratios[2] / sum + 1e-9);
  DatasetSplit out;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    Dialogue d = dialogues[perm[i]];
    if (i < n_val) {
      d.split = Split::kVal;
      out.val.push_back(std::move(d));
    } else if (i < n_val + n_test) {
      d.split = Split::kTest;
      out.test.push_back(std::move(d));
    } else {
      d.split = Split::kTrain;
      out.train.push_back(std::move(d));
    }
  }
  return out;
}

AnnotationRecord AnnotationFromJson(const json &j, int line) {
  AnnotationRecord r;
  try {
    r.dialogue_id = j.at("dialogue_id").get<std::string>();
    r.worker_id = j.at("worker_id").get<std::string>();
    r.checkpoint_passed = j.at("checkpoint_passed").get<bool>();
    for (const json &rj : j.at("responses")) {
      PronounResponse resp;
      resp.pronoun_index = rj.at("pronoun_index").get<int>();
      resp.type = ParseResponseType(rj.at("type").get<std::string>());
      for (const json &s : rj.at("selected")) resp.selected.push_back(MentionRefFromJson(s));
      if ((resp.type == ResponseType::kNounPhrases) == resp.selected.empty()) {
        throw ParseError("selected must be non-empty exactly for noun-phrases responses");
      }
      for (const auto &m : resp.selected) {
        if (m.kind == RefKind::kPronoun) throw ParseError("selected mention must be a noun phrase");
      }
      r.responses.push_back(std::move(resp));
    }
  } catch (const json::exception &e) {
    throw ParseError(e.what(), line);
  } catch (const ParseError &e) {
    if (e.line() == 0 && line > 0) throw ParseError(e.what(), line);
    throw;
  }
  return r;
}

json AnnotationToJson(const AnnotationRecord &r) {
  json responses = json::array();
  for (const auto &resp : r.responses) {
    json selected = json::array();
    for (const auto &m : resp.selected) selected.push_back(MentionRefToJson(m));
    responses.push_back({{"pronoun_index", resp.pronoun_index},
                         {"type", ResponseTypeName(resp.type)},
                         {"selected", selected}});
  }
  return json{{"dialogue_id", r.dialogue_id},
              {"worker_id", r.worker_id},
              {"checkpoint_passed", r.checkpoint_passed},
              {"responses", responses}};
}

std::vector<AnnotationRecord> ParseAnnotations(std::string_view text) {
  std::vector<AnnotationRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ParseError(e.what(), lineno);
    }
    out.push_back(AnnotationFromJson(j, lineno));
  }
  return out;
}

std::vector<AnnotationRecord> LoadAnnotations(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open annotations " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseAnnotations(buffer.str());
}

json ClustersToJson(const std::vector<Cluster> &clusters) {
  json out = json::array();
  for (const auto &c : clusters) {
    json members = json::array();
    for (const auto &m : c) members.push_back(MentionRefToJson(m));
    out.push_back(members);
  }
  return out;
}

}  // namespace vpcr
