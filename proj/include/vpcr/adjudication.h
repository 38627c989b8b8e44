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

// Turning crowdsourced pronoun annotations into gold coreference data:
// checkpoint filtering, per-worker clustering, link-level majority voting,
// anaphoricity voting and antecedent derivation, plus MUC-based agreement
// and corpus statistics.

#ifndef VPCR_ADJUDICATION_H_
#define VPCR_ADJUDICATION_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vpcr/corpus.h"

namespace vpcr {

enum class ResponseType { kNounPhrases, kConceptNotPresent, kNonReferential };

const char *ResponseTypeName(ResponseType t);
ResponseType ParseResponseType(std::string_view name);

struct PronounResponse {
  int pronoun_index = 0;
  ResponseType type = ResponseType::kNounPhrases;
  std::vector<MentionRef> selected;
};

struct AnnotationRecord {
  std::string dialogue_id;
  std::string worker_id;
  bool checkpoint_passed = true;
  std::vector<PronounResponse> responses;
};

using Cluster = std::set<MentionRef>;

// Pairwise disjoint clusters, each sorted, ordered by their first member.
struct WorkerClusterSet {
  std::vector<Cluster> clusters;
};

struct AdjudicatedDialogue {
  std::vector<Cluster> clusters;
  std::vector<Anaphoricity> pronoun_types;
  std::vector<std::vector<MentionRef>> pronoun_antecedents;
  std::vector<std::string> warnings;
};

struct FilterResult {
  std::vector<AnnotationRecord> records;
  double retained_fraction = 0.0;  // 0 for empty input
};

FilterResult FilterWorkers(const std::vector<AnnotationRecord> &records);

// Seeds {pronoun} + selected for every noun-phrases response and merges
// intersecting sets to a fixpoint. Responses must share worker and dialogue.
WorkerClusterSet WorkerClusters(const std::vector<PronounResponse> &responses);

// Accepts a pronoun-anchored link when strictly more than half of the
// workers place both ends in one cluster; returns the connected components.
std::vector<Cluster> AdjudicateLinks(const std::vector<WorkerClusterSet> &worker_sets);

// Plurality vote over the records' responses for `pronoun_index`, ties broken
// anaphoric > no-antecedent > non-referential. Throws if no record covers it.
Anaphoricity VoteAnaphoricity(const std::vector<AnnotationRecord> &records,
                              int pronoun_index);

// Antecedents of an anaphoric pronoun are the noun phrases of its cluster that
// precede it in `d`'s global order. Anaphoric pronouns left without any
// antecedent are downgraded to no-antecedent with a warning.
AdjudicatedDialogue DeriveAntecedents(const std::vector<Cluster> &clusters,
                                      const std::vector<Anaphoricity> &pronoun_types,
                                      const Dialogue &d);

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Link-based MUC. Mentions absent from the other side count as singletons.
template <typename T>
PrfScore MucScore(const std::vector<std::set<T>> &key,
                  const std::vector<std::set<T>> &response);

struct WorkerAgreement {
  std::string worker_id;
  double f1 = 0.0;
};

// Mean over workers of MUC F1 against the adjudicated clusters, on 0-100.
// Each worker's clusters span every dialogue that worker annotated.
double ComputeIaa(const std::vector<AnnotationRecord> &records,
                  const std::map<std::string, AdjudicatedDialogue> &adjudicated,
                  std::vector<WorkerAgreement> *per_worker = nullptr);

struct CorpusStatistics {
  int dialogues = 0;
  int pronouns = 0;
  double pronouns_per_dialogue = 0.0;
  std::map<std::string, int> pronoun_forms;  // lowercased form -> count
  double anaphoric_pct = 0.0;
  double no_antecedent_pct = 0.0;
  double non_referential_pct = 0.0;
  double mean_antecedents = 0.0;  // over anaphoric pronouns
  // Anaphoric pronouns whose antecedents all come from the pool, in percent.
  double not_in_dialogue_pct = 0.0;

  nlohmann::json ToJson() const;
};

CorpusStatistics ComputeCorpusStatistics(const std::vector<Dialogue> &dialogues);

// Full pipeline over a dataset: filter, cluster per worker, adjudicate and
// write gold annotations back into the dialogues.
struct AdjudicationOutput {
  std::vector<Dialogue> dialogues;
  std::map<std::string, AdjudicatedDialogue> adjudicated;
  double retained_fraction = 0.0;
  double iaa = 0.0;
  std::vector<WorkerAgreement> per_worker;
  std::vector<std::string> warnings;
};

AdjudicationOutput Adjudicate(const std::vector<Dialogue> &dialogues,
                              const std::vector<AnnotationRecord> &records);

// Seeded shuffle into train/val/test by ratio (e.g. {8, 1, 1} or
// {4000, 500, 500}); sizes are floor-allocated with the remainder to train.
struct DatasetSplit {
  std::vector<Dialogue> train, val, test;
};
DatasetSplit SplitDataset(const std::vector<Dialogue> &dialogues,
                          const std::vector<double> &ratios, std::uint64_t seed);

AnnotationRecord AnnotationFromJson(const nlohmann::json &j, int line = 0);
nlohmann::json AnnotationToJson(const AnnotationRecord &r);
std::vector<AnnotationRecord> LoadAnnotations(const std::string &path);
std::vector<AnnotationRecord> ParseAnnotations(std::string_view text);

nlohmann::json ClustersToJson(const std::vector<Cluster> &clusters);

namespace internal {

// Σ (|K| - |partition of K by R|) and Σ (|K| - 1) over key clusters |K| >= 2.
template <typename T>
std::pair<double, double> MucCounts(const std::vector<std::set<T>> &key,
                                    const std::vector<std::set<T>> &response) {
  std::map<T, int> owner;
  for (int i = 0; i < static_cast<int>(response.size()); ++i) {
    for (const T &m : response[i]) owner[m] = i;
  }
  double num = 0.0, den = 0.0;
  for (const auto &k : key) {
    if (k.size() < 2) continue;
    std::set<int> parts;
    int singletons = 0;
    for (const T &m : k) {
      auto it = owner.find(m);
      if (it == owner.end()) {
        ++singletons;
      } else {
        parts.insert(it->second);
      }
    }
    num += static_cast<double>(k.size()) - static_cast<double>(parts.size() + singletons);
    den += static_cast<double>(k.size()) - 1.0;
  }
  return {num, den};
}

}  // namespace internal

template <typename T>
PrfScore MucScore(const std::vector<std::set<T>> &key,
                  const std::vector<std::set<T>> &response) {
  const auto [rn, rd] = internal::MucCounts(key, response);
  const auto [pn, pd] = internal::MucCounts(response, key);
  PrfScore s;
  s.recall = rd > 0 ? rn / rd : 0.0;
  s.precision = pd > 0 ? pn / pd : 0.0;
  s.f1 = s.precision + s.recall > 0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

}  // namespace vpcr

#endif  // VPCR_ADJUDICATION_H_
