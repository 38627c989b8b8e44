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
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace vpcr {
namespace {

using nlohmann::json;
using testing::DataPath;
using testing::ToyDialogue;

constexpr MentionRef kP0{RefKind::kPronoun, 0};
constexpr MentionRef kP1{RefKind::kPronoun, 1};
constexpr MentionRef kP2{RefKind::kPronoun, 2};
constexpr MentionRef kA{RefKind::kPool, 0};
constexpr MentionRef kB{RefKind::kPool, 1};
constexpr MentionRef kC{RefKind::kCandidate, 0};

PronounResponse Np(int p, std::vector<MentionRef> selected) {
  return {p, ResponseType::kNounPhrases, std::move(selected)};
}
PronounResponse Typed(int p, ResponseType t) { return {p, t, {}}; }

AnnotationRecord Record(std::string worker, bool passed, std::vector<PronounResponse> r) {
  return {"d", std::move(worker), passed, std::move(r)};
}

// Order-insensitive view of a cluster list.
std::set<Cluster> AsSet(const std::vector<Cluster> &clusters) {
  return {clusters.begin(), clusters.end()};
}

TEST(FilterWorkersTest, AllPassedIsIdentity) {
  const std::vector<AnnotationRecord> in = {Record("a", true, {}), Record("b", true, {})};
  const FilterResult r = FilterWorkers(in);
  EXPECT_EQ(r.records.size(), 2u);
  EXPECT_DOUBLE_EQ(r.retained_fraction, 1.0);
}

TEST(FilterWorkersTest, OneFailingRecordOfTwenty) {
  std::vector<AnnotationRecord> in;
  for (int i = 0; i < 19; ++i) in.push_back(Record("w" + std::to_string(i), true, {}));
  in.push_back(Record("bad", false, {}));
  const FilterResult r = FilterWorkers(in);
  EXPECT_EQ(r.records.size(), 19u);
  EXPECT_DOUBLE_EQ(r.retained_fraction, 0.95);
  for (const auto &rec : r.records) EXPECT_NE(rec.worker_id, "bad");
}

TEST(FilterWorkersTest, EmptyInput) {
  const FilterResult r = FilterWorkers({});
  EXPECT_TRUE(r.records.empty());
}

TEST(WorkerClustersTest, SharedMentionMerges) {
  const auto ws = WorkerClusters({Np(0, {kA, kB}), Np(1, {kB, kC})});
  ASSERT_EQ(ws.clusters.size(), 1u);
  EXPECT_EQ(ws.clusters[0], (Cluster{kP0, kP1, kA, kB, kC}));
}

TEST(WorkerClustersTest, DisjointSetsStaySeparate) {
  const auto ws = WorkerClusters({Np(0, {kA}), Np(1, {kC})});
  EXPECT_EQ(AsSet(ws.clusters), (std::set<Cluster>{{kP0, kA}, {kP1, kC}}));
}

TEST(WorkerClustersTest, NonReferentialSeedsNothing) {
  const auto ws = WorkerClusters({Typed(0, ResponseType::kNonReferential), Np(1, {kA})});
  ASSERT_EQ(ws.clusters.size(), 1u);
  EXPECT_EQ(ws.clusters[0].count(kP0), 0u);
}

TEST(WorkerClustersTest, TransitiveChainAcrossThree) {
  const auto ws = WorkerClusters({Np(0, {kA}), Np(2, {kC}), Np(1, {kA, kC})});
  ASSERT_EQ(ws.clusters.size(), 1u);
  EXPECT_EQ(ws.clusters[0].size(), 5u);
}

TEST(WorkerClustersTest, IndependentOfOrderAndIdempotent) {
  std::vector<PronounResponse> r = {Np(0, {kA}), Np(1, {kB}), Np(2, {kB, kC}),
                                    Typed(3, ResponseType::kConceptNotPresent)};
  const auto reference = AsSet(WorkerClusters(r).clusters);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(r.begin(), r.end(), rng);
    EXPECT_EQ(AsSet(WorkerClusters(r).clusters), reference);
  }
  // Feeding the clusters back as responses reproduces them.
  std::vector<PronounResponse> again;
  for (const auto &c : reference) {
    std::vector<MentionRef> nps;
    for (const auto &m : c) {
      if (m.is_noun_phrase()) nps.push_back(m);
    }
    for (const auto &m : c) {
      if (!m.is_noun_phrase()) again.push_back(Np(m.index, nps));
    }
  }
  EXPECT_EQ(AsSet(WorkerClusters(again).clusters), reference);
}

TEST(WorkerClustersTest, OutputIsPairwiseDisjoint) {
  const auto ws = WorkerClusters({Np(0, {kA}), Np(1, {kB}), Np(2, {kC})});
  for (std::size_t i = 0; i < ws.clusters.size(); ++i) {
    for (std::size_t j = i + 1; j < ws.clusters.size(); ++j) {
      for (const auto &m : ws.clusters[i]) EXPECT_EQ(ws.clusters[j].count(m), 0u);
    }
  }
}

WorkerClusterSet Set(std::vector<Cluster> c) { return {std::move(c)}; }

TEST(AdjudicateLinksTest, ThreeOfFourAccepted) {
  const auto out = AdjudicateLinks(
      {Set({{kP0, kA}}), Set({{kP0, kA}}), Set({{kP0, kA}}), Set({{kP0, kB}})});
  EXPECT_EQ(AsSet(out), (std::set<Cluster>{{kP0, kA}}));
}

TEST(AdjudicateLinksTest, TwoOfFourRejected) {
  const auto out = AdjudicateLinks(
      {Set({{kP0, kA}}), Set({{kP0, kA}}), Set({{kP0, kB}}), Set({{kP0, kB}})});
  EXPECT_TRUE(out.empty());
}

TEST(AdjudicateLinksTest, SingleWorkerVerbatim) {
  const std::vector<Cluster> clusters = {{kP0, kA, kB}, {kP1, kC}};
  EXPECT_EQ(AsSet(AdjudicateLinks({Set(clusters)})), AsSet(clusters));
}

TEST(AdjudicateLinksTest, NounPhrasePairsDoNotVote) {
  // Both workers put A and B together, but never with the same pronoun.
  const auto out = AdjudicateLinks({Set({{kP0, kA, kB}}), Set({{kP1, kA, kB}})});
  EXPECT_TRUE(out.empty());
}

TEST(AdjudicateLinksTest, InvariantUnderWorkerPermutation) {
  std::vector<WorkerClusterSet> sets = {Set({{kP0, kA}, {kP1, kC}}), Set({{kP0, kA, kP1}}),
                                        Set({{kP1, kC}}), Set({{kP0, kB}}), Set({{kP0, kA}})};
  const auto reference = AsSet(AdjudicateLinks(sets));
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(sets.begin(), sets.end(), rng);
    EXPECT_EQ(AsSet(AdjudicateLinks(sets)), reference);
  }
}

std::vector<AnnotationRecord> Votes(const std::vector<ResponseType> &types) {
  std::vector<AnnotationRecord> out;
  for (std::size_t i = 0; i < types.size(); ++i) {
    out.push_back(Record("w" + std::to_string(i), true,
                         {{0, types[i], types[i] == ResponseType::kNounPhrases
                                            ? std::vector<MentionRef>{kA}
                                            : std::vector<MentionRef>{}}}));
  }
  return out;
}

TEST(VoteAnaphoricityTest, Plurality) {
  using R = ResponseType;
  EXPECT_EQ(VoteAnaphoricity(Votes({R::kNounPhrases, R::kNounPhrases, R::kNounPhrases,
                                    R::kNonReferential}),
                             0),
            Anaphoricity::kAnaphoric);
  EXPECT_EQ(VoteAnaphoricity(Votes({R::kNonReferential, R::kNonReferential}), 0),
            Anaphoricity::kNonReferential);
}

TEST(VoteAnaphoricityTest, TiePriority) {
  using R = ResponseType;
  EXPECT_EQ(VoteAnaphoricity(Votes({R::kNounPhrases, R::kNounPhrases, R::kNonReferential,
                                    R::kNonReferential}),
                             0),
            Anaphoricity::kAnaphoric);
  EXPECT_EQ(VoteAnaphoricity(Votes({R::kConceptNotPresent, R::kNonReferential}), 0),
            Anaphoricity::kNoAntecedent);
}

TEST(VoteAnaphoricityTest, NoCoverage) {
  EXPECT_THROW(VoteAnaphoricity(Votes({ResponseType::kNounPhrases}), 3), std::invalid_argument);
}

TEST(DeriveAntecedentsTest, OnlyPrecedingNounPhrases) {
  // Toy order: pool0, pool1, it(p0), cand0, he(p1), his(p2), cand1.
  const Dialogue d = ToyDialogue();
  const std::vector<Cluster> clusters = {{kA, kP2, {RefKind::kCandidate, 1}, kC}};
  const auto out = DeriveAntecedents(
      clusters, {Anaphoricity::kNonReferential, Anaphoricity::kNoAntecedent, Anaphoricity::kAnaphoric},
      d);
  ASSERT_EQ(out.pronoun_antecedents.size(), 3u);
  EXPECT_EQ(out.pronoun_antecedents[2], (std::vector<MentionRef>{kA, kC}));
  EXPECT_TRUE(out.warnings.empty());
}

TEST(DeriveAntecedentsTest, TypeGatesDerivation) {
  const Dialogue d = ToyDialogue();
  const auto out = DeriveAntecedents(
      {{kA, kP0}},
      {Anaphoricity::kNonReferential, Anaphoricity::kNoAntecedent, Anaphoricity::kNoAntecedent}, d);
  EXPECT_TRUE(out.pronoun_antecedents[0].empty());
}

TEST(DeriveAntecedentsTest, AnaphoricWithoutClusterIsDowngraded) {
  const Dialogue d = ToyDialogue();
  const auto out = DeriveAntecedents(
      {}, {Anaphoricity::kAnaphoric, Anaphoricity::kNoAntecedent, Anaphoricity::kNoAntecedent}, d);
  EXPECT_EQ(out.pronoun_types[0], Anaphoricity::kNoAntecedent);
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(DeriveAntecedentsTest, NeverAtOrAfterPronoun) {
  const Dialogue d = ToyDialogue();
  std::mt19937_64 rng(2);
  const std::vector<MentionRef> all = d.order();
  for (int trial = 0; trial < 100; ++trial) {
    Cluster c;
    for (const auto &m : all) {
      if (rng() % 2) c.insert(m);
    }
    const auto out = DeriveAntecedents(
        {c}, {Anaphoricity::kAnaphoric, Anaphoricity::kAnaphoric, Anaphoricity::kAnaphoric}, d);
    for (int p = 0; p < 3; ++p) {
      const int pos = d.Position({RefKind::kPronoun, p});
      for (const auto &a : out.pronoun_antecedents[p]) {
        EXPECT_LT(d.Position(a), pos);
        EXPECT_TRUE(a.is_noun_phrase());
        EXPECT_EQ(c.count(a), 1u);
      }
    }
  }
}

using S = std::vector<std::set<char>>;

struct MucCase {
  S key;
  S response;
  double precision;
  double recall;
};

TEST(MucScoreTest, HandComputedFixtures) {
  const std::vector<MucCase> cases = {
      {{{'A', 'B', 'C'}}, {{'A', 'B', 'C'}}, 1.0, 1.0},
      {{{'A', 'B', 'C'}}, {{'A', 'B'}, {'C'}}, 1.0, 0.5},
      {{{'A'}, {'B'}, {'C'}}, {{'A', 'B'}}, 0.0, 0.0},
      {{{'A', 'B'}, {'C', 'D'}}, {{'A', 'B', 'C', 'D'}}, 2.0 / 3.0, 1.0},
      {{{'A', 'B', 'C', 'D'}}, {{'A', 'B'}, {'C', 'D'}}, 1.0, 2.0 / 3.0},
      {{{'A', 'B', 'C', 'D'}}, {{'A'}, {'B'}, {'C'}, {'D'}}, 0.0, 0.0},
      {{{'A', 'B', 'C'}}, {{'A', 'B', 'D'}}, 0.5, 0.5},
      {{{'A', 'B'}}, {}, 0.0, 0.0},
      {{{'A', 'B', 'C', 'D', 'E'}}, {{'A', 'B'}, {'C', 'D', 'E'}}, 1.0, 3.0 / 4.0},
      {{{'A', 'B', 'C'}, {'D', 'E'}}, {{'A', 'B'}, {'C', 'D', 'E'}}, 2.0 / 3.0, 2.0 / 3.0},
      {{{'A', 'B'}, {'C', 'D'}, {'E', 'F'}}, {{'A', 'C', 'E'}, {'B', 'D', 'F'}}, 0.0, 0.0},
  };
  for (const auto &c : cases) {
    const PrfScore s = MucScore(c.key, c.response);
    EXPECT_NEAR(s.precision, c.precision, 1e-12);
    EXPECT_NEAR(s.recall, c.recall, 1e-12);
    const double f1 = c.precision + c.recall > 0
                          ? 2 * c.precision * c.recall / (c.precision + c.recall)
                          : 0.0;
    EXPECT_NEAR(s.f1, f1, 1e-12);
  }
}

TEST(MucScoreTest, KeyAbcVersusAbC) {
  const PrfScore s = MucScore<char>({{'A', 'B', 'C'}}, {{'A', 'B'}, {'C'}});
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_NEAR(s.f1, 2.0 / 3.0, 1e-15);
}

TEST(MucScoreTest, InvariantUnderReordering) {
  const S key = {{'A', 'B', 'C'}, {'D', 'E'}, {'F'}};
  const S response = {{'A', 'D'}, {'B', 'C', 'E', 'F'}};
  const PrfScore ref = MucScore(key, response);
  S k2(key.rbegin(), key.rend()), r2(response.rbegin(), response.rend());
  const PrfScore s = MucScore(k2, r2);
  EXPECT_EQ(s.precision, ref.precision);
  EXPECT_EQ(s.recall, ref.recall);
  // Relabeling every mention preserves the score.
  auto relabel = [](const S &x) {
    S out;
    for (const auto &c : x) {
      std::set<char> m;
      for (char ch : c) m.insert(static_cast<char>('z' - (ch - 'A')));
      out.push_back(m);
    }
    return out;
  };
  const PrfScore s3 = MucScore(relabel(key), relabel(response));
  EXPECT_EQ(s3.f1, ref.f1);
  EXPECT_EQ(MucScore(key, key).f1, 1.0);
}

TEST(ComputeIaaTest, MeanOfWorkerF1) {
  // Worker a matches the adjudication; worker b splits the cluster.
  AdjudicatedDialogue adj;
  adj.clusters = {{kP0, kA, kB}};
  const std::vector<AnnotationRecord> records = {
      Record("a", true, {Np(0, {kA, kB})}),
      Record("b", true, {Np(0, {kA}), Typed(1, ResponseType::kNonReferential)}),
  };
  std::vector<WorkerAgreement> per;
  const double iaa = ComputeIaa(records, {{"d", adj}}, &per);
  // b: key {p0, A} against {p0, A, B}: P = 1, R = 1/2, F1 = 2/3.
  EXPECT_NEAR(iaa, 100.0 * (1.0 + 2.0 / 3.0) / 2.0, 1e-9);
  EXPECT_NEAR(iaa, 83.33, 0.01);
  ASSERT_EQ(per.size(), 2u);
}

TEST(ComputeIaaTest, IdenticalWorkersScore100) {
  AdjudicatedDialogue adj;
  adj.clusters = {{kP0, kA}};
  const std::vector<AnnotationRecord> records = {Record("a", true, {Np(0, {kA})}),
                                                 Record("b", true, {Np(0, {kA})})};
  EXPECT_DOUBLE_EQ(ComputeIaa(records, {{"d", adj}}), 100.0);
}

Dialogue WithId(Dialogue d, const std::string &id) {
  d.dialogue_id = id;
  return d;
}

TEST(CorpusStatisticsTest, SingleDialogueCounts) {
  Dialogue d = ToyDialogue();
  d.turns.push_back({"is", "it", "sunny"});
  d.pronouns.push_back({{{Segment::kDialogue, 2, 1, 2}, {"it"}, MentionType::kPronoun},
                        Anaphoricity::kNonReferential,
                        {}});
  d.Finalize();
  ASSERT_NO_THROW(d.Validate());
  const CorpusStatistics s = ComputeCorpusStatistics({d});
  EXPECT_EQ(s.pronouns, 4);
  EXPECT_DOUBLE_EQ(s.pronouns_per_dialogue, 4.0);
  EXPECT_DOUBLE_EQ(s.anaphoric_pct, 50.0);
  EXPECT_DOUBLE_EQ(s.no_antecedent_pct, 25.0);
  EXPECT_DOUBLE_EQ(s.non_referential_pct, 25.0);
  EXPECT_DOUBLE_EQ(s.mean_antecedents, 1.5);
  EXPECT_DOUBLE_EQ(s.not_in_dialogue_pct, 50.0);
  EXPECT_EQ(s.pronoun_forms.at("it"), 2);
}

TEST(CorpusStatisticsTest, Empty) {
  const CorpusStatistics s = ComputeCorpusStatistics({});
  EXPECT_EQ(s.pronouns, 0);
  EXPECT_DOUBLE_EQ(s.pronouns_per_dialogue, 0.0);
}

std::set<Cluster> ClustersFromJson(const json &j) {
  std::set<Cluster> out;
  for (const auto &c : j) {
    Cluster cluster;
    for (const auto &m : c) cluster.insert(MentionRefFromJson(m));
    out.insert(cluster);
  }
  return out;
}

TEST(AdjudicateTest, MatchesHandAdjudicatedGoldenFile) {
  const auto dialogues = LoadDataset(DataPath("adjudication/dataset.jsonl"));
  const auto records = LoadAnnotations(DataPath("adjudication/annotations.jsonl"));
  json golden;
  std::ifstream(DataPath("adjudication/golden.json")) >> golden;

  const AdjudicationOutput out = Adjudicate(dialogues, records);
  EXPECT_NEAR(out.retained_fraction, golden["retained_fraction"].get<double>(), 1e-12);
  EXPECT_NEAR(out.iaa, golden["iaa"].get<double>(), 1e-9);
  for (const auto &w : out.per_worker) {
    EXPECT_NEAR(w.f1, golden["per_worker_f1"][w.worker_id].get<double>(), 1e-9) << w.worker_id;
  }
  EXPECT_EQ(out.per_worker.size(), 4u);
  ASSERT_EQ(out.dialogues.size(), 3u);
  for (const Dialogue &d : out.dialogues) {
    SCOPED_TRACE(d.dialogue_id);
    const json &g = golden["dialogues"][d.dialogue_id];
    EXPECT_EQ(AsSet(out.adjudicated.at(d.dialogue_id).clusters), ClustersFromJson(g["clusters"]));
    ASSERT_EQ(d.pronouns.size(), g["anaphoricity"].size());
    for (std::size_t p = 0; p < d.pronouns.size(); ++p) {
      EXPECT_EQ(AnaphoricityName(d.pronouns[p].anaphoricity),
                g["anaphoricity"][p].get<std::string>());
      std::set<MentionRef> expected;
      for (const auto &m : g["antecedents"][p]) expected.insert(MentionRefFromJson(m));
      EXPECT_EQ(std::set<MentionRef>(d.pronouns[p].gold_antecedents.begin(),
                                     d.pronouns[p].gold_antecedents.end()),
                expected);
    }
    EXPECT_EQ(static_cast<int>(out.adjudicated.at(d.dialogue_id).warnings.size()),
              g.value("warnings", 0));
    EXPECT_NO_THROW(d.Validate());
  }
}

TEST(AdjudicateTest, AllWorkersFailed) {
  auto records = LoadAnnotations(DataPath("adjudication/annotations.jsonl"));
  for (auto &r : records) r.checkpoint_passed = false;
  const auto dialogues = LoadDataset(DataPath("adjudication/dataset.jsonl"));
  try {
    Adjudicate(dialogues, records);
    FAIL() << "expected an error";
  } catch (const std::exception &e) {
    EXPECT_NE(std::string(e.what()).find("no valid annotations"), std::string::npos);
  }
}

TEST(AdjudicateTest, UnknownDialogueId) {
  auto records = LoadAnnotations(DataPath("adjudication/annotations.jsonl"));
  records[0].dialogue_id = "nope";
  EXPECT_THROW(Adjudicate(LoadDataset(DataPath("adjudication/dataset.jsonl")), records),
               std::invalid_argument);
}

TEST(AdjudicateTest, OutOfRangePronoun) {
  auto records = LoadAnnotations(DataPath("adjudication/annotations.jsonl"));
  records[0].responses[0].pronoun_index = 17;
  EXPECT_THROW(Adjudicate(LoadDataset(DataPath("adjudication/dataset.jsonl")), records),
               ValidationError);
}

TEST(AnnotationJsonTest, SelectedIffNounPhrases) {
  const json bad = json::parse(
      R"({"dialogue_id":"d","worker_id":"w","checkpoint_passed":true,)"
      R"("responses":[{"pronoun_index":0,"type":"noun-phrases","selected":[]}]})");
  EXPECT_THROW(AnnotationFromJson(bad), std::exception);
  const json bad2 = json::parse(
      R"({"dialogue_id":"d","worker_id":"w","checkpoint_passed":true,)"
      R"("responses":[{"pronoun_index":0,"type":"non-referential","selected":[{"kind":"pool","index":0}]}]})");
  EXPECT_THROW(AnnotationFromJson(bad2), std::exception);
}

TEST(AnnotationJsonTest, RoundTrip) {
  const auto records = LoadAnnotations(DataPath("adjudication/annotations.jsonl"));
  for (const auto &r : records) {
    const AnnotationRecord back = AnnotationFromJson(AnnotationToJson(r));
    EXPECT_EQ(AnnotationToJson(back), AnnotationToJson(r));
  }
}

TEST(SplitDatasetTest, DeterministicAndComplete) {
  std::vector<Dialogue> ds;
  for (int i = 0; i < 10; ++i) ds.push_back(WithId(ToyDialogue(), "d" + std::to_string(i)));
  const DatasetSplit a = SplitDataset(ds, {8, 1, 1}, 7);
  const DatasetSplit b = SplitDataset(ds, {8, 1, 1}, 7);
  EXPECT_EQ(a.train.size(), 8u);
  EXPECT_EQ(a.val.size(), 1u);
  EXPECT_EQ(a.test.size(), 1u);
  auto ids = [](const std::vector<Dialogue> &v) {
    std::vector<std::string> out;
    for (const auto &d : v) out.push_back(d.dialogue_id);
    return out;
  };
  EXPECT_EQ(ids(a.train), ids(b.train));
  EXPECT_EQ(ids(a.val), ids(b.val));
  EXPECT_EQ(ids(a.test), ids(b.test));
  std::set<std::string> all;
  for (const auto *part : {&a.train, &a.val, &a.test}) {
    for (const auto &id : ids(*part)) all.insert(id);
  }
  EXPECT_EQ(all.size(), 10u);
  for (const auto &d : a.val) EXPECT_EQ(d.split, Split::kVal);
}

TEST(SplitDatasetTest, PaperScaleRatios) {
  std::vector<Dialogue> ds;
  for (int i = 0; i < 50; ++i) ds.push_back(WithId(ToyDialogue(), "d" + std::to_string(i)));
  const DatasetSplit s = SplitDataset(ds, {4000, 500, 500}, 1);
  EXPECT_EQ(s.train.size(), 40u);
  EXPECT_EQ(s.val.size(), 5u);
  EXPECT_EQ(s.test.size(), 5u);
}

}  // namespace
}  // namespace vpcr
