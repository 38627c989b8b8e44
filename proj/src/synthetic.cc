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

#include "vpcr/synthetic.h"

#include <algorithm>
#include <random>
#include <string>

namespace vpcr {
namespace {

// Incrementally assembles a dialogue with consistent spans.
class Builder {
 public:
  explicit Builder(std::string id) { d_.dialogue_id = std::move(id); }

  MentionRef AddPool(const Tokens &tokens, PoolSource source) {
    const int index = static_cast<int>(d_.pool.entries.size());
    d_.pool.entries.push_back(
        {{Segment::kPool, index, 0, static_cast<int>(tokens.size())}, tokens,
         MentionType::kNounPhrase});
    d_.pool.sources.push_back(source);
    if (source == PoolSource::kCaption) {
      if (!d_.caption.empty()) d_.caption.push_back("and");
      d_.caption.insert(d_.caption.end(), tokens.begin(), tokens.end());
    }
    return {RefKind::kPool, index};
  }

  int AddTurn(const Tokens &tokens) {
    d_.turns.push_back(tokens);
    return static_cast<int>(d_.turns.size()) - 1;
  }

  MentionRef AddCandidate(int turn, int start, int end) {
    const Tokens &t = d_.turns[turn];
    d_.candidates.push_back({{Segment::kDialogue, turn, start, end},
                             Tokens(t.begin() + start, t.begin() + end),
                             MentionType::kNounPhrase});
    return {RefKind::kCandidate, static_cast<int>(d_.candidates.size()) - 1};
  }

  void AddPronoun(int turn, int position, Anaphoricity a, std::vector<MentionRef> gold) {
    PronounInstance p;
    p.mention = {{Segment::kDialogue, turn, position, position + 1},
                 {d_.turns[turn][position]},
                 MentionType::kPronoun};
    p.anaphoricity = a;
    p.gold_antecedents = std::move(gold);
    d_.pronouns.push_back(std::move(p));
  }

  void SetLabels(const std::vector<std::string> &labels) {
    for (const auto &l : labels) d_.label_set.labels.push_back({l});
  }

  Dialogue Finish() {
    if (d_.caption.empty()) d_.caption = {"a", "picture"};
    d_.Finalize();
    d_.Validate();
    return std::move(d_);
  }

 private:
  Dialogue d_;
};

template <typename T>
const T &Pick(const std::vector<T> &v, std::mt19937_64 &rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool Coin(std::mt19937_64 &rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

int UniformInt(std::mt19937_64 &rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

struct Referent {
  std::string noun;
  std::string pronoun;
  std::string label;  // empty when no label exists for the noun
};

}  // namespace

std::vector<Dialogue> GenerateOverfitSuite(int dialogues, std::uint64_t seed) {
  const std::vector<std::vector<Referent>> classes = {
      {{"man", "he", "person"}, {"boy", "he", "person"}},
      {{"woman", "she", "person"}, {"girl", "she", "person"}},
      {{"dog", "it", "dog"}, {"cat", "it", "cat"}, {"ball", "it", "ball"},
       {"kite", "it", "kite"}, {"cake", "it", "cake"}},
      {{"dogs", "they", "dog"}, {"kids", "they", "person"}},
  };
  const std::vector<std::string> all_labels = {"person", "dog", "cat", "ball", "kite", "cake"};
  const std::vector<std::string> adjectives = {"big", "happy", "old", "red"};
  std::mt19937_64 rng(seed);
  std::vector<Dialogue> out;
  for (int n = 0; n < dialogues; ++n) {
    Builder b("overfit-" + std::to_string(n));
    std::vector<int> class_ids = {0, 1, 2, 3};
    std::shuffle(class_ids.begin(), class_ids.end(), rng);
    const Referent r1 = Pick(classes[class_ids[0]], rng);
    const Referent r2 = Pick(classes[class_ids[1]], rng);

    std::vector<MentionRef> r1_mentions, r2_mentions;
    if (Coin(rng, 0.5)) r1_mentions.push_back(b.AddPool({"a", r1.noun}, PoolSource::kCaption));
    std::vector<std::string> others;
    for (const auto &c : classes) {
      for (const auto &r : c) {
        if (r.noun != r1.noun && r.noun != r2.noun) others.push_back(r.noun);
      }
    }
    std::shuffle(others.begin(), others.end(), rng);
    for (int i = 0; i < 2; ++i) b.AddPool({"the", others[i]}, PoolSource::kNegativeSample);

    int t = 0;
    if (r1_mentions.empty()) {
      t = b.AddTurn({"is", "there", "a", r1.noun, "?"});
      r1_mentions.push_back(b.AddCandidate(t, 2, 4));
    } else {
      t = b.AddTurn({"what", "is", "there", "?"});
    }
    t = b.AddTurn({"yes", ",", r1.pronoun, "is", Pick(adjectives, rng)});
    b.AddPronoun(t, 2, Anaphoricity::kAnaphoric, r1_mentions);
    t = b.AddTurn({"what", "about", "the", r2.noun, "?"});
    r2_mentions.push_back(b.AddCandidate(t, 2, 4));
    t = b.AddTurn({r2.pronoun, "is", Pick(adjectives, rng)});
    b.AddPronoun(t, 0, Anaphoricity::kAnaphoric, r2_mentions);
    if (Coin(rng, 0.5)) {
      t = b.AddTurn({"is", "it", "sunny", "?"});
      b.AddPronoun(t, 1, Anaphoricity::kNonReferential, {});
    }
    if (Coin(rng, 0.5)) {
      t = b.AddTurn({"does", r1.pronoun, "look", Pick(adjectives, rng), "?"});
      b.AddPronoun(t, 1, Anaphoricity::kAnaphoric, r1_mentions);
    }

    std::vector<std::string> labels;
    for (const auto *r : {&r1, &r2}) {
      if (Coin(rng, 0.7) && std::find(labels.begin(), labels.end(), r->label) == labels.end()) {
        labels.push_back(r->label);
      }
    }
    const int k = UniformInt(rng, 2, 4);
    std::vector<std::string> pool = all_labels;
    std::shuffle(pool.begin(), pool.end(), rng);
    for (const auto &l : pool) {
      if (static_cast<int>(labels.size()) >= k) break;
      if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    b.SetLabels(labels);
    out.push_back(b.Finish());
  }
  return out;
}

std::vector<Dialogue> GenerateVisualSuite(int dialogues, std::uint64_t seed,
                                          double contextual_fraction) {
  const std::vector<std::string> labeled = {"dog", "cat",  "horse", "car",  "bus",
                                            "kite", "cake", "bear",  "bird", "boat"};
  const std::vector<Referent> people = {
      {"man", "he", ""}, {"boy", "he", ""}, {"woman", "she", ""}, {"girl", "she", ""}};
  const std::vector<std::string> things = {"ball", "hat", "chair", "table", "cup", "book"};
  std::mt19937_64 rng(seed);
  std::vector<Dialogue> out;
  for (int n = 0; n < dialogues; ++n) {
    Builder b("visual-" + std::to_string(seed) + "-" + std::to_string(n));
    std::vector<std::string> nouns = labeled;
    std::shuffle(nouns.begin(), nouns.end(), rng);
    std::vector<std::string> labels;
    if (!Coin(rng, contextual_fraction)) {
      // nouns[0..2] go to the pool, nouns[0] is the referent.
      std::vector<int> slots = {0, 1, 2};
      std::shuffle(slots.begin(), slots.end(), rng);
      MentionRef target;
      for (int s : slots) {
        const MentionRef ref = b.AddPool({"the", nouns[s]}, PoolSource::kNegativeSample);
        if (s == 0) target = ref;
      }
      int t = b.AddTurn({"is", "it", "big", "?"});
      b.AddPronoun(t, 1, Anaphoricity::kAnaphoric, {target});
      t = b.AddTurn({"does", "it", "look", "happy", "?"});
      b.AddPronoun(t, 1, Anaphoricity::kAnaphoric, {target});
      labels.push_back(nouns[0]);
      const int extra = UniformInt(rng, 1, 3);
      for (int i = 0; i < extra; ++i) labels.push_back(nouns[3 + i]);
    } else {
      b.AddPool({"the", nouns[0]}, PoolSource::kNegativeSample);
      b.AddPool({"the", nouns[1]}, PoolSource::kNegativeSample);
      const Referent person = Pick(people, rng);
      const std::string thing = Pick(things, rng);
      const bool person_first = Coin(rng, 0.5);
      const std::string first = person_first ? person.noun : thing;
      const std::string second = person_first ? thing : person.noun;
      int t = b.AddTurn({"there", "is", "a", first, "and", "a", second});
      const MentionRef a = b.AddCandidate(t, 2, 4);
      const MentionRef c = b.AddCandidate(t, 5, 7);
      const bool ask_person = Coin(rng, 0.5);
      const MentionRef gold = (ask_person == person_first) ? a : c;
      t = b.AddTurn({"is", ask_person ? person.pronoun : "it", "big", "?"});
      b.AddPronoun(t, 1, Anaphoricity::kAnaphoric, {gold});
      const int k = UniformInt(rng, 2, 4);
      for (int i = 0; i < k; ++i) labels.push_back(nouns[2 + i]);
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    b.SetLabels(labels);
    out.push_back(b.Finish());
  }
  return out;
}

ModelConfig DeskScaleConfig() {
  ModelConfig c;
  c.static_embedding_dim = 16;
  c.hidden_size = 16;
  c.projection_dim = 32;
  c.contextual_scorer_hidden = {32, 32};
  c.visual_scorer_hidden = {64};
  c.length_feature_dim = 8;
  c.init_scale = 0.5;
  return c;
}

}  // namespace vpcr
