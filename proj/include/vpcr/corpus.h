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

// Data model for dialogues grounded in a shared image: token sequences,
// candidate noun phrases, target pronouns, the external mention pool and the
// detected object labels of the image.

#ifndef VPCR_CORPUS_H_
#define VPCR_CORPUS_H_

#include <compare>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vpcr {

using Tokens = std::vector<std::string>;

// Malformed input text. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string &message, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

// Well-formed input that violates a data-model invariant.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string &dialogue_id, const std::string &field,
                  const std::string &message);
  const std::string &dialogue_id() const { return dialogue_id_; }
  const std::string &field() const { return field_; }

 private:
  std::string dialogue_id_;
  std::string field_;
};

enum class Segment { kPool, kDialogue };

// Token span, end-exclusive. Pool spans address the pool entry's own tokens
// and use `turn` as the pool entry index.
struct Span {
  Segment segment = Segment::kDialogue;
  int turn = 0;
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool Overlaps(const Span &other) const;
  auto operator<=>(const Span &) const = default;
};

enum class MentionType { kNounPhrase, kPronoun };

struct Mention {
  Span span;
  Tokens tokens;
  MentionType type = MentionType::kNounPhrase;

  std::string Text() const;
};

// Which list of a Dialogue a MentionRef indexes into.
enum class RefKind { kPool, kCandidate, kPronoun };

struct MentionRef {
  RefKind kind = RefKind::kPool;
  int index = 0;

  bool is_noun_phrase() const { return kind != RefKind::kPronoun; }
  auto operator<=>(const MentionRef &) const = default;
};

std::string ToString(const MentionRef &ref);

enum class Anaphoricity { kAnaphoric, kNoAntecedent, kNonReferential, kUnannotated };

const char *AnaphoricityName(Anaphoricity a);
Anaphoricity ParseAnaphoricity(std::string_view name);

struct PronounInstance {
  Mention mention;
  Anaphoricity anaphoricity = Anaphoricity::kUnannotated;
  std::vector<MentionRef> gold_antecedents;
};

enum class PoolSource { kCaption, kNegativeSample };

struct MentionPool {
  std::vector<Mention> entries;
  std::vector<PoolSource> sources;

  std::size_t size() const { return entries.size(); }
};

// Detected object labels. The null label is implicit at index size().
struct ObjectLabelSet {
  std::vector<Tokens> labels;

  int K() const { return static_cast<int>(labels.size()); }
  int null_index() const { return K(); }
};

enum class Split { kAny, kTrain, kVal, kTest };

const char *SplitName(Split s);
Split ParseSplit(std::string_view name);

class Dialogue {
 public:
  std::string dialogue_id;
  // Optional split tag; kAny when the record carries none.
  Split split = Split::kAny;
  Tokens caption;
  std::vector<Tokens> turns;
  std::vector<Mention> candidates;
  std::vector<PronounInstance> pronouns;
  MentionPool pool;
  ObjectLabelSet label_set;

  // Materializes the global mention order. Must be called after any edit
  // to candidates, pronouns or pool.
  void Finalize();

  const std::vector<MentionRef> &order() const { return order_; }
  // Position of `ref` in the global order.
  int Position(const MentionRef &ref) const;
  const Mention &Get(const MentionRef &ref) const;
  const Tokens &SegmentTokens(const Span &span) const;

  // Throws ValidationError on the first violated invariant.
  void Validate() const;

 private:
  std::vector<MentionRef> order_;
  std::map<MentionRef, int> position_;
};

// Pool entries in stored order, then in-dialogue mentions by
// (turn, start, end); a candidate precedes a pronoun on an identical span.
std::vector<MentionRef> GlobalMentionOrder(const Dialogue &d);

// Third-person personal and possessive pronouns targeted for resolution.
bool IsTargetPronoun(std::string_view token);
std::vector<Mention> ExtractPronouns(const Tokens &tokens, int turn = 0);

// {"kind": "pool"|"dialogue"|"pronoun", "index": n}
nlohmann::json MentionRefToJson(const MentionRef &ref);
MentionRef MentionRefFromJson(const nlohmann::json &j);

nlohmann::json DialogueToJson(const Dialogue &d);
// `line` is only used in error messages.
Dialogue DialogueFromJson(const nlohmann::json &j, int line = 0);

// Records tagged with a split other than `expected_split` are rejected;
// untagged records are accepted under any expectation.
std::vector<Dialogue> LoadDataset(const std::string &path,
                                  Split expected_split = Split::kAny);
std::vector<Dialogue> ParseDataset(std::string_view text,
                                   Split expected_split = Split::kAny);
void SaveDataset(const std::string &path, const std::vector<Dialogue> &dialogues);
std::string SerializeDataset(const std::vector<Dialogue> &dialogues);

Tokens SplitWhitespace(std::string_view text);
std::string Lowercase(std::string_view text);

}  // namespace vpcr

#endif  // VPCR_CORPUS_H_
