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

#include "vpcr/corpus.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace vpcr {

using nlohmann::json;

ParseError::ParseError(const std::string &message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                  : message),
      line_(line) {}

ValidationError::ValidationError(const std::string &dialogue_id,
                                 const std::string &field,
                                 const std::string &message)
    : std::runtime_error("dialogue " + dialogue_id + ", field " + field + ": " +
                         message),
      dialogue_id_(dialogue_id),
      field_(field) {}

bool Span::Overlaps(const Span &other) const {
  if (segment != other.segment || turn != other.turn) return false;
  return start < other.end && other.start < end;
}

std::string Mention::Text() const {
  std::string text;
  for (const auto &t : tokens) {
    if (!text.empty()) text += ' ';
    text += t;
  }
  return text;
}

std::string ToString(const MentionRef &ref) {
  switch (ref.kind) {
    case RefKind::kPool:
      return "pool:" + std::to_string(ref.index);
    case RefKind::kCandidate:
      return "dialogue:" + std::to_string(ref.index);
    case RefKind::kPronoun:
      return "pronoun:" + std::to_string(ref.index);
  }
  return "?";
}

const char *AnaphoricityName(Anaphoricity a) {
  switch (a) {
    case Anaphoricity::kAnaphoric:
      return "anaphoric";
    case Anaphoricity::kNoAntecedent:
      return "no-antecedent";
    case Anaphoricity::kNonReferential:
      return "non-referential";
    case Anaphoricity::kUnannotated:
      return "unannotated";
  }
  return "?";
}

Anaphoricity ParseAnaphoricity(std::string_view name) {
  if (name == "anaphoric") return Anaphoricity::kAnaphoric;
  if (name == "no-antecedent") return Anaphoricity::kNoAntecedent;
  if (name == "non-referential") return Anaphoricity::kNonReferential;
  if (name == "unannotated") return Anaphoricity::kUnannotated;
  throw ParseError("unknown anaphoricity '" + std::string(name) + "'");
}

const char *SplitName(Split s) {
  switch (s) {
    case Split::kAny:
      return "any";
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view name) {
  if (name == "any") return Split::kAny;
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ParseError("unknown split '" + std::string(name) + "'");
}

std::string Lowercase(std::string_view text) {
  std::string out(text);
  for (auto &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Tokens SplitWhitespace(std::string_view text) {
  Tokens out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool IsTargetPronoun(std::string_view token) {
  static const std::array<std::string_view, 10> kPronouns = {
      "it", "he", "she", "they", "him", "her", "them", "its", "his", "their"};
  const std::string lower = Lowercase(token);
  return std::find(kPronouns.begin(), kPronouns.end(), lower) != kPronouns.end();
}

std::vector<Mention> ExtractPronouns(const Tokens &tokens, int turn) {
  std::vector<Mention> out;
  for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
    if (!IsTargetPronoun(tokens[i])) continue;
    Mention m;
    m.span = {Segment::kDialogue, turn, i, i + 1};
    m.tokens = {tokens[i]};
    m.type = MentionType::kPronoun;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<MentionRef> GlobalMentionOrder(const Dialogue &d) {
  std::vector<MentionRef> order;
  for (int i = 0; i < static_cast<int>(d.pool.size()); ++i) {
    order.push_back({RefKind::kPool, i});
  }
  // (turn, start, end, kind rank, index)
  std::vector<std::tuple<int, int, int, int, MentionRef>> in_dialogue;
  for (int i = 0; i < static_cast<int>(d.candidates.size()); ++i) {
    const Span &s = d.candidates[i].span;
    in_dialogue.emplace_back(s.turn, s.start, s.end, 0, MentionRef{RefKind::kCandidate, i});
  }
  for (int i = 0; i < static_cast<int>(d.pronouns.size()); ++i) {
    const Span &s = d.pronouns[i].mention.span;
    in_dialogue.emplace_back(s.turn, s.start, s.end, 1, MentionRef{RefKind::kPronoun, i});
  }
  std::stable_sort(in_dialogue.begin(), in_dialogue.end());
  for (const auto &entry : in_dialogue) order.push_back(std::get<4>(entry));
  return order;
}

void Dialogue::Finalize() {
  order_ = GlobalMentionOrder(*this);
  position_.clear();
  for (int i = 0; i < static_cast<int>(order_.size()); ++i) position_[order_[i]] = i;
}

int Dialogue::Position(const MentionRef &ref) const {
  auto it = position_.find(ref);
  if (it == position_.end()) {
    throw std::out_of_range("dialogue " + dialogue_id + ": no mention " + ToString(ref));
  }
  return it->second;
}

const Mention &Dialogue::Get(const MentionRef &ref) const {
  switch (ref.kind) {
    case RefKind::kPool:
      return pool.entries.at(ref.index);
    case RefKind::kCandidate:
      return candidates.at(ref.index);
    case RefKind::kPronoun:
      return pronouns.at(ref.index).mention;
  }
  throw std::logic_error("bad mention kind");
}

const Tokens &Dialogue::SegmentTokens(const Span &span) const {
  if (span.segment == Segment::kPool) return pool.entries.at(span.turn).tokens;
  return turns.at(span.turn);
}

namespace {

bool RefInRange(const Dialogue &d, const MentionRef &ref) {
  switch (ref.kind) {
    case RefKind::kPool:
      return ref.index >= 0 && ref.index < static_cast<int>(d.pool.size());
    case RefKind::kCandidate:
      return ref.index >= 0 && ref.index < static_cast<int>(d.candidates.size());
    case RefKind::kPronoun:
      return ref.index >= 0 && ref.index < static_cast<int>(d.pronouns.size());
  }
  return false;
}

void CheckDialogueSpan(const Dialogue &d, const Span &s, const std::string &field) {
  if (s.segment != Segment::kDialogue) {
    throw ValidationError(d.dialogue_id, field, "span must address the dialogue");
  }
  if (s.turn < 0 || s.turn >= static_cast<int>(d.turns.size())) {
    throw ValidationError(d.dialogue_id, field,
                          "turn " + std::to_string(s.turn) + " out of range");
  }
  const int len = static_cast<int>(d.turns[s.turn].size());
  if (s.start < 0 || s.start >= s.end || s.end > len) {
    throw ValidationError(d.dialogue_id, field,
                          "span [" + std::to_string(s.start) + ", " +
                              std::to_string(s.end) + ") invalid for turn of length " +
                              std::to_string(len));
  }
}

}  // namespace

void Dialogue::Validate() const {
  if (dialogue_id.empty()) throw ValidationError("<empty>", "dialogue_id", "empty id");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::string field = "candidates[" + std::to_string(i) + "]";
    const Mention &m = candidates[i];
    CheckDialogueSpan(*this, m.span, field);
    if (m.type != MentionType::kNounPhrase) {
      throw ValidationError(dialogue_id, field, "candidate is not a noun phrase");
    }
    const Tokens &turn = turns[m.span.turn];
    if (!std::equal(m.tokens.begin(), m.tokens.end(), turn.begin() + m.span.start,
                    turn.begin() + m.span.end) ||
        static_cast<int>(m.tokens.size()) != m.span.length()) {
      throw ValidationError(dialogue_id, field, "tokens do not match span");
    }
    if (i > 0) {
      const Span &prev = candidates[i - 1].span;
      if (std::tie(prev.turn, prev.start, prev.end) >=
          std::tie(m.span.turn, m.span.start, m.span.end)) {
        throw ValidationError(dialogue_id, field, "candidates not in mention order");
      }
      if (prev.Overlaps(m.span)) {
        throw ValidationError(dialogue_id, field, "overlapping candidate spans");
      }
    }
  }
  for (std::size_t i = 0; i < pool.entries.size(); ++i) {
    if (pool.entries[i].tokens.empty()) {
      throw ValidationError(dialogue_id, "pool[" + std::to_string(i) + "]", "empty entry");
    }
  }
  if (pool.sources.size() != pool.entries.size()) {
    throw ValidationError(dialogue_id, "pool", "source count mismatch");
  }
  std::set<Tokens> seen_labels;
  for (std::size_t i = 0; i < label_set.labels.size(); ++i) {
    const std::string field = "labels[" + std::to_string(i) + "]";
    if (label_set.labels[i].empty()) throw ValidationError(dialogue_id, field, "empty label");
    if (!seen_labels.insert(label_set.labels[i]).second) {
      throw ValidationError(dialogue_id, field, "duplicate label");
    }
  }
  for (std::size_t i = 0; i < pronouns.size(); ++i) {
    const std::string field = "pronouns[" + std::to_string(i) + "]";
    const PronounInstance &p = pronouns[i];
    CheckDialogueSpan(*this, p.mention.span, field);
    if (p.mention.span.length() != 1 || p.mention.tokens.size() != 1) {
      throw ValidationError(dialogue_id, field, "pronoun must be a single token");
    }
    if (p.mention.tokens[0] != turns[p.mention.span.turn][p.mention.span.start]) {
      throw ValidationError(dialogue_id, field, "tokens do not match span");
    }
    if (i > 0) {
      const Span &prev = pronouns[i - 1].mention.span;
      if (std::tie(prev.turn, prev.start) >= std::tie(p.mention.span.turn, p.mention.span.start)) {
        throw ValidationError(dialogue_id, field, "pronouns not in mention order");
      }
    }
    const bool anaphoric = p.anaphoricity == Anaphoricity::kAnaphoric;
    if (anaphoric != !p.gold_antecedents.empty()) {
      throw ValidationError(dialogue_id, field + ".antecedents",
                            "antecedents must be non-empty exactly for anaphoric pronouns");
    }
    std::set<MentionRef> seen;
    for (const MentionRef &ref : p.gold_antecedents) {
      if (ref.kind == RefKind::kPronoun || !RefInRange(*this, ref)) {
        throw ValidationError(dialogue_id, field + ".antecedents",
                              "invalid reference " + ToString(ref));
      }
      if (!seen.insert(ref).second) {
        throw ValidationError(dialogue_id, field + ".antecedents",
                              "duplicate reference " + ToString(ref));
      }
      if (!order_.empty() && Position(ref) >= Position({RefKind::kPronoun, static_cast<int>(i)})) {
        throw ValidationError(dialogue_id, field + ".antecedents",
                              ToString(ref) + " does not precede the pronoun");
      }
    }
  }
}

namespace {

json RefToJson(const MentionRef &ref) {
  const char *kind = ref.kind == RefKind::kPool        ? "pool"
                     : ref.kind == RefKind::kCandidate ? "dialogue"
                                                       : "pronoun";
  return json{{"kind", kind}, {"index", ref.index}};
}

MentionRef RefFromJson(const json &j) {
  const std::string kind = j.at("kind").get<std::string>();
  MentionRef ref;
  if (kind == "pool") {
    ref.kind = RefKind::kPool;
  } else if (kind == "dialogue") {
    ref.kind = RefKind::kCandidate;
  } else if (kind == "pronoun") {
    ref.kind = RefKind::kPronoun;
  } else {
    throw ParseError("unknown mention kind '" + kind + "'");
  }
  ref.index = j.at("index").get<int>();
  return ref;
}

}  // namespace

nlohmann::json MentionRefToJson(const MentionRef &ref) { return RefToJson(ref); }
MentionRef MentionRefFromJson(const nlohmann::json &j) { return RefFromJson(j); }

json DialogueToJson(const Dialogue &d) {
  json j;
  j["dialogue_id"] = d.dialogue_id;
  if (d.split != Split::kAny) j["split"] = SplitName(d.split);
  j["caption"] = d.caption;
  j["turns"] = d.turns;
  json candidates = json::array();
  for (const Mention &m : d.candidates) {
    candidates.push_back({{"turn", m.span.turn}, {"start", m.span.start}, {"end", m.span.end}});
  }
  j["candidates"] = candidates;
  json pronouns = json::array();
  for (const PronounInstance &p : d.pronouns) {
    json ants = json::array();
    for (const MentionRef &r : p.gold_antecedents) ants.push_back(RefToJson(r));
    pronouns.push_back({{"turn", p.mention.span.turn},
                        {"start", p.mention.span.start},
                        {"end", p.mention.span.end},
                        {"anaphoricity", AnaphoricityName(p.anaphoricity)},
                        {"antecedents", ants}});
  }
  j["pronouns"] = pronouns;
  json pool = json::array();
  for (std::size_t i = 0; i < d.pool.size(); ++i) {
    pool.push_back({{"tokens", d.pool.entries[i].tokens},
                    {"source", d.pool.sources[i] == PoolSource::kCaption ? "caption"
                                                                         : "negative-sample"}});
  }
  j["pool"] = pool;
  json labels = json::array();
  for (const Tokens &label : d.label_set.labels) {
    Mention tmp;
    tmp.tokens = label;
    labels.push_back(tmp.Text());
  }
  j["labels"] = labels;
  return j;
}

Dialogue DialogueFromJson(const json &j, int line) {
  Dialogue d;
  try {
    d.dialogue_id = j.at("dialogue_id").get<std::string>();
    if (j.contains("split")) d.split = ParseSplit(j.at("split").get<std::string>());
    d.caption = j.at("caption").get<Tokens>();
    d.turns = j.at("turns").get<std::vector<Tokens>>();
    for (const json &pj : j.at("pool")) {
      Mention m;
      m.tokens = pj.at("tokens").get<Tokens>();
      m.span = {Segment::kPool, static_cast<int>(d.pool.entries.size()), 0,
                static_cast<int>(m.tokens.size())};
      const std::string source = pj.at("source").get<std::string>();
      if (source == "caption") {
        d.pool.sources.push_back(PoolSource::kCaption);
      } else if (source == "negative-sample") {
        d.pool.sources.push_back(PoolSource::kNegativeSample);
      } else {
        throw ParseError("unknown pool source '" + source + "'");
      }
      d.pool.entries.push_back(std::move(m));
    }
    for (const json &lj : j.at("labels")) {
      d.label_set.labels.push_back(SplitWhitespace(lj.get<std::string>()));
    }
    for (const json &cj : j.at("candidates")) {
      Mention m;
      m.span = {Segment::kDialogue, cj.at("turn").get<int>(), cj.at("start").get<int>(),
                cj.at("end").get<int>()};
      m.type = MentionType::kNounPhrase;
      d.candidates.push_back(std::move(m));
    }
    for (const json &pj : j.at("pronouns")) {
      PronounInstance p;
      p.mention.span = {Segment::kDialogue, pj.at("turn").get<int>(), pj.at("start").get<int>(),
                        pj.at("end").get<int>()};
      p.mention.type = MentionType::kPronoun;
      p.anaphoricity = ParseAnaphoricity(pj.at("anaphoricity").get<std::string>());
      for (const json &aj : pj.at("antecedents")) p.gold_antecedents.push_back(RefFromJson(aj));
      d.pronouns.push_back(std::move(p));
    }
  } catch (const json::exception &e) {
    throw ParseError(e.what(), line);
  } catch (const ParseError &e) {
    if (e.line() == 0 && line > 0) throw ParseError(e.what(), line);
    throw;
  }

  // Slice tokens only after bounds are known to be valid.
  for (std::size_t i = 0; i < d.candidates.size(); ++i) {
    Mention &m = d.candidates[i];
    CheckDialogueSpan(d, m.span, "candidates[" + std::to_string(i) + "]");
    const Tokens &turn = d.turns[m.span.turn];
    m.tokens.assign(turn.begin() + m.span.start, turn.begin() + m.span.end);
  }
  for (std::size_t i = 0; i < d.pronouns.size(); ++i) {
    Mention &m = d.pronouns[i].mention;
    CheckDialogueSpan(d, m.span, "pronouns[" + std::to_string(i) + "]");
    const Tokens &turn = d.turns[m.span.turn];
    m.tokens.assign(turn.begin() + m.span.start, turn.begin() + m.span.end);
  }
  d.Finalize();
  d.Validate();
  return d;
}

std::vector<Dialogue> ParseDataset(std::string_view text, Split expected_split) {
  std::vector<Dialogue> out;
  std::set<std::string> ids;
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
    if (!j.is_object()) throw ParseError("record is not an object", lineno);
    Dialogue d = DialogueFromJson(j, lineno);
    if (expected_split != Split::kAny && d.split != Split::kAny && d.split != expected_split) {
      throw ValidationError(d.dialogue_id, "split",
                            std::string("expected ") + SplitName(expected_split) + ", found " +
                                SplitName(d.split));
    }
    if (!ids.insert(d.dialogue_id).second) {
      throw ValidationError(d.dialogue_id, "dialogue_id", "duplicate id");
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Dialogue> LoadDataset(const std::string &path, Split expected_split) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseDataset(buffer.str(), expected_split);
}

std::string SerializeDataset(const std::vector<Dialogue> &dialogues) {
  std::string out;
  for (const Dialogue &d : dialogues) {
    out += DialogueToJson(d).dump();
    out += '\n';
  }
  return out;
}

void SaveDataset(const std::string &path, const std::vector<Dialogue> &dialogues) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset " + path);
  out << SerializeDataset(dialogues);
}

}  // namespace vpcr
