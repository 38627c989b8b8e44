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

#include "vpcr/tree.h"

#include <algorithm>
#include <cctype>

namespace vpcr {

int TreeNode::Height() const {
  int h = 0;
  for (const auto &child : children) h = std::max(h, child->Height() + 1);
  return h;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool Done() {
    SkipSpace();
    return pos_ >= text_.size();
  }
  char Peek() {
    SkipSpace();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  std::string Atom() {
    SkipSpace();
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return std::string(text_.substr(begin, pos_ - begin));
  }
  void Expect(char c) {
    if (Peek() != c) {
      throw ParseError(std::string("expected '") + c + "' at offset " + std::to_string(pos_));
    }
    ++pos_;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

// Parses "(LABEL child...)" where children are subtrees or bare tokens.
std::unique_ptr<TreeNode> ParseNode(Reader &in, Tokens &leaves) {
  in.Expect('(');
  auto node = std::make_unique<TreeNode>();
  if (in.Peek() != '(') node->label = in.Atom();
  node->first_leaf = static_cast<int>(leaves.size());
  while (true) {
    const char c = in.Peek();
    if (c == '\0') throw ParseError("unbalanced brackets: missing ')'");
    if (c == ')') break;
    if (c == '(') {
      node->children.push_back(ParseNode(in, leaves));
    } else {
      auto leaf = std::make_unique<TreeNode>();
      leaf->label = in.Atom();
      leaf->first_leaf = static_cast<int>(leaves.size());
      leaf->last_leaf = leaf->first_leaf + 1;
      leaves.push_back(leaf->label);
      node->children.push_back(std::move(leaf));
    }
  }
  in.Expect(')');
  node->last_leaf = static_cast<int>(leaves.size());
  if (node->children.empty()) throw ParseError("empty constituent '" + node->label + "'");
  return node;
}

bool IsNounPhraseLabel(const std::string &label) {
  return label == "NP" || label.rfind("NP-", 0) == 0 || label.rfind("NP=", 0) == 0;
}

void Collect(const TreeNode &node, const Tokens &leaves, int turn, std::vector<Mention> &out) {
  if (node.is_leaf()) return;
  if (IsNounPhraseLabel(node.label) && node.Height() == 2) {
    Mention m;
    m.span = {Segment::kDialogue, turn, node.first_leaf, node.last_leaf};
    m.tokens.assign(leaves.begin() + node.first_leaf, leaves.begin() + node.last_leaf);
    m.type = MentionType::kNounPhrase;
    out.push_back(std::move(m));
    return;
  }
  for (const auto &child : node.children) Collect(*child, leaves, turn, out);
}

}  // namespace

ParseTree ParseTree::Parse(std::string_view text) {
  Reader in(text);
  if (in.Done()) throw ParseError("empty parse");
  ParseTree tree;
  tree.root_ = ParseNode(in, tree.leaves_);
  if (!in.Done()) throw ParseError("unbalanced brackets: trailing input after tree");
  return tree;
}

std::vector<Mention> ExtractNounPhrases(const ParseTree &tree, int turn) {
  std::vector<Mention> out;
  Collect(tree.root(), tree.leaves(), turn, out);
  return out;
}

std::vector<Mention> ExtractNounPhrases(std::string_view parse, int turn) {
  return ExtractNounPhrases(ParseTree::Parse(parse), turn);
}

}  // namespace vpcr
