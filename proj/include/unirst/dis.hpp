#pragma once

// Reader for RST-DT style .dis files:
//   ( Root (span 1 2)
//     ( Nucleus (leaf 1) (rel2par span) (text _!First unit_!) )
//     ( Satellite (leaf 2) (rel2par elaboration-additional) (text _!second_!) ) )

#include <cctype>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unirst/document.hpp"
#include "unirst/error.hpp"
#include "unirst/relation_map.hpp"
#include "unirst/rs3.hpp"
#include "unirst/tree.hpp"

namespace unirst {

namespace detail {

struct DisNode {
  enum class Role { Root, Nucleus, Satellite } role = Role::Root;
  std::size_t offset = 0;
  int leaf = 0;  // 1-based; 0 for internal nodes
  int span_first = 0, span_last = 0;
  std::string rel2par;
  std::string text;
  std::vector<DisNode> children;
};

class DisParser {
 public:
  DisParser(std::string_view src, std::string where) : src_(src), where_(std::move(where)) {}

  DisNode parse_document() {
    skip_ws();
    DisNode root = parse_node();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing content after the root node");
    if (root.role != DisNode::Role::Root) fail("top-level node is not Root", root.offset);
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(where_ + ":byte " + std::to_string(at), msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= src_.size()) fail(std::string("unbalanced parentheses: expected '") + c + "' before end of input");
    if (src_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string atom() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
           src_[pos_] != '(' && src_[pos_] != ')')
      ++pos_;
    if (start == pos_) fail(pos_ >= src_.size() ? "unbalanced parentheses: unexpected end of input"
                                                : "expected an atom");
    return std::string(src_.substr(start, pos_ - start));
  }

  int integer() {
    const std::size_t at = pos_;
    const std::string a = atom();
    try {
      std::size_t used = 0;
      const int v = std::stoi(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      return v;
    } catch (const std::exception&) {
      fail("expected an integer, found '" + a + "'", at);
    }
  }

  // Text is delimited by _! ... _! and may contain parentheses.
  std::string text_field() {
    skip_ws();
    if (src_.compare(pos_, 2, "_!") != 0) return atom();
    const std::size_t start = pos_ + 2;
    const std::size_t end = src_.find("_!", start);
    if (end == std::string_view::npos) fail("unterminated _! text");
    pos_ = end + 2;
    return std::string(src_.substr(start, end - start));
  }

  DisNode parse_node() {
    skip_ws();
    DisNode node;
    node.offset = pos_;
    expect('(');
    const std::string role = atom();
    if (role == "Root")
      node.role = DisNode::Role::Root;
    else if (role == "Nucleus")
      node.role = DisNode::Role::Nucleus;
    else if (role == "Satellite")
      node.role = DisNode::Role::Satellite;
    else
      fail("unknown node type '" + role + "'", node.offset);

    bool has_extent = false;
    while (true) {
      skip_ws();
      if (pos_ >= src_.size()) fail("unbalanced parentheses: unexpected end of input");
      if (src_[pos_] == ')') {
        ++pos_;
        break;
      }
      if (src_[pos_] != '(') fail("expected '(' or ')'");
      // Peek at the head of the parenthesized item.
      std::size_t save = pos_;
      ++pos_;
      const std::string head = atom();
      if (head == "Nucleus" || head == "Satellite" || head == "Root") {
        pos_ = save;
        node.children.push_back(parse_node());
        continue;
      }
      if (head == "span") {
        node.span_first = integer();
        node.span_last = integer();
        has_extent = true;
      } else if (head == "leaf") {
        node.leaf = integer();
        node.span_first = node.span_last = node.leaf;
        has_extent = true;
      } else if (head == "rel2par") {
        node.rel2par = atom();
      } else if (head == "text") {
        node.text = text_field();
      } else {
        fail("unknown field '" + head + "'", save);
      }
      expect(')');
    }
    if (!has_extent) fail("node without span or leaf field", node.offset);
    if (node.leaf && !node.children.empty()) fail("leaf node with children", node.offset);
    if (!node.leaf && node.children.size() < 2) fail("span node with fewer than two children", node.offset);
    return node;
  }

  std::string_view src_;
  std::string where_;
  std::size_t pos_ = 0;
};

class DisBuilder {
 public:
  DisBuilder(std::string where, const RelationMap* map) : where_(std::move(where)), map_(map) {}

  Document finish(DisNode& root, Document doc) {
    DiscourseTree nary = build(root);
    doc.edus = edus_from_ends(edu_ends_);
    const auto violations = validate(nary, doc.n_edus());
    if (!violations.empty()) throw ParseError(where_, "invalid structure: " + violations.front());
    doc.tree = binarize(nary);
    doc.tokens = std::move(tokens_);
    doc.sentence_ends = derive_sentence_ends(doc.tokens, doc.edus);
    doc.sentences_derived = true;
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(where_ + ":byte " + std::to_string(at), msg);
  }

  std::string mapped(const std::string& rel) const {
    return map_ ? map_->map(rel) : RelationMap::capitalize(rel);
  }

  DiscourseTree build(const DisNode& n) {
    using Role = DisNode::Role;
    if (n.leaf) {
      const int expected = static_cast<int>(edu_ends_.size()) + 1;
      if (n.leaf != expected)
        fail("leaf index gap: expected leaf " + std::to_string(expected) + ", found " +
                 std::to_string(n.leaf),
             n.offset);
      std::vector<std::string> toks;
      for (auto& t : whitespace_tokens(n.text))
        if (t != "<P>") toks.push_back(std::move(t));
      if (toks.empty()) fail("leaf without text", n.offset);
      for (auto& t : toks) tokens_.push_back(std::move(t));
      edu_ends_.push_back(static_cast<int>(tokens_.size()));
      return DiscourseTree::leaf(n.leaf - 1);
    }

    const int first_leaf = static_cast<int>(edu_ends_.size()) + 1;
    std::vector<DiscourseTree> kids;
    for (const auto& c : n.children) kids.push_back(build(c));
    const int last_leaf = static_cast<int>(edu_ends_.size());
    if (n.span_first != first_leaf || n.span_last != last_leaf)
      fail("span (" + std::to_string(n.span_first) + " " + std::to_string(n.span_last) +
               ") disagrees with leaves " + std::to_string(first_leaf) + ".." +
               std::to_string(last_leaf),
           n.offset);

    std::vector<std::size_t> nuclei, sats;
    for (std::size_t i = 0; i < n.children.size(); ++i)
      (n.children[i].role == Role::Satellite ? sats : nuclei).push_back(i);
    if (nuclei.empty()) fail("node without a nucleus", n.offset);

    if (sats.empty()) {
      const std::string rel = mapped(n.children.front().rel2par);
      return DiscourseTree::node({rel, Nuclearity::NN}, std::move(kids));
    }
    if (nuclei.size() > 1) fail("node mixes several nuclei with satellites", n.offset);

    // Satellites bind to the nucleus nearest-first, right side then left side.
    const std::size_t p = nuclei.front();
    DiscourseTree core = std::move(kids[p]);
    for (std::size_t i = p + 1; i < kids.size(); ++i)
      core = DiscourseTree::node({mapped(n.children[i].rel2par), Nuclearity::NS},
                                 {std::move(core), std::move(kids[i])});
    for (std::size_t i = p; i-- > 0;)
      core = DiscourseTree::node({mapped(n.children[i].rel2par), Nuclearity::SN},
                                 {std::move(kids[i]), std::move(core)});
    return core;
  }

  std::string where_;
  const RelationMap* map_;
  std::vector<std::string> tokens_;
  std::vector<int> edu_ends_;
};

}  // namespace detail

inline Document parse_dis(std::string_view bytes, const ReadOptions& opt) {
  const std::string where = opt.doc_id.empty() ? "dis" : opt.doc_id;
  detail::DisParser parser(bytes, where);
  detail::DisNode root = parser.parse_document();
  Document doc;
  doc.doc_id = opt.doc_id;
  doc.treebank_id = opt.treebank_id;
  detail::DisBuilder builder(where, opt.relation_map);
  return builder.finish(root, std::move(doc));
}

}  // namespace unirst
