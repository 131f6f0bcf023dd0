#pragma once

// Reader for the rs3 XML format (header/relations, segment and group
// elements linked by parent/relname attributes).

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "unirst/document.hpp"
#include "unirst/error.hpp"
#include "unirst/relation_map.hpp"
#include "unirst/tree.hpp"

namespace unirst {

struct ReadOptions {
  std::string doc_id;
  std::string treebank_id;
  const RelationMap* relation_map = nullptr;
};

inline std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

namespace detail {

struct Rs3Node {
  std::string id;
  enum class Kind { Segment, SpanGroup, MultinucGroup } kind = Kind::Segment;
  std::optional<std::string> parent;
  std::string relname;
  int edu = -1;
  std::vector<std::string> children;  // ids, document order
};

class Rs3Builder {
 public:
  Rs3Builder(std::map<std::string, Rs3Node>& nodes, const std::set<std::string>& multinuc_rels,
             const RelationMap* map)
      : nodes_(nodes), multinuc_rels_(multinuc_rels), map_(map) {}

  DiscourseTree build(const std::string& id) {
    Rs3Node& n = nodes_.at(id);
    DiscourseTree core = build_core(n);

    using Sat = std::pair<DiscourseTree, std::string>;
    std::vector<Sat> left, right;
    for (const auto& cid : n.children) {
      const Rs3Node& c = nodes_.at(cid);
      if (!is_satellite_of(c, n)) continue;
      DiscourseTree sat = build(cid);
      if (sat.span.first > core.span.last)
        right.emplace_back(std::move(sat), mapped(c.relname));
      else if (sat.span.last < core.span.first)
        left.emplace_back(std::move(sat), mapped(c.relname));
      else
        throw ParseError("element " + cid, "satellite overlaps its nucleus");
    }
    // Satellites bind nearest-first: right-hand ones, then left-hand ones.
    std::sort(right.begin(), right.end(),
              [](const Sat& a, const Sat& b) { return a.first.span.first < b.first.span.first; });
    std::sort(left.begin(), left.end(),
              [](const Sat& a, const Sat& b) { return a.first.span.last > b.first.span.last; });
    for (auto& [sat, rel] : right)
      core = DiscourseTree::node({rel, Nuclearity::NS}, {std::move(core), std::move(sat)});
    for (auto& [sat, rel] : left)
      core = DiscourseTree::node({rel, Nuclearity::SN}, {std::move(sat), std::move(core)});
    return core;
  }

 private:
  bool is_satellite_of(const Rs3Node& child, const Rs3Node& parent) const {
    if (child.relname == "span") return false;
    if (parent.kind == Rs3Node::Kind::MultinucGroup && multinuc_rels_.count(child.relname))
      return false;
    return true;
  }

  std::string mapped(const std::string& relname) const {
    return map_ ? map_->map(relname) : RelationMap::capitalize(relname);
  }

  DiscourseTree build_core(const Rs3Node& n) {
    using Kind = Rs3Node::Kind;
    if (n.kind == Kind::Segment) {
      for (const auto& cid : n.children) {
        const Rs3Node& c = nodes_.at(cid);
        if (c.relname == "span")
          throw ParseError("element " + cid, "'span' child attached to a segment");
      }
      return DiscourseTree::leaf(n.edu);
    }
    if (n.kind == Kind::SpanGroup) {
      std::vector<std::string> nuclei;
      for (const auto& cid : n.children)
        if (nodes_.at(cid).relname == "span") nuclei.push_back(cid);
      if (nuclei.empty()) throw ParseError("element " + n.id, "span group without a nucleus");
      if (nuclei.size() > 1)
        throw ParseError("element " + n.id, "span group with more than one 'span' child");
      return build(nuclei.front());
    }
    std::vector<std::string> nuclei;
    for (const auto& cid : n.children) {
      const Rs3Node& c = nodes_.at(cid);
      if (c.relname == "span")
        throw ParseError("element " + cid, "'span' child attached to a multinuc group");
      if (multinuc_rels_.count(c.relname)) nuclei.push_back(cid);
    }
    if (nuclei.empty()) throw ParseError("element " + n.id, "multinuc group without nuclei");
    std::vector<DiscourseTree> kids;
    for (const auto& cid : nuclei) kids.push_back(build(cid));
    if (kids.size() == 1) return std::move(kids.front());
    std::vector<std::size_t> order(kids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return kids[a].span.first < kids[b].span.first;
    });
    std::vector<DiscourseTree> sorted;
    for (auto i : order) sorted.push_back(std::move(kids[i]));
    // The leftmost nucleus names the relation when nuclei disagree.
    const std::string rel = mapped(nodes_.at(nuclei[order.front()]).relname);
    return DiscourseTree::node({rel, Nuclearity::NN}, std::move(sorted));
  }

  std::map<std::string, Rs3Node>& nodes_;
  const std::set<std::string>& multinuc_rels_;
  const RelationMap* map_;
};

}  // namespace detail

inline Document parse_rs3(std::string_view bytes, const ReadOptions& opt) {
  namespace pt = boost::property_tree;
  using detail::Rs3Node;
  const std::string where = opt.doc_id.empty() ? "rs3" : opt.doc_id;

  pt::ptree root;
  try {
    std::istringstream in{std::string(bytes)};
    pt::read_xml(in, root, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(where + ":" + std::to_string(e.line()), "malformed XML: " + e.message());
  }
  const auto rst = root.get_child_optional("rst");
  if (!rst) throw ParseError(where, "missing <rst> root element");

  std::set<std::string> rst_rels, multinuc_rels;
  if (const auto rels = rst->get_child_optional("header.relations")) {
    for (const auto& [tag, rel] : *rels) {
      if (tag != "rel") continue;
      const auto name = rel.get_optional<std::string>("<xmlattr>.name");
      if (!name) throw ParseError(where, "<rel> without a name");
      const std::string type = rel.get("<xmlattr>.type", std::string("rst"));
      (type == "multinuc" ? multinuc_rels : rst_rels).insert(*name);
    }
  }

  std::map<std::string, Rs3Node> nodes;
  std::vector<std::string> order;
  Document doc;
  doc.doc_id = opt.doc_id;
  doc.treebank_id = opt.treebank_id;
  std::vector<int> edu_ends;

  if (const auto body = rst->get_child_optional("body")) {
    for (const auto& [tag, el] : *body) {
      if (tag != "segment" && tag != "group") continue;
      Rs3Node n;
      const auto id = el.get_optional<std::string>("<xmlattr>.id");
      if (!id) throw ParseError(where, "<" + tag + "> without an id");
      n.id = *id;
      if (nodes.count(n.id)) throw ParseError("element " + n.id, "duplicate id");
      if (const auto parent = el.get_optional<std::string>("<xmlattr>.parent")) n.parent = *parent;
      n.relname = el.get("<xmlattr>.relname", std::string());
      if (tag == "segment") {
        n.kind = Rs3Node::Kind::Segment;
        auto toks = whitespace_tokens(el.get_value<std::string>());
        if (toks.empty()) throw ParseError("element " + n.id, "empty segment");
        n.edu = static_cast<int>(edu_ends.size());
        for (auto& t : toks) doc.tokens.push_back(std::move(t));
        edu_ends.push_back(doc.n_tokens());
      } else {
        const std::string type = el.get("<xmlattr>.type", std::string("span"));
        if (type == "multinuc")
          n.kind = Rs3Node::Kind::MultinucGroup;
        else if (type == "span")
          n.kind = Rs3Node::Kind::SpanGroup;
        else
          throw ParseError("element " + n.id, "unknown group type '" + type + "'");
      }
      order.push_back(n.id);
      nodes.emplace(n.id, std::move(n));
    }
  }
  if (edu_ends.empty()) throw ParseError(where, "no segments");

  std::optional<std::string> root_id;
  for (const auto& id : order) {
    Rs3Node& n = nodes.at(id);
    if (!n.parent) {
      if (root_id)
        throw ParseError("element " + id,
                         "node without parent (document root is already " + *root_id + ")");
      root_id = id;
      continue;
    }
    if (!nodes.count(*n.parent))
      throw ParseError("element " + id, "parent " + *n.parent + " does not exist");
    if (n.relname.empty()) throw ParseError("element " + id, "missing relname");
    if (n.relname != "span" && !rst_rels.count(n.relname) && !multinuc_rels.count(n.relname))
      throw ParseError("element " + id, "undeclared relname '" + n.relname + "'");
    nodes.at(*n.parent).children.push_back(id);
  }
  if (!root_id) throw ParseError(where, "no root node (cycle in parent links)");

  for (const auto& id : order) {
    std::string cur = id;
    std::size_t steps = 0;
    while (nodes.at(cur).parent) {
      cur = *nodes.at(cur).parent;
      if (++steps > nodes.size()) throw ParseError("element " + id, "cycle in parent links");
    }
  }

  detail::Rs3Builder builder(nodes, multinuc_rels, opt.relation_map);
  DiscourseTree nary = builder.build(*root_id);
  doc.edus = edus_from_ends(edu_ends);
  const auto violations = validate(nary, doc.n_edus());
  if (!violations.empty()) throw ParseError(where, "invalid structure: " + violations.front());
  doc.tree = binarize(nary);
  doc.sentence_ends = derive_sentence_ends(doc.tokens, doc.edus);
  doc.sentences_derived = true;
  return doc;
}

}  // namespace unirst
