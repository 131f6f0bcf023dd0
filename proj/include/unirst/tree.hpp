#pragma once

// Discourse tree model: labels, spans, validation, binarization and
// constituent extraction.

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "unirst/error.hpp"

namespace unirst {

enum class Nuclearity { NS, SN, NN };

inline constexpr Nuclearity kAllNuclearities[] = {Nuclearity::NS, Nuclearity::SN,
                                                  Nuclearity::NN};

inline std::string_view to_string(Nuclearity n) {
  switch (n) {
    case Nuclearity::NS: return "NS";
    case Nuclearity::SN: return "SN";
    case Nuclearity::NN: return "NN";
  }
  return "??";
}

inline std::optional<Nuclearity> parse_nuclearity(std::string_view s) {
  if (s == "NS") return Nuclearity::NS;
  if (s == "SN") return Nuclearity::SN;
  if (s == "NN") return Nuclearity::NN;
  return std::nullopt;
}

// A Relation_Nuclearity atom. Equality is on the pair, so Elaboration_NS and
// Elaboration_SN are different labels.
struct RelationLabel {
  std::string relation;
  Nuclearity nuclearity = Nuclearity::NS;

  auto operator<=>(const RelationLabel&) const = default;
  bool operator==(const RelationLabel&) const = default;

  std::string str() const {
    return relation + "_" + std::string(to_string(nuclearity));
  }
};

// Parses "Relation_NS". The relation part may itself contain underscores.
inline RelationLabel parse_label(std::string_view s) {
  const auto cut = s.rfind('_');
  if (cut == std::string_view::npos || cut == 0)
    throw InputError("malformed label '" + std::string(s) + "' (expected Relation_NS|SN|NN)");
  const auto nuc = parse_nuclearity(s.substr(cut + 1));
  if (!nuc)
    throw InputError("malformed label '" + std::string(s) + "' (bad nuclearity suffix)");
  return RelationLabel{std::string(s.substr(0, cut)), *nuc};
}

inline std::ostream& operator<<(std::ostream& os, const RelationLabel& l) {
  return os << l.str();
}

// Inclusive EDU index range.
struct Span {
  int first = 0;
  int last = 0;

  int size() const { return last - first + 1; }
  auto operator<=>(const Span&) const = default;
  bool operator==(const Span&) const = default;
};

struct DiscourseTree {
  Span span;
  // Relation holding between the children; absent on leaves.
  std::optional<RelationLabel> label;
  std::vector<DiscourseTree> children;
  // Set on the intermediate nodes binarize() introduces, so debinarize() can
  // tell them apart from genuinely nested nodes with the same label.
  bool chained = false;

  bool is_leaf() const { return children.empty(); }
  bool operator==(const DiscourseTree&) const = default;

  static DiscourseTree leaf(int edu) { return DiscourseTree{{edu, edu}, std::nullopt, {}, false}; }

  static DiscourseTree node(RelationLabel label, std::vector<DiscourseTree> children) {
    DiscourseTree t;
    t.span = {children.front().span.first, children.back().span.last};
    t.label = std::move(label);
    t.children = std::move(children);
    return t;
  }
};

struct Constituent {
  Span span;
  Nuclearity nuclearity = Nuclearity::NS;
  std::string relation;

  auto operator<=>(const Constituent&) const = default;
  bool operator==(const Constituent&) const = default;
};

// Child indices from the root.
using NodePath = std::vector<int>;

inline std::string path_string(const NodePath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(path[i]);
  }
  return out.empty() ? std::string("root") : out;
}

inline void write_bracketed(std::ostream& os, const DiscourseTree& t) {
  if (t.is_leaf()) {
    os << t.span.first;
    return;
  }
  os << '(' << t.span.first << '-' << t.span.last << ' '
     << (t.label ? t.label->str() : std::string("?"));
  for (const auto& c : t.children) {
    os << ' ';
    write_bracketed(os, c);
  }
  os << ')';
}

inline std::string to_bracketed(const DiscourseTree& t) {
  std::ostringstream os;
  write_bracketed(os, t);
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const DiscourseTree& t) {
  write_bracketed(os, t);
  return os;
}

struct ValidateOptions {
  bool require_binary = false;
};

namespace detail {

inline void validate_node(const DiscourseTree& t, const std::string& where,
                          const ValidateOptions& opt, std::vector<std::string>& out) {
  const Span s = t.span;
  if (s.first > s.last) {
    out.push_back(where + ": inverted span (" + std::to_string(s.first) + "," +
                  std::to_string(s.last) + ")");
    return;
  }
  if (t.is_leaf()) {
    if (s.first != s.last) out.push_back(where + ": leaf spans more than one EDU");
    if (t.label) out.push_back(where + ": leaf carries a label");
    return;
  }
  if (s.first == s.last) out.push_back(where + ": internal node over a single EDU");
  if (t.children.size() == 1) out.push_back(where + ": unary node");
  if (opt.require_binary && t.children.size() > 2)
    out.push_back(where + ": node has " + std::to_string(t.children.size()) +
                  " children in a binarized tree");
  if (!t.label) out.push_back(where + ": unlabeled internal node");

  if (t.children.front().span.first != s.first)
    out.push_back(where + ": first child does not start at parent start");
  for (std::size_t i = 0; i + 1 < t.children.size(); ++i) {
    const int end = t.children[i].span.last;
    const int next = t.children[i + 1].span.first;
    if (next > end + 1)
      out.push_back(where + ": gap between children " + std::to_string(i) + " and " +
                    std::to_string(i + 1));
    else if (next < end + 1)
      out.push_back(where + ": overlap between children " + std::to_string(i) + " and " +
                    std::to_string(i + 1));
  }
  if (t.children.back().span.last != s.last)
    out.push_back(where + ": last child does not end at parent end");

  for (std::size_t i = 0; i < t.children.size(); ++i)
    validate_node(t.children[i], where + "." + std::to_string(i), opt, out);
}

}  // namespace detail

// Returns human-readable violations; empty means the tree is well formed and
// covers EDUs 0..n_edus-1.
inline std::vector<std::string> validate(const DiscourseTree& tree, int n_edus,
                                         ValidateOptions opt = {}) {
  std::vector<std::string> out;
  if (n_edus < 1) {
    out.push_back("document has no EDUs");
    return out;
  }
  if (tree.span.first != 0 || tree.span.last != n_edus - 1)
    out.push_back("root: span (" + std::to_string(tree.span.first) + "," +
                  std::to_string(tree.span.last) + ") does not cover EDUs 0.." +
                  std::to_string(n_edus - 1));
  detail::validate_node(tree, "root", opt, out);
  return out;
}

// Multinuclear nodes with k > 2 children become a right-branching chain of
// k-1 binary nodes that all carry the original label.
inline DiscourseTree binarize(const DiscourseTree& tree) {
  if (tree.is_leaf()) return tree;
  std::vector<DiscourseTree> kids;
  kids.reserve(tree.children.size());
  for (const auto& c : tree.children) kids.push_back(binarize(c));
  if (kids.size() <= 2) {
    DiscourseTree out = tree;
    out.children = std::move(kids);
    return out;
  }
  if (!tree.label || tree.label->nuclearity != Nuclearity::NN)
    throw InputError("non-binary mononuclear node at span (" + std::to_string(tree.span.first) +
                     "," + std::to_string(tree.span.last) + ")");

  DiscourseTree tail = DiscourseTree::node(*tree.label, {kids[kids.size() - 2], kids.back()});
  tail.chained = true;
  for (std::size_t i = kids.size() - 2; i-- > 1;) {
    DiscourseTree link = DiscourseTree::node(*tree.label, {kids[i], std::move(tail)});
    link.chained = true;
    tail = std::move(link);
  }
  DiscourseTree top = DiscourseTree::node(*tree.label, {kids.front(), std::move(tail)});
  top.chained = tree.chained;
  return top;
}

// Collapses the chains binarize() introduced back into n-ary nodes.
inline DiscourseTree debinarize(const DiscourseTree& tree) {
  if (tree.is_leaf()) return tree;
  DiscourseTree out;
  out.span = tree.span;
  out.label = tree.label;
  out.chained = tree.chained;

  const DiscourseTree* cur = &tree;
  while (cur->children.size() == 2 && cur->children[1].chained &&
         cur->children[1].label == tree.label) {
    out.children.push_back(debinarize(cur->children[0]));
    cur = &cur->children[1];
  }
  for (const auto& c : cur->children) out.children.push_back(debinarize(c));
  return out;
}

// One constituent per internal node, pre-order.
inline std::vector<Constituent> constituents(const DiscourseTree& tree) {
  std::vector<Constituent> out;
  std::function<void(const DiscourseTree&)> walk = [&](const DiscourseTree& t) {
    if (t.is_leaf()) return;
    if (!t.label) throw InvariantError("constituents(): unlabeled internal node");
    out.push_back({t.span, t.label->nuclearity, t.label->relation});
    for (const auto& c : t.children) walk(c);
  };
  walk(tree);
  return out;
}

inline int count_internal(const DiscourseTree& t) {
  if (t.is_leaf()) return 0;
  int n = 1;
  for (const auto& c : t.children) n += count_internal(c);
  return n;
}

// Throws InputError if the path does not resolve.
inline const DiscourseTree& node_at(const DiscourseTree& root, const NodePath& path) {
  const DiscourseTree* cur = &root;
  for (int idx : path) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= cur->children.size())
      throw InputError("node path " + path_string(path) + " does not resolve");
    cur = &cur->children[static_cast<std::size_t>(idx)];
  }
  return *cur;
}

// Visits every node with its path, pre-order.
inline void for_each_node(const DiscourseTree& root,
                          const std::function<void(const DiscourseTree&, const NodePath&)>& fn) {
  NodePath path;
  std::function<void(const DiscourseTree&)> walk = [&](const DiscourseTree& t) {
    fn(t, path);
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      path.push_back(static_cast<int>(i));
      walk(t.children[i]);
      path.pop_back();
    }
  };
  walk(root);
}

// Returns a copy with every label passed through `fn`.
inline DiscourseTree map_labels(const DiscourseTree& t,
                                const std::function<RelationLabel(const RelationLabel&)>& fn) {
  DiscourseTree out = t;
  if (out.label) out.label = fn(*out.label);
  for (auto& c : out.children) c = map_labels(c, fn);
  return out;
}

// Shifts every span by `delta` EDUs.
inline DiscourseTree shift_spans(const DiscourseTree& t, int delta) {
  DiscourseTree out = t;
  out.span.first += delta;
  out.span.last += delta;
  for (auto& c : out.children) c = shift_spans(c, delta);
  return out;
}

}  // namespace unirst
