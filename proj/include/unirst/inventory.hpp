#pragma once

// Relation inventories: per-treebank label sets, infrequent-label merging,
// the unified label space and the per-treebank masks over it.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "unirst/document.hpp"
#include "unirst/error.hpp"
#include "unirst/relation_map.hpp"
#include "unirst/tree.hpp"

namespace unirst {

inline constexpr double kMaskPenalty = -1e9;
inline constexpr std::size_t kDefaultMergeThreshold = 10;

struct Inventory {
  std::string inventory_id;
  std::vector<RelationLabel> labels;  // sorted, unique
  std::map<RelationLabel, std::size_t> counts;
  std::set<std::string> member_treebanks;

  bool contains(const RelationLabel& l) const {
    return std::binary_search(labels.begin(), labels.end(), l);
  }
  std::size_t size() const { return labels.size(); }

  // Position of `l` within labels, or npos.
  std::size_t index_of(const RelationLabel& l) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), l);
    return it != labels.end() && *it == l ? static_cast<std::size_t>(it - labels.begin())
                                          : static_cast<std::size_t>(-1);
  }

  bool operator==(const Inventory&) const = default;
};

inline Inventory inventory_from_counts(std::string id, std::map<RelationLabel, std::size_t> counts,
                                       std::set<std::string> members) {
  Inventory inv;
  inv.inventory_id = std::move(id);
  for (const auto& [l, n] : counts) inv.labels.push_back(l);
  inv.counts = std::move(counts);
  inv.member_treebanks = std::move(members);
  return inv;
}

inline void count_labels(const DiscourseTree& t, std::map<RelationLabel, std::size_t>& counts) {
  if (t.is_leaf()) return;
  if (t.label) ++counts[*t.label];
  for (const auto& c : t.children) count_labels(c, counts);
}

// Label frequencies over the train split.
inline Inventory collect_inventory(const Corpus& corpus) {
  if (corpus.train.empty())
    throw InputError("no training documents in corpus " + corpus.treebank_id);
  std::map<RelationLabel, std::size_t> counts;
  for (const auto& d : corpus.train) count_labels(d.tree, counts);
  return inventory_from_counts(corpus.treebank_id, std::move(counts), {corpus.treebank_id});
}

struct MergeRule {
  RelationLabel source;
  RelationLabel target;

  bool operator==(const MergeRule&) const = default;
};

// One `Source_NS → Target_NS` rule per line.
inline std::vector<MergeRule> parse_merge_rules(std::string_view text,
                                                const std::string& source = "merge rules") {
  std::vector<MergeRule> rules;
  std::istringstream in{std::string(text)};
  std::string line, lhs, rhs;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    if (!split_arrow_line(line, lhs, rhs, where)) continue;
    try {
      rules.push_back({parse_label(lhs), parse_label(rhs)});
    } catch (const InputError& e) {
      throw ParseError(where, e.what());
    }
  }
  return rules;
}

inline std::vector<MergeRule> load_merge_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open merge rules " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_merge_rules(ss.str(), path);
}

struct MergeResult {
  Inventory inventory;
  std::map<RelationLabel, RelationLabel> relabel;   // applied merges only
  std::vector<RelationLabel> rare_unmatched;         // below threshold, no rule, kept
};

// Labels with fewer than `threshold` instances and a matching rule are folded
// into the rule's target. Rare labels without a rule are kept and reported.
inline MergeResult apply_merges(const Inventory& inv, const std::vector<MergeRule>& rules,
                                std::size_t threshold = kDefaultMergeThreshold) {
  std::map<RelationLabel, RelationLabel> rule_of;
  for (const auto& r : rules) {
    auto [it, inserted] = rule_of.emplace(r.source, r.target);
    if (!inserted && it->second != r.target)
      throw InputError("conflicting merge rules for " + r.source.str());
  }
  for (const auto& r : rules) {
    if (r.source == r.target) throw InputError("merge rule maps " + r.source.str() + " to itself");
    if (rule_of.count(r.target))
      throw InputError("merge rule target " + r.target.str() + " would itself be merged");
  }

  MergeResult out;
  std::map<RelationLabel, std::size_t> merged;
  for (const auto& [label, n] : inv.counts) {
    if (n < threshold) {
      if (auto it = rule_of.find(label); it != rule_of.end()) {
        out.relabel.emplace(label, it->second);
        merged[it->second] += n;
        continue;
      }
      out.rare_unmatched.push_back(label);
    }
    merged[label] += n;
  }
  out.inventory = inventory_from_counts(inv.inventory_id, std::move(merged), inv.member_treebanks);
  return out;
}

inline Document relabel_document(const Document& d,
                                 const std::map<RelationLabel, RelationLabel>& relabel) {
  if (relabel.empty()) return d;
  Document out = d;
  out.tree = map_labels(d.tree, [&](const RelationLabel& l) {
    auto it = relabel.find(l);
    return it == relabel.end() ? l : it->second;
  });
  return out;
}

inline Corpus relabel_corpus(const Corpus& c, const std::map<RelationLabel, RelationLabel>& relabel) {
  Corpus out = c;
  for (Split s : {Split::Train, Split::Dev, Split::Test})
    for (auto& d : out.split(s)) d = relabel_document(d, relabel);
  return out;
}

struct UnifiedInventory {
  std::vector<RelationLabel> labels;  // lexicographic
  std::map<RelationLabel, std::size_t> index;

  std::size_t size() const { return labels.size(); }
  bool contains(const RelationLabel& l) const { return index.count(l) != 0; }
  bool operator==(const UnifiedInventory&) const = default;
};

inline UnifiedInventory unified_from_labels(std::vector<RelationLabel> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  UnifiedInventory u;
  u.labels = std::move(labels);
  for (std::size_t i = 0; i < u.labels.size(); ++i) u.index.emplace(u.labels[i], i);
  return u;
}

inline UnifiedInventory build_unified(const std::vector<Inventory>& inventories) {
  if (inventories.empty()) throw InputError("build_unified: no inventories");
  std::vector<RelationLabel> all;
  for (const auto& inv : inventories) all.insert(all.end(), inv.labels.begin(), inv.labels.end());
  return unified_from_labels(std::move(all));
}

struct MaskVector {
  std::string treebank_id;
  std::vector<double> additive_penalties;  // 0 allowed, kMaskPenalty otherwise

  std::size_t allowed_count() const {
    return static_cast<std::size_t>(
        std::count(additive_penalties.begin(), additive_penalties.end(), 0.0));
  }
  bool allows(std::size_t i) const { return additive_penalties.at(i) == 0.0; }
};

inline MaskVector mask_for(const UnifiedInventory& unified, const Inventory& inv,
                           std::string treebank_id = {}) {
  MaskVector m;
  m.treebank_id = treebank_id.empty() ? inv.inventory_id : std::move(treebank_id);
  m.additive_penalties.assign(unified.size(), kMaskPenalty);
  for (const auto& l : inv.labels) {
    auto it = unified.index.find(l);
    if (it == unified.index.end())
      throw InputError("mask_for: label " + l.str() + " of inventory " + inv.inventory_id +
                       " is not in the unified space");
    m.additive_penalties[it->second] = 0.0;
  }
  return m;
}

// Treebank -> inventory schema assignment plus the derived label spaces.
// Treebanks mapped to the same schema share one inventory (and one head under
// the multi-head strategy).
struct InventoryRegistry {
  std::map<std::string, std::string> schema_of;       // treebank -> inventory id
  std::map<std::string, Inventory> inventories;       // inventory id -> inventory
  std::map<std::string, std::map<RelationLabel, RelationLabel>> relabel;  // treebank -> merges
  UnifiedInventory unified;

  const Inventory& inventory_for(const std::string& treebank) const {
    auto it = schema_of.find(treebank);
    if (it == schema_of.end()) throw InputError("treebank '" + treebank + "' is not registered");
    return inventories.at(it->second);
  }

  MaskVector mask(const std::string& treebank) const {
    return mask_for(unified, inventory_for(treebank), treebank);
  }

  std::vector<std::string> treebanks() const {
    std::vector<std::string> out;
    for (const auto& [tb, s] : schema_of) out.push_back(tb);
    return out;
  }
};

struct RegistryOptions {
  std::map<std::string, std::string> schema_of;  // optional; default: own id
  std::map<std::string, std::vector<MergeRule>> merge_rules;  // per treebank
  std::size_t merge_threshold = kDefaultMergeThreshold;
};

// Collects inventories, applies merges (relabeling the corpora in place) and
// builds the unified space.
inline InventoryRegistry build_registry(std::vector<Corpus>& corpora, const RegistryOptions& opt = {}) {
  InventoryRegistry reg;
  std::map<std::string, std::map<RelationLabel, std::size_t>> schema_counts;
  std::map<std::string, std::set<std::string>> schema_members;
  for (auto& c : corpora) {
    Inventory inv = collect_inventory(c);
    if (auto it = opt.merge_rules.find(c.treebank_id); it != opt.merge_rules.end()) {
      MergeResult mr = apply_merges(inv, it->second, opt.merge_threshold);
      c = relabel_corpus(c, mr.relabel);
      reg.relabel[c.treebank_id] = mr.relabel;
      inv = std::move(mr.inventory);
    }
    auto s = opt.schema_of.find(c.treebank_id);
    const std::string schema = s == opt.schema_of.end() ? c.treebank_id : s->second;
    if (!reg.schema_of.emplace(c.treebank_id, schema).second)
      throw InputError("treebank '" + c.treebank_id + "' given twice");
    for (const auto& [l, n] : inv.counts) schema_counts[schema][l] += n;
    schema_members[schema].insert(c.treebank_id);
  }
  std::vector<Inventory> all;
  for (auto& [schema, counts] : schema_counts) {
    Inventory inv = inventory_from_counts(schema, counts, schema_members[schema]);
    all.push_back(inv);
    reg.inventories.emplace(schema, std::move(inv));
  }
  reg.unified = build_unified(all);
  return reg;
}

// label x treebank count table over train splits.
struct LabelTable {
  std::vector<std::string> treebanks;
  std::vector<RelationLabel> labels;
  std::vector<std::vector<std::size_t>> counts;  // [label][treebank]

  std::string to_delimited(char delim = '\t') const {
    std::string out = "label";
    for (const auto& t : treebanks) out += delim + t;
    out += '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
      out += labels[i].str();
      for (std::size_t n : counts[i]) out += delim + std::to_string(n);
      out += '\n';
    }
    return out;
  }
};

inline LabelTable stats_report(const std::vector<Corpus>& corpora) {
  if (corpora.empty()) throw InputError("stats_report: no corpora");
  LabelTable t;
  std::vector<Inventory> invs;
  for (const auto& c : corpora) {
    invs.push_back(collect_inventory(c));
    t.treebanks.push_back(c.treebank_id);
  }
  t.labels = build_unified(invs).labels;
  for (const auto& l : t.labels) {
    std::vector<std::size_t> row;
    for (const auto& inv : invs) {
      auto it = inv.counts.find(l);
      row.push_back(it == inv.counts.end() ? 0 : it->second);
    }
    t.counts.push_back(std::move(row));
  }
  return t;
}

// Per-treebank summary in the shape of a treebank statistics table:
// documents, tokens, EDUs, distinct relation names, distinct
// relation+nuclearity classes, relation instances. Counts cover all splits.
struct TreebankSummary {
  std::string treebank_id;
  std::string language;
  std::size_t docs = 0, tokens = 0, edus = 0, labels = 0, classes = 0, relations = 0;
};

inline TreebankSummary summarize(const Corpus& c) {
  TreebankSummary s;
  s.treebank_id = c.treebank_id;
  s.language = c.language;
  std::map<RelationLabel, std::size_t> counts;
  for (Split sp : {Split::Train, Split::Dev, Split::Test}) {
    for (const auto& d : c.split(sp)) {
      ++s.docs;
      s.tokens += d.tokens.size();
      s.edus += d.edus.size();
      count_labels(d.tree, counts);
    }
  }
  std::set<std::string> names;
  for (const auto& [l, n] : counts) {
    names.insert(l.relation);
    s.relations += n;
  }
  s.labels = names.size();
  s.classes = counts.size();
  return s;
}

}  // namespace unirst
