#pragma once

// Original Parseval scoring for discourse trees: segmentation, span,
// nuclearity, relation and full micro-F1 over token-level constituents.

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "unirst/document.hpp"
#include "unirst/error.hpp"
#include "unirst/tree.hpp"

namespace unirst {

struct Counts {
  std::size_t matched = 0;
  std::size_t gold = 0;
  std::size_t pred = 0;

  // 2m / (g + p) as a percentage; an empty comparison scores 100.
  double f1() const {
    if (gold + pred == 0) return 100.0;
    return 200.0 * static_cast<double>(matched) / static_cast<double>(gold + pred);
  }
  double precision() const { return pred ? 100.0 * static_cast<double>(matched) / static_cast<double>(pred) : 100.0; }
  double recall() const { return gold ? 100.0 * static_cast<double>(matched) / static_cast<double>(gold) : 100.0; }

  Counts& operator+=(const Counts& o) {
    matched += o.matched;
    gold += o.gold;
    pred += o.pred;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

enum class EvalMode { GoldSeg, EndToEnd };

inline std::string_view to_string(EvalMode m) {
  return m == EvalMode::GoldSeg ? "gold_seg" : "end_to_end";
}

struct ParsevalReport {
  EvalMode mode = EvalMode::GoldSeg;
  Counts seg, span, nuc, rel, full;

  ParsevalReport& operator+=(const ParsevalReport& o) {
    seg += o.seg;
    span += o.span;
    nuc += o.nuc;
    rel += o.rel;
    full += o.full;
    return *this;
  }
  bool operator==(const ParsevalReport&) const = default;
};

struct EvalOptions {
  // Count the document-final boundary (always correct) in Seg.
  bool include_final_boundary = false;
};

inline void require_same_tokens(const Document& gold, const Document& pred) {
  if (gold.tokens != pred.tokens)
    throw InputError("cannot score " + pred.doc_id + ": token sequences differ from gold " +
                     gold.doc_id);
}

inline Counts seg_f1(const Document& gold, const Document& pred, EvalOptions opt = {}) {
  require_same_tokens(gold, pred);
  const int n = gold.n_tokens();
  auto boundaries = [&](const Document& d) {
    std::vector<int> b;
    for (const auto& e : d.edus)
      if (opt.include_final_boundary || e.token_end != n) b.push_back(e.token_end);
    std::sort(b.begin(), b.end());
    return b;
  };
  const auto g = boundaries(gold);
  const auto p = boundaries(pred);
  std::vector<int> common;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(common));
  return {common.size(), g.size(), p.size()};
}

namespace detail {

struct TokenConstituent {
  int begin, end;  // token offsets, end exclusive
  Nuclearity nuc;
  std::string relation;
};

inline std::vector<TokenConstituent> token_constituents(const Document& d) {
  std::vector<TokenConstituent> out;
  for (const auto& c : constituents(d.tree))
    out.push_back({d.token_begin(c.span), d.token_finish(c.span), c.nuclearity, c.relation});
  return out;
}

// Multiset intersection size of the keys produced by `key`.
template <typename Key>
std::size_t matched(const std::vector<TokenConstituent>& g, const std::vector<TokenConstituent>& p,
                    Key key) {
  std::map<decltype(key(g.front())), std::size_t> bag;
  for (const auto& c : g) ++bag[key(c)];
  std::size_t m = 0;
  for (const auto& c : p) {
    auto it = bag.find(key(c));
    if (it != bag.end() && it->second > 0) {
      --it->second;
      ++m;
    }
  }
  return m;
}

}  // namespace detail

// Both trees must be binarized. Constituents are compared on token spans
// derived through each document's own EDU table.
inline ParsevalReport parseval(const Document& gold, const Document& pred, EvalMode mode,
                               EvalOptions opt = {}) {
  require_same_tokens(gold, pred);
  if (mode == EvalMode::GoldSeg && gold.edus != pred.edus)
    throw InputError("gold-segmentation scoring of " + pred.doc_id +
                     " requires the gold EDU table");
  ParsevalReport r;
  r.mode = mode;
  r.seg = seg_f1(gold, pred, opt);
  const auto g = detail::token_constituents(gold);
  const auto p = detail::token_constituents(pred);
  auto with = [&](std::size_t m) { return Counts{m, g.size(), p.size()}; };
  if (g.empty() || p.empty()) {
    r.span = r.nuc = r.rel = r.full = with(0);
    return r;
  }
  using detail::TokenConstituent;
  r.span = with(detail::matched(g, p, [](const TokenConstituent& c) {
    return std::make_pair(c.begin, c.end);
  }));
  r.nuc = with(detail::matched(g, p, [](const TokenConstituent& c) {
    return std::make_tuple(c.begin, c.end, c.nuc);
  }));
  r.rel = with(detail::matched(g, p, [](const TokenConstituent& c) {
    return std::make_tuple(c.begin, c.end, c.relation);
  }));
  r.full = with(detail::matched(g, p, [](const TokenConstituent& c) {
    return std::make_tuple(c.begin, c.end, c.nuc, c.relation);
  }));
  return r;
}

struct AggregateReport {
  std::vector<std::pair<std::string, ParsevalReport>> rows;  // per treebank
  ParsevalReport pooled;
};

inline AggregateReport aggregate(const std::vector<std::pair<std::string, ParsevalReport>>& rows) {
  if (rows.empty()) throw InputError("aggregate: no reports");
  AggregateReport a;
  a.rows = rows;
  a.pooled.mode = rows.front().second.mode;
  for (const auto& [tb, r] : rows) {
    if (r.mode != a.pooled.mode) throw InputError("aggregate: mixed evaluation modes");
    a.pooled += r;
  }
  return a;
}

// Gold-seg and end-to-end results side by side for one row of a table.
struct EvaluationRow {
  std::string name;
  std::optional<ParsevalReport> gold_seg;
  std::optional<ParsevalReport> end_to_end;
};

// F1 values of one table row: gold-seg {S, N, R, Full}, end-to-end
// {Seg, S, N, R, Full}. Averages over runs use this form.
struct ScoreRow {
  std::string name;
  std::optional<std::array<double, 4>> gold_seg;
  std::optional<std::array<double, 5>> end_to_end;
};

inline std::array<double, 4> gold_seg_scores(const ParsevalReport& r) {
  return {r.span.f1(), r.nuc.f1(), r.rel.f1(), r.full.f1()};
}
inline std::array<double, 5> end_to_end_scores(const ParsevalReport& r) {
  return {r.seg.f1(), r.span.f1(), r.nuc.f1(), r.rel.f1(), r.full.f1()};
}

inline ScoreRow score_row(const EvaluationRow& r) {
  ScoreRow s{r.name, std::nullopt, std::nullopt};
  if (r.gold_seg) s.gold_seg = gold_seg_scores(*r.gold_seg);
  if (r.end_to_end) s.end_to_end = end_to_end_scores(*r.end_to_end);
  return s;
}

inline std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

// Text table with columns: gold-seg S N R Full | end-to-end Seg S N R Full.
inline std::string format_scores(const std::vector<ScoreRow>& rows) {
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  auto padr = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::string out = padr("", width) + " | " + padr("Gold seg", 23) + " | End-to-end\n";
  out += padr("Treebank", width) + " |";
  for (const char* h : {"S", "N", "R", "Full"}) out += pad(h, 6);
  out += " |";
  for (const char* h : {"Seg", "S", "N", "R", "Full"}) out += pad(h, 6);
  out += "\n" + std::string(width + 2 + 24 + 3 + 30, '-') + "\n";
  auto cells = [&](const auto& scores, std::size_t n) {
    std::string c;
    if (scores)
      for (double v : *scores) c += pad(fmt1(v), 6);
    else
      for (std::size_t i = 0; i < n; ++i) c += pad("-", 6);
    return c;
  };
  for (const auto& r : rows) out += padr(r.name, width) + " |" + cells(r.gold_seg, 4) + " |" + cells(r.end_to_end, 5) + "\n";
  return out;
}

inline std::string format_table(const std::vector<EvaluationRow>& rows) {
  std::vector<ScoreRow> s;
  for (const auto& r : rows) s.push_back(score_row(r));
  return format_scores(s);
}

}  // namespace unirst
