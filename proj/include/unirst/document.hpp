#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "unirst/error.hpp"
#include "unirst/tree.hpp"

namespace unirst {

struct Edu {
  int index = 0;
  int token_start = 0;  // inclusive
  int token_end = 0;    // exclusive

  bool operator==(const Edu&) const = default;
};

// Set on documents produced by subtree augmentation.
struct Provenance {
  std::string source_doc_id;
  NodePath path;

  bool operator==(const Provenance&) const = default;
};

struct Document {
  std::string doc_id;
  std::string treebank_id;
  std::vector<std::string> tokens;
  // Sorted exclusive token indices; the last one equals tokens.size().
  std::vector<int> sentence_ends;
  // True when sentence_ends came from the punctuation rule rather than
  // source annotation.
  bool sentences_derived = false;
  std::vector<Edu> edus;
  DiscourseTree tree;  // binarized
  std::optional<Provenance> provenance;

  int n_edus() const { return static_cast<int>(edus.size()); }
  int n_tokens() const { return static_cast<int>(tokens.size()); }

  int token_begin(const Span& s) const { return edus.at(static_cast<std::size_t>(s.first)).token_start; }
  int token_finish(const Span& s) const { return edus.at(static_cast<std::size_t>(s.last)).token_end; }

  bool operator==(const Document&) const = default;
};

// Builds an EDU table from exclusive end offsets.
inline std::vector<Edu> edus_from_ends(const std::vector<int>& ends) {
  std::vector<Edu> out;
  int start = 0;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    out.push_back({static_cast<int>(i), start, ends[i]});
    start = ends[i];
  }
  return out;
}

inline bool is_sentence_final_punct(std::string_view tok) {
  static const std::set<std::string_view> kFinal = {
      ".", "!", "?", "...", "…", "。", "！", "？", "؟", "।", "?!", "!?", "\".", ".\""};
  if (kFinal.count(tok)) return true;
  // Tokens such as "end." or "etc.)" when text was whitespace-split.
  std::string_view t = tok;
  while (!t.empty() && (t.back() == '"' || t.back() == '\'' || t.back() == ')' ||
                        t.back() == ']'))
    t.remove_suffix(1);
  return !t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == '?');
}

// Sentence boundary rule used when the source has none: a sentence ends after
// a sentence-final punctuation token that is also the last token of an EDU.
// The document end always closes a sentence.
inline std::vector<int> derive_sentence_ends(const std::vector<std::string>& tokens,
                                             const std::vector<Edu>& edus) {
  std::vector<int> ends;
  for (const auto& e : edus) {
    if (e.token_end <= e.token_start) continue;
    if (is_sentence_final_punct(tokens[static_cast<std::size_t>(e.token_end - 1)]))
      ends.push_back(e.token_end);
  }
  const int n = static_cast<int>(tokens.size());
  if (ends.empty() || ends.back() != n) ends.push_back(n);
  return ends;
}

// Structural problems of a document, including tree violations.
inline std::vector<std::string> document_violations(const Document& d) {
  std::vector<std::string> out;
  const int n_tok = d.n_tokens();
  if (n_tok == 0) out.push_back("document has no tokens");
  if (d.sentence_ends.empty() || d.sentence_ends.back() != n_tok)
    out.push_back("last sentence end does not equal the token count");
  for (std::size_t i = 0; i < d.sentence_ends.size(); ++i) {
    if (d.sentence_ends[i] <= 0 || d.sentence_ends[i] > n_tok)
      out.push_back("sentence end " + std::to_string(d.sentence_ends[i]) + " out of range");
    if (i && d.sentence_ends[i] <= d.sentence_ends[i - 1])
      out.push_back("sentence ends not strictly increasing");
  }
  if (d.edus.empty()) out.push_back("document has no EDUs");
  for (std::size_t i = 0; i < d.edus.size(); ++i) {
    const Edu& e = d.edus[i];
    const std::string where = "edu " + std::to_string(i);
    if (e.index != static_cast<int>(i)) out.push_back(where + ": index mismatch");
    if (e.token_start >= e.token_end) out.push_back(where + ": empty token span");
    if (e.token_start < 0 || e.token_end > n_tok) out.push_back(where + ": outside token range");
    const int expected_start = i == 0 ? 0 : d.edus[i - 1].token_end;
    if (e.token_start != expected_start) out.push_back(where + ": EDUs do not tile the tokens");
  }
  if (!d.edus.empty() && d.edus.back().token_end != n_tok)
    out.push_back("EDUs do not reach the end of the document");
  for (auto& v : validate(d.tree, d.n_edus(), {.require_binary = true}))
    out.push_back("tree " + v);
  return out;
}

enum class Split { Train, Dev, Test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "dev" || s == "valid" || s == "validation") return Split::Dev;
  if (s == "test") return Split::Test;
  throw InputError("unknown split '" + std::string(s) + "'");
}

struct Corpus {
  std::string treebank_id;
  std::string language;  // ISO 639-3 prefix of the treebank id
  std::vector<Document> train;
  std::vector<Document> dev;
  std::vector<Document> test;
  // Per-document problems found while loading; affected documents are skipped.
  std::vector<std::string> diagnostics;

  std::vector<Document>& split(Split s) {
    return s == Split::Train ? train : s == Split::Dev ? dev : test;
  }
  const std::vector<Document>& split(Split s) const {
    return s == Split::Train ? train : s == Split::Dev ? dev : test;
  }
  std::size_t size() const { return train.size() + dev.size() + test.size(); }

  bool operator==(const Corpus&) const = default;
};

inline std::string language_of(std::string_view treebank_id) {
  const auto dot = treebank_id.find('.');
  return std::string(dot == std::string_view::npos ? treebank_id : treebank_id.substr(0, dot));
}

}  // namespace unirst
