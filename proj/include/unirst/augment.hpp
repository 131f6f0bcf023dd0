#pragma once

// Subtree augmentation: sentence-aligned subtrees with enough relations are
// extracted from training documents and a seeded fraction of them is added to
// the training split as standalone documents.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "unirst/document.hpp"
#include "unirst/error.hpp"
#include "unirst/random.hpp"
#include "unirst/tree.hpp"

namespace unirst {

struct AugmentConfig {
  double p_aug = 0.5;
  int min_relations = 3;
  std::uint64_t rng_seed = 1;

  void check() const {
    if (!(p_aug >= 0.0 && p_aug <= 1.0)) throw InputError("p_aug must lie in [0, 1]");
    if (min_relations < 1) throw InputError("min_relations must be at least 1");
  }
};

struct SubtreeSample {
  std::string source_doc_id;
  NodePath path;
  Document document;
};

inline bool sentence_aligned(const Document& doc, const Span& span) {
  const int begin = doc.token_begin(span);
  const int end = doc.token_finish(span);
  const auto& ends = doc.sentence_ends;
  const bool starts_sentence =
      begin == 0 || std::binary_search(ends.begin(), ends.end(), begin);
  const bool ends_sentence = std::binary_search(ends.begin(), ends.end(), end);
  return starts_sentence && ends_sentence;
}

// Non-root nodes whose token span is a whole number of sentences and whose
// subtree holds at least `min_relations` internal nodes.
inline std::vector<NodePath> candidate_subtrees(const Document& doc, int min_relations = 3) {
  std::vector<NodePath> out;
  for_each_node(doc.tree, [&](const DiscourseTree& node, const NodePath& path) {
    if (path.empty() || node.is_leaf()) return;
    if (count_internal(node) < min_relations) return;
    if (!sentence_aligned(doc, node.span)) return;
    out.push_back(path);
  });
  return out;
}

inline SubtreeSample extract(const Document& doc, const NodePath& path) {
  const DiscourseTree& node = node_at(doc.tree, path);
  if (!sentence_aligned(doc, node.span))
    throw InputError("node " + path_string(path) + " of " + doc.doc_id +
                     " spans a sentence fragment");
  const int tb = doc.token_begin(node.span);
  const int te = doc.token_finish(node.span);

  Document d;
  d.doc_id = doc.doc_id + "~" + path_string(path);
  d.treebank_id = doc.treebank_id;
  d.tokens.assign(doc.tokens.begin() + tb, doc.tokens.begin() + te);
  for (int e : doc.sentence_ends)
    if (e > tb && e <= te) d.sentence_ends.push_back(e - tb);
  d.sentences_derived = doc.sentences_derived;
  for (int i = node.span.first; i <= node.span.last; ++i) {
    const Edu& src = doc.edus[static_cast<std::size_t>(i)];
    d.edus.push_back({i - node.span.first, src.token_start - tb, src.token_end - tb});
  }
  d.tree = shift_spans(node, -node.span.first);
  d.tree.chained = false;
  d.provenance = Provenance{doc.doc_id, path};
  return {doc.doc_id, path, std::move(d)};
}

struct AugmentResult {
  Corpus corpus;
  std::size_t original = 0;
  std::size_t candidates = 0;
  std::size_t sampled = 0;

  double multiplier() const {
    return original ? static_cast<double>(original + sampled) / static_cast<double>(original) : 0.0;
  }
};

// Pools candidates over the whole train split, then samples
// floor(p_aug * |candidates|) of them uniformly without replacement.
inline AugmentResult sample_augmented(const Corpus& corpus, const AugmentConfig& cfg) {
  cfg.check();
  if (corpus.train.empty()) throw InputError("no training documents in " + corpus.treebank_id);

  struct Ref {
    std::size_t doc;
    NodePath path;
  };
  std::vector<Ref> pool;
  for (std::size_t i = 0; i < corpus.train.size(); ++i)
    for (auto& p : candidate_subtrees(corpus.train[i], cfg.min_relations))
      pool.push_back({i, std::move(p)});

  AugmentResult r;
  r.corpus = corpus;
  r.original = corpus.train.size();
  r.candidates = pool.size();
  const auto k = static_cast<std::size_t>(
      std::floor(cfg.p_aug * static_cast<double>(pool.size()) + 1e-9));
  Rng rng(cfg.rng_seed);
  auto chosen = rng.sample_without_replacement(pool.size(), k);
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t idx : chosen)
    r.corpus.train.push_back(extract(corpus.train[pool[idx].doc], pool[idx].path).document);
  r.sampled = chosen.size();
  return r;
}

}  // namespace unirst
