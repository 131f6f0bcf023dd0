#pragma once

// Four-stage parser: token encoder, CRF segmenter, top-down split decoder and
// biaffine relation labeler, with multi-head, masked-union and
// unmasked-union label strategies.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <cmath>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "unirst/autodiff.hpp"
#include "unirst/crf.hpp"
#include "unirst/document.hpp"
#include "unirst/embeddings.hpp"
#include "unirst/inventory.hpp"
#include "unirst/random.hpp"

namespace unirst {

enum class HeadStrategy { MH, MU, UU };
enum class SegHeads { Single, Multiple };

inline std::string to_string(HeadStrategy s) {
  switch (s) {
    case HeadStrategy::MH: return "mh";
    case HeadStrategy::MU: return "mu";
    case HeadStrategy::UU: return "uu";
  }
  return "?";
}
inline std::string to_string(SegHeads s) { return s == SegHeads::Single ? "single" : "multiple"; }

inline HeadStrategy parse_head_strategy(const std::string& s) {
  const std::string l = ascii_lower(s);
  if (l == "mh") return HeadStrategy::MH;
  if (l == "mu") return HeadStrategy::MU;
  if (l == "uu") return HeadStrategy::UU;
  throw InputError("unknown head strategy '" + s + "' (expected mh, mu or uu)");
}
inline SegHeads parse_seg_heads(const std::string& s) {
  const std::string l = ascii_lower(s);
  if (l == "single") return SegHeads::Single;
  if (l == "multiple") return SegHeads::Multiple;
  throw InputError("unknown segmentation-head setting '" + s + "' (expected single or multiple)");
}

struct ModelConfig {
  int embed_dim = 32;
  int encoder_hidden = 64;  // both directions together
  int segmenter_hidden = 200;
  int parser_hidden = 512;
  int label_hidden = 32;  // biaffine projection size
  HeadStrategy head_strategy = HeadStrategy::MU;
  SegHeads segmentation_heads = SegHeads::Multiple;
  double learning_rate_model = 1e-5;
  double learning_rate_encoder = 2e-5;
  int batch_size = 2;
  int patience = 0;  // 0: 5 for one treebank, 3 for several
  int max_epochs = 200;
  double clip_norm = 5.0;
  bool dynamic_loss_weights = true;
  std::array<double, 3> fixed_loss_weights{1.0, 1.0, 1.0};
  std::uint64_t rng_seed = 1;
  std::string embeddings_path;  // precomputed encoder inputs instead of a trainable table

  int effective_patience(std::size_t n_treebanks) const {
    if (patience > 0) return patience;
    return n_treebanks > 1 ? 3 : 5;
  }

  void check() const {
    auto positive = [](int v, const char* name) {
      if (v <= 0) throw InputError(std::string(name) + " must be positive");
    };
    positive(embed_dim, "embed_dim");
    positive(encoder_hidden, "encoder_hidden");
    positive(segmenter_hidden, "segmenter_hidden");
    positive(parser_hidden, "parser_hidden");
    positive(label_hidden, "label_hidden");
    positive(batch_size, "batch_size");
    positive(max_epochs, "max_epochs");
    if (encoder_hidden % 2) throw InputError("encoder_hidden must be even (two directions)");
    if (patience < 0) throw InputError("patience must be non-negative");
    if (!(learning_rate_model > 0) || !(learning_rate_encoder > 0))
      throw InputError("learning rates must be positive");
    if (!(clip_norm > 0)) throw InputError("clip_norm must be positive");
    for (double w : fixed_loss_weights)
      if (!(w > 0)) throw InputError("loss weights must be positive");
  }

  nlohmann::ordered_json to_json() const {
    return {{"embed_dim", embed_dim},
            {"encoder_hidden", encoder_hidden},
            {"segmenter_hidden", segmenter_hidden},
            {"parser_hidden", parser_hidden},
            {"label_hidden", label_hidden},
            {"head_strategy", to_string(head_strategy)},
            {"segmentation_heads", to_string(segmentation_heads)},
            {"learning_rate_model", learning_rate_model},
            {"learning_rate_encoder", learning_rate_encoder},
            {"batch_size", batch_size},
            {"patience", patience},
            {"max_epochs", max_epochs},
            {"clip_norm", clip_norm},
            {"dynamic_loss_weights", dynamic_loss_weights},
            {"fixed_loss_weights", fixed_loss_weights},
            {"rng_seed", rng_seed},
            {"embeddings_path", embeddings_path}};
  }

  static ModelConfig from_json(const nlohmann::ordered_json& j) {
    ModelConfig c;
    try {
      c.embed_dim = j.at("embed_dim").get<int>();
      c.encoder_hidden = j.at("encoder_hidden").get<int>();
      c.segmenter_hidden = j.at("segmenter_hidden").get<int>();
      c.parser_hidden = j.at("parser_hidden").get<int>();
      c.label_hidden = j.at("label_hidden").get<int>();
      c.head_strategy = parse_head_strategy(j.at("head_strategy").get<std::string>());
      c.segmentation_heads = parse_seg_heads(j.at("segmentation_heads").get<std::string>());
      c.learning_rate_model = j.at("learning_rate_model").get<double>();
      c.learning_rate_encoder = j.at("learning_rate_encoder").get<double>();
      c.batch_size = j.at("batch_size").get<int>();
      c.patience = j.at("patience").get<int>();
      c.max_epochs = j.at("max_epochs").get<int>();
      c.clip_norm = j.at("clip_norm").get<double>();
      c.dynamic_loss_weights = j.at("dynamic_loss_weights").get<bool>();
      c.fixed_loss_weights = j.at("fixed_loss_weights").get<std::array<double, 3>>();
      c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
      c.embeddings_path = j.at("embeddings_path").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("model config: ") + e.what());
    }
    c.check();
    return c;
  }
};

// Token vocabulary; id 0 is reserved for unknown tokens.
struct Vocabulary {
  std::vector<std::string> tokens{"<unk>"};
  std::map<std::string, int> index{{"<unk>", 0}};

  int id(const std::string& tok) const {
    auto it = index.find(tok);
    return it == index.end() ? 0 : it->second;
  }
  int size() const { return static_cast<int>(tokens.size()); }

  void add(const std::string& tok) {
    if (index.emplace(tok, size()).second) tokens.push_back(tok);
  }

  static Vocabulary from_tokens(const std::vector<std::string>& toks) {
    Vocabulary v;
    for (std::size_t i = 1; i < toks.size(); ++i) v.add(toks[i]);
    return v;
  }
};

inline Vocabulary build_vocabulary(const std::vector<Corpus>& corpora) {
  std::set<std::string> all;
  for (const auto& c : corpora)
    for (const auto& d : c.train) all.insert(d.tokens.begin(), d.tokens.end());
  Vocabulary v;
  for (const auto& t : all)
    if (t != "<unk>") v.add(t);
  return v;
}

inline constexpr const char* kSharedSegHead = "shared";
inline constexpr const char* kUnifiedLabelHead = "unified";

// Component losses of one document as sums, with the counts needed for the
// per-component means.
struct LossParts {
  Var seg;
  Var split;
  Var label;
  bool has_split = false;
  bool has_label = false;
  int tokens = 0;
  int splits = 0;
  int labels = 0;
};

// Index of the largest entry; ties go to the lowest index.
inline int argmax_leftmost(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  return best;
}

struct SplitStep {
  Span span;
  int split = 0;  // the left part ends at EDU `split`
};

// Top-down greedy splitting of n EDUs. score(span) returns one score per split
// point first..last-1. Spans are processed depth-first, left child first.
template <typename ScoreFn>
std::vector<SplitStep> greedy_splits(int n, ScoreFn&& score) {
  if (n < 1) throw InputError("cannot decode a tree over zero EDUs");
  std::vector<SplitStep> steps;
  std::vector<Span> stack{{0, n - 1}};
  while (!stack.empty()) {
    const Span s = stack.back();
    stack.pop_back();
    if (s.first == s.last) continue;
    const std::vector<double> sc = score(s);
    if (static_cast<int>(sc.size()) != s.last - s.first)
      throw InvariantError("split scorer returned the wrong number of scores");
    const int k = s.first + argmax_leftmost(sc);
    steps.push_back({s, k});
    stack.push_back({k + 1, s.last});
    stack.push_back({s.first, k});
  }
  return steps;
}

// Tree from the split decisions; label(left, right) names each internal node.
template <typename LabelFn>
DiscourseTree tree_from_splits(int n, const std::vector<SplitStep>& steps, LabelFn&& label) {
  std::map<std::pair<int, int>, int> split_of;
  for (const auto& st : steps) split_of[{st.span.first, st.span.last}] = st.split;
  std::function<DiscourseTree(int, int)> build = [&](int a, int b) -> DiscourseTree {
    if (a == b) return DiscourseTree::leaf(a);
    auto it = split_of.find({a, b});
    if (it == split_of.end()) throw InvariantError("missing split decision");
    DiscourseTree l = build(a, it->second);
    DiscourseTree r = build(it->second + 1, b);
    RelationLabel lab = label(l.span, r.span);
    return DiscourseTree::node(std::move(lab), {std::move(l), std::move(r)});
  };
  return build(0, n - 1);
}

class ParserModel {
 public:
  ParserModel(ModelConfig cfg, InventoryRegistry registry, Vocabulary vocab,
              std::vector<std::string> seg_keys)
      : cfg_(std::move(cfg)),
        registry_(std::move(registry)),
        vocab_(std::move(vocab)),
        seg_keys_(std::move(seg_keys)) {
    cfg_.check();
    if (seg_keys_.empty()) throw InputError("model needs at least one segmentation head");
    if (registry_.schema_of.empty()) throw InputError("model needs at least one treebank");
  }

  const ModelConfig& config() const { return cfg_; }
  const InventoryRegistry& registry() const { return registry_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<std::string>& seg_keys() const { return seg_keys_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  void set_embeddings(std::shared_ptr<const EmbeddingTable> table) {
    if (table && input_dim_ && table->dim != input_dim_)
      throw InputError("embedding dimension " + std::to_string(table->dim) +
                       " does not match the model input dimension " + std::to_string(input_dim_));
    embeddings_ = std::move(table);
  }
  bool uses_precomputed() const { return !cfg_.embeddings_path.empty(); }

  // Creates every parameter with a seeded Glorot-uniform draw. `input_dim` is
  // only used with precomputed embeddings.
  void initialize(std::uint64_t seed, int input_dim = 0) {
    params_.clear();
    Rng rng(seed);
    const int h = cfg_.encoder_hidden / 2;
    const int in = uses_precomputed() ? input_dim : cfg_.embed_dim;
    if (in <= 0) throw InputError("input dimension must be positive");
    input_dim_ = in;
    if (!uses_precomputed()) {
      Matrix e(vocab_.size(), cfg_.embed_dim);
      for (double& x : e.data) x = rng.uniform(-0.5, 0.5);
      params_["enc.embed"] = Parameter(std::move(e));
    }
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string p = std::string("enc.") + dir;
      add_glorot(rng, p + ".Wx", in, 4 * h);
      add_glorot(rng, p + ".Wh", h, 4 * h);
      Matrix b(1, 4 * h);
      for (int j = h; j < 2 * h; ++j) b(0, j) = 1.0;  // forget gate
      params_[p + ".b"] = Parameter(std::move(b));
    }
    const int H = cfg_.encoder_hidden;
    for (const auto& key : seg_keys_) {
      const std::string p = "seg." + key;
      add_glorot(rng, p + ".W1", H, cfg_.segmenter_hidden);
      add_zero(p + ".b1", 1, cfg_.segmenter_hidden);
      add_glorot(rng, p + ".W2", cfg_.segmenter_hidden, kNumTags);
      add_zero(p + ".b2", 1, kNumTags);
      add_zero(p + ".trans", kNumTags, kNumTags);
    }
    const int span_dim = 3 * edu_dim();
    const int P = cfg_.parser_hidden;
    add_glorot(rng, "dec.W_in", span_dim, P);
    add_glorot(rng, "dec.W_h", P, P);
    add_zero("dec.b", 1, P);
    add_glorot(rng, "split.W_l", edu_dim(), P);
    add_glorot(rng, "split.W_r", edu_dim(), P);
    add_glorot(rng, "split.W_d", P, P);
    add_zero("split.b", 1, P);
    add_glorot(rng, "split.v", P, 1);
    const int L = cfg_.label_hidden;
    add_glorot(rng, "lab.P_l", span_dim, L);
    add_zero("lab.b_l", 1, L);
    add_glorot(rng, "lab.P_r", span_dim, L);
    add_zero("lab.b_r", 1, L);
    for (const auto& head : label_heads()) {
      const int K = static_cast<int>(head_labels(head).size());
      add_glorot(rng, "lab." + head + ".W", L * L + 2 * L, K);
      add_zero("lab." + head + ".b", 1, K);
    }
  }

  int input_dim() const { return input_dim_; }
  void set_input_dim(int d) { input_dim_ = d; }

  // ---- label spaces -------------------------------------------------------

  std::vector<std::string> label_heads() const {
    if (cfg_.head_strategy != HeadStrategy::MH) return {kUnifiedLabelHead};
    std::vector<std::string> out;
    for (const auto& [id, inv] : registry_.inventories) out.push_back(id);
    return out;
  }

  std::string label_head_for(const std::string& treebank) const {
    if (cfg_.head_strategy != HeadStrategy::MH) {
      if (cfg_.head_strategy == HeadStrategy::MU && !registry_.schema_of.count(treebank))
        throw InputError("treebank '" + treebank + "' has no label mask in this model");
      return kUnifiedLabelHead;
    }
    return registry_.inventory_for(treebank).inventory_id;
  }

  const std::vector<RelationLabel>& head_labels(const std::string& head) const {
    if (head == kUnifiedLabelHead) return registry_.unified.labels;
    auto it = registry_.inventories.find(head);
    if (it == registry_.inventories.end()) throw InputError("no label head '" + head + "'");
    return it->second.labels;
  }

  // Index of `label` in the head used for `treebank`, or -1.
  int label_index(const std::string& treebank, const RelationLabel& label) const {
    const auto& labels = head_labels(label_head_for(treebank));
    auto it = std::lower_bound(labels.begin(), labels.end(), label);
    return it != labels.end() && *it == label ? static_cast<int>(it - labels.begin()) : -1;
  }

  std::string seg_key_for(const std::string& treebank) const {
    if (cfg_.segmentation_heads == SegHeads::Single) return seg_keys_.front();
    if (std::find(seg_keys_.begin(), seg_keys_.end(), treebank) != seg_keys_.end()) return treebank;
    std::string avail;
    for (const auto& k : seg_keys_) avail += (avail.empty() ? "" : ", ") + k;
    throw InputError("no segmentation head for treebank '" + treebank + "' (available: " + avail + ")");
  }

  // ---- forward pieces -----------------------------------------------------

  // Per-token encodings, T x encoder_hidden.
  Var encode(Tape& t, const Document& doc) {
    if (doc.tokens.empty()) throw InputError("cannot encode an empty token list");
    Var x;
    if (uses_precomputed()) {
      if (!embeddings_) throw InputError("model expects precomputed embeddings but none are loaded");
      x = t.constant(embeddings_->lookup(doc.doc_id, doc.n_tokens()));
    } else {
      std::vector<int> ids;
      ids.reserve(doc.tokens.size());
      for (const auto& tok : doc.tokens) ids.push_back(vocab_.id(tok));
      x = ops::gather_rows(t, params_.at("enc.embed"), ids);
    }
    auto fwd = lstm(t, x, "enc.fwd", false);
    auto bwd = lstm(t, x, "enc.bwd", true);
    Var hf = ops::concat_rows(t, fwd);
    std::vector<Var> bwd_in_order(bwd.rbegin(), bwd.rend());
    Var hb = ops::concat_rows(t, bwd_in_order);
    return ops::concat_cols(t, {hf, hb});
  }

  Var seg_emissions(Tape& t, Var H, const std::string& key) {
    const std::string p = "seg." + key;
    if (!params_.count(p + ".W1")) throw InputError("no segmentation head '" + key + "'");
    Var hid = ops::tanh(t, ops::add(t, ops::matmul(t, H, t.param(params_.at(p + ".W1"))),
                                    t.param(params_.at(p + ".b1"))));
    return ops::add(t, ops::matmul(t, hid, t.param(params_.at(p + ".W2"))),
                    t.param(params_.at(p + ".b2")));
  }

  Var seg_transitions(Tape& t, const std::string& key) {
    return t.param(params_.at("seg." + key + ".trans"));
  }

  // EDU vectors [H[start]; H[end - 1]], n x 2H.
  Var edu_matrix(Tape& t, Var H, const std::vector<Edu>& edus) {
    std::vector<Var> rows;
    rows.reserve(edus.size());
    for (const auto& e : edus)
      rows.push_back(ops::concat_cols(
          t, {ops::slice_rows(t, H, e.token_start, 1), ops::slice_rows(t, H, e.token_end - 1, 1)}));
    return ops::concat_rows(t, rows);
  }

  // [e_first; e_last; mean(e_first..e_last)].
  Var span_repr(Tape& t, Var E, const Span& s) {
    Var first = ops::slice_rows(t, E, s.first, 1);
    Var last = ops::slice_rows(t, E, s.last, 1);
    Var mean = ops::mean_rows(t, ops::slice_rows(t, E, s.first, s.last - s.first + 1));
    return ops::concat_cols(t, {first, last, mean});
  }

  Var decoder_step(Tape& t, Var span, std::optional<Var> prev) {
    Var z = ops::matmul(t, span, t.param(params_.at("dec.W_in")));
    if (prev) z = ops::add(t, z, ops::matmul(t, *prev, t.param(params_.at("dec.W_h"))));
    return ops::tanh(t, ops::add(t, z, t.param(params_.at("dec.b"))));
  }

  struct SplitContext {
    Var A;  // E W_l
    Var B;  // E W_r
  };

  SplitContext split_context(Tape& t, Var E) {
    return {ops::matmul(t, E, t.param(params_.at("split.W_l"))),
            ops::matmul(t, E, t.param(params_.at("split.W_r")))};
  }

  // Log-probabilities over split points k = first..last-1 (split after EDU k),
  // 1 x (last - first).
  Var split_log_probs(Tape& t, const SplitContext& ctx, Var d, const Span& s) {
    const int m = s.last - s.first;
    Var left = ops::slice_rows(t, ctx.A, s.first, m);
    Var right = ops::slice_rows(t, ctx.B, s.first + 1, m);
    Var dq = ops::add(t, ops::matmul(t, d, t.param(params_.at("split.W_d"))),
                      t.param(params_.at("split.b")));
    Var hid = ops::tanh(t, ops::add(t, ops::add(t, left, right), dq));
    Var scores = ops::transpose(t, ops::matmul(t, hid, t.param(params_.at("split.v"))));
    return ops::log_softmax(t, scores);
  }

  // Logits over the head used for `treebank`; masked under MU.
  Var label_logits(Tape& t, Var left, Var right, const std::string& treebank) {
    Var l = ops::tanh(t, ops::add(t, ops::matmul(t, left, t.param(params_.at("lab.P_l"))),
                                  t.param(params_.at("lab.b_l"))));
    Var r = ops::tanh(t, ops::add(t, ops::matmul(t, right, t.param(params_.at("lab.P_r"))),
                                  t.param(params_.at("lab.b_r"))));
    Var feats = ops::concat_cols(t, {ops::outer_flat(t, l, r), l, r});
    const std::string head = label_head_for(treebank);
    Var logits = ops::add(t, ops::matmul(t, feats, t.param(params_.at("lab." + head + ".W"))),
                          t.param(params_.at("lab." + head + ".b")));
    if (cfg_.head_strategy == HeadStrategy::MU)
      logits = ops::add_const(t, logits, Matrix::row(mask_row(treebank)));
    return logits;
  }

  const std::vector<double>& mask_row(const std::string& treebank) {
    auto it = mask_cache_.find(treebank);
    if (it == mask_cache_.end())
      it = mask_cache_.emplace(treebank, registry_.mask(treebank).additive_penalties).first;
    return it->second;
  }

  // ---- losses ---------------------------------------------------------------

  // Teacher-forced losses of one gold document (binarized tree).
  LossParts document_loss(Tape& t, const Document& doc) {
    LossParts out;
    Var H = encode(t, doc);
    const std::string key = seg_key_for(doc.treebank_id);
    out.seg = crf_nll(t, seg_emissions(t, H, key), seg_transitions(t, key),
                      boundary_tags(doc.edus, doc.n_tokens()));
    out.tokens = doc.n_tokens();
    if (doc.n_edus() < 2) return out;

    Var E = edu_matrix(t, H, doc.edus);
    SplitContext ctx = split_context(t, E);
    std::vector<Var> split_terms, label_terms;
    std::optional<Var> d;
    std::vector<const DiscourseTree*> stack{&doc.tree};
    while (!stack.empty()) {
      const DiscourseTree* node = stack.back();
      stack.pop_back();
      if (node->is_leaf()) continue;
      if (node->children.size() != 2) throw InvariantError("training tree is not binarized");
      const DiscourseTree& lc = node->children[0];
      const DiscourseTree& rc = node->children[1];
      d = decoder_step(t, span_repr(t, E, node->span), d);
      Var lp = split_log_probs(t, ctx, *d, node->span);
      split_terms.push_back(ops::pick(t, lp, 0, lc.span.last - node->span.first));

      const int gold = label_index(doc.treebank_id, *node->label);
      if (gold < 0)
        throw InputError("label " + node->label->str() + " of " + doc.doc_id +
                         " is outside the label space of " + doc.treebank_id);
      Var logits = label_logits(t, span_repr(t, E, lc.span), span_repr(t, E, rc.span), doc.treebank_id);
      label_terms.push_back(ops::pick(t, ops::log_softmax(t, logits), 0, gold));
      stack.push_back(&rc);
      stack.push_back(&lc);
    }
    out.split = ops::scale(t, ops::sum(t, ops::concat_cols(t, split_terms)), -1.0);
    out.label = ops::scale(t, ops::sum(t, ops::concat_cols(t, label_terms)), -1.0);
    out.has_split = out.has_label = true;
    out.splits = static_cast<int>(split_terms.size());
    out.labels = static_cast<int>(label_terms.size());
    return out;
  }

  // ---- inference ------------------------------------------------------------

  // Predicted EDUs (or the given ones) and tree for `doc.tokens`, read as a
  // document of `treebank`.
  Document predict(const Document& doc, const std::string& treebank,
                   const std::vector<Edu>* gold_edus = nullptr) {
    if (doc.tokens.empty()) throw InputError("cannot parse an empty token list");
    Tape t(false);
    Var H = encode(t, doc);
    Document out;
    out.doc_id = doc.doc_id;
    out.treebank_id = treebank;
    out.tokens = doc.tokens;
    if (gold_edus) {
      out.edus = *gold_edus;
    } else {
      const std::string key = seg_key_for(treebank);
      out.edus = edus_from_tags(crf_viterbi(t.value(seg_emissions(t, H, key)),
                                            t.value(seg_transitions(t, key))));
    }
    label_head_for(treebank);
    out.sentence_ends = derive_sentence_ends(out.tokens, out.edus);
    out.sentences_derived = true;
    Var E = edu_matrix(t, H, out.edus);
    SplitContext ctx = split_context(t, E);
    out.tree = decode(t, E, ctx, out.n_edus(), treebank);
    return out;
  }

  // Label distribution for a node with the given children under gold EDUs.
  std::vector<double> label_distribution(const Document& doc, const Span& left, const Span& right) {
    Tape t(false);
    Var E = edu_matrix(t, encode(t, doc), doc.edus);
    Var lp = ops::softmax(t, label_logits(t, span_repr(t, E, left), span_repr(t, E, right), doc.treebank_id));
    return t.value(lp).data;
  }

 private:
  int edu_dim() const { return 2 * cfg_.encoder_hidden; }

  void add_glorot(Rng& rng, const std::string& name, int rows, int cols) {
    Matrix m(rows, cols);
    const double a = std::sqrt(6.0 / (rows + cols));
    for (double& x : m.data) x = rng.uniform(-a, a);
    params_[name] = Parameter(std::move(m));
  }
  void add_zero(const std::string& name, int rows, int cols) {
    params_[name] = Parameter(Matrix(rows, cols));
  }

  // One LSTM direction; returns the hidden row of each step in processing order.
  std::vector<Var> lstm(Tape& t, Var x, const std::string& p, bool reverse) {
    const int T = t.value(x).rows;
    const int h = cfg_.encoder_hidden / 2;
    Var xw = ops::add(t, ops::matmul(t, x, t.param(params_.at(p + ".Wx"))), t.param(params_.at(p + ".b")));
    Var wh = t.param(params_.at(p + ".Wh"));
    std::vector<Var> hs;
    hs.reserve(static_cast<std::size_t>(T));
    std::optional<Var> hprev, cprev;
    for (int step = 0; step < T; ++step) {
      const int pos = reverse ? T - 1 - step : step;
      Var z = ops::slice_rows(t, xw, pos, 1);
      if (hprev) z = ops::add(t, z, ops::matmul(t, *hprev, wh));
      Var gi = ops::sigmoid(t, ops::slice_cols(t, z, 0, h));
      Var gf = ops::sigmoid(t, ops::slice_cols(t, z, h, h));
      Var gg = ops::tanh(t, ops::slice_cols(t, z, 2 * h, h));
      Var go = ops::sigmoid(t, ops::slice_cols(t, z, 3 * h, h));
      Var c = ops::hadamard(t, gi, gg);
      if (cprev) c = ops::add(t, c, ops::hadamard(t, gf, *cprev));
      Var hh = ops::hadamard(t, go, ops::tanh(t, c));
      hs.push_back(hh);
      hprev = hh;
      cprev = c;
    }
    return hs;
  }

  // Greedy top-down decoding, depth-first with the left child first.
  DiscourseTree decode(Tape& t, Var E, const SplitContext& ctx, int n, const std::string& treebank) {
    std::optional<Var> d;
    auto steps = greedy_splits(n, [&](const Span& s) {
      d = decoder_step(t, span_repr(t, E, s), d);
      return t.value(split_log_probs(t, ctx, *d, s)).data;
    });
    const auto& labels = head_labels(label_head_for(treebank));
    return tree_from_splits(n, steps, [&](const Span& l, const Span& r) {
      Var logits = label_logits(t, span_repr(t, E, l), span_repr(t, E, r), treebank);
      return labels[static_cast<std::size_t>(argmax_leftmost(t.value(logits).data))];
    });
  }

  ModelConfig cfg_;
  InventoryRegistry registry_;
  Vocabulary vocab_;
  std::vector<std::string> seg_keys_;
  ParameterStore params_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  std::map<std::string, std::vector<double>> mask_cache_;
  int input_dim_ = 0;
};

}  // namespace unirst
