#pragma once

// Joint training with dynamically weighted losses, two-group gradient
// descent with norm clipping, and early stopping on dev gold-seg Full F1.

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "unirst/augment.hpp"
#include "unirst/eval.hpp"
#include "unirst/model.hpp"

namespace unirst {

class DivergenceError : public InputError {
 public:
  using InputError::InputError;
};

using LossWeights = std::array<double, 3>;  // segmentation, split, label

// w_i proportional to 1 / max(eps, mean L_i), normalized to sum 3.
inline LossWeights update_loss_weights(const std::array<double, 3>& mean_losses, double eps = 1e-6) {
  LossWeights w{};
  double total = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!std::isfinite(mean_losses[i])) throw DivergenceError("loss history is not finite");
    w[i] = 1.0 / std::max(eps, mean_losses[i]);
    total += w[i];
  }
  for (double& x : w) x *= 3.0 / total;
  return w;
}

// Stops once `patience` consecutive evaluations fail to improve on the best.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {
    if (patience < 1) throw InputError("patience must be at least 1");
  }

  // Returns true if this evaluation improved on the best so far.
  bool observe(double metric) {
    ++evaluations_;
    if (metric > best_) {
      best_ = metric;
      best_evaluation_ = evaluations_;
      stale_ = 0;
      return true;
    }
    ++stale_;
    return false;
  }

  bool should_stop() const { return stale_ >= patience_; }
  int evaluations() const { return evaluations_; }
  int best_evaluation() const { return best_evaluation_; }
  double best() const { return best_; }

 private:
  int patience_;
  int evaluations_ = 0;
  int best_evaluation_ = 0;
  int stale_ = 0;
  double best_ = -std::numeric_limits<double>::infinity();
};

struct ComponentLosses {
  double total = 0, seg = 0, split = 0, label = 0;
};

// Weighted joint loss of a batch. Component values are the unweighted means.
inline Var batch_loss(Tape& t, ParserModel& model, const std::vector<const Document*>& batch,
                      const LossWeights& w, ComponentLosses* out = nullptr) {
  std::vector<Var> seg, split, label;
  int tokens = 0, splits = 0, labels = 0;
  for (const Document* d : batch) {
    LossParts p = model.document_loss(t, *d);
    seg.push_back(p.seg);
    tokens += p.tokens;
    if (p.has_split) {
      split.push_back(p.split);
      splits += p.splits;
    }
    if (p.has_label) {
      label.push_back(p.label);
      labels += p.labels;
    }
  }
  auto mean = [&](const std::vector<Var>& parts, int count) {
    if (parts.empty() || count == 0) return t.constant(Matrix(1, 1, 0.0));
    return ops::scale(t, ops::sum(t, ops::concat_cols(t, parts)), 1.0 / count);
  };
  Var ls = mean(seg, tokens), lsp = mean(split, splits), ll = mean(label, labels);
  Var total = ops::add(t, ops::add(t, ops::scale(t, ls, w[0]), ops::scale(t, lsp, w[1])),
                       ops::scale(t, ll, w[2]));
  if (out) *out = {t.scalar(total), t.scalar(ls), t.scalar(lsp), t.scalar(ll)};
  return total;
}

inline bool is_encoder_param(const std::string& name) { return name.rfind("enc.", 0) == 0; }

// Global-norm clipping followed by a plain gradient step with separate
// learning rates for encoder and remaining parameters. Returns the pre-clip norm.
inline double sgd_step(ParameterStore& params, const ModelConfig& cfg) {
  double sq = 0;
  for (auto& [name, p] : params)
    for (double g : p.grad.data) sq += g * g;
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw DivergenceError("gradient norm is not finite");
  const double clip = norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;
  for (auto& [name, p] : params) {
    const double lr = (is_encoder_param(name) ? cfg.learning_rate_encoder : cfg.learning_rate_model) * clip;
    for (std::size_t k = 0; k < p.value.size(); ++k) p.value.data[k] -= lr * p.grad.data[k];
  }
  return norm;
}

// Parseval over one split of each corpus, per treebank.
inline std::vector<std::pair<std::string, ParsevalReport>> evaluate_split(
    ParserModel& model, const std::vector<Corpus>& corpora, Split split, EvalMode mode) {
  std::vector<std::pair<std::string, ParsevalReport>> rows;
  for (const auto& c : corpora) {
    ParsevalReport r;
    r.mode = mode;
    for (const auto& gold : c.split(split)) {
      Document pred = model.predict(gold, c.treebank_id, mode == EvalMode::GoldSeg ? &gold.edus : nullptr);
      r += parseval(gold, pred, mode);
    }
    rows.push_back({c.treebank_id, r});
  }
  return rows;
}

struct EpochRecord {
  int epoch = 0;
  ComponentLosses train;
  LossWeights weights{1, 1, 1};
  double dev_full = 0;
  ParsevalReport dev;
  bool improved = false;
  double seconds = 0;

  nlohmann::ordered_json to_json() const {
    return {{"epoch", epoch},
            {"loss", train.total},
            {"seg_loss", train.seg},
            {"split_loss", train.split},
            {"label_loss", train.label},
            {"weights", weights},
            {"dev_seg", dev.seg.f1()},
            {"dev_span", dev.span.f1()},
            {"dev_nuc", dev.nuc.f1()},
            {"dev_rel", dev.rel.f1()},
            {"dev_full", dev_full},
            {"improved", improved},
            {"seconds", seconds}};
  }
};

struct TrainOptions {
  // Replaces the measured dev metric (epoch, measured) -> metric.
  std::function<double(int, double)> dev_metric_hook;
  std::function<void(const EpochRecord&)> on_epoch;
  // Stop as soon as this callback returns true (checked after each epoch).
  std::function<bool(const EpochRecord&)> stop_when;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  int best_epoch = 0;
  double best_dev_full = 0;
  int evaluations = 0;
  bool stopped_early = false;
};

// Trains `model` in place on the train splits; the parameters of the best dev
// epoch are restored at the end.
inline TrainResult train(ParserModel& model, const std::vector<Corpus>& corpora,
                         const TrainOptions& opt = {}) {
  const ModelConfig& cfg = model.config();
  std::vector<const Document*> pool;
  bool any_dev = false;
  for (const auto& c : corpora) {
    if (c.train.empty()) throw InputError("no training documents in " + c.treebank_id);
    any_dev = any_dev || !c.dev.empty();
    for (const auto& d : c.train) pool.push_back(&d);
  }
  if (!any_dev) throw InputError("training needs a non-empty dev split");

  Rng rng(cfg.rng_seed ^ 0x5eedf00dULL);
  EarlyStopping stopper(cfg.effective_patience(corpora.size()));
  LossWeights weights = cfg.dynamic_loss_weights ? LossWeights{1, 1, 1} : cfg.fixed_loss_weights;
  TrainResult result;
  std::map<std::string, Matrix> best;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(pool);
    ComponentLosses sum;
    int batches = 0;
    for (std::size_t b = 0; b < pool.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<const Document*> batch(
          pool.begin() + static_cast<long>(b),
          pool.begin() + static_cast<long>(std::min(pool.size(), b + static_cast<std::size_t>(cfg.batch_size))));
      for (auto& [n, p] : model.params()) p.zero_grad();
      Tape tape;
      ComponentLosses cl;
      Var loss = batch_loss(tape, model, batch, weights, &cl);
      if (!std::isfinite(cl.total))
        throw DivergenceError("training diverged in epoch " + std::to_string(epoch) + ": loss is not finite");
      tape.backward(loss);
      sgd_step(model.params(), cfg);
      sum.total += cl.total;
      sum.seg += cl.seg;
      sum.split += cl.split;
      sum.label += cl.label;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train = {sum.total / batches, sum.seg / batches, sum.split / batches, sum.label / batches};
    rec.weights = weights;
    rec.dev = aggregate(evaluate_split(model, corpora, Split::Dev, EvalMode::GoldSeg)).pooled;
    rec.dev_full = rec.dev.full.f1();
    if (opt.dev_metric_hook) rec.dev_full = opt.dev_metric_hook(epoch, rec.dev_full);
    rec.improved = stopper.observe(rec.dev_full);
    if (rec.improved) {
      best.clear();
      for (const auto& [n, p] : model.params()) best[n] = p.value;
      result.best_epoch = epoch;
      result.best_dev_full = rec.dev_full;
    }
    if (cfg.dynamic_loss_weights) weights = update_loss_weights({rec.train.seg, rec.train.split, rec.train.label});
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(rec);
    if (opt.on_epoch) opt.on_epoch(rec);
    if (stopper.should_stop()) {
      result.stopped_early = true;
      break;
    }
    if (opt.stop_when && opt.stop_when(rec)) break;
  }
  result.evaluations = stopper.evaluations();
  for (auto& [n, p] : model.params()) p.value = best.at(n);
  return result;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

struct PrepareOptions {
  RegistryOptions registry;
  std::optional<AugmentConfig> augment;
  std::shared_ptr<const EmbeddingTable> embeddings;
};

struct Prepared {
  ParserModel model;
  std::vector<Corpus> corpora;  // relabeled and augmented
  std::vector<AugmentResult> augmentation;
};

// Registry, vocabulary, segmentation heads and initialized parameters for a
// set of corpora.
inline Prepared prepare_model(std::vector<Corpus> corpora, const ModelConfig& cfg,
                              const PrepareOptions& opt = {}) {
  cfg.check();
  if (corpora.empty()) throw InputError("no corpora to train on");
  std::vector<AugmentResult> aug;
  if (opt.augment) {
    for (auto& c : corpora) {
      AugmentConfig ac = *opt.augment;
      ac.rng_seed = opt.augment->rng_seed ^ fnv1a(c.treebank_id);
      aug.push_back(sample_augmented(c, ac));
      c = aug.back().corpus;
    }
  }
  InventoryRegistry reg = build_registry(corpora, opt.registry);
  std::vector<std::string> keys;
  if (cfg.segmentation_heads == SegHeads::Single)
    keys.push_back(kSharedSegHead);
  else
    for (const auto& c : corpora) keys.push_back(c.treebank_id);
  ParserModel model(cfg, std::move(reg), build_vocabulary(corpora), keys);
  int in = 0;
  if (model.uses_precomputed()) {
    if (!opt.embeddings) throw InputError("config names precomputed embeddings but none were loaded");
    in = opt.embeddings->dim;
  }
  model.initialize(cfg.rng_seed, in);
  if (opt.embeddings) model.set_embeddings(opt.embeddings);
  return {std::move(model), std::move(corpora), std::move(aug)};
}

}  // namespace unirst
