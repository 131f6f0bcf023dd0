#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support/synthetic.hpp"
#include "unirst/train.hpp"

namespace unirst {
namespace {

using testing::SyntheticSpec;
using testing::synthetic_corpora;

ModelConfig tiny_config(HeadStrategy s = HeadStrategy::MU) {
  ModelConfig c;
  c.embed_dim = 6;
  c.encoder_hidden = 6;
  c.segmenter_hidden = 5;
  c.parser_hidden = 7;
  c.label_hidden = 3;
  c.head_strategy = s;
  c.rng_seed = 11;
  return c;
}

std::vector<Corpus> small_corpora(int train = 6, int max_edus = 5) {
  SyntheticSpec spec;
  spec.train_docs = train;
  spec.dev_docs = 2;
  spec.test_docs = 4;
  spec.max_edus = max_edus;
  return synthetic_corpora(spec);
}

Prepared tiny_model(HeadStrategy s = HeadStrategy::MU, std::vector<Corpus> corpora = small_corpora()) {
  return prepare_model(std::move(corpora), tiny_config(s));
}

std::vector<std::pair<std::string, Parameter*>> all_params(ParserModel& m) {
  std::vector<std::pair<std::string, Parameter*>> out;
  for (auto& [n, p] : m.params()) out.push_back({n, &p});
  return out;
}

TEST(Encoder, ShapeAndDeterminism) {
  Prepared a = tiny_model();
  Prepared b = tiny_model();
  const Document& d = a.corpora[0].train[0];
  Tape ta(false), tb(false);
  const Matrix ha = ta.value(a.model.encode(ta, d));
  EXPECT_EQ(ha.rows, d.n_tokens());
  EXPECT_EQ(ha.cols, 6);
  EXPECT_EQ(ha, tb.value(b.model.encode(tb, d)));
}

TEST(Encoder, ForgetGateBiasStartsAtOne) {
  Prepared p = tiny_model();
  const Matrix& b = p.model.params().at("enc.fwd.b").value;
  ASSERT_EQ(b.cols, 12);
  for (int j = 0; j < 12; ++j) EXPECT_EQ(b(0, j), j >= 3 && j < 6 ? 1.0 : 0.0) << j;
}

TEST(Encoder, GradientMatchesFiniteDifferences) {
  Prepared p = tiny_model();
  const Document& d = p.corpora[0].train[1];
  Rng rng(1);
  Matrix w(d.n_tokens(), 6);
  for (double& x : w.data) x = rng.uniform(-1, 1);
  std::vector<std::pair<std::string, Parameter*>> ps;
  for (auto& [n, par] : p.model.params())
    if (is_encoder_param(n)) ps.push_back({n, &par});
  auto r = grad_check(
      [&](Tape& t) { return ops::sum(t, ops::hadamard(t, p.model.encode(t, d), t.constant(w))); }, ps,
      1e-5, 1e-6, 40);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(Decoder, HandExampleSplitsAfterSecondEdu) {
  // The root prefers k = 1; the two remaining spans have one split each.
  std::vector<Span> asked;
  auto steps = greedy_splits(4, [&](const Span& s) {
    asked.push_back(s);
    std::vector<double> sc(static_cast<std::size_t>(s.last - s.first), 0.0);
    if (s.first == 0 && s.last == 3) sc = {0.1, 0.7, 0.2};
    return sc;
  });
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_EQ(steps[0].split, 1);
  EXPECT_EQ(asked, (std::vector<Span>{{0, 3}, {0, 1}, {2, 3}}));
  auto tree = tree_from_splits(4, steps, [](const Span&, const Span&) {
    return RelationLabel{"Joint", Nuclearity::NN};
  });
  EXPECT_EQ(to_bracketed(tree), "(0-3 Joint_NN (0-1 Joint_NN 0 1) (2-3 Joint_NN 2 3))");
}

TEST(Decoder, TiesGoToTheLeftmostSplit) {
  auto steps = greedy_splits(4, [](const Span& s) {
    return std::vector<double>(static_cast<std::size_t>(s.last - s.first), 0.0);
  });
  std::vector<int> splits;
  for (const auto& st : steps) splits.push_back(st.split);
  EXPECT_EQ(splits, (std::vector<int>{0, 1, 2}));
}

TEST(Decoder, RandomScoresGiveValidTrees) {
  Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    const int n = 1 + static_cast<int>(rng.below(14));
    auto steps = greedy_splits(n, [&](const Span& s) {
      std::vector<double> sc(static_cast<std::size_t>(s.last - s.first));
      for (double& x : sc) x = rng.uniform(-1, 1);
      return sc;
    });
    EXPECT_EQ(static_cast<int>(steps.size()), n - 1);
    auto tree = tree_from_splits(n, steps, [](const Span&, const Span&) {
      return RelationLabel{"Joint", Nuclearity::NN};
    });
    EXPECT_TRUE(validate(tree, n).empty());
    EXPECT_EQ(count_internal(tree), n - 1);
  }
}

TEST(Decoder, TwoEduSpanHasZeroLogProbability) {
  Prepared p = tiny_model();
  const Document& d = p.corpora[0].train[0];
  Tape t(false);
  Var E = p.model.edu_matrix(t, p.model.encode(t, d), d.edus);
  auto ctx = p.model.split_context(t, E);
  Var dv = p.model.decoder_step(t, p.model.span_repr(t, E, {0, 1}), std::nullopt);
  const Matrix& lp = t.value(p.model.split_log_probs(t, ctx, dv, {0, 1}));
  ASSERT_EQ(lp.size(), 1u);
  EXPECT_NEAR(lp.data[0], 0.0, 1e-12);
}

TEST(Labeler, MaskedUnionWithZeroLogitsIsUniformOverInventory) {
  Prepared p = tiny_model(HeadStrategy::MU);
  p.model.params().at("lab.unified.W").value = Matrix(15, 6);
  p.model.params().at("lab.unified.b").value = Matrix(1, 6);
  for (const auto& c : p.corpora) {
    const Document& d = c.train[0];
    auto dist = p.model.label_distribution(d, {0, 0}, {1, d.n_edus() - 1});
    const auto& unified = p.model.registry().unified.labels;
    ASSERT_EQ(dist.size(), 6u);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const bool allowed = p.model.registry().inventory_for(c.treebank_id).contains(unified[i]);
      EXPECT_NEAR(dist[i], allowed ? 1.0 / 3.0 : 0.0, 1e-9) << unified[i];
    }
  }
}

TEST(Labeler, MaskLeavesNoMassOutsideTheInventory) {
  Prepared p = tiny_model(HeadStrategy::MU);
  const std::vector<double> mask = p.model.mask_row("syn.alpha");
  Rng rng(4);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    Tape t(false);
    Matrix logits(1, 6);
    for (double& x : logits.data) x = rng.uniform(-50, 50);
    Var s = ops::softmax(t, ops::add_const(t, t.constant(logits), Matrix::row(mask)));
    double outside = 0;
    for (int k = 0; k < 6; ++k)
      if (mask[static_cast<std::size_t>(k)] != 0.0) outside += t.value(s)(0, k);
    worst = std::max(worst, outside);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Labeler, MultiHeadEqualsMaskedUnionOnOneTreebank) {
  auto corpora = small_corpora();
  corpora.resize(1);
  Prepared mh = tiny_model(HeadStrategy::MH, corpora);
  Prepared mu = tiny_model(HeadStrategy::MU, corpora);
  mh.model.params().at("lab.syn.alpha.W").value = mu.model.params().at("lab.unified.W").value;
  mh.model.params().at("lab.syn.alpha.b").value = mu.model.params().at("lab.unified.b").value;
  for (const auto& d : mh.corpora[0].test) {
    EXPECT_EQ(mh.model.predict(d, "syn.alpha").tree, mu.model.predict(d, "syn.alpha").tree);
    Tape a(false), b(false);
    EXPECT_EQ(a.scalar(batch_loss(a, mh.model, {&d}, {1, 1, 1})),
              b.scalar(batch_loss(b, mu.model, {&d}, {1, 1, 1})));
  }
}

TEST(Labeler, BiaffineGradientMatchesFiniteDifferences) {
  Prepared p = tiny_model(HeadStrategy::MH);
  Rng rng(2);
  Matrix left(1, 36), right(1, 36);
  for (double& x : left.data) x = rng.uniform(-1, 1);
  for (double& x : right.data) x = rng.uniform(-1, 1);
  std::vector<std::pair<std::string, Parameter*>> ps;
  for (auto& [n, par] : p.model.params())
    if (n.rfind("lab.", 0) == 0) ps.push_back({n, &par});
  auto r = grad_check(
      [&](Tape& t) {
        Var lg = p.model.label_logits(t, t.constant(left), t.constant(right), "syn.beta");
        return ops::pick(t, ops::log_softmax(t, lg), 0, 2);
      },
      ps);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(Decoder, SplitGradientMatchesFiniteDifferences) {
  Prepared p = tiny_model();
  const auto& train = p.corpora[1].train;
  auto it = std::find_if(train.begin(), train.end(), [](const Document& x) { return x.n_edus() >= 3; });
  ASSERT_NE(it, train.end());
  const Document& d = *it;
  std::vector<std::pair<std::string, Parameter*>> ps;
  for (auto& [n, par] : p.model.params())
    if (n.rfind("split.", 0) == 0 || n.rfind("dec.", 0) == 0) ps.push_back({n, &par});
  const Span all{0, d.n_edus() - 1};
  auto r = grad_check(
      [&](Tape& t) {
        Var E = p.model.edu_matrix(t, p.model.encode(t, d), d.edus);
        auto ctx = p.model.split_context(t, E);
        Var d0 = p.model.decoder_step(t, p.model.span_repr(t, E, all), std::nullopt);
        Var d1 = p.model.decoder_step(t, p.model.span_repr(t, E, {1, all.last}), d0);
        return ops::add(t, ops::pick(t, p.model.split_log_probs(t, ctx, d0, all), 0, 1),
                        ops::pick(t, p.model.split_log_probs(t, ctx, d1, {1, all.last}), 0, 0));
      },
      ps, 1e-5, 1e-6, 30);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(Model, JointLossGradientMatchesFiniteDifferences) {
  for (HeadStrategy s : {HeadStrategy::MH, HeadStrategy::MU, HeadStrategy::UU}) {
    Prepared p = tiny_model(s);
    std::vector<const Document*> batch{&p.corpora[0].train[0], &p.corpora[1].train[1]};
    auto r = grad_check([&](Tape& t) { return batch_loss(t, p.model, batch, {1.3, 0.9, 0.8}); },
                        all_params(p.model), 1e-5, 1e-6, 12);
    EXPECT_LT(r.max_rel_error, 1e-3) << to_string(s) << ": " << r.worst;
  }
}

TEST(Model, SingleEduDocumentHasOnlySegmentationLoss) {
  Prepared p = tiny_model();
  Document d = p.corpora[0].train[0];
  d.edus = edus_from_ends({d.n_tokens()});
  d.tree = DiscourseTree::leaf(0);
  Tape t;
  LossParts lp = p.model.document_loss(t, d);
  EXPECT_FALSE(lp.has_split);
  EXPECT_FALSE(lp.has_label);
  EXPECT_EQ(lp.tokens, d.n_tokens());
}

TEST(Predict, RejectsEmptyInputAndUnknownTreebanks) {
  Prepared p = tiny_model();
  Document empty;
  empty.doc_id = "e";
  EXPECT_THROW(p.model.predict(empty, "syn.alpha"), InputError);
  const Document& d = p.corpora[0].test[0];
  try {
    p.model.predict(d, "syn.gamma");
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("syn.alpha"), std::string::npos) << msg;
    EXPECT_NE(msg.find("syn.beta"), std::string::npos) << msg;
  }
}

TEST(Predict, OutputIsAWellFormedDocument) {
  Prepared p = tiny_model();
  for (const auto& c : p.corpora)
    for (const auto& d : c.test) {
      Document out = p.model.predict(d, c.treebank_id);
      EXPECT_TRUE(document_violations(out).empty());
      EXPECT_TRUE(validate(out.tree, out.n_edus()).empty());
      EXPECT_EQ(p.model.predict(d, c.treebank_id).tree, out.tree);
    }
}

TEST(Predict, MaskedAndMultiHeadLabelsStayInInventory) {
  for (HeadStrategy s : {HeadStrategy::MH, HeadStrategy::MU}) {
    Prepared p = tiny_model(s, small_corpora(6, 8));
    for (const auto& c : p.corpora) {
      const Inventory& inv = p.model.registry().inventory_for(c.treebank_id);
      for (const auto* split : {&c.train, &c.test})
        for (const auto& d : *split) {
          for (const auto* edus : {static_cast<const std::vector<Edu>*>(nullptr), &d.edus}) {
            Document out = p.model.predict(d, c.treebank_id, edus);
            for_each_node(out.tree, [&](const DiscourseTree& n, const NodePath&) {
              if (!n.is_leaf()) {
                EXPECT_TRUE(inv.contains(*n.label)) << n.label->str();
              }
            });
          }
        }
    }
  }
}

TEST(Config, JsonRoundTripAndValidation) {
  ModelConfig c = tiny_config(HeadStrategy::UU);
  c.segmentation_heads = SegHeads::Single;
  c.rng_seed = 1234567890123ULL;
  const ModelConfig back = ModelConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  auto j = c.to_json();
  j["head_strategy"] = "xx";
  EXPECT_THROW(ModelConfig::from_json(j), InputError);
  j = c.to_json();
  j["encoder_hidden"] = 5;
  EXPECT_THROW(ModelConfig::from_json(j), InputError);
  j.erase("batch_size");
  EXPECT_THROW(ModelConfig::from_json(j), InputError);
  EXPECT_EQ(ModelConfig{}.effective_patience(1), 5);
  EXPECT_EQ(ModelConfig{}.effective_patience(3), 3);
}

TEST(Embeddings, PrecomputedInputsReplaceTheTable) {
  auto corpora = small_corpora(3);
  auto table = std::make_shared<EmbeddingTable>();
  table->dim = 4;
  Rng rng(5);
  for (const auto& c : corpora)
    for (Split s : {Split::Train, Split::Dev, Split::Test})
      for (const auto& d : c.split(s)) {
        Matrix m(d.n_tokens(), 4);
        for (double& x : m.data) x = rng.uniform(-1, 1);
        table->documents[d.doc_id] = m;
      }
  EXPECT_EQ(parse_embeddings(write_embeddings(*table)).documents, table->documents);
  ModelConfig cfg = tiny_config();
  cfg.embeddings_path = "inline";
  PrepareOptions opt;
  opt.embeddings = table;
  Prepared p = prepare_model(corpora, cfg, opt);
  EXPECT_FALSE(p.model.params().count("enc.embed"));
  EXPECT_EQ(p.model.params().at("enc.fwd.Wx").value.rows, 4);
  Document unknown = corpora[0].test[0];
  unknown.doc_id = "nope";
  EXPECT_THROW(p.model.predict(unknown, "syn.alpha"), InputError);
  EXPECT_THROW(prepare_model(corpora, cfg), InputError);
  EXPECT_THROW(parse_embeddings("#unirst-embeddings v1 dim=2\nd 2\n1 2\n3\n"), ParseError);
  EXPECT_THROW(parse_embeddings("dim=2\n"), ParseError);
}

}  // namespace
}  // namespace unirst
