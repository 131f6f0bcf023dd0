#include <gtest/gtest.h>

#include "support/synthetic.hpp"
#include "unirst/checkpoint.hpp"
#include "unirst/train.hpp"

namespace unirst {
namespace {

Prepared small_model(HeadStrategy s) {
  testing::SyntheticSpec spec;
  spec.train_docs = 4;
  spec.dev_docs = 1;
  spec.test_docs = 3;
  ModelConfig cfg;
  cfg.embed_dim = 4;
  cfg.encoder_hidden = 4;
  cfg.segmenter_hidden = 3;
  cfg.parser_hidden = 5;
  cfg.label_hidden = 2;
  cfg.head_strategy = s;
  RegistryOptions reg;
  reg.merge_rules["syn.beta"] = {{{"Background", Nuclearity::SN}, {"Elaboration", Nuclearity::NS}}};
  reg.merge_threshold = 1000;
  PrepareOptions opt;
  opt.registry = reg;
  return prepare_model(testing::synthetic_corpora(spec), cfg, opt);
}

TEST(Checkpoint, RoundTripPreservesPredictions) {
  for (HeadStrategy s : {HeadStrategy::MH, HeadStrategy::MU, HeadStrategy::UU}) {
    Prepared p = small_model(s);
    const std::string bytes = serialize_checkpoint(p.model);
    ParserModel back = parse_checkpoint(bytes);
    EXPECT_EQ(serialize_checkpoint(back), bytes);
    EXPECT_EQ(back.registry().relabel, p.model.registry().relabel);
    EXPECT_FALSE(back.registry().relabel.at("syn.beta").empty());
    EXPECT_EQ(back.registry().unified, p.model.registry().unified);
    EXPECT_EQ(back.vocabulary().tokens, p.model.vocabulary().tokens);
    for (const auto& c : p.corpora)
      for (const auto& d : c.test) EXPECT_EQ(back.predict(d, c.treebank_id).tree, p.model.predict(d, c.treebank_id).tree);
  }
}

TEST(Checkpoint, RejectsForeignAndDamagedFiles) {
  Prepared p = small_model(HeadStrategy::MU);
  const std::string bytes = serialize_checkpoint(p.model);
  EXPECT_THROW(parse_checkpoint("not a checkpoint"), InputError);
  EXPECT_THROW(parse_checkpoint(""), InputError);
  std::string wrong_version = bytes;
  wrong_version[8] = 9;
  EXPECT_THROW(parse_checkpoint(wrong_version), InputError);
  for (std::size_t cut : {std::size_t{10}, std::size_t{20}, std::size_t{100}, bytes.size() / 2, bytes.size() - 1})
    EXPECT_THROW(parse_checkpoint(bytes.substr(0, cut)), InputError) << cut;
  EXPECT_THROW(parse_checkpoint(bytes + "x"), InputError);
}

TEST(Checkpoint, FileRoundTrip) {
  Prepared p = small_model(HeadStrategy::MH);
  const auto path = std::filesystem::temp_directory_path() / "unirst_ckpt_test" / "model.ckpt";
  save_checkpoint(p.model, path);
  EXPECT_EQ(serialize_checkpoint(load_checkpoint(path)), serialize_checkpoint(p.model));
  std::filesystem::remove_all(path.parent_path());
  EXPECT_THROW(load_checkpoint(path), InputError);
}

}  // namespace
}  // namespace unirst
