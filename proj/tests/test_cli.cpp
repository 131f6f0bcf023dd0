#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "commands.hpp"
#include "support/paths.hpp"
#include "support/synthetic.hpp"

namespace unirst {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "unirst");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), {out, err});
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "unirst_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> synthetic_dirs(const fs::path& root, int train_docs = 6) {
  testing::SyntheticSpec spec;
  spec.train_docs = train_docs;
  spec.dev_docs = 2;
  spec.test_docs = 2;
  spec.max_edus = 5;
  std::vector<std::string> dirs;
  for (const auto& c : testing::synthetic_corpora(spec)) {
    write_corpus(c, root / c.treebank_id);
    dirs.push_back((root / c.treebank_id).string());
  }
  return dirs;
}

std::vector<std::string> tiny_model_flags() {
  return {"--embed-dim", "4", "--encoder-hidden", "4", "--segmenter-hidden", "4", "--parser-hidden", "6",
          "--label-hidden", "2", "--lr", "0.1", "--lr-encoder", "0.1", "--epochs", "2"};
}

std::vector<std::string> train_args(const std::vector<std::string>& dirs, const fs::path& out,
                                    std::vector<std::string> extra) {
  std::vector<std::string> a{"train", "--out", out.string()};
  for (const auto& d : dirs) a.insert(a.end(), {"--corpus", d});
  for (const auto& f : tiny_model_flags()) a.push_back(f);
  a.insert(a.end(), extra.begin(), extra.end());
  return a;
}

TEST(Cli, ConvertIsDeterministic) {
  const fs::path dir = scratch("convert");
  const std::vector<std::string> inputs = {testing::fixture("two_elab.rs3"), testing::fixture("nested.rs3")};
  for (const char* out : {"a", "b"}) {
    std::vector<std::string> args{"convert", "--format", "rs3", "--treebank", "eng.test", "--out",
                                  (dir / out).string()};
    args.insert(args.end(), inputs.begin(), inputs.end());
    Result r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("2 converted, 0 failed"), std::string::npos);
  }
  for (const char* f : {"two_elab.json", "nested.json"}) {
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f));
    EXPECT_EQ(parse_canonical(read_file(dir / "a" / f)).treebank_id, "eng.test");
  }
  EXPECT_TRUE(fs::exists(dir / "a" / "config.json"));
  // A run directory is write-once.
  Result again = run({"convert", "--format", "rs3", "--treebank", "eng.test", "--out", (dir / "a").string(),
                      inputs[0]});
  EXPECT_EQ(again.code, 1);
}

TEST(Cli, ConvertReportsPartialFailure) {
  const fs::path dir = scratch("convert_mixed");
  Result r = run({"convert", "--format", "dis", "--treebank", "eng.t", "--out", dir.string() + "/o",
                  testing::fixture("two_leaf.dis"), testing::fixture("unbalanced.dis"),
                  testing::fixture("list3.dis")});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(fs::exists(dir / "o" / "two_leaf.json"));
  EXPECT_TRUE(fs::exists(dir / "o" / "list3.json"));
  EXPECT_FALSE(fs::exists(dir / "o" / "unbalanced.json"));
  EXPECT_NE(r.err.find("unbalanced.dis"), std::string::npos);
  EXPECT_NE(r.out.find("2 converted, 1 failed"), std::string::npos);
}

Document hand_document(const std::string& id, const std::string& tb, std::vector<std::string> tokens,
                       std::vector<int> ends, DiscourseTree tree) {
  Document d;
  d.doc_id = id;
  d.treebank_id = tb;
  d.tokens = std::move(tokens);
  d.edus = edus_from_ends(ends);
  d.sentence_ends = derive_sentence_ends(d.tokens, d.edus);
  d.sentences_derived = true;
  d.tree = std::move(tree);
  return d;
}

TEST(Cli, StatsCountsAHandBuiltCorpus) {
  const fs::path dir = scratch("stats");
  using T = DiscourseTree;
  Corpus a;
  a.treebank_id = "toy.a";
  a.train.push_back(hand_document(
      "a1", "toy.a", {"x", "y", ",", "z", "w", "."}, {2, 4, 6},
      T::node({"Elaboration", Nuclearity::NS},
              {T::leaf(0), T::node({"Joint", Nuclearity::NN}, {T::leaf(1), T::leaf(2)})})));
  a.test.push_back(hand_document("a2", "toy.a", {"p", "q", "r", "."}, {2, 4},
                                 T::node({"Elaboration", Nuclearity::SN}, {T::leaf(0), T::leaf(1)})));
  Corpus b;
  b.treebank_id = "toy.b";
  b.train.push_back(hand_document("b1", "toy.b", {"m", "n", "."}, {1, 3},
                                  T::node({"Cause", Nuclearity::NS}, {T::leaf(0), T::leaf(1)})));
  write_corpus(a, dir / "toy.a");
  write_corpus(b, dir / "toy.b");

  Result r = run({"stats", "--corpus", (dir / "toy.a").string(), "--corpus", (dir / "toy.b").string(), "--out",
                  (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string tsv = read_file(dir / "out" / "summary.tsv");
  EXPECT_EQ(tsv,
            "treebank\tlanguage\tdocs\ttokens\tedus\tlabels\tclasses\trelations\n"
            "toy.a\ttoy\t2\t10\t5\t2\t3\t3\n"
            "toy.b\ttoy\t1\t3\t2\t1\t1\t1\n"
            "Total\t1\t3\t13\t7\t3\t4\t4\n");
  // Label frequencies cover train splits only.
  EXPECT_EQ(read_file(dir / "out" / "labels.tsv"),
            "label\ttoy.a\ttoy.b\nCause_NS\t0\t1\nElaboration_NS\t1\t0\nJoint_NN\t1\t0\n");
  EXPECT_NE(r.out.find("Relations"), std::string::npos);

  fs::create_directories(dir / "empty");
  write_file(dir / "empty" / "manifest.tsv", "# nothing\n");
  EXPECT_EQ(run({"stats", "--corpus", (dir / "empty").string()}).code, 1);
  EXPECT_EQ(run({"stats", "--corpus", (dir / "missing").string()}).code, 1);
}

TEST(Cli, AugmentPrintsCandidatesAndMultiplier) {
  const fs::path dir = scratch("augment");
  write_corpus(testing::augmentation_corpus(), dir / "eng.aug");
  Result r = run({"augment", "--corpus", (dir / "eng.aug").string(), "--p-aug", "0.5", "--seed", "7", "--out",
                  (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("10 training documents, 88 candidates, 44 sampled, multiplier 5.4x"), std::string::npos)
      << r.out;
  Corpus c = load_corpus_dir(dir / "out");
  EXPECT_EQ(c.train.size(), 54u);
  EXPECT_EQ(run({"augment", "--corpus", (dir / "eng.aug").string(), "--p-aug", "1.5", "--out",
                 (dir / "out2").string()})
                .code,
            1);
}

TEST(Cli, TrainRejectsBadModeAndStrategy) {
  const fs::path dir = scratch("train_bad");
  auto dirs = synthetic_dirs(dir);
  EXPECT_EQ(run(train_args(dirs, dir / "r1", {"--unified", "--strategy", "xx"})).code, 1);
  EXPECT_EQ(run(train_args(dirs, dir / "r2", {})).code, 1);
  EXPECT_EQ(run(train_args(dirs, dir / "r3", {"--unified", "--mono", "syn.alpha"})).code, 1);
  EXPECT_EQ(run(train_args(dirs, dir / "r4", {"--mono", "syn.gamma"})).code, 1);
  EXPECT_EQ(run(train_args(dirs, dir / "r5", {"--unified", "--bogus"})).code, 1);
  EXPECT_EQ(run(train_args(dirs, dir / "r6", {"--unified", "--fixed-loss-weights", "1,2"})).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, TrainWritesARunDirectory) {
  const fs::path dir = scratch("train");
  auto dirs = synthetic_dirs(dir);
  Result r = run(train_args(dirs, dir / "run", {"--unified", "--strategy", "mu", "--seg-heads", "multiple",
                                                "--augment", "--min-relations", "2"}));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"config.json", "train_log.jsonl", "model.ckpt", "summary.json", "dev_report.txt"})
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  auto cfg = nlohmann::json::parse(read_file(dir / "run" / "config.json"));
  EXPECT_EQ(cfg["model"]["head_strategy"], "mu");
  EXPECT_EQ(cfg["model"]["max_epochs"], 2);
  EXPECT_EQ(cfg["mode"], "unified");
  const std::string log = read_file(dir / "run" / "train_log.jsonl");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 2);
  EXPECT_NE(r.out.find("Pooled"), std::string::npos);
  EXPECT_NE(r.out.find("augment syn.alpha"), std::string::npos);
  // The run directory is not reused.
  EXPECT_EQ(run(train_args(dirs, dir / "run", {"--unified"})).code, 1);

  Result mono = run(train_args(dirs, dir / "mono", {"--mono", "syn.beta"}));
  ASSERT_EQ(mono.code, 0) << mono.err;
  ParserModel m = load_checkpoint(dir / "mono" / "model.ckpt");
  EXPECT_EQ(m.registry().treebanks(), std::vector<std::string>{"syn.beta"});
}

TEST(Cli, SeedsGiveDistinctRunsAndEvaluateAverages) {
  const fs::path dir = scratch("seeds");
  auto dirs = synthetic_dirs(dir);
  std::vector<std::string> ckpts, losses;
  for (const char* seed : {"1", "2", "3"}) {
    const fs::path out = dir / (std::string("s") + seed);
    Result r = run(train_args(dirs, out, {"--unified", "--seed", seed}));
    ASSERT_EQ(r.code, 0) << r.err;
    ckpts.push_back((out / "model.ckpt").string());
    auto first = nlohmann::json::parse(read_file(out / "train_log.jsonl").substr(0, read_file(out / "train_log.jsonl").find('\n')));
    losses.push_back(first["loss"].dump());
  }
  EXPECT_NE(losses[0], losses[1]);
  EXPECT_NE(losses[1], losses[2]);

  // Same seed, same bytes.
  Result again = run(train_args(dirs, dir / "s1b", {"--unified", "--seed", "1"}));
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(read_file(dir / "s1b" / "model.ckpt"), read_file(ckpts[0]));

  std::vector<std::string> args{"evaluate", "--split", "test", "--out", (dir / "eval").string()};
  for (const auto& c : ckpts) args.insert(args.end(), {"--checkpoint", c});
  for (const auto& d : dirs) args.insert(args.end(), {"--corpus", d});
  Result ev = run(args);
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_NE(ev.out.find(" |     S     N     R  Full |   Seg     S     N     R  Full"), std::string::npos)
      << ev.out;
  auto rep = nlohmann::json::parse(read_file(dir / "eval" / "report.json"));
  ASSERT_EQ(rep["runs"].size(), 3u);
  EXPECT_EQ(rep["trees"], "binarized");
  for (const std::string tb : {"syn.alpha", "syn.beta"}) {
    double sum = 0;
    for (const auto& r : rep["runs"]) sum += r["treebanks"][tb]["end_to_end"]["full"]["f1"].get<double>();
    EXPECT_NEAR(rep["mean_f1"][tb]["end_to_end"][4].get<double>(), sum / 3, 1e-9);
  }
  double pooled = 0;
  for (const auto& r : rep["runs"]) pooled += r["pooled"]["gold_seg"]["span"]["f1"].get<double>();
  EXPECT_NEAR(rep["mean_f1"]["Pooled"]["gold_seg"][0].get<double>(), pooled / 3, 1e-9);
}

TEST(Cli, PredictWritesACanonicalDocument) {
  const fs::path dir = scratch("predict");
  auto dirs = synthetic_dirs(dir);
  ASSERT_EQ(run(train_args(dirs, dir / "run", {"--unified", "--strategy", "mh"})).code, 0);
  const std::string ck = (dir / "run" / "model.ckpt").string();
  write_file(dir / "raw.txt", "c1d0 alpha bravo . echo golf .\n");
  Result r = run({"predict", "--checkpoint", ck, "--treebank", "syn.alpha", "--input", (dir / "raw.txt").string(),
                  "--out", (dir / "raw.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  Document d = parse_canonical(read_file(dir / "raw.json"));
  EXPECT_EQ(d.doc_id, "raw");
  EXPECT_EQ(d.n_tokens(), 7);
  EXPECT_TRUE(fs::exists(dir / "raw.json.config.json"));

  const std::string gold = dirs[0] + "/syn.alpha_test0.json";
  Result g = run({"predict", "--checkpoint", ck, "--treebank", "syn.alpha", "--input", gold, "--gold-seg", "--out",
                  (dir / "gold.json").string()});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(parse_canonical(read_file(dir / "gold.json")).edus, parse_canonical(read_file(gold)).edus);

  Result bad = run({"predict", "--checkpoint", ck, "--treebank", "syn.gamma", "--input", (dir / "raw.txt").string(),
                    "--out", (dir / "bad.json").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("syn.gamma"), std::string::npos);
  EXPECT_EQ(run({"predict", "--checkpoint", (dir / "raw.txt").string(), "--treebank", "syn.alpha", "--input",
                 (dir / "raw.txt").string(), "--out", (dir / "x.json").string()})
                .code,
            1);
}

}  // namespace
}  // namespace unirst
