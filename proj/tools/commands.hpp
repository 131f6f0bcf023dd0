#pragma once

// Subcommands of the unirst tool. run_cli returns the process exit code:
// 0 success, 1 input or usage error, 2 internal invariant violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "unirst/augment.hpp"
#include "unirst/canonical.hpp"
#include "unirst/checkpoint.hpp"
#include "unirst/corpus.hpp"
#include "unirst/eval.hpp"
#include "unirst/inventory.hpp"
#include "unirst/train.hpp"

namespace unirst::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// ---- shared plumbing --------------------------------------------------------

// A run directory is written once: a second run into it is refused.
inline void begin_run(const fs::path& dir, const ojson& config) {
  if (fs::exists(dir / "config.json"))
    throw InputError("run directory " + dir.string() + " already holds a run (config.json exists)");
  fs::create_directories(dir);
  write_file(dir / "config.json", config.dump(2) + "\n");
}

inline std::pair<std::string, std::string> split_assignment(const std::string& s, const char* flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
    throw InputError(std::string(flag) + " expects TREEBANK=VALUE, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

struct CorpusArgs {
  std::vector<std::string> dirs;
  std::string relation_map;

  void add_to(CLI::App* app) {
    app->add_option("--corpus", dirs, "Corpus directory with manifest.tsv (repeatable)")->required();
    app->add_option("--relation-map", relation_map, "fine -> coarse relation map for rs3/dis sources");
  }

  std::vector<Corpus> load(std::ostream& err) const {
    std::optional<RelationMap> map;
    if (!relation_map.empty()) map = RelationMap::load(relation_map);
    std::vector<Corpus> out;
    for (const auto& d : dirs) {
      LoadOptions opt;
      opt.relation_map = map ? &*map : nullptr;
      Corpus c = load_corpus_dir(d, opt);
      for (const auto& msg : c.diagnostics) err << "warning: " << c.treebank_id << ": " << msg << "\n";
      if (c.train.empty() && c.dev.empty() && c.test.empty())
        throw InputError("corpus " + d + " has no usable documents");
      for (const auto& o : out)
        if (o.treebank_id == c.treebank_id) throw InputError("treebank " + c.treebank_id + " given twice");
      out.push_back(std::move(c));
    }
    return out;
  }

  ojson to_json() const { return {{"corpora", dirs}, {"relation_map", relation_map}}; }
};

inline ojson counts_json(const Counts& c) {
  return {{"matched", c.matched}, {"gold", c.gold}, {"pred", c.pred}, {"f1", c.f1()}};
}

inline ojson report_json(const ParsevalReport& r) {
  ojson j{{"mode", std::string(to_string(r.mode))}};
  if (r.mode == EvalMode::EndToEnd) j["seg"] = counts_json(r.seg);
  j["span"] = counts_json(r.span);
  j["nuc"] = counts_json(r.nuc);
  j["rel"] = counts_json(r.rel);
  j["full"] = counts_json(r.full);
  return j;
}

inline std::string pad_left(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}
inline std::string pad_right(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

// ---- convert ----------------------------------------------------------------

struct ConvertArgs {
  std::vector<std::string> inputs;
  std::string format;
  std::string out;
  std::string treebank;
  std::string relation_map;
};

inline int cmd_convert(const ConvertArgs& a, Streams io) {
  if (a.format != "canonical" && a.treebank.empty())
    throw InputError("--treebank is required for " + a.format + " input");
  std::optional<RelationMap> map;
  if (!a.relation_map.empty()) map = RelationMap::load(a.relation_map);
  begin_run(a.out, {{"command", "convert"},
                    {"inputs", a.inputs},
                    {"format", a.format},
                    {"treebank", a.treebank},
                    {"relation_map", a.relation_map}});
  std::set<std::string> written;
  std::vector<std::string> failed;
  for (const auto& in : a.inputs) {
    const std::string id = fs::path(in).stem().string();
    try {
      if (!written.insert(id).second) throw InputError("another input already produced " + id + ".json");
      const std::string bytes = read_file(in);
      ReadOptions opt{id, a.treebank, map ? &*map : nullptr};
      Document d = a.format == "rs3"   ? parse_rs3(bytes, opt)
                   : a.format == "dis" ? parse_dis(bytes, opt)
                                       : parse_canonical(bytes);
      const auto violations = document_violations(d);
      if (!violations.empty()) throw InputError(violations.front());
      write_file(fs::path(a.out) / (id + ".json"), write_canonical(d));
      io.out << in << " -> " << (fs::path(a.out) / (id + ".json")).string() << "\n";
    } catch (const InputError& e) {
      io.err << "error: " << in << ": " << e.what() << "\n";
      failed.push_back(in);
    }
  }
  io.out << (a.inputs.size() - failed.size()) << " converted, " << failed.size() << " failed\n";
  if (!failed.empty()) {
    io.err << "failed inputs:\n";
    for (const auto& f : failed) io.err << "  " << f << "\n";
    return 1;
  }
  return 0;
}

// ---- stats ------------------------------------------------------------------

inline std::string summary_line(const TreebankSummary& s, std::size_t w) {
  std::string l = pad_right(s.treebank_id, w) + "  " + pad_right(s.language, 5);
  for (std::size_t v : {s.docs, s.tokens, s.edus, s.labels, s.classes, s.relations})
    l += pad_left(std::to_string(v), 10);
  return l + "\n";
}

// One row per treebank with documents, tokens, EDUs, distinct relation names,
// distinct relation+nuclearity classes and relation instances.
inline std::string summary_table(const std::vector<TreebankSummary>& rows) {
  std::size_t w = 8;
  for (const auto& r : rows) w = std::max(w, r.treebank_id.size());
  const char* heads[] = {"Docs", "Tokens", "EDUs", "Labels", "Classes", "Relations"};
  std::string out = pad_right("Treebank", w) + "  " + pad_right("Lang", 5);
  for (const char* h : heads) out += pad_left(h, 10);
  out += "\n";
  for (const auto& r : rows) out += summary_line(r, w);
  return out;
}

struct StatsArgs {
  CorpusArgs corpora;
  std::string out;
};

inline int cmd_stats(const StatsArgs& a, Streams io) {
  auto corpora = a.corpora.load(io.err);
  std::vector<TreebankSummary> rows;
  for (const auto& c : corpora) rows.push_back(summarize(c));

  // Totals: label and class counts are distinct over the union of treebanks.
  TreebankSummary total;
  total.treebank_id = "Total";
  std::set<std::string> langs, names;
  std::set<RelationLabel> classes;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    total.docs += rows[i].docs;
    total.tokens += rows[i].tokens;
    total.edus += rows[i].edus;
    total.relations += rows[i].relations;
    langs.insert(rows[i].language);
    for (Split s : {Split::Train, Split::Dev, Split::Test})
      for (const auto& d : corpora[i].split(s)) {
        std::map<RelationLabel, std::size_t> counts;
        count_labels(d.tree, counts);
        for (const auto& [l, n] : counts) {
          classes.insert(l);
          names.insert(l.relation);
        }
      }
  }
  total.labels = names.size();
  total.classes = classes.size();
  total.language = std::to_string(langs.size());
  std::vector<TreebankSummary> with_total = rows;
  with_total.push_back(total);
  const std::string summary = summary_table(with_total);

  std::vector<Corpus> with_train;
  for (const auto& c : corpora)
    if (!c.train.empty()) with_train.push_back(c);
  const std::string labels = with_train.empty() ? std::string() : stats_report(with_train).to_delimited('\t');

  io.out << summary << "\n" << labels;
  if (!a.out.empty()) {
    begin_run(a.out, {{"command", "stats"}, {"input", a.corpora.to_json()}});
    write_file(fs::path(a.out) / "summary.txt", summary);
    std::string tsv = "treebank\tlanguage\tdocs\ttokens\tedus\tlabels\tclasses\trelations\n";
    for (const auto& r : with_total)
      tsv += r.treebank_id + "\t" + r.language + "\t" + std::to_string(r.docs) + "\t" + std::to_string(r.tokens) +
             "\t" + std::to_string(r.edus) + "\t" + std::to_string(r.labels) + "\t" + std::to_string(r.classes) +
             "\t" + std::to_string(r.relations) + "\n";
    write_file(fs::path(a.out) / "summary.tsv", tsv);
    write_file(fs::path(a.out) / "labels.tsv", labels);
  }
  return 0;
}

// ---- augment ----------------------------------------------------------------

struct AugmentArgs {
  CorpusArgs corpora;
  AugmentConfig config;
  std::string out;
};

inline int cmd_augment(const AugmentArgs& a, Streams io) {
  if (a.corpora.dirs.size() != 1) throw InputError("augment takes exactly one --corpus");
  a.config.check();
  Corpus c = a.corpora.load(io.err).front();
  AugmentResult r = sample_augmented(c, a.config);
  begin_run(a.out, {{"command", "augment"},
                    {"input", a.corpora.to_json()},
                    {"p_aug", a.config.p_aug},
                    {"min_relations", a.config.min_relations},
                    {"seed", a.config.rng_seed}});
  write_corpus(r.corpus, a.out);
  io.out << "treebank " << c.treebank_id << ": " << r.original << " training documents, " << r.candidates
         << " candidates, " << r.sampled << " sampled, multiplier " << fmt1(r.multiplier()) << "x\n";
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  CorpusArgs corpora;
  std::string mono;
  bool unified = false;
  std::string strategy = "mu";
  std::string seg_heads = "multiple";
  std::uint64_t seed = 1;
  std::string out;
  std::string config_file;
  std::optional<int> epochs, patience, batch_size, embed_dim, encoder_hidden, segmenter_hidden, parser_hidden,
      label_hidden;
  std::optional<double> lr, lr_encoder, clip_norm;
  std::vector<double> fixed_loss_weights;
  bool augment = false;
  double p_aug = 0.5;
  int min_relations = 3;
  std::vector<std::string> merge_rules;  // TREEBANK=FILE
  std::size_t merge_threshold = kDefaultMergeThreshold;
  std::vector<std::string> schemas;  // TREEBANK=SCHEMA
  std::string embeddings;
};

inline ModelConfig resolve_model_config(const TrainArgs& a) {
  ModelConfig c;
  if (!a.config_file.empty()) {
    ojson j;
    try {
      j = ojson::parse(read_file(a.config_file));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(a.config_file + ": " + e.what());
    }
    ojson merged = c.to_json();
    for (const auto& [k, v] : j.items()) {
      if (!merged.contains(k)) throw InputError(a.config_file + ": unknown config key '" + k + "'");
      merged[k] = v;
    }
    c = ModelConfig::from_json(merged);
  }
  c.head_strategy = parse_head_strategy(a.strategy);
  c.segmentation_heads = parse_seg_heads(a.seg_heads);
  c.rng_seed = a.seed;
  if (a.epochs) c.max_epochs = *a.epochs;
  if (a.patience) c.patience = *a.patience;
  if (a.batch_size) c.batch_size = *a.batch_size;
  if (a.embed_dim) c.embed_dim = *a.embed_dim;
  if (a.encoder_hidden) c.encoder_hidden = *a.encoder_hidden;
  if (a.segmenter_hidden) c.segmenter_hidden = *a.segmenter_hidden;
  if (a.parser_hidden) c.parser_hidden = *a.parser_hidden;
  if (a.label_hidden) c.label_hidden = *a.label_hidden;
  if (a.lr) c.learning_rate_model = *a.lr;
  if (a.lr_encoder) c.learning_rate_encoder = *a.lr_encoder;
  if (a.clip_norm) c.clip_norm = *a.clip_norm;
  if (!a.fixed_loss_weights.empty()) {
    if (a.fixed_loss_weights.size() != 3) throw InputError("--fixed-loss-weights takes three values");
    c.dynamic_loss_weights = false;
    c.fixed_loss_weights = {a.fixed_loss_weights[0], a.fixed_loss_weights[1], a.fixed_loss_weights[2]};
  }
  if (!a.embeddings.empty()) c.embeddings_path = a.embeddings;
  c.check();
  return c;
}

// Gold-seg and end-to-end reports of one split, per treebank plus pooled.
struct SplitReports {
  AggregateReport gold_seg;
  AggregateReport end_to_end;
};

inline SplitReports evaluate_both(ParserModel& model, const std::vector<Corpus>& corpora, Split split) {
  return {aggregate(evaluate_split(model, corpora, split, EvalMode::GoldSeg)),
          aggregate(evaluate_split(model, corpora, split, EvalMode::EndToEnd))};
}

inline std::vector<ScoreRow> score_rows(const SplitReports& r) {
  std::vector<ScoreRow> rows;
  for (std::size_t i = 0; i < r.gold_seg.rows.size(); ++i)
    rows.push_back(score_row({r.gold_seg.rows[i].first, r.gold_seg.rows[i].second, r.end_to_end.rows[i].second}));
  if (rows.size() > 1) rows.push_back(score_row({"Pooled", r.gold_seg.pooled, r.end_to_end.pooled}));
  return rows;
}

inline int cmd_train(const TrainArgs& a, Streams io) {
  if (a.mono.empty() == !a.unified) throw InputError("train needs exactly one of --mono <treebank> or --unified");
  ModelConfig cfg = resolve_model_config(a);
  std::vector<Corpus> corpora = a.corpora.load(io.err);
  if (!a.mono.empty()) {
    auto it = std::find_if(corpora.begin(), corpora.end(), [&](const Corpus& c) { return c.treebank_id == a.mono; });
    if (it == corpora.end()) throw InputError("--mono " + a.mono + " names none of the given corpora");
    Corpus keep = std::move(*it);
    corpora.clear();
    corpora.push_back(std::move(keep));
  }

  PrepareOptions prep;
  prep.registry.merge_threshold = a.merge_threshold;
  ojson rules_json = ojson::object(), schema_json = ojson::object();
  for (const auto& s : a.merge_rules) {
    auto [tb, file] = split_assignment(s, "--merge-rules");
    prep.registry.merge_rules[tb] = load_merge_rules(file);
    rules_json[tb] = file;
  }
  for (const auto& s : a.schemas) {
    auto [tb, schema] = split_assignment(s, "--schema");
    prep.registry.schema_of[tb] = schema;
    schema_json[tb] = schema;
  }
  if (a.augment) {
    AugmentConfig ac;
    ac.p_aug = a.p_aug;
    ac.min_relations = a.min_relations;
    ac.rng_seed = a.seed;
    ac.check();
    prep.augment = ac;
  }
  if (!cfg.embeddings_path.empty())
    prep.embeddings = std::make_shared<EmbeddingTable>(load_embeddings(cfg.embeddings_path));

  std::vector<std::string> treebanks;
  for (const auto& c : corpora) treebanks.push_back(c.treebank_id);
  ojson snapshot{{"command", "train"},
                 {"mode", a.mono.empty() ? "unified" : "mono"},
                 {"input", a.corpora.to_json()},
                 {"treebanks", treebanks},
                 {"seed", a.seed},
                 {"model", cfg.to_json()},
                 {"augment", a.augment ? ojson{{"p_aug", a.p_aug}, {"min_relations", a.min_relations}} : ojson()},
                 {"merge_rules", rules_json},
                 {"merge_threshold", a.merge_threshold},
                 {"schema", schema_json}};
  Prepared p = prepare_model(std::move(corpora), cfg, prep);
  begin_run(a.out, snapshot);

  const fs::path dir = a.out;
  std::ofstream log(dir / "train_log.jsonl");
  if (!log) throw InputError("cannot write " + (dir / "train_log.jsonl").string());
  ojson aug = ojson::array();
  for (std::size_t i = 0; i < p.augmentation.size(); ++i) {
    const auto& r = p.augmentation[i];
    aug.push_back({{"treebank", p.corpora[i].treebank_id},
                   {"original", r.original},
                   {"candidates", r.candidates},
                   {"sampled", r.sampled},
                   {"multiplier", r.multiplier()}});
    io.out << "augment " << p.corpora[i].treebank_id << ": " << r.candidates << " candidates, " << r.sampled
           << " sampled, multiplier " << fmt1(r.multiplier()) << "x\n";
  }
  TrainOptions opt;
  opt.on_epoch = [&](const EpochRecord& rec) {
    log << rec.to_json().dump() << "\n" << std::flush;
    io.out << "epoch " << rec.epoch << " loss " << rec.train.total << " dev Full " << fmt1(rec.dev_full)
           << (rec.improved ? " *" : "") << "\n";
  };
  TrainResult res = train(p.model, p.corpora, opt);
  save_checkpoint(p.model, dir / "model.ckpt");

  SplitReports dev = evaluate_both(p.model, p.corpora, Split::Dev);
  const std::string table = format_scores(score_rows(dev));
  write_file(dir / "dev_report.txt", table);
  ojson summary{{"best_epoch", res.best_epoch},
                {"best_dev_full", res.best_dev_full},
                {"evaluations", res.evaluations},
                {"stopped_early", res.stopped_early},
                {"epochs_run", res.log.size()},
                {"augmentation", aug}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  io.out << "best epoch " << res.best_epoch << ", dev gold-seg Full " << fmt1(res.best_dev_full) << "\n" << table;
  return 0;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::vector<std::string> checkpoints;
  CorpusArgs corpora;
  std::string split = "test";
  std::string embeddings;
  std::string out;
};

inline void attach_embeddings(ParserModel& m, const std::string& override_path) {
  std::string path = override_path.empty() ? m.config().embeddings_path : override_path;
  if (!m.uses_precomputed()) return;
  if (path.empty()) throw InputError("checkpoint expects precomputed embeddings; pass --embeddings");
  m.set_embeddings(std::make_shared<EmbeddingTable>(load_embeddings(path)));
}

// Gold documents as the model saw them in training: merged labels relabeled.
inline std::vector<Corpus> as_trained(const ParserModel& m, std::vector<Corpus> corpora) {
  for (auto& c : corpora)
    if (auto it = m.registry().relabel.find(c.treebank_id); it != m.registry().relabel.end())
      c = relabel_corpus(c, it->second);
  return corpora;
}

inline int cmd_evaluate(const EvaluateArgs& a, Streams io) {
  const Split split = parse_split(a.split);
  std::vector<Corpus> corpora = a.corpora.load(io.err);
  std::vector<std::vector<ScoreRow>> runs;
  ojson runs_json = ojson::array();
  for (const auto& ck : a.checkpoints) {
    ParserModel m = load_checkpoint(ck);
    attach_embeddings(m, a.embeddings);
    auto gold = as_trained(m, corpora);
    for (const auto& c : gold)
      if (c.split(split).empty()) throw InputError("corpus " + c.treebank_id + " has no " + a.split + " documents");
    SplitReports r = evaluate_both(m, gold, split);
    runs.push_back(score_rows(r));
    ojson per_tb = ojson::object();
    for (std::size_t i = 0; i < r.gold_seg.rows.size(); ++i)
      per_tb[r.gold_seg.rows[i].first] = {{"gold_seg", report_json(r.gold_seg.rows[i].second)},
                                          {"end_to_end", report_json(r.end_to_end.rows[i].second)}};
    runs_json.push_back({{"checkpoint", ck},
                         {"treebanks", per_tb},
                         {"pooled", {{"gold_seg", report_json(r.gold_seg.pooled)},
                                     {"end_to_end", report_json(r.end_to_end.pooled)}}}});
  }

  // Mean F1 over runs, row by row.
  std::vector<ScoreRow> mean = runs.front();
  for (std::size_t i = 0; i < mean.size(); ++i) {
    std::array<double, 4> g{};
    std::array<double, 5> e{};
    for (const auto& run : runs) {
      for (std::size_t k = 0; k < 4; ++k) g[k] += (*run[i].gold_seg)[k] / static_cast<double>(runs.size());
      for (std::size_t k = 0; k < 5; ++k) e[k] += (*run[i].end_to_end)[k] / static_cast<double>(runs.size());
    }
    mean[i].gold_seg = g;
    mean[i].end_to_end = e;
  }
  const std::string table = format_scores(mean);
  io.out << table;
  if (!a.out.empty()) {
    begin_run(a.out, {{"command", "evaluate"},
                      {"checkpoints", a.checkpoints},
                      {"input", a.corpora.to_json()},
                      {"split", a.split},
                      {"embeddings", a.embeddings}});
    ojson mean_json = ojson::object();
    for (const auto& r : mean) mean_json[r.name] = {{"gold_seg", *r.gold_seg}, {"end_to_end", *r.end_to_end}};
    write_file(fs::path(a.out) / "report.json",
               ojson{{"trees", "binarized"}, {"runs", runs_json}, {"mean_f1", mean_json}}.dump(2) + "\n");
    write_file(fs::path(a.out) / "table.txt", table);
  }
  return 0;
}

// ---- predict ----------------------------------------------------------------

struct PredictArgs {
  std::string checkpoint;
  std::string input;
  std::string treebank;
  std::string doc_id;
  std::string embeddings;
  std::string out;
  bool gold_seg = false;
};

inline int cmd_predict(const PredictArgs& a, Streams io) {
  ParserModel m = load_checkpoint(a.checkpoint);
  attach_embeddings(m, a.embeddings);
  const std::string bytes = read_file(a.input);
  Document doc;
  const bool canonical = fs::path(a.input).extension() == ".json";
  if (canonical) {
    doc = parse_canonical(bytes);
  } else {
    doc.tokens = whitespace_tokens(bytes);
    doc.doc_id = fs::path(a.input).stem().string();
  }
  if (!a.doc_id.empty()) doc.doc_id = a.doc_id;
  if (a.gold_seg && !canonical) throw InputError("--gold-seg needs a canonical input with EDUs");
  Document pred = m.predict(doc, a.treebank, a.gold_seg ? &doc.edus : nullptr);
  const std::string text = write_canonical(pred);
  const fs::path out = a.out;
  const fs::path snap = out.string() + ".config.json";
  if (fs::exists(out) || fs::exists(snap)) throw InputError("refusing to overwrite " + out.string());
  write_file(snap, ojson{{"command", "predict"},
                         {"checkpoint", a.checkpoint},
                         {"input", a.input},
                         {"treebank", a.treebank},
                         {"doc_id", doc.doc_id},
                         {"gold_seg", a.gold_seg},
                         {"embeddings", a.embeddings}}
                       .dump(2) + "\n");
  write_file(out, text);
  io.out << pred.doc_id << ": " << pred.n_edus() << " EDUs, " << count_internal(pred.tree) << " relations -> "
         << out.string() << "\n";
  return 0;
}

// ---- entry point ------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, Streams io) {
  CLI::App app{"Multi-treebank RST discourse parsing toolkit", "unirst"};
  app.require_subcommand(1);

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "Convert rs3/dis/canonical files to canonical JSON");
  c->add_option("inputs", conv.inputs, "Input files")->required();
  c->add_option("--format", conv.format, "Input format")
      ->required()
      ->check(CLI::IsMember({"rs3", "dis", "canonical"}));
  c->add_option("--out", conv.out, "Output directory")->required();
  c->add_option("--treebank", conv.treebank, "Treebank id for rs3/dis inputs");
  c->add_option("--relation-map", conv.relation_map, "fine -> coarse relation map");

  StatsArgs stats;
  auto* s = app.add_subcommand("stats", "Treebank summary and label frequency tables");
  stats.corpora.add_to(s);
  s->add_option("--out", stats.out, "Directory for the tables");

  AugmentArgs aug;
  auto* g = app.add_subcommand("augment", "Add sentence-aligned subtrees to a training split");
  aug.corpora.add_to(g);
  g->add_option("--p-aug", aug.config.p_aug, "Fraction of candidates to sample")->capture_default_str();
  g->add_option("--min-relations", aug.config.min_relations, "Minimum relations per candidate")
      ->capture_default_str();
  g->add_option("--seed", aug.config.rng_seed, "Sampling seed")->capture_default_str();
  g->add_option("--out", aug.out, "Output corpus directory")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a parser");
  tr.corpora.add_to(t);
  auto* mono = t->add_option("--mono", tr.mono, "Train on this treebank only");
  auto* uni = t->add_flag("--unified", tr.unified, "Train one model on all given treebanks");
  mono->excludes(uni);
  t->add_option("--strategy", tr.strategy, "Label head strategy")
      ->check(CLI::IsMember({"mh", "mu", "uu"}, CLI::ignore_case))
      ->capture_default_str();
  t->add_option("--seg-heads", tr.seg_heads, "Segmentation heads")
      ->check(CLI::IsMember({"single", "multiple"}, CLI::ignore_case))
      ->capture_default_str();
  t->add_option("--seed", tr.seed, "Seed for initialization, shuffling and augmentation")->capture_default_str();
  t->add_option("--out", tr.out, "Run directory")->required();
  t->add_option("--config", tr.config_file, "JSON file with model config overrides");
  t->add_option("--epochs", tr.epochs, "Maximum epochs");
  t->add_option("--patience", tr.patience, "Early-stopping patience (default 3 unified, 5 mono)");
  t->add_option("--batch-size", tr.batch_size, "Documents per batch");
  t->add_option("--embed-dim", tr.embed_dim, "Token embedding size");
  t->add_option("--encoder-hidden", tr.encoder_hidden, "BiLSTM output size");
  t->add_option("--segmenter-hidden", tr.segmenter_hidden, "Segmenter hidden size");
  t->add_option("--parser-hidden", tr.parser_hidden, "Decoder hidden size");
  t->add_option("--label-hidden", tr.label_hidden, "Biaffine projection size");
  t->add_option("--lr", tr.lr, "Learning rate of the non-encoder parameters");
  t->add_option("--lr-encoder", tr.lr_encoder, "Learning rate of the encoder");
  t->add_option("--clip-norm", tr.clip_norm, "Global gradient-norm clip");
  t->add_option("--fixed-loss-weights", tr.fixed_loss_weights, "Three fixed loss weights (disables dynamic)")
      ->delimiter(',');
  t->add_flag("--augment", tr.augment, "Add sampled subtrees to each train split");
  t->add_option("--p-aug", tr.p_aug, "Augmentation fraction")->capture_default_str();
  t->add_option("--min-relations", tr.min_relations, "Minimum relations per candidate")->capture_default_str();
  t->add_option("--merge-rules", tr.merge_rules, "TREEBANK=FILE merge rules (repeatable)");
  t->add_option("--merge-threshold", tr.merge_threshold, "Merge labels rarer than this")->capture_default_str();
  t->add_option("--schema", tr.schemas, "TREEBANK=SCHEMA shared inventory id (repeatable)");
  t->add_option("--embeddings", tr.embeddings, "Precomputed encoder inputs");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score checkpoints; several checkpoints are averaged");
  e->add_option("--checkpoint", ev.checkpoints, "Model checkpoint (repeatable)")->required();
  ev.corpora.add_to(e);
  e->add_option("--split", ev.split, "Split to score")
      ->check(CLI::IsMember({"train", "dev", "test"}))
      ->capture_default_str();
  e->add_option("--embeddings", ev.embeddings, "Precomputed encoder inputs");
  e->add_option("--out", ev.out, "Directory for report.json and table.txt");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Parse one document");
  p->add_option("--checkpoint", pr.checkpoint, "Model checkpoint")->required();
  p->add_option("--input", pr.input, "Raw text (whitespace tokenized) or canonical .json")->required();
  p->add_option("--treebank", pr.treebank, "Treebank whose heads to use")->required();
  p->add_option("--doc-id", pr.doc_id, "Document id of the output");
  p->add_option("--embeddings", pr.embeddings, "Precomputed encoder inputs");
  p->add_option("--out", pr.out, "Output canonical file")->required();
  p->add_flag("--gold-seg", pr.gold_seg, "Keep the EDUs of a canonical input");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err, io.out, io.err);
    return rc == 0 ? 0 : 1;
  }
  try {
    if (c->parsed()) return cmd_convert(conv, io);
    if (s->parsed()) return cmd_stats(stats, io);
    if (g->parsed()) return cmd_augment(aug, io);
    if (t->parsed()) return cmd_train(tr, io);
    if (e->parsed()) return cmd_evaluate(ev, io);
    if (p->parsed()) return cmd_predict(pr, io);
  } catch (const InputError& err) {
    io.err << "error: " << err.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& err) {
    io.err << "error: " << err.what() << "\n";
    return 1;
  } catch (const InvariantError& err) {
    io.err << "internal error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    io.err << "internal error: " << err.what() << "\n";
    return 2;
  }
  io.err << "internal error: no subcommand ran\n";
  return 2;
}

}  // namespace unirst::cli
