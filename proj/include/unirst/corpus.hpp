#pragma once

// Split manifests and corpus loading.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "unirst/canonical.hpp"
#include "unirst/dis.hpp"
#include "unirst/document.hpp"
#include "unirst/error.hpp"
#include "unirst/relation_map.hpp"
#include "unirst/rs3.hpp"

namespace unirst {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << bytes;
}

// doc_id -> split. Text, two whitespace-separated columns per line; '#'
// starts a comment.
struct SplitManifest {
  std::vector<std::pair<std::string, Split>> entries;  // file order

  static SplitManifest parse(std::string_view text, const std::string& source = "manifest") {
    SplitManifest m;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
      std::istringstream fields(line);
      std::string id, split, extra;
      if (!(fields >> id)) continue;
      const std::string where = source + ":" + std::to_string(lineno);
      if (!(fields >> split)) throw ParseError(where, "expected 'doc_id split'");
      if (fields >> extra) throw ParseError(where, "unexpected third column");
      if (!seen.insert(id).second) throw ParseError(where, "duplicate doc_id " + id);
      try {
        m.entries.emplace_back(id, parse_split(split));
      } catch (const InputError& e) {
        throw ParseError(where, e.what());
      }
    }
    return m;
  }

  static SplitManifest load(const std::filesystem::path& path) {
    return parse(read_file(path), path.string());
  }

  std::string str() const {
    std::string out;
    for (const auto& [id, s] : entries) out += id + "\t" + std::string(to_string(s)) + "\n";
    return out;
  }
};

struct LoadOptions {
  // Used for rs3/dis sources; canonical files carry their own id. Defaults to
  // the corpus directory name.
  std::string treebank_id;
  const RelationMap* relation_map = nullptr;
};

// Reads one source file, choosing the reader by extension.
inline Document read_document(const std::filesystem::path& path, const std::string& doc_id,
                              const std::string& treebank_id, const RelationMap* map) {
  const std::string bytes = read_file(path);
  const std::string ext = path.extension().string();
  ReadOptions opt{doc_id, treebank_id, map};
  if (ext == ".rs3") return parse_rs3(bytes, opt);
  if (ext == ".dis") return parse_dis(bytes, opt);
  return parse_canonical(bytes);
}

// Documents are looked up as <root>/<doc_id>.{json,rs3,dis}. Missing files
// are errors; documents that fail to parse or validate are skipped and
// reported in Corpus::diagnostics.
inline Corpus load_corpus(const std::filesystem::path& root, const SplitManifest& manifest,
                          const LoadOptions& opt = {}) {
  namespace fs = std::filesystem;
  Corpus c;
  c.treebank_id = opt.treebank_id.empty() ? fs::absolute(root).lexically_normal().filename().string()
                                          : opt.treebank_id;
  if (c.treebank_id.empty()) c.treebank_id = fs::absolute(root).parent_path().filename().string();
  c.language = language_of(c.treebank_id);

  for (const auto& [id, split] : manifest.entries) {
    fs::path found;
    for (const char* ext : {".json", ".rs3", ".dis"}) {
      fs::path p = root / (id + ext);
      if (fs::exists(p)) {
        found = p;
        break;
      }
    }
    if (found.empty())
      throw InputError("document '" + id + "' listed in manifest is missing under " + root.string());
    Document d;
    try {
      d = read_document(found, id, c.treebank_id, opt.relation_map);
    } catch (const InputError& e) {
      c.diagnostics.push_back(id + ": " + e.what());
      continue;
    }
    if (d.doc_id != id) {
      c.diagnostics.push_back(id + ": file declares doc_id '" + d.doc_id + "'");
      continue;
    }
    if (d.treebank_id != c.treebank_id) {
      c.diagnostics.push_back(id + ": treebank_id '" + d.treebank_id + "' differs from corpus '" +
                              c.treebank_id + "'; using the corpus id");
      d.treebank_id = c.treebank_id;
    }
    const auto violations = document_violations(d);
    if (!violations.empty()) {
      c.diagnostics.push_back(id + ": " + violations.front());
      continue;
    }
    c.split(split).push_back(std::move(d));
  }
  return c;
}

// Loads <dir>/manifest.tsv.
inline Corpus load_corpus_dir(const std::filesystem::path& dir, const LoadOptions& opt = {}) {
  return load_corpus(dir, SplitManifest::load(dir / "manifest.tsv"), opt);
}

// Writes every document as <dir>/<doc_id>.json plus manifest.tsv.
inline void write_corpus(const Corpus& c, const std::filesystem::path& dir) {
  SplitManifest m;
  for (Split s : {Split::Train, Split::Dev, Split::Test}) {
    for (const auto& d : c.split(s)) {
      write_file(dir / (d.doc_id + ".json"), write_canonical(d));
      m.entries.emplace_back(d.doc_id, s);
    }
  }
  write_file(dir / "manifest.tsv", m.str());
}

}  // namespace unirst
