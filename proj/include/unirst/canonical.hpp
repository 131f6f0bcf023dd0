#pragma once

// Canonical versioned document format: one JSON object per file.
//
//   {"format":"unirst-document","version":1,"doc_id":...,"treebank_id":...,
//    "tokens":[...],"sentence_ends":[...],"sentences_derived":bool,
//    "edus":[[start,end],...],"tree":{...},"provenance":{...}?}
//
// Tree nodes are {"span":[first,last]} for leaves and
// {"span":[..],"relation":"Elaboration","nuclearity":"NS","children":[..]}
// for internal nodes, with "chained":true on binarization chain links.

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "unirst/document.hpp"
#include "unirst/error.hpp"
#include "unirst/tree.hpp"

namespace unirst {

inline constexpr const char* kCanonicalFormat = "unirst-document";
inline constexpr int kCanonicalVersion = 1;

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson tree_to_json(const DiscourseTree& t) {
  ojson j;
  j["span"] = {t.span.first, t.span.last};
  if (t.label) {
    j["relation"] = t.label->relation;
    j["nuclearity"] = std::string(to_string(t.label->nuclearity));
  }
  if (t.chained) j["chained"] = true;
  if (!t.children.empty()) {
    ojson kids = ojson::array();
    for (const auto& c : t.children) kids.push_back(tree_to_json(c));
    j["children"] = std::move(kids);
  }
  return j;
}

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& msg) {
  throw ParseError(path.empty() ? "/" : path, "schema violation: " + msg);
}

inline const ojson& field(const ojson& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_fail(path + "/" + key, "missing field");
  return *it;
}

inline int as_int(const ojson& v, const std::string& path) {
  if (!v.is_number_integer()) schema_fail(path, "expected an integer");
  return v.get<int>();
}

inline std::string as_string(const ojson& v, const std::string& path) {
  if (!v.is_string()) schema_fail(path, "expected a string");
  return v.get<std::string>();
}

inline Span as_span(const ojson& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) schema_fail(path, "expected [first, last]");
  return {as_int(v[0], path + "/0"), as_int(v[1], path + "/1")};
}

inline DiscourseTree tree_from_json(const ojson& j, const std::string& path) {
  DiscourseTree t;
  t.span = as_span(field(j, "span", path), path + "/span");
  if (j.contains("relation")) {
    const std::string rel = as_string(j["relation"], path + "/relation");
    const std::string nuc = as_string(field(j, "nuclearity", path), path + "/nuclearity");
    const auto n = parse_nuclearity(nuc);
    if (!n) schema_fail(path + "/nuclearity", "expected NS, SN or NN");
    t.label = RelationLabel{rel, *n};
  }
  if (j.contains("chained")) {
    if (!j["chained"].is_boolean()) schema_fail(path + "/chained", "expected a boolean");
    t.chained = j["chained"].get<bool>();
  }
  if (j.contains("children")) {
    const ojson& kids = j["children"];
    if (!kids.is_array()) schema_fail(path + "/children", "expected an array");
    for (std::size_t i = 0; i < kids.size(); ++i)
      t.children.push_back(tree_from_json(kids[i], path + "/children/" + std::to_string(i)));
  }
  return t;
}

}  // namespace detail

inline nlohmann::ordered_json document_to_json(const Document& d) {
  detail::ojson j;
  j["format"] = kCanonicalFormat;
  j["version"] = kCanonicalVersion;
  j["doc_id"] = d.doc_id;
  j["treebank_id"] = d.treebank_id;
  j["tokens"] = d.tokens;
  j["sentence_ends"] = d.sentence_ends;
  j["sentences_derived"] = d.sentences_derived;
  detail::ojson edus = detail::ojson::array();
  for (const auto& e : d.edus) edus.push_back({e.token_start, e.token_end});
  j["edus"] = std::move(edus);
  j["tree"] = detail::tree_to_json(d.tree);
  if (d.provenance) {
    j["provenance"] = {{"source_doc_id", d.provenance->source_doc_id},
                       {"path", d.provenance->path}};
  }
  return j;
}

inline std::string write_canonical(const Document& d) {
  try {
    return document_to_json(d).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) +
           "\n";
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot serialize " + d.doc_id + ": " + e.what());
  }
}

inline Document document_from_json(const nlohmann::ordered_json& j) {
  using namespace detail;
  if (!j.is_object()) schema_fail("", "expected an object");
  const std::string format = as_string(field(j, "format", ""), "/format");
  if (format != kCanonicalFormat) schema_fail("/format", "unknown format '" + format + "'");
  const int version = as_int(field(j, "version", ""), "/version");
  if (version != kCanonicalVersion)
    throw ParseError("/version", "version mismatch: file has " + std::to_string(version) +
                                     ", reader supports " + std::to_string(kCanonicalVersion));

  Document d;
  d.doc_id = as_string(field(j, "doc_id", ""), "/doc_id");
  d.treebank_id = as_string(field(j, "treebank_id", ""), "/treebank_id");

  const ojson& toks = field(j, "tokens", "");
  if (!toks.is_array()) schema_fail("/tokens", "expected an array");
  for (std::size_t i = 0; i < toks.size(); ++i)
    d.tokens.push_back(as_string(toks[i], "/tokens/" + std::to_string(i)));

  const ojson& ends = field(j, "sentence_ends", "");
  if (!ends.is_array()) schema_fail("/sentence_ends", "expected an array");
  for (std::size_t i = 0; i < ends.size(); ++i)
    d.sentence_ends.push_back(as_int(ends[i], "/sentence_ends/" + std::to_string(i)));

  const ojson& derived = field(j, "sentences_derived", "");
  if (!derived.is_boolean()) schema_fail("/sentences_derived", "expected a boolean");
  d.sentences_derived = derived.get<bool>();

  const ojson& edus = field(j, "edus", "");
  if (!edus.is_array()) schema_fail("/edus", "expected an array");
  for (std::size_t i = 0; i < edus.size(); ++i) {
    const std::string p = "/edus/" + std::to_string(i);
    if (!edus[i].is_array() || edus[i].size() != 2) schema_fail(p, "expected [start, end]");
    d.edus.push_back({static_cast<int>(i), as_int(edus[i][0], p + "/0"), as_int(edus[i][1], p + "/1")});
  }

  d.tree = tree_from_json(field(j, "tree", ""), "/tree");

  if (j.contains("provenance")) {
    const ojson& pv = j["provenance"];
    Provenance p;
    p.source_doc_id = as_string(field(pv, "source_doc_id", "/provenance"), "/provenance/source_doc_id");
    const ojson& path = field(pv, "path", "/provenance");
    if (!path.is_array()) schema_fail("/provenance/path", "expected an array");
    for (std::size_t i = 0; i < path.size(); ++i)
      p.path.push_back(as_int(path[i], "/provenance/path/" + std::to_string(i)));
    d.provenance = std::move(p);
  }

  const auto violations = document_violations(d);
  if (!violations.empty()) {
    const std::string& v = violations.front();
    schema_fail(v.rfind("tree", 0) == 0 ? "/tree" : v.rfind("edu", 0) == 0 ? "/edus" : "", v);
  }
  return d;
}

inline Document parse_canonical(std::string_view bytes) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), std::string("malformed document: ") + e.what());
  }
  return document_from_json(j);
}

}  // namespace unirst
