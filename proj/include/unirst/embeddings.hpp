#pragma once

// Precomputed per-token input vectors, one matrix per document.
//
// File layout:
//   #unirst-embeddings v1 dim=<d>
//   <doc_id> <n_tokens>
//   <d numbers>            (n_tokens lines)
//   ...

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "unirst/autodiff.hpp"
#include "unirst/error.hpp"

namespace unirst {

struct EmbeddingTable {
  int dim = 0;
  std::map<std::string, Matrix> documents;

  const Matrix& lookup(const std::string& doc_id, int n_tokens) const {
    auto it = documents.find(doc_id);
    if (it == documents.end())
      throw InputError("no precomputed embeddings for document " + doc_id);
    if (it->second.rows != n_tokens)
      throw InputError("precomputed embeddings for " + doc_id + " have " +
                       std::to_string(it->second.rows) + " rows, document has " +
                       std::to_string(n_tokens) + " tokens");
    return it->second;
  }
};

inline EmbeddingTable parse_embeddings(const std::string& text, const std::string& source = "embeddings") {
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  const std::string prefix = "#unirst-embeddings v1 dim=";
  if (header.rfind(prefix, 0) != 0) throw ParseError(source + ":1", "missing embeddings header");
  EmbeddingTable t;
  try {
    t.dim = std::stoi(header.substr(prefix.size()));
  } catch (const std::exception&) {
    throw ParseError(source + ":1", "bad dimension in header");
  }
  if (t.dim <= 0) throw ParseError(source + ":1", "dimension must be positive");
  std::string id;
  int n = 0;
  while (in >> id >> n) {
    if (n <= 0) throw ParseError(source, "document " + id + " has no rows");
    Matrix m(n, t.dim);
    for (double& x : m.data)
      if (!(in >> x)) throw ParseError(source, "document " + id + ": expected " +
                                                   std::to_string(n) + " rows of dimension " +
                                                   std::to_string(t.dim));
    if (!t.documents.emplace(id, std::move(m)).second)
      throw ParseError(source, "document " + id + " given twice");
  }
  if (!in.eof()) throw ParseError(source, "malformed document header after " + id);
  return t;
}

inline EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embeddings file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_embeddings(ss.str(), path);
}

inline std::string write_embeddings(const EmbeddingTable& t) {
  std::ostringstream out;
  out.precision(17);
  out << "#unirst-embeddings v1 dim=" << t.dim << "\n";
  for (const auto& [id, m] : t.documents) {
    out << id << " " << m.rows << "\n";
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < m.cols; ++c) out << (c ? " " : "") << m(r, c);
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace unirst
