#pragma once

// Fine-to-coarse relation name tables, loaded from data files with one
// `fine → coarse` entry per line ('->' is accepted too, '#' starts a comment).

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include "unirst/error.hpp"

namespace unirst {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Splits "a → b" / "a -> b". Returns false for blank and comment lines.
inline bool split_arrow_line(std::string_view raw, std::string& lhs, std::string& rhs,
                             const std::string& where) {
  std::string line(raw);
  if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
  line = trim(line);
  if (line.empty()) return false;
  std::size_t pos = line.find("→");
  std::size_t width = std::string_view("→").size();
  if (pos == std::string::npos) {
    pos = line.find("->");
    width = 2;
  }
  if (pos == std::string::npos) throw ParseError(where, "expected 'source → target'");
  lhs = trim(std::string_view(line).substr(0, pos));
  rhs = trim(std::string_view(line).substr(pos + width));
  if (lhs.empty() || rhs.empty()) throw ParseError(where, "empty side in rule");
  return true;
}

class RelationMap {
 public:
  RelationMap() = default;

  static RelationMap parse(std::string_view text, const std::string& source = "relation map") {
    RelationMap m;
    std::istringstream in{std::string(text)};
    std::string line, lhs, rhs;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!split_arrow_line(line, lhs, rhs, source + ":" + std::to_string(lineno))) continue;
      m.table_[ascii_lower(lhs)] = rhs;
    }
    return m;
  }

  static RelationMap load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open relation map " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  void add(std::string fine, std::string coarse) { table_[ascii_lower(fine)] = std::move(coarse); }
  bool empty() const { return table_.empty(); }
  std::size_t size() const { return table_.size(); }

  // Looks the name up case-insensitively, retrying without an RST-DT
  // embedded/nucleus/satellite suffix (-e, -n, -s). Unmapped names are
  // returned with their first letter capitalized.
  std::string map(std::string_view fine) const {
    const std::string key = ascii_lower(trim(fine));
    if (auto it = table_.find(key); it != table_.end()) return it->second;
    if (key.size() > 2 && key[key.size() - 2] == '-') {
      const char s = key.back();
      if (s == 'e' || s == 'n' || s == 's') {
        if (auto it = table_.find(key.substr(0, key.size() - 2)); it != table_.end())
          return it->second;
      }
    }
    return capitalize(trim(fine));
  }

  static std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
  }

 private:
  std::map<std::string, std::string> table_;
};

}  // namespace unirst
