#pragma once

// Binary model checkpoints.
//
//   "UNIRSTCK" | u32 version | u64 header bytes | header JSON | f64 values
//
// The header holds the model config, the inventory registry, the
// vocabulary, the segmentation head keys, the input dimension and the name
// and shape of every parameter, in the order their values follow.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "unirst/corpus.hpp"
#include "unirst/model.hpp"

namespace unirst {

inline constexpr char kCheckpointMagic[8] = {'U', 'N', 'I', 'R', 'S', 'T', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace checkpoint_detail {

using ojson = nlohmann::ordered_json;

inline ojson registry_to_json(const InventoryRegistry& r) {
  ojson j;
  j["schema_of"] = r.schema_of;
  ojson invs = ojson::object();
  for (const auto& [id, inv] : r.inventories) {
    ojson counts = ojson::object();
    for (const auto& [l, n] : inv.counts) counts[l.str()] = n;
    invs[id] = {{"counts", counts}, {"members", inv.member_treebanks}};
  }
  j["inventories"] = invs;
  ojson relabel = ojson::object();
  for (const auto& [tb, m] : r.relabel) {
    ojson pairs = ojson::array();
    for (const auto& [from, to] : m) pairs.push_back({from.str(), to.str()});
    relabel[tb] = pairs;
  }
  j["relabel"] = relabel;
  ojson unified = ojson::array();
  for (const auto& l : r.unified.labels) unified.push_back(l.str());
  j["unified"] = unified;
  return j;
}

inline InventoryRegistry registry_from_json(const ojson& j) {
  InventoryRegistry r;
  r.schema_of = j.at("schema_of").get<std::map<std::string, std::string>>();
  for (const auto& [id, inv] : j.at("inventories").items()) {
    std::map<RelationLabel, std::size_t> counts;
    for (const auto& [l, n] : inv.at("counts").items()) counts[parse_label(l)] = n.get<std::size_t>();
    r.inventories.emplace(id, inventory_from_counts(id, std::move(counts),
                                                    inv.at("members").get<std::set<std::string>>()));
  }
  for (const auto& [tb, pairs] : j.at("relabel").items())
    for (const auto& p : pairs) r.relabel[tb][parse_label(p.at(0).get<std::string>())] =
        parse_label(p.at(1).get<std::string>());
  std::vector<RelationLabel> unified;
  for (const auto& l : j.at("unified")) unified.push_back(parse_label(l.get<std::string>()));
  r.unified = unified_from_labels(std::move(unified));
  for (const auto& [tb, schema] : r.schema_of)
    if (!r.inventories.count(schema)) throw InputError("checkpoint: treebank " + tb + " has no inventory");
  return r;
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view bytes, std::size_t& pos, const char* what) {
  if (bytes.size() - pos < sizeof(T)) throw InputError(std::string("checkpoint is truncated in ") + what);
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace checkpoint_detail

inline std::string serialize_checkpoint(const ParserModel& model) {
  using checkpoint_detail::ojson;
  ojson header;
  header["config"] = model.config().to_json();
  header["registry"] = checkpoint_detail::registry_to_json(model.registry());
  header["vocabulary"] = model.vocabulary().tokens;
  header["seg_keys"] = model.seg_keys();
  header["input_dim"] = model.input_dim();
  ojson params = ojson::array();
  for (const auto& [name, p] : model.params())
    params.push_back({{"name", name}, {"rows", p.value.rows}, {"cols", p.value.cols}});
  header["params"] = params;
  const std::string text = header.dump();

  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  checkpoint_detail::put(out, kCheckpointVersion);
  checkpoint_detail::put(out, static_cast<std::uint64_t>(text.size()));
  out += text;
  for (const auto& [name, p] : model.params())
    for (double v : p.value.data) checkpoint_detail::put(out, v);
  return out;
}

inline ParserModel parse_checkpoint(std::string_view bytes, const std::string& source = "checkpoint") {
  using checkpoint_detail::ojson;
  if (bytes.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw InputError(source + " is not a unirst checkpoint");
  std::size_t pos = sizeof(kCheckpointMagic);
  const auto version = checkpoint_detail::take<std::uint32_t>(bytes, pos, "the version");
  if (version != kCheckpointVersion)
    throw InputError(source + ": unsupported checkpoint version " + std::to_string(version));
  const auto len = checkpoint_detail::take<std::uint64_t>(bytes, pos, "the header length");
  if (bytes.size() - pos < len) throw InputError(source + ": checkpoint is truncated in the header");
  ojson header;
  try {
    header = ojson::parse(bytes.substr(pos, len));
    pos += len;
    ModelConfig cfg = ModelConfig::from_json(header.at("config"));
    InventoryRegistry reg = checkpoint_detail::registry_from_json(header.at("registry"));
    Vocabulary vocab = Vocabulary::from_tokens(header.at("vocabulary").get<std::vector<std::string>>());
    ParserModel model(cfg, std::move(reg), std::move(vocab),
                      header.at("seg_keys").get<std::vector<std::string>>());
    model.set_input_dim(header.at("input_dim").get<int>());
    for (const auto& p : header.at("params")) {
      Matrix m(p.at("rows").get<int>(), p.at("cols").get<int>());
      for (double& v : m.data) v = checkpoint_detail::take<double>(bytes, pos, "the parameters");
      model.params()[p.at("name").get<std::string>()] = Parameter(std::move(m));
    }
    if (pos != bytes.size()) throw InputError(source + ": trailing bytes after the parameters");
    // The stored parameters must be exactly the set this config would create.
    ParserModel shape = model;
    shape.initialize(0, model.input_dim());
    if (shape.params().size() != model.params().size())
      throw InputError(source + ": parameter set does not match the model config");
    for (const auto& [name, p] : shape.params()) {
      auto it = model.params().find(name);
      if (it == model.params().end() || !it->second.value.same_shape(p.value))
        throw InputError(source + ": parameter " + name + " is missing or has the wrong shape");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(source + ": malformed checkpoint header: " + e.what());
  }
}

inline void save_checkpoint(const ParserModel& model, const std::filesystem::path& path) {
  write_file(path, serialize_checkpoint(model));
}

inline ParserModel load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path), path.string());
}

}  // namespace unirst
