#include "advpol/approximator/checkpoint.hpp"

#include <stdexcept>

#include "advpol/io/files.hpp"

namespace advpol {

using nlohmann::json;

json policy_to_json(const PolicyHandle& policy, const json& meta) {
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["head_kind"] = policy.head_kind() == HeadKind::kGaussian ? "gaussian" : "categorical";
  doc["input_dim"] = policy.input_dim();
  doc["output_dim"] = policy.output_dim();
  doc["hidden"] = policy.hidden();
  if (!meta.empty()) doc["meta"] = meta;
  json segs = json::array();
  const auto params = policy.parameters();
  for (const auto& s : policy.segments()) {
    json values = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) values.push_back(params[s.offset + i]);
    segs.push_back({{"name", s.name}, {"shape", {s.rows, s.cols}}, {"values", std::move(values)}});
  }
  doc["segments"] = std::move(segs);
  return doc;
}

PolicyHandle policy_from_json(const json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw std::runtime_error("unsupported checkpoint format_version " + std::to_string(version));
    }
    const std::string kind = doc.at("head_kind").get<std::string>();
    HeadKind head;
    if (kind == "gaussian") {
      head = HeadKind::kGaussian;
    } else if (kind == "categorical") {
      head = HeadKind::kCategorical;
    } else {
      throw std::runtime_error("unknown head_kind '" + kind + "'");
    }
    PolicyHandle p = PolicyHandle::zeros(head, doc.at("input_dim").get<std::size_t>(),
                                         doc.at("output_dim").get<std::size_t>(), doc.at("hidden").get<std::size_t>());
    const auto& segs = doc.at("segments");
    if (segs.size() != p.segments().size()) throw std::runtime_error("checkpoint segment count mismatch");
    auto params = p.parameters();
    for (const auto& s : p.segments()) {
      const json* found = nullptr;
      for (const auto& e : segs) {
        if (e.at("name").get<std::string>() == s.name) found = &e;
      }
      if (found == nullptr) throw std::runtime_error("checkpoint is missing segment " + s.name);
      const auto shape = found->at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2 || shape[0] != s.rows || shape[1] != s.cols) {
        throw std::runtime_error("checkpoint segment " + s.name + " has the wrong shape");
      }
      const auto values = found->at("values").get<std::vector<double>>();
      if (values.size() != s.size()) throw std::runtime_error("checkpoint segment " + s.name + " has wrong length");
      std::copy(values.begin(), values.end(), params.begin() + static_cast<std::ptrdiff_t>(s.offset));
    }
    return p;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_policy(const std::filesystem::path& path, const PolicyHandle& policy, const json& meta) {
  write_file_atomic(path, policy_to_json(policy, meta).dump(1) + "\n");
}

PolicyHandle load_policy(const std::filesystem::path& path, json* meta) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (meta != nullptr) *meta = doc.value("meta", json::object());
  return policy_from_json(doc);
}

}  // namespace advpol
