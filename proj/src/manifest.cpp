#include "repmax/manifest.hpp"

#include <fstream>
#include <stdexcept>

namespace repmax {

using nlohmann::json;

nlohmann::json manifest_json(const RunManifest& m) {
  json inputs = json::array();
  for (const auto& in : m.inputs)
    inputs.push_back({{"path", in.path}, {"sha256", in.sha256}});
  json j;
  j["tool"] = m.tool;
  j["version"] = m.version;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["cwd"] = m.cwd;
  j["inputs"] = std::move(inputs);
  j["params"] = m.params;
  j["outputs"] = m.outputs;
  return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.tool = j.at("tool").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.cwd = j.at("cwd").get<std::string>();
  for (const auto& in : j.at("inputs"))
    m.inputs.push_back({in.at("path").get<std::string>(),
                        in.at("sha256").get<std::string>()});
  m.params = j.at("params");
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << manifest_json(m).dump(2) << '\n';
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  return manifest_from_json(json::parse(in));
}

}  // namespace repmax
