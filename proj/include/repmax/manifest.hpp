#pragma once

// Run manifests: everything needed to reproduce a CLI run byte for byte.
// Manifests carry no timestamps; a rerun from the same inputs and parameters
// must produce identical report files.

#include <string>
#include <vector>

#include "json.hpp"

namespace repmax {

struct RunManifest {
  std::string tool;
  std::string version;
  std::string command;             // subcommand name
  std::vector<std::string> argv;   // arguments after the program name
  std::string cwd;                 // directory the run was launched from
  struct InputFile {
    std::string path;
    std::string sha256;
  };
  std::vector<InputFile> inputs;
  nlohmann::json params;           // resolved parameters, defaults included
  std::vector<std::string> outputs;
};

nlohmann::json manifest_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const std::string& path, const RunManifest& m);
RunManifest load_manifest(const std::string& path);

}  // namespace repmax
