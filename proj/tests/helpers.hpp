#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "ctnli/corpus.hpp"

namespace testutil {

inline std::string data_dir() { return CTNLI_DATA_DIR; }
inline std::string fixture_dir() { return CTNLI_FIXTURE_DIR; }
inline std::string cli_bin() { return CTNLI_BIN; }

inline std::string fixture_instances() {
  return fixture_dir() + "/instances.json";
}
inline std::string fixture_ctrs() { return fixture_dir() + "/ctrs"; }

// Unique scratch directory, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "ctnli-test-XXXXXX")
            .string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (std::filesystem::path(path_) / name).string();
  }

 private:
  std::string path_;
};

inline ctnli::ResolvedPair make_pair(std::string uuid, std::string premise,
                                     std::string hypothesis,
                                     std::optional<ctnli::Label> label = {}) {
  ctnli::ResolvedPair p;
  p.uuid = std::move(uuid);
  p.premise = std::move(premise);
  p.hypothesis = std::move(hypothesis);
  p.label = label;
  return p;
}

inline ctnli::NliInstance make_instance(
    std::string uuid, std::string statement, ctnli::Label label,
    std::string primary_id = "NCT10000001",
    ctnli::Section section = ctnli::Section::Intervention) {
  ctnli::NliInstance inst;
  inst.uuid = std::move(uuid);
  inst.itype = ctnli::InstanceType::Single;
  inst.section = section;
  inst.primary_id = std::move(primary_id);
  inst.statement = std::move(statement);
  inst.label = label;
  return inst;
}

}  // namespace testutil
