#pragma once

#include <filesystem>
#include <string>

namespace fairpareto::testing {

inline std::string transcript(const std::string& name) {
  return std::string(FAIRPARETO_TEST_DATA) + "/transcripts/" + name + ".jsonl";
}

inline std::string stub_command(const std::string& name) {
  return std::string(FAIRPARETO_STUB_WORKER) + " " + transcript(name);
}

inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fairpareto_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace fairpareto::testing
