#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sdv/turtle.hpp"

namespace testsupport {

inline std::filesystem::path fixtures_dir() {
#ifdef SDV_FIXTURES_DIR
  return std::filesystem::path(SDV_FIXTURES_DIR);
#else
  return std::filesystem::path("fixtures");
#endif
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

inline sdv::Graph load_ttl(const std::filesystem::path& rel) {
  return sdv::parse_turtle(slurp(fixtures_dir() / rel));
}

/// Scratch directory for one test, wiped on construction.
inline std::filesystem::path scratch_dir(const std::string& name) {
  std::filesystem::path dir = std::filesystem::temp_directory_path() / "sdv-tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace testsupport
