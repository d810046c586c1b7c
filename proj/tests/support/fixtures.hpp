#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "veritas/core.hpp"

namespace fixture {

inline veritas::ClaimRecord claim(const std::string& statement, std::optional<std::string> source,
                                  veritas::Bit value, std::vector<double> features = {}) {
  return {statement, std::move(source), value, std::move(features)};
}

/// Bundle "f" with one claim per value, sources s0, s1, ...
inline veritas::StatementBundle bundle(const std::string& id, const std::vector<veritas::Bit>& values) {
  std::vector<veritas::ClaimRecord> claims;
  for (std::size_t i = 0; i < values.size(); ++i) claims.push_back(claim(id, "s" + std::to_string(i), values[i]));
  return {id, std::move(claims)};
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("veritas_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixture
