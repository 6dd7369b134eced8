#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "doctest.h"
#include "voluma/error.hpp"

namespace testing {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("voluma_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
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

 private:
  std::filesystem::path path_;
};

template <class F>
voluma::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const voluma::Error& e) {
    return e.kind();
  }
  FAIL("expected a voluma::Error");
  return voluma::ErrorKind::IoError;
}

// Reference RNG for oracles, independent of the library's generator.
inline std::mt19937_64 reference_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace testing
