#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "balloon/volume.hpp"

namespace balloon::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("balloon_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline BinaryMask random_mask(const GridGeometry& grid, std::mt19937_64& rng, double fill = 0.5) {
  std::bernoulli_distribution coin(fill);
  BinaryMask m(grid);
  for (std::int64_t k = 0; k < grid.dims[2]; ++k)
    for (std::int64_t j = 0; j < grid.dims[1]; ++j)
      for (std::int64_t i = 0; i < grid.dims[0]; ++i) m.set({i, j, k}, coin(rng));
  return m;
}

inline GridGeometry cube_grid(std::int64_t n, Vec3 spacing = {1, 1, 1}, Vec3 origin = {0, 0, 0}) {
  return GridGeometry{{n, n, n}, spacing, origin};
}

}  // namespace balloon::testing
