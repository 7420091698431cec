#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "balloon/initializer.hpp"
#include "balloon/json_io.hpp"
#include "balloon/volume.hpp"

namespace balloon {

struct SliceImage {
  int width = 0;   // along the first in-plane axis
  int height = 0;  // along the second in-plane axis
  std::vector<std::uint8_t> pixels;
};

/// Window/level mapping of one slice to 8 bits. Without a window the
/// volume's full intensity range is used.
SliceImage render_slice(const ImageVolume& volume, SliceAxis axis, std::int64_t index,
                        std::optional<double> level = std::nullopt, std::optional<double> width = std::nullopt);

/// Run-length rows of a mask slice: [{"y": row, "runs": [[x0, len], ...]}],
/// rows without inside voxels omitted. x and y are the in-plane axes used by
/// contours on that slice.
Json mask_slice_rle(const BinaryMask& mask, SliceAxis axis, std::int64_t index);

/// Local HTTP service over the volumes (.mha / .mhd) in a directory. One
/// segmentation job per volume at a time; jobs run on worker threads and are
/// polled by id.
class Service {
 public:
  explicit Service(std::filesystem::path volume_dir);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace balloon
