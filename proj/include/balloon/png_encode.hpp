#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace balloon {

/// 8-bit grayscale PNG of a row-major `width` x `height` image.
std::string encode_gray_png(const std::vector<std::uint8_t>& pixels, int width, int height);

}  // namespace balloon
