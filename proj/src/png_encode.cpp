#include "balloon/png_encode.hpp"

#include <png.h>

#include <cstring>

#include "balloon/error.hpp"

namespace balloon {

std::string encode_gray_png(const std::vector<std::uint8_t>& pixels, int width, int height) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_GRAY;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), width, nullptr)) {
    throw Error(ErrorCode::Io, std::string("PNG sizing failed: ") + image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), width, nullptr)) {
    throw Error(ErrorCode::Io, std::string("PNG encoding failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace balloon
