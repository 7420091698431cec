#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "balloon/volume.hpp"

namespace balloon {

enum class ElementType { UChar, Short, UShort, Float };

std::string_view element_type_name(ElementType type);

/// Reads a 3D MetaImage (.mha with inline payload, or .mhd + raw file).
/// Scalars are converted to float; byte order follows the header.
ImageVolume load_metaimage(const std::filesystem::path& path);

/// Writes a volume, converting scalars to `type` (rounded and clamped for
/// integer types). A `.mha` path gets an inline payload; anything else gets a
/// sibling `.raw` file referenced from the header.
void save_metaimage(const ImageVolume& volume, const std::filesystem::path& path,
                    ElementType type = ElementType::Float);

/// MET_UCHAR with 1 = inside, 0 = outside.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Inverse of save_mask: every nonzero voxel becomes inside.
BinaryMask load_mask(const std::filesystem::path& path);

/// In-memory `.mha` encoding of a mask, as served over HTTP.
std::string encode_mask_mha(const BinaryMask& mask);

}  // namespace balloon
