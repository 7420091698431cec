#include "balloon/metaimage.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "balloon/error.hpp"

namespace balloon {
namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_bool(const std::string& value) {
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  return v == "true" || v == "1";
}

std::size_t element_size(ElementType type) {
  switch (type) {
    case ElementType::UChar: return 1;
    case ElementType::Short:
    case ElementType::UShort: return 2;
    case ElementType::Float: return 4;
  }
  return 1;
}

ElementType parse_element_type(const std::string& name) {
  if (name == "MET_UCHAR") return ElementType::UChar;
  if (name == "MET_SHORT") return ElementType::Short;
  if (name == "MET_USHORT") return ElementType::UShort;
  if (name == "MET_FLOAT") return ElementType::Float;
  throw Error(ErrorCode::UnsupportedElementType, "unsupported element type '" + name + "'");
}

template <typename T>
std::vector<T> parse_numbers(const std::string& key, const std::string& value, std::size_t expected) {
  std::istringstream in(value);
  std::vector<T> out;
  T v{};
  while (in >> v) out.push_back(v);
  if (out.size() != expected) {
    throw Error(ErrorCode::MalformedHeader,
                "header key " + key + " expects " + std::to_string(expected) + " values, got '" + value + "'");
  }
  return out;
}

struct Header {
  GridGeometry grid;
  ElementType type = ElementType::UChar;
  bool msb = false;
  std::string data_file;
};

template <typename T>
T load_scalar(const unsigned char* src, bool swap) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, src, sizeof(T));
  if (swap) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

std::vector<float> decode_payload(const std::vector<unsigned char>& bytes, const Header& header) {
  const std::size_t n = header.grid.voxel_count();
  const bool swap = header.msb != (std::endian::native == std::endian::big);
  const std::size_t es = element_size(header.type);
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = bytes.data() + i * es;
    switch (header.type) {
      case ElementType::UChar: out[i] = static_cast<float>(p[0]); break;
      case ElementType::Short: out[i] = static_cast<float>(load_scalar<std::int16_t>(p, swap)); break;
      case ElementType::UShort: out[i] = static_cast<float>(load_scalar<std::uint16_t>(p, swap)); break;
      case ElementType::Float: out[i] = load_scalar<float>(p, swap); break;
    }
  }
  return out;
}

template <typename T>
void store_scalar(std::string& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T round_clamp(float v) {
  if (std::isnan(v)) return T{0};
  const double r = std::nearbyint(static_cast<double>(v));
  const double lo = static_cast<double>(std::numeric_limits<T>::lowest());
  const double hi = static_cast<double>(std::numeric_limits<T>::max());
  return static_cast<T>(std::clamp(r, lo, hi));
}

std::string encode_payload(const std::vector<float>& data, ElementType type) {
  std::string out;
  out.reserve(data.size() * element_size(type));
  for (float v : data) {
    switch (type) {
      case ElementType::UChar: out.push_back(static_cast<char>(round_clamp<std::uint8_t>(v))); break;
      case ElementType::Short: store_scalar(out, round_clamp<std::int16_t>(v)); break;
      case ElementType::UShort: store_scalar(out, round_clamp<std::uint16_t>(v)); break;
      case ElementType::Float: store_scalar(out, v); break;
    }
  }
  return out;
}

std::string format_triple(const Vec3& v) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << v.x << ' ' << v.y << ' ' << v.z;
  return out.str();
}

std::string make_header(const GridGeometry& grid, ElementType type, const std::string& data_file) {
  std::ostringstream h;
  h << "ObjectType = Image\n"
    << "NDims = 3\n"
    << "BinaryData = True\n"
    << "BinaryDataByteOrderMSB = False\n"
    << "CompressedData = False\n"
    << "Offset = " << format_triple(grid.origin) << "\n"
    << "ElementSpacing = " << format_triple(grid.spacing) << "\n"
    << "DimSize = " << grid.dims[0] << ' ' << grid.dims[1] << ' ' << grid.dims[2] << "\n"
    << "ElementType = " << element_type_name(type) << "\n"
    << "ElementDataFile = " << data_file << "\n";
  return h.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace

std::string_view element_type_name(ElementType type) {
  switch (type) {
    case ElementType::UChar: return "MET_UCHAR";
    case ElementType::Short: return "MET_SHORT";
    case ElementType::UShort: return "MET_USHORT";
    case ElementType::Float: return "MET_FLOAT";
  }
  return "MET_UCHAR";
}

ImageVolume load_metaimage(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");

  std::map<std::string, std::string> keys;
  std::string line;
  bool found_data_file = false;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (trim(line).empty()) continue;
      throw Error(ErrorCode::MalformedHeader, path.string() + ": malformed header line '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    keys[key] = trim(line.substr(eq + 1));
    if (key == "ElementDataFile") {
      found_data_file = true;
      break;
    }
  }
  if (!found_data_file) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": header has no ElementDataFile");
  }

  auto require = [&](const std::string& key) -> const std::string& {
    auto it = keys.find(key);
    if (it == keys.end()) throw Error(ErrorCode::MalformedHeader, path.string() + ": missing key " + key);
    return it->second;
  };

  if (auto it = keys.find("CompressedData"); it != keys.end() && parse_bool(it->second)) {
    throw Error(ErrorCode::CompressedData, path.string() + ": compressed data is not supported");
  }
  if (trim(require("NDims")) != "3") {
    throw Error(ErrorCode::UnsupportedDimensionality,
                path.string() + ": unsupported dimensionality NDims = " + require("NDims"));
  }

  Header header;
  const auto dims = parse_numbers<std::int64_t>("DimSize", require("DimSize"), 3);
  for (int a = 0; a < 3; ++a) header.grid.dims[a] = dims[a];
  if (auto it = keys.find("ElementSpacing"); it != keys.end()) {
    const auto s = parse_numbers<double>("ElementSpacing", it->second, 3);
    header.grid.spacing = {s[0], s[1], s[2]};
  }
  for (const char* origin_key : {"Offset", "Origin", "Position"}) {
    if (auto it = keys.find(origin_key); it != keys.end()) {
      const auto o = parse_numbers<double>(origin_key, it->second, 3);
      header.grid.origin = {o[0], o[1], o[2]};
      break;
    }
  }
  header.grid.validate();
  header.type = parse_element_type(require("ElementType"));
  for (const char* order_key : {"BinaryDataByteOrderMSB", "ElementByteOrderMSB"}) {
    if (auto it = keys.find(order_key); it != keys.end()) header.msb = parse_bool(it->second);
  }
  header.data_file = require("ElementDataFile");

  const std::size_t needed = header.grid.voxel_count() * element_size(header.type);
  std::vector<unsigned char> bytes(needed);
  std::streamsize got = 0;
  if (header.data_file == "LOCAL") {
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(needed));
    got = in.gcount();
  } else {
    if (header.data_file == "LIST" || header.data_file.find('%') != std::string::npos) {
      throw Error(ErrorCode::MalformedHeader, path.string() + ": multi-file payloads are not supported");
    }
    const std::filesystem::path raw = path.parent_path() / header.data_file;
    std::ifstream raw_in(raw, std::ios::binary);
    if (!raw_in) {
      throw Error(ErrorCode::MissingPayload, path.string() + ": payload file '" + raw.string() + "' not found");
    }
    raw_in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(needed));
    got = raw_in.gcount();
  }
  if (static_cast<std::size_t>(got) != needed) {
    throw Error(ErrorCode::ShortPayload, path.string() + ": payload has " + std::to_string(got) +
                                             " bytes, expected " + std::to_string(needed));
  }
  return ImageVolume(header.grid, decode_payload(bytes, header));
}

void save_metaimage(const ImageVolume& volume, const std::filesystem::path& path, ElementType type) {
  const std::string payload = encode_payload(volume.data(), type);
  if (path.extension() == ".mha") {
    write_file(path, make_header(volume.grid(), type, "LOCAL") + payload);
    return;
  }
  std::filesystem::path raw = path;
  raw.replace_extension(".raw");
  write_file(path, make_header(volume.grid(), type, raw.filename().string()));
  write_file(raw, payload);
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<float> data(mask.bits().begin(), mask.bits().end());
  save_metaimage(ImageVolume(mask.grid(), std::move(data)), path, ElementType::UChar);
}

BinaryMask load_mask(const std::filesystem::path& path) {
  const ImageVolume v = load_metaimage(path);
  std::vector<std::uint8_t> bits(v.data().size());
  std::transform(v.data().begin(), v.data().end(), bits.begin(),
                 [](float s) { return static_cast<std::uint8_t>(s != 0.0f ? 1 : 0); });
  return BinaryMask(v.grid(), std::move(bits));
}

std::string encode_mask_mha(const BinaryMask& mask) {
  std::string out = make_header(mask.grid(), ElementType::UChar, "LOCAL");
  out.append(reinterpret_cast<const char*>(mask.bits().data()), mask.bits().size());
  return out;
}

}  // namespace balloon
