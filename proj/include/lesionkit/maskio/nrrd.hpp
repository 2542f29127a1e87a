#pragma once

// Reader/writer for a strict NRRD0004 subset: attached header, 3 dimensions,
// uint8/short/float samples, little-endian, raw or gzip payload.

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lesionkit/core/format.hpp"
#include "lesionkit/volgrid.hpp"

namespace lesionkit::maskio {

enum class Encoding { raw, gzip };
enum class SampleType { uint8, int16, float32 };

inline const char* nrrd_type_name(SampleType t) {
  switch (t) {
    case SampleType::uint8: return "uint8";
    case SampleType::int16: return "short";
    case SampleType::float32: return "float";
  }
  return "?";
}

inline std::size_t sample_size(SampleType t) {
  switch (t) {
    case SampleType::uint8: return 1;
    case SampleType::int16: return 2;
    case SampleType::float32: return 4;
  }
  return 0;
}

using SampleBuffer = std::variant<std::vector<std::uint8_t>, std::vector<std::int16_t>, std::vector<float>>;

// Samples exactly as stored in the file.
struct NrrdImage {
  Dims dims;
  VoxelGeometry geometry;
  SampleBuffer samples;
  std::vector<std::string> warnings;  // unknown header fields

  SampleType type() const { return static_cast<SampleType>(samples.index()); }
  std::size_t count() const {
    return std::visit([](const auto& v) { return v.size(); }, samples);
  }
  double at(std::size_t i) const {
    return std::visit([i](const auto& v) { return static_cast<double>(v[i]); }, samples);
  }
};

namespace detail {

static_assert(std::endian::native == std::endian::little, "payload I/O assumes a little-endian host");

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline double parse_number(const std::string& text, const char* field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw FormatError(std::string("nrrd: bad number in field '") + field + "': " + text);
  }
  if (used != text.size() || !std::isfinite(v))
    throw FormatError(std::string("nrrd: bad number in field '") + field + "': " + text);
  return v;
}

// Parses "(a,b,c)".
inline Vec3 parse_vector(const std::string& text, const char* field) {
  const std::string t = trim(text);
  if (t.size() < 2 || t.front() != '(' || t.back() != ')')
    throw FormatError(std::string("nrrd: expected (x,y,z) vector in '") + field + "'");
  std::stringstream ss(t.substr(1, t.size() - 2));
  Vec3 v{};
  std::string part;
  int n = 0;
  while (std::getline(ss, part, ',')) {
    if (n >= 3) throw FormatError(std::string("nrrd: vector with more than 3 components in '") + field + "'");
    v[static_cast<std::size_t>(n++)] = parse_number(trim(part), field);
  }
  if (n != 3) throw FormatError(std::string("nrrd: vector needs 3 components in '") + field + "'");
  return v;
}

inline std::vector<std::string> split_vectors(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find('(', pos);
    if (open == std::string::npos) break;
    const auto close = text.find(')', open);
    if (close == std::string::npos) throw FormatError("nrrd: unbalanced parentheses in space directions");
    out.push_back(text.substr(open, close - open + 1));
    pos = close + 1;
  }
  return out;
}

inline SampleType parse_type(const std::string& raw) {
  const std::string t = lower(trim(raw));
  if (t == "uint8" || t == "uchar" || t == "unsigned char" || t == "uint8_t") return SampleType::uint8;
  if (t == "short" || t == "int16" || t == "int16_t" || t == "signed short" || t == "short int" ||
      t == "signed short int")
    return SampleType::int16;
  if (t == "float") return SampleType::float32;
  throw FormatError("nrrd: unsupported type '" + trim(raw) + "'");
}

inline std::vector<char> gzip_compress(const char* data, std::size_t size) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw IoError("gzip: deflateInit2 failed");
  std::vector<char> out(deflateBound(&zs, static_cast<uLong>(size)) + 32);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data));
  zs.avail_in = static_cast<uInt>(size);
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw IoError("gzip: deflate failed");
  out.resize(produced);
  return out;
}

inline std::vector<char> gzip_decompress(const char* data, std::size_t size, std::size_t expected) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 32) != Z_OK) throw FormatError("gzip: inflateInit2 failed");
  std::vector<char> out(expected);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data));
  zs.avail_in = static_cast<uInt>(size);
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw FormatError("nrrd: gzip payload size mismatch or corrupt");
  return out;
}

template <typename T>
std::vector<T> decode_samples(const char* bytes, std::size_t n) {
  std::vector<T> v(n);
  std::memcpy(v.data(), bytes, n * sizeof(T));
  return v;
}

}  // namespace detail

inline NrrdImage read_nrrd(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim(line).rfind("NRRD000", 0) != 0)
    throw FormatError(path.string() + ": missing NRRD magic");
  const std::string magic = detail::trim(line);
  if (magic.size() != 8 || magic[7] < '1' || magic[7] > '5') throw FormatError(path.string() + ": unsupported NRRD version " + magic);

  NrrdImage img;
  bool have_type = false, have_dim = false, have_sizes = false, have_dirs = false, have_endian = false,
       have_encoding = false;
  SampleType type = SampleType::float32;
  Encoding encoding = Encoding::raw;
  Vec3 dirs[3]{};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) break;
    if (line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw FormatError(path.string() + ": malformed header line: " + line);
    if (colon + 1 < line.size() && line[colon + 1] == '=') {
      img.warnings.push_back("key/value pair ignored: " + line);
      continue;
    }
    const std::string key = detail::lower(detail::trim(line.substr(0, colon)));
    const std::string value = detail::trim(line.substr(colon + 1));
    if (key == "type") {
      type = detail::parse_type(value);
      have_type = true;
    } else if (key == "dimension") {
      if (value != "3") throw FormatError(path.string() + ": only dimension 3 is supported");
      have_dim = true;
    } else if (key == "sizes") {
      std::stringstream ss(value);
      std::int64_t n[3]{};
      std::string extra;
      if (!(ss >> n[0] >> n[1] >> n[2]) || (ss >> extra)) throw FormatError(path.string() + ": sizes needs 3 integers");
      for (auto s : n)
        if (s <= 0) throw FormatError(path.string() + ": sizes must be positive");
      img.dims = {n[0], n[1], n[2]};
      have_sizes = true;
    } else if (key == "space directions") {
      const auto parts = detail::split_vectors(value);
      if (parts.size() != 3) throw FormatError(path.string() + ": space directions needs 3 vectors");
      for (std::size_t a = 0; a < 3; ++a) dirs[a] = detail::parse_vector(parts[a], "space directions");
      have_dirs = true;
    } else if (key == "space origin") {
      img.geometry.origin = detail::parse_vector(value, "space origin");
    } else if (key == "endian") {
      if (detail::lower(value) != "little") throw FormatError(path.string() + ": only little-endian payloads supported");
      have_endian = true;
    } else if (key == "encoding") {
      const std::string e = detail::lower(value);
      if (e == "raw") encoding = Encoding::raw;
      else if (e == "gzip" || e == "gz") encoding = Encoding::gzip;
      else throw FormatError(path.string() + ": unsupported encoding '" + value + "'");
      have_encoding = true;
    } else if (key == "data file" || key == "datafile") {
      throw FormatError(path.string() + ": detached data files are not supported");
    } else if (key == "space" || key == "space dimension" || key == "kinds") {
      // Accepted; the frame is implied by the direction vectors.
    } else {
      img.warnings.push_back("unknown field ignored: " + key);
    }
  }
  if (!have_type || !have_dim || !have_sizes || !have_dirs || !have_encoding)
    throw FormatError(path.string() + ": missing required NRRD field");
  if (!have_endian && type != SampleType::uint8) throw FormatError(path.string() + ": missing endian field");

  for (std::size_t a = 0; a < 3; ++a) {
    const double len = std::sqrt(dot(dirs[a], dirs[a]));
    if (!(len > 0.0)) throw FormatError(path.string() + ": zero-length space direction");
    img.geometry.spacing[a] = len;
    for (std::size_t r = 0; r < 3; ++r) img.geometry.axes[a][r] = dirs[a][r] / len;
  }
  try {
    img.geometry.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }

  const std::size_t n = img.dims.size();
  const std::size_t bytes = n * sample_size(type);
  std::vector<char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (encoding == Encoding::gzip) payload = detail::gzip_decompress(payload.data(), payload.size(), bytes);
  if (payload.size() < bytes) throw FormatError(path.string() + ": payload shorter than declared sizes");
  // Raw payloads may carry trailing bytes; NRRD takes the data from the end.
  const char* start = payload.data() + (payload.size() - bytes);
  switch (type) {
    case SampleType::uint8: img.samples = detail::decode_samples<std::uint8_t>(start, n); break;
    case SampleType::int16: img.samples = detail::decode_samples<std::int16_t>(start, n); break;
    case SampleType::float32: img.samples = detail::decode_samples<float>(start, n); break;
  }
  return img;
}

inline void write_nrrd(const NrrdImage& img, const std::filesystem::path& path, Encoding encoding = Encoding::raw) {
  if (img.count() != img.dims.size()) throw DimensionMismatch("write_nrrd: sample count does not match sizes");
  const VoxelGeometry& g = img.geometry;
  std::string header = "NRRD0004\n";
  header += std::string("type: ") + nrrd_type_name(img.type()) + "\n";
  header += "dimension: 3\n";
  header += "sizes: " + std::to_string(img.dims.nx) + " " + std::to_string(img.dims.ny) + " " +
            std::to_string(img.dims.nz) + "\n";
  auto vec = [](const Vec3& v) {
    return "(" + format_double(v[0]) + "," + format_double(v[1]) + "," + format_double(v[2]) + ")";
  };
  header += "space directions:";
  for (std::size_t a = 0; a < 3; ++a) {
    Vec3 d{};
    for (std::size_t r = 0; r < 3; ++r) d[r] = g.axes[a][r] * g.spacing[a];
    header += " " + vec(d);
  }
  header += "\nspace origin: " + vec(g.origin) + "\n";
  header += "endian: little\n";
  header += std::string("encoding: ") + (encoding == Encoding::raw ? "raw" : "gzip") + "\n\n";

  const char* data = nullptr;
  std::size_t bytes = 0;
  std::visit(
      [&](const auto& v) {
        data = reinterpret_cast<const char*>(v.data());
        bytes = v.size() * sizeof(v[0]);
      },
      img.samples);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  if (encoding == Encoding::gzip) {
    const auto packed = detail::gzip_compress(data, bytes);
    out.write(packed.data(), static_cast<std::streamsize>(packed.size()));
  } else {
    out.write(data, static_cast<std::streamsize>(bytes));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---- typed helpers -------------------------------------------------------

template <typename G>
NrrdImage to_nrrd(const G& grid, SampleType type) {
  NrrdImage img;
  img.dims = grid.dims();
  img.geometry = grid.geometry();
  const auto values = grid.values();
  switch (type) {
    case SampleType::uint8: {
      std::vector<std::uint8_t> v(values.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = values[i];
        if (x != std::round(x) || x < 0 || x > 255) throw InvalidArgument("value not representable as uint8");
        v[i] = static_cast<std::uint8_t>(x);
      }
      img.samples = std::move(v);
      break;
    }
    case SampleType::int16: {
      std::vector<std::int16_t> v(values.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = values[i];
        if (x != std::round(x) || x < -32768 || x > 32767) throw InvalidArgument("value not representable as int16");
        v[i] = static_cast<std::int16_t>(x);
      }
      img.samples = std::move(v);
      break;
    }
    case SampleType::float32: {
      std::vector<float> v(values.begin(), values.end());
      img.samples = std::move(v);
      break;
    }
  }
  return img;
}

inline void write_volume(const Volume3D& vol, const std::filesystem::path& path, Encoding enc = Encoding::raw,
                         SampleType type = SampleType::float32) {
  write_nrrd(to_nrrd(vol, type), path, enc);
}

inline void write_mask(const LabelMask& mask, const std::filesystem::path& path, Encoding enc = Encoding::raw) {
  write_nrrd(to_nrrd(mask, SampleType::uint8), path, enc);
}

inline void write_probability(const ProbabilityMap& prob, const std::filesystem::path& path,
                              Encoding enc = Encoding::raw) {
  write_nrrd(to_nrrd(prob, SampleType::float32), path, enc);
}

inline Volume3D read_volume(const std::filesystem::path& path) {
  NrrdImage img = read_nrrd(path);
  std::vector<float> v(img.count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(img.at(i));
  try {
    return Volume3D(img.dims, img.geometry, std::move(v));
  } catch (const InvalidArgument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline LabelMask read_mask(const std::filesystem::path& path) {
  NrrdImage img = read_nrrd(path);
  std::vector<std::uint8_t> v(img.count());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = img.at(i);
    if (x != 0.0 && x != 1.0) throw FormatError(path.string() + ": binary mask contains value " + format_double(x));
    v[i] = static_cast<std::uint8_t>(x);
  }
  return LabelMask(img.dims, img.geometry, std::move(v));
}

inline ProbabilityMap read_probability(const std::filesystem::path& path) {
  NrrdImage img = read_nrrd(path);
  std::vector<float> v(img.count());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = img.at(i);
    if (!(x >= 0.0 && x <= 1.0)) throw FormatError(path.string() + ": probability outside [0,1]: " + format_double(x));
    v[i] = static_cast<float>(x);
  }
  return ProbabilityMap(img.dims, img.geometry, std::move(v));
}

}  // namespace lesionkit::maskio
