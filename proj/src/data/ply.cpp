#include "data/ply.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace pcsod {
namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> parse_scalar_type(const std::string& name) {
  if (name == "char" || name == "int8") return ScalarType::Int8;
  if (name == "uchar" || name == "uint8") return ScalarType::UInt8;
  if (name == "short" || name == "int16") return ScalarType::Int16;
  if (name == "ushort" || name == "uint16") return ScalarType::UInt16;
  if (name == "int" || name == "int32") return ScalarType::Int32;
  if (name == "uint" || name == "uint32") return ScalarType::UInt32;
  if (name == "float" || name == "float32") return ScalarType::Float32;
  if (name == "double" || name == "float64") return ScalarType::Float64;
  return std::nullopt;
}

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
  }
  return 0;
}

bool is_integral(ScalarType t) { return t != ScalarType::Float32 && t != ScalarType::Float64; }

template <typename T>
T read_le(const char* bytes) {
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* p = reinterpret_cast<unsigned char*>(&value);
    std::reverse(p, p + sizeof(T));
  }
  return value;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* p = reinterpret_cast<unsigned char*>(&value);
    std::reverse(p, p + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

double decode_binary(ScalarType t, const char* bytes) {
  switch (t) {
    case ScalarType::Int8: return read_le<std::int8_t>(bytes);
    case ScalarType::UInt8: return read_le<std::uint8_t>(bytes);
    case ScalarType::Int16: return read_le<std::int16_t>(bytes);
    case ScalarType::UInt16: return read_le<std::uint16_t>(bytes);
    case ScalarType::Int32: return read_le<std::int32_t>(bytes);
    case ScalarType::UInt32: return read_le<std::uint32_t>(bytes);
    case ScalarType::Float32: return read_le<float>(bytes);
    case ScalarType::Float64: return read_le<double>(bytes);
  }
  return 0.0;
}

struct Property {
  std::string name;
  ScalarType type;
  bool is_list = false;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;

  std::size_t stride() const {
    std::size_t s = 0;
    for (const auto& p : properties) s += scalar_size(p.type);
    return s;
  }
  std::optional<std::size_t> find(const std::string& prop) const {
    for (std::size_t i = 0; i < properties.size(); ++i) {
      if (properties[i].name == prop) return i;
    }
    return std::nullopt;
  }
};

struct Header {
  PlyFormat format = PlyFormat::Ascii;
  std::vector<Element> elements;
  std::vector<std::string> comments;
};

Header parse_header(std::istream& in, const std::string& where) {
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
    throw_data(where + ": malformed header: missing 'ply' magic");
  }
  Header header;
  bool have_format = false;
  while (true) {
    if (!std::getline(in, line)) throw_data(where + ": malformed header: missing end_header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword.empty()) continue;
    if (keyword == "end_header") break;
    if (keyword == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii") {
        header.format = PlyFormat::Ascii;
      } else if (fmt == "binary_little_endian") {
        header.format = PlyFormat::BinaryLittleEndian;
      } else {
        throw_data(where + ": malformed header: unsupported format '" + fmt + "'");
      }
      have_format = true;
    } else if (keyword == "comment" || keyword == "obj_info") {
      std::string rest;
      std::getline(ls >> std::ws, rest);
      header.comments.push_back(rest);
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      ls >> e.name >> count;
      if (e.name.empty() || count < 0) throw_data(where + ": malformed header: bad element line '" + line + "'");
      e.count = static_cast<std::size_t>(count);
      header.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (header.elements.empty()) throw_data(where + ": malformed header: property before element");
      std::string type;
      ls >> type;
      Property p;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.type = parse_scalar_type(item_type).value_or(ScalarType::UInt8);
      } else {
        auto t = parse_scalar_type(type);
        if (!t) throw_data(where + ": malformed header: unknown property type '" + type + "'");
        p.type = *t;
        ls >> p.name;
      }
      if (p.name.empty()) throw_data(where + ": malformed header: property without name");
      header.elements.back().properties.push_back(std::move(p));
    } else {
      throw_data(where + ": malformed header: unexpected line '" + line + "'");
    }
  }
  if (!have_format) throw_data(where + ": malformed header: missing format line");
  return header;
}

std::string comment_value(const Header& header, const std::string& key) {
  for (const auto& c : header.comments) {
    if (c.rfind(key + " ", 0) == 0) return c.substr(key.size() + 1);
  }
  return {};
}

}  // namespace

std::array<std::uint8_t, 3> heat_color(double value) {
  const double v = std::clamp(value, 0.0, 1.0);
  // Piecewise-linear blue -> cyan -> green -> yellow -> red.
  double r = 0, g = 0, b = 0;
  if (v < 0.25) {
    b = 1.0; g = v / 0.25;
  } else if (v < 0.5) {
    g = 1.0; b = 1.0 - (v - 0.25) / 0.25;
  } else if (v < 0.75) {
    g = 1.0; r = (v - 0.5) / 0.25;
  } else {
    r = 1.0; g = 1.0 - (v - 0.75) / 0.25;
  }
  auto q = [](double c) { return static_cast<std::uint8_t>(std::lround(c * 255.0)); };
  return {q(r), q(g), q(b)};
}

PointView load_ply(const std::filesystem::path& path) {
  const std::string where = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data(where + ": cannot open file");
  Header header = parse_header(in, where);

  std::size_t vertex_index = header.elements.size();
  for (std::size_t i = 0; i < header.elements.size(); ++i) {
    if (header.elements[i].name == "vertex") {
      vertex_index = i;
      break;
    }
  }
  if (vertex_index == header.elements.size()) throw_data(where + ": missing element vertex");
  const Element& vertex = header.elements[vertex_index];

  static const char* kRequired[] = {"x", "y", "z", "red", "green", "blue"};
  std::array<std::size_t, 6> col{};
  for (int i = 0; i < 6; ++i) {
    auto idx = vertex.find(kRequired[i]);
    if (!idx) throw_data(where + ": missing property " + std::string(kRequired[i]));
    col[i] = *idx;
  }
  for (const auto& p : vertex.properties) {
    if (p.is_list) throw_data(where + ": element vertex: list property '" + p.name + "' not supported");
  }
  const auto label_col = vertex.find("label");

  std::vector<double> row(vertex.properties.size());
  PointView view;
  view.positions.resize(vertex.count);
  view.colors.resize(vertex.count);
  if (label_col) view.labels.emplace(vertex.count);

  auto color_value = [&](std::size_t c, double raw) {
    return is_integral(vertex.properties[c].type) ? raw / 255.0 : raw;
  };
  auto store = [&](std::size_t i) {
    view.positions[i] = {row[col[0]], row[col[1]], row[col[2]]};
    view.colors[i] = {color_value(col[3], row[col[3]]), color_value(col[4], row[col[4]]),
                      color_value(col[5], row[col[5]])};
    if (label_col) (*view.labels)[i] = row[*label_col] != 0.0 ? 1 : 0;
  };

  if (header.format == PlyFormat::Ascii) {
    std::string line;
    for (std::size_t e = 0; e < vertex_index; ++e) {
      for (std::size_t i = 0; i < header.elements[e].count; ++i) {
        if (!std::getline(in, line)) throw_data(where + ": truncated payload in element " + header.elements[e].name);
      }
    }
    for (std::size_t i = 0; i < vertex.count; ++i) {
      if (!std::getline(in, line)) {
        throw_data(where + ": truncated payload in element vertex at row " + std::to_string(i));
      }
      std::istringstream ls(line);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (!(ls >> row[c])) {
          throw_data(where + ": element vertex row " + std::to_string(i) + ": cannot parse property " +
                     vertex.properties[c].name);
        }
        // Round through the declared width so ascii and binary files agree.
        if (vertex.properties[c].type == ScalarType::Float32) row[c] = static_cast<float>(row[c]);
      }
      store(i);
    }
  } else {
    for (std::size_t e = 0; e < vertex_index; ++e) {
      const Element& el = header.elements[e];
      for (const auto& p : el.properties) {
        if (p.is_list) throw_data(where + ": element " + el.name + ": list properties before vertex not supported");
      }
      in.seekg(static_cast<std::streamoff>(el.count * el.stride()), std::ios::cur);
    }
    const std::size_t stride = vertex.stride();
    std::vector<char> buffer(stride * vertex.count);
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (static_cast<std::size_t>(in.gcount()) != buffer.size()) {
      throw_data(where + ": truncated payload in element vertex (expected " + std::to_string(vertex.count) +
                 " rows)");
    }
    for (std::size_t i = 0; i < vertex.count; ++i) {
      const char* p = buffer.data() + i * stride;
      for (std::size_t c = 0; c < row.size(); ++c) {
        row[c] = decode_binary(vertex.properties[c].type, p);
        p += scalar_size(vertex.properties[c].type);
      }
      store(i);
    }
  }

  view.scene_id = comment_value(header, "scene_id");
  view.view_id = comment_value(header, "view_id");
  if (view.view_id.empty()) view.view_id = path.stem().string();
  try {
    view.validate();
  } catch (const Error& e) {
    throw_data(where + ": element vertex: " + e.what());
  }
  return view;
}

void save_ply(const PointView& view, const std::filesystem::path& path, PlyFormat format,
              std::optional<std::span<const double>> scalar) {
  view.validate();
  if (scalar) {
    if (scalar->size() != view.size()) throw_data("scalar count does not match point count");
    for (double s : *scalar) {
      if (!(s >= 0.0 && s <= 1.0)) throw_data("scalar out of range");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_data(path.string() + ": cannot open for writing");

  out << "ply\n";
  out << (format == PlyFormat::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n");
  if (!view.scene_id.empty()) out << "comment scene_id " << view.scene_id << "\n";
  if (!view.view_id.empty()) out << "comment view_id " << view.view_id << "\n";
  out << "element vertex " << view.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (view.labels) out << "property uchar label\n";
  if (scalar) out << "property float probability\n";
  out << "end_header\n";

  auto color_byte = [](double c) { return static_cast<std::uint8_t>(std::lround(c * 255.0)); };
  for (std::size_t i = 0; i < view.size(); ++i) {
    const auto& p = view.positions[i];
    std::array<std::uint8_t, 3> rgb;
    if (scalar) {
      rgb = heat_color((*scalar)[i]);
    } else {
      rgb = {color_byte(view.colors[i][0]), color_byte(view.colors[i][1]), color_byte(view.colors[i][2])};
    }
    if (format == PlyFormat::Ascii) {
      out.precision(std::numeric_limits<float>::max_digits10);
      out << static_cast<float>(p[0]) << ' ' << static_cast<float>(p[1]) << ' ' << static_cast<float>(p[2]) << ' '
          << int(rgb[0]) << ' ' << int(rgb[1]) << ' ' << int(rgb[2]);
      if (view.labels) out << ' ' << int((*view.labels)[i]);
      if (scalar) out << ' ' << static_cast<float>((*scalar)[i]);
      out << '\n';
    } else {
      for (int c = 0; c < 3; ++c) write_le(out, static_cast<float>(p[c]));
      for (int c = 0; c < 3; ++c) write_le(out, rgb[c]);
      if (view.labels) write_le(out, (*view.labels)[i]);
      if (scalar) write_le(out, static_cast<float>((*scalar)[i]));
    }
  }
  out.flush();
  if (!out) throw_data(path.string() + ": write failed");
}

}  // namespace pcsod
