#include <array>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "splatreach/splat_scene.hpp"

namespace splatreach {

namespace {

static_assert(std::endian::native == std::endian::little, "PLY reader assumes a little-endian host");

enum class PlyType { kI8, kU8, kI16, kU16, kI32, kU32, kF32, kF64 };

std::optional<PlyType> parse_type(const std::string& t) {
  static const std::map<std::string, PlyType> kTypes = {
      {"char", PlyType::kI8},     {"int8", PlyType::kI8},     {"uchar", PlyType::kU8},
      {"uint8", PlyType::kU8},    {"short", PlyType::kI16},   {"int16", PlyType::kI16},
      {"ushort", PlyType::kU16},  {"uint16", PlyType::kU16},  {"int", PlyType::kI32},
      {"int32", PlyType::kI32},   {"uint", PlyType::kU32},    {"uint32", PlyType::kU32},
      {"float", PlyType::kF32},   {"float32", PlyType::kF32}, {"double", PlyType::kF64},
      {"float64", PlyType::kF64}};
  auto it = kTypes.find(t);
  if (it == kTypes.end()) return std::nullopt;
  return it->second;
}

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::kI8:
    case PlyType::kU8: return 1;
    case PlyType::kI16:
    case PlyType::kU16: return 2;
    case PlyType::kI32:
    case PlyType::kU32:
    case PlyType::kF32: return 4;
    case PlyType::kF64: return 8;
  }
  return 0;
}

template <typename T>
double read_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double decode(PlyType t, const char* p) {
  switch (t) {
    case PlyType::kI8: return read_as<std::int8_t>(p);
    case PlyType::kU8: return read_as<std::uint8_t>(p);
    case PlyType::kI16: return read_as<std::int16_t>(p);
    case PlyType::kU16: return read_as<std::uint16_t>(p);
    case PlyType::kI32: return read_as<std::int32_t>(p);
    case PlyType::kU32: return read_as<std::uint32_t>(p);
    case PlyType::kF32: return read_as<float>(p);
    case PlyType::kF64: return read_as<double>(p);
  }
  return 0.0;
}

struct Property {
  std::string name;
  PlyType type;
  std::size_t offset;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
  std::size_t stride = 0;
  bool has_list = false;
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

SplatScene load_scene(const std::filesystem::path& path, Activation activation,
                      SplatGeometry geometry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());

  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw FormatError("not a PLY file: " + path.string());

  bool binary = false;
  std::vector<Element> elements;
  for (;;) {
    if (!std::getline(in, line)) throw FormatError("PLY header not terminated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt == "ascii") binary = false;
      else throw FormatError("unsupported PLY format " + fmt);
    } else if (key == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (key == "property") {
      if (elements.empty()) throw FormatError("property before element");
      std::string type;
      ls >> type;
      auto& e = elements.back();
      if (type == "list") {
        e.has_list = true;
        continue;
      }
      auto t = parse_type(type);
      if (!t) throw FormatError("unknown PLY type " + type);
      Property p{"", *t, e.stride};
      ls >> p.name;
      e.stride += type_size(*t);
      e.props.push_back(p);
    }
  }

  std::size_t skip_bytes = 0;
  const Element* vertex = nullptr;
  for (const auto& e : elements) {
    if (e.name == "vertex") {
      vertex = &e;
      break;
    }
    if (e.has_list) throw FormatError("list elements before vertex are not supported");
    skip_bytes += e.stride * e.count;
  }
  if (!vertex) throw FormatError("PLY has no vertex element");
  if (vertex->has_list) throw FormatError("vertex element must not contain list properties");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < vertex->props.size(); ++i) col[vertex->props[i].name] = i;
  const std::array<const char*, 10> required = {"x", "y", "z", "scale_0", "scale_1",
                                                "rot_0", "rot_1", "rot_2", "rot_3", "opacity"};
  for (const char* r : required)
    if (!col.count(r)) throw FormatError(std::string("PLY vertex is missing field '") + r + "'");
  const bool has_scale2 = col.count("scale_2") > 0;
  const bool has_kind = col.count("kind") > 0;

  std::vector<double> row(vertex->props.size());
  std::vector<char> raw(vertex->stride);
  if (!binary && skip_bytes > 0) throw FormatError("ascii PLY with elements before vertex");
  if (binary) in.ignore(static_cast<std::streamsize>(skip_bytes));

  std::vector<Splat> splats;
  splats.reserve(vertex->count);
  for (std::size_t v = 0; v < vertex->count; ++v) {
    if (binary) {
      if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size())))
        throw FormatError("PLY truncated at vertex " + std::to_string(v));
      for (std::size_t i = 0; i < vertex->props.size(); ++i)
        row[i] = decode(vertex->props[i].type, raw.data() + vertex->props[i].offset);
    } else {
      // strtod, unlike operator>>, accepts nan and inf; those are rejected below.
      std::string token;
      for (auto& x : row) {
        if (!(in >> token)) throw FormatError("PLY truncated at vertex " + std::to_string(v));
        char* end = nullptr;
        x = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0')
          throw FormatError("bad number '" + token + "' at vertex " + std::to_string(v));
      }
    }
    auto get = [&](const char* name) { return row[col.at(name)]; };

    for (double x : row)
      if (!std::isfinite(x)) throw DataError("non-finite value at vertex " + std::to_string(v));

    Splat s;
    s.mean = {get("x"), get("y"), get("z")};
    Vec3 stored(get("scale_0"), get("scale_1"), has_scale2 ? get("scale_2") : 0.0);
    double opacity = get("opacity");
    if (activation == Activation::kStandard) {
      s.scales = {std::exp(stored[0]), std::exp(stored[1]), has_scale2 ? std::exp(stored[2]) : 0.0};
      opacity = sigmoid(opacity);
    } else {
      s.scales = stored;
    }
    s.kind = has_scale2 ? SplatKind::k3D : SplatKind::k2D;
    if (has_kind) s.kind = get("kind") == 1.0 ? SplatKind::k2D : SplatKind::k3D;
    if (s.kind == SplatKind::k2D && !has_scale2) s.scales[2] = 0.0;
    if ((s.scales.array() < 0.0).any()) throw DataError("negative scale at vertex " + std::to_string(v));
    if (opacity < 0.0 || opacity > 1.0)
      throw DataError("opacity outside [0,1] at vertex " + std::to_string(v));
    s.opacity = opacity;
    s.rotation = Quat(get("rot_0"), get("rot_1"), get("rot_2"), get("rot_3"));
    if (s.rotation.norm() == 0.0) throw DataError("zero quaternion at vertex " + std::to_string(v));
    splats.push_back(s);
  }
  if (splats.empty()) throw EmptySceneError("PLY contains no splats: " + path.string());
  return SplatScene(std::move(splats), geometry);
}

void write_scene(const SplatScene& scene, const std::filesystem::path& path, Activation activation) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << scene.size() << "\n";
  for (const char* name : {"x", "y", "z", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1",
                           "rot_2", "rot_3", "opacity"})
    out << "property float " << name << "\n";
  out << "property uchar kind\nend_header\n";

  for (const auto& s : scene.splats()) {
    std::array<float, 11> f{};
    Vec3 sc = s.scales;
    double op = s.opacity;
    if (activation == Activation::kStandard) {
      for (int k = 0; k < 3; ++k) sc[k] = std::log(std::max(sc[k], 1e-30));
      op = std::clamp(op, 1e-7, 1.0 - 1e-7);
      op = std::log(op / (1.0 - op));
    }
    const Quat& q = s.rotation;
    const std::array<double, 11> d = {s.mean.x(), s.mean.y(), s.mean.z(), sc[0], sc[1], sc[2],
                                      q.w(),      q.x(),      q.y(),      q.z(), op};
    for (std::size_t i = 0; i < d.size(); ++i) f[i] = static_cast<float>(d[i]);
    out.write(reinterpret_cast<const char*>(f.data()), sizeof(float) * f.size());
    const std::uint8_t kind = s.kind == SplatKind::k2D ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&kind), 1);
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace splatreach
