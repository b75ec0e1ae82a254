#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "posefit/errors.hpp"
#include "posefit/scene_io.hpp"

namespace posefit {

namespace {

constexpr double kMmToM = 1e-3;

struct PlyProperty {
  std::string name;
  std::string type;       // scalar type, or list value type
  std::string count_type; // non-empty for list properties
};

struct PlyElement {
  std::string name;
  long long count = 0;
  std::vector<PlyProperty> props;
};

int scalar_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
      t == "float" || t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw ParseError("unknown PLY scalar type: " + t);
}

double read_binary_scalar(std::istream& in, const std::string& type,
                          const std::string& path) {
  unsigned char buf[8];
  const int n = scalar_size(type);
  if (!in.read(reinterpret_cast<char*>(buf), n))
    throw ParseError(path + ": truncated at byte offset " +
                     std::to_string(static_cast<long long>(in.tellg())));
  // Little-endian payloads on a little-endian host.
  if (type == "char" || type == "int8")
    return static_cast<double>(*reinterpret_cast<signed char*>(buf));
  if (type == "uchar" || type == "uint8") return buf[0];
  if (type == "short" || type == "int16") {
    std::int16_t v;
    std::memcpy(&v, buf, 2);
    return v;
  }
  if (type == "ushort" || type == "uint16") {
    std::uint16_t v;
    std::memcpy(&v, buf, 2);
    return v;
  }
  if (type == "int" || type == "int32") {
    std::int32_t v;
    std::memcpy(&v, buf, 4);
    return v;
  }
  if (type == "uint" || type == "uint32") {
    std::uint32_t v;
    std::memcpy(&v, buf, 4);
    return v;
  }
  if (type == "float" || type == "float32") {
    float v;
    std::memcpy(&v, buf, 4);
    return v;
  }
  double v;
  std::memcpy(&v, buf, 8);
  return v;
}

bool is_color255(const std::string& t) {
  return t == "uchar" || t == "uint8" || t == "char" || t == "int8" ||
         t == "ushort" || t == "uint16";
}

TriangleMesh load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path);

  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line))
      throw ParseError(path + ": unexpected end of header at line " +
                       std::to_string(lineno));
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply") throw ParseError(path + ": not a PLY file");
  bool binary = false;
  std::vector<PlyElement> elements;
  while (true) {
    const std::string l = next_line();
    std::istringstream ss(l);
    std::string tok;
    ss >> tok;
    if (tok == "comment" || tok == "obj_info" || tok.empty()) continue;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "ascii")
        binary = false;
      else if (fmt == "binary_little_endian")
        binary = true;
      else
        throw ParseError(path + ": unsupported PLY format " + fmt +
                         " at line " + std::to_string(lineno));
    } else if (tok == "element") {
      PlyElement e;
      ss >> e.name >> e.count;
      elements.push_back(e);
    } else if (tok == "property") {
      if (elements.empty())
        throw ParseError(path + ": property before element at line " +
                         std::to_string(lineno));
      PlyProperty p;
      std::string t;
      ss >> t;
      if (t == "list") {
        ss >> p.count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ss >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (tok == "end_header") {
      break;
    } else {
      throw ParseError(path + ": unknown header token '" + tok +
                       "' at line " + std::to_string(lineno));
    }
  }

  std::vector<Vec3d> verts;
  std::vector<Vec3d> colors;
  std::vector<std::array<int, 3>> faces;
  bool has_colors = false;

  auto ascii_tokens = [&](std::size_t need) {
    std::vector<double> vals;
    while (vals.size() < need) {
      const std::string l = next_line();
      std::istringstream ss(l);
      double d;
      while (ss >> d) vals.push_back(d);
    }
    return vals;
  };

  for (const PlyElement& e : elements) {
    if (e.name == "vertex") {
      int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
      for (std::size_t i = 0; i < e.props.size(); ++i) {
        const std::string& n = e.props[i].name;
        if (!e.props[i].count_type.empty())
          throw ParseError(path + ": list property on vertex element");
        if (n == "x") ix = static_cast<int>(i);
        if (n == "y") iy = static_cast<int>(i);
        if (n == "z") iz = static_cast<int>(i);
        if (n == "red" || n == "r") ir = static_cast<int>(i);
        if (n == "green" || n == "g") ig = static_cast<int>(i);
        if (n == "blue" || n == "b") ib = static_cast<int>(i);
      }
      if (ix < 0 || iy < 0 || iz < 0)
        throw ParseError(path + ": vertex element lacks x/y/z");
      has_colors = ir >= 0 && ig >= 0 && ib >= 0;
      verts.reserve(e.count);
      for (long long v = 0; v < e.count; ++v) {
        std::vector<double> vals;
        if (binary) {
          vals.reserve(e.props.size());
          for (const auto& p : e.props)
            vals.push_back(read_binary_scalar(in, p.type, path));
        } else {
          vals = ascii_tokens(e.props.size());
        }
        verts.push_back({vals[ix] * kMmToM, vals[iy] * kMmToM,
                         vals[iz] * kMmToM});
        if (has_colors) {
          const double scale = is_color255(e.props[ir].type) ? 1.0 / 255.0
                                                             : 1.0;
          colors.push_back({vals[ir] * scale, vals[ig] * scale,
                            vals[ib] * scale});
        }
      }
    } else if (e.name == "face") {
      for (long long f = 0; f < e.count; ++f) {
        for (const auto& p : e.props) {
          std::vector<long long> idx;
          if (!p.count_type.empty()) {
            long long n;
            if (binary) {
              n = static_cast<long long>(
                  read_binary_scalar(in, p.count_type, path));
              for (long long k = 0; k < n; ++k)
                idx.push_back(static_cast<long long>(
                    read_binary_scalar(in, p.type, path)));
            } else {
              const std::string l = next_line();
              std::istringstream ss(l);
              ss >> n;
              long long v;
              while (ss >> v) idx.push_back(v);
              if (static_cast<long long>(idx.size()) != n)
                throw ParseError(path + ": face index count mismatch at line " +
                                 std::to_string(lineno));
            }
            if (idx.size() < 3)
              throw ParseError(path + ": face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k)
              faces.push_back({static_cast<int>(idx[0]),
                               static_cast<int>(idx[k]),
                               static_cast<int>(idx[k + 1])});
          } else if (binary) {
            read_binary_scalar(in, p.type, path);  // skip extra scalar
          }
        }
      }
    } else {
      // Skip unknown elements.
      for (long long k = 0; k < e.count; ++k) {
        if (binary) {
          for (const auto& p : e.props) {
            if (!p.count_type.empty()) {
              const long long n = static_cast<long long>(
                  read_binary_scalar(in, p.count_type, path));
              for (long long j = 0; j < n; ++j)
                read_binary_scalar(in, p.type, path);
            } else {
              read_binary_scalar(in, p.type, path);
            }
          }
        } else {
          next_line();
        }
      }
    }
  }

  if (!has_colors) {
    std::cerr << "posefit: " << path
              << " has no vertex colors; defaulting to mid-gray\n";
    colors.assign(verts.size(), Vec3d{0.5, 0.5, 0.5});
  }
  for (auto& c : colors) {
    c.x = std::min(1.0, std::max(0.0, c.x));
    c.y = std::min(1.0, std::max(0.0, c.y));
    c.z = std::min(1.0, std::max(0.0, c.z));
  }
  return make_mesh(std::move(verts), std::move(faces), std::move(colors));
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  std::vector<Vec3d> verts;
  std::vector<Vec3d> colors;
  std::vector<std::array<int, 3>> faces;
  bool any_color = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    if (tok == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z))
        throw ParseError(path + ": bad vertex at line " +
                         std::to_string(lineno));
      verts.push_back({x * kMmToM, y * kMmToM, z * kMmToM});
      double r, g, b;
      if (ss >> r >> g >> b) {
        colors.push_back({r, g, b});
        any_color = true;
      } else {
        colors.push_back({0.5, 0.5, 0.5});
      }
    } else if (tok == "f") {
      std::vector<long long> idx;
      std::string part;
      while (ss >> part) {
        const std::size_t slash = part.find('/');
        const std::string head =
            slash == std::string::npos ? part : part.substr(0, slash);
        char* end = nullptr;
        const long long v = std::strtoll(head.c_str(), &end, 10);
        if (end != head.c_str() + head.size() || v == 0)
          throw ParseError(path + ": bad face index at line " +
                           std::to_string(lineno));
        idx.push_back(v > 0 ? v - 1
                            : static_cast<long long>(verts.size()) + v);
      }
      if (idx.size() < 3)
        throw ParseError(path + ": face with fewer than 3 vertices at line " +
                         std::to_string(lineno));
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        faces.push_back({static_cast<int>(idx[0]), static_cast<int>(idx[k]),
                         static_cast<int>(idx[k + 1])});
    }
  }
  if (!any_color)
    std::cerr << "posefit: " << path
              << " has no vertex colors; defaulting to mid-gray\n";
  for (auto& c : colors) {
    c.x = std::min(1.0, std::max(0.0, c.x));
    c.y = std::min(1.0, std::max(0.0, c.y));
    c.z = std::min(1.0, std::max(0.0, c.z));
  }
  return make_mesh(std::move(verts), std::move(faces), std::move(colors));
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
  if (path.rfind("builtin:", 0) == 0) return builtin_mesh(path.substr(8));
  const std::size_t dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".ply" || ext == ".PLY") return load_ply(path);
  if (ext == ".obj" || ext == ".OBJ") return load_obj(path);
  throw InvalidArgumentError("unsupported mesh format: " + path);
}

void save_mesh_ply(const std::string& path, const TriangleMesh& mesh) {
  mesh.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "element face " << mesh.faces.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const float xyz[3] = {static_cast<float>(mesh.vertices[i].x / kMmToM),
                          static_cast<float>(mesh.vertices[i].y / kMmToM),
                          static_cast<float>(mesh.vertices[i].z / kMmToM)};
    out.write(reinterpret_cast<const char*>(xyz), 12);
    const unsigned char rgb[3] = {
        static_cast<unsigned char>(std::lround(mesh.colors[i].x * 255.0)),
        static_cast<unsigned char>(std::lround(mesh.colors[i].y * 255.0)),
        static_cast<unsigned char>(std::lround(mesh.colors[i].z * 255.0))};
    out.write(reinterpret_cast<const char*>(rgb), 3);
  }
  for (const auto& f : mesh.faces) {
    const unsigned char n = 3;
    out.write(reinterpret_cast<const char*>(&n), 1);
    const std::int32_t idx[3] = {f[0], f[1], f[2]};
    out.write(reinterpret_cast<const char*>(idx), 12);
  }
}

}  // namespace posefit
