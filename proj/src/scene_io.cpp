// SPDX-License-Identifier: Apache-2.0
#include "ils/scene_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ils {

using nlohmann::json;

namespace {

// Walks a JSON document while tracking the JSON-pointer path for messages.
class Field {
 public:
  Field(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return node_; }

  bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

  Field operator[](const char* key) const {
    if (!node_.is_object()) fail("expected an object");
    auto it = node_.find(key);
    if (it == node_.end()) throw ParseError(path_ + "/" + key + ": missing field");
    return {*it, path_ + "/" + key};
  }

  Field operator[](std::size_t i) const { return {node_.at(i), path_ + "/" + std::to_string(i)}; }

  std::size_t array_size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    const double v = node_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  int integer() const {
    if (!node_.is_number_integer()) fail("expected an integer");
    return node_.get<int>();
  }

  std::string string() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out(array_size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)[i].number();
    return out;
  }

  Vec3 vec3() const {
    if (array_size() != 3) fail("expected 3 numbers");
    return {(*this)[std::size_t{0}].number(), (*this)[1].number(), (*this)[2].number()};
  }

  Vec2 vec2() const {
    if (array_size() != 2) fail("expected 2 numbers");
    return {(*this)[std::size_t{0}].number(), (*this)[1].number()};
  }

  Mat3 mat3() const {
    if (array_size() != 3) fail("expected a 3x3 matrix");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
      const Vec3 row = (*this)[static_cast<std::size_t>(r)].vec3();
      m.row(r) = row.transpose();
    }
    return m;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_ + ": " + what); }

 private:
  const json& node_;
  std::string path_;
};

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

json parse_document(std::string_view document) {
  try {
    return json::parse(document);
  } catch (const json::parse_error& e) {
    const auto offset = std::min<std::size_t>(e.byte, document.size());
    const auto line = 1 + std::count(document.begin(), document.begin() + offset, '\n');
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
}

LightDistributionCurve read_ldc(const std::string& name, const Field& f,
                                const std::filesystem::path& base_dir) {
  if (f.has("file")) {
    const auto path = base_dir / f["file"].string();
    return parse_ldc_csv(read_text_file(path), name);
  }
  if (f.has("isotropic_lm")) return LightDistributionCurve::isotropic(f["isotropic_lm"].number(), name);
  LightDistributionCurve ldc;
  ldc.name = name;
  ldc.polar_deg = f["polar_deg"].numbers();
  ldc.azimuth_deg = f["azimuth_deg"].numbers();
  const Field rows = f["candela"];
  for (std::size_t i = 0; i < rows.array_size(); ++i) ldc.candela.push_back(rows[i].numbers());
  ldc.validate();
  return ldc;
}

LuxmeterSensitivityCurve read_lsc(const std::string& name, const Field& f,
                                  const std::filesystem::path& base_dir) {
  if (f.has("file")) return parse_lsc_csv(read_text_file(base_dir / f["file"].string()), name);
  if (f.has("builtin")) {
    if (f["builtin"].string() != "cosine") f["builtin"].fail("unknown builtin LSC");
    const double step = f.has("step_deg") ? f["step_deg"].number() : 5.0;
    return LuxmeterSensitivityCurve::cosine(step, name);
  }
  LuxmeterSensitivityCurve lsc;
  lsc.name = name;
  lsc.angles_deg = f["angles_deg"].numbers();
  lsc.weight = f["weight"].numbers();
  lsc.validate();
  return lsc;
}

template <class Table>
const Table& lookup(const std::map<std::string, Table>& tables, const Field& ref) {
  const auto name = ref.string();
  auto it = tables.find(name);
  if (it == tables.end()) ref.fail("unknown table '" + name + "'");
  return it->second;
}

}  // namespace

Scene load_scene(std::string_view document, const std::filesystem::path& base_dir) {
  const json doc = parse_document(document);
  const Field root(doc, "");

  const int version = root["schema_version"].integer();
  if (version != kSceneSchemaVersion) {
    root["schema_version"].fail("unsupported schema version " + std::to_string(version));
  }

  std::map<std::string, LightDistributionCurve> ldcs;
  std::map<std::string, LuxmeterSensitivityCurve> lscs;
  if (root.has("ldcs")) {
    for (const auto& [name, node] : root["ldcs"].raw().items()) {
      ldcs.emplace(name, read_ldc(name, Field(node, "/ldcs/" + name), base_dir));
    }
  }
  lscs.emplace("cosine", LuxmeterSensitivityCurve::cosine());
  if (root.has("lscs")) {
    for (const auto& [name, node] : root["lscs"].raw().items()) {
      lscs.insert_or_assign(name, read_lsc(name, Field(node, "/lscs/" + name), base_dir));
    }
  }

  Scene scene;
  if (root.has("world_up")) scene.world_up = root["world_up"].vec3();

  if (root.has("camera")) {
    const Field cam = root["camera"];
    scene.camera.fx = cam["fx"].number();
    scene.camera.fy = cam["fy"].number();
    scene.camera.cx = cam["cx"].number();
    scene.camera.cy = cam["cy"].number();
    scene.camera.width = cam["width"].integer();
    scene.camera.height = cam["height"].integer();
    if (cam.has("rotation")) scene.camera.rotation = cam["rotation"].mat3();
    if (cam.has("position")) scene.camera.position = cam["position"].vec3();
  }

  if (root.has("patches")) {
    const Field arr = root["patches"];
    for (std::size_t i = 0; i < arr.array_size(); ++i) {
      const Field f = arr[i];
      Patch p;
      p.id = f["id"].integer();
      p.center = f["center"].vec3();
      p.normal = f["normal"].vec3();
      p.tangent_u = f["tangent"].vec3();
      p.tangent_v = p.normal.cross(p.tangent_u);
      p.half_extents = f["half_extents"].vec2();
      p.albedo = f["albedo"].number();
      scene.patches.push_back(p);
    }
  }

  if (root.has("luminaires")) {
    const Field arr = root["luminaires"];
    for (std::size_t i = 0; i < arr.array_size(); ++i) {
      const Field f = arr[i];
      Luminaire l;
      l.id = f["id"].integer();
      l.position = f["position"].vec3();
      if (f.has("orientation")) l.orientation = f["orientation"].mat3();
      l.ldc = lookup(ldcs, f["ldc"]);
      l.power_watts = f["power_watts"].number();
      l.dim = f.has("dim") ? f["dim"].number() : 1.0;
      scene.luminaires.push_back(std::move(l));
    }
  }

  if (root.has("sensors")) {
    const Field arr = root["sensors"];
    for (std::size_t i = 0; i < arr.array_size(); ++i) {
      const Field f = arr[i];
      Sensor s;
      s.id = f["id"].integer();
      s.position = f["position"].vec3();
      s.facing = f["facing"].vec3();
      s.lsc = f.has("lsc") ? lookup(lscs, f["lsc"]) : lscs.at("cosine");
      const auto role = f["role"].string();
      if (role == "spatial") {
        s.role = SensorRole::spatial;
      } else if (role == "gaze") {
        s.role = SensorRole::gaze;
      } else {
        f["role"].fail("role must be 'spatial' or 'gaze'");
      }
      scene.sensors.push_back(std::move(s));
    }
  }

  if (root.has("occupants")) {
    const Field arr = root["occupants"];
    for (std::size_t i = 0; i < arr.array_size(); ++i) {
      const Field f = arr[i];
      Occupant o;
      o.id = f["id"].integer();
      o.head_position = f["head_position"].vec3();
      o.gaze = f["gaze"].vec3();
      if (f.has("vfoa_aperture_deg")) o.vfoa_aperture_deg = f["vfoa_aperture_deg"].number();
      o.lsc = f.has("lsc") ? lookup(lscs, f["lsc"]) : lscs.at("cosine");
      scene.occupants.push_back(std::move(o));
    }
  }

  scene.validate();
  return scene;
}

Scene load_scene_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return load_scene(text, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string save_scene(const Scene& scene) {
  json doc;
  doc["schema_version"] = kSceneSchemaVersion;
  doc["world_up"] = to_json(scene.world_up);

  const auto& cam = scene.camera;
  doc["camera"] = {{"fx", cam.fx},         {"fy", cam.fy},
                   {"cx", cam.cx},         {"cy", cam.cy},
                   {"width", cam.width},   {"height", cam.height},
                   {"rotation", to_json(cam.rotation)}, {"position", to_json(cam.position)}};

  json ldcs = json::object();
  json lscs = json::object();
  auto put_lsc = [&](const LuxmeterSensitivityCurve& lsc) {
    lscs[lsc.name] = {{"angles_deg", lsc.angles_deg}, {"weight", lsc.weight}};
  };

  json patches = json::array();
  for (const auto& p : scene.patches) {
    patches.push_back({{"id", p.id},
                       {"center", to_json(p.center)},
                       {"normal", to_json(p.normal)},
                       {"tangent", to_json(p.tangent_u)},
                       {"half_extents", json::array({p.half_extents.x(), p.half_extents.y()})},
                       {"albedo", p.albedo}});
  }

  json luminaires = json::array();
  for (const auto& l : scene.luminaires) {
    if (ldcs.contains(l.ldc.name) && !(ldcs[l.ldc.name]["candela"] == json(l.ldc.candela))) {
      throw InvariantError("luminaire " + std::to_string(l.id) + ": two different LDCs named '" +
                           l.ldc.name + "'");
    }
    ldcs[l.ldc.name] = {{"polar_deg", l.ldc.polar_deg},
                        {"azimuth_deg", l.ldc.azimuth_deg},
                        {"candela", l.ldc.candela}};
    luminaires.push_back({{"id", l.id},
                          {"position", to_json(l.position)},
                          {"orientation", to_json(l.orientation)},
                          {"ldc", l.ldc.name},
                          {"power_watts", l.power_watts},
                          {"dim", l.dim}});
  }

  json sensors = json::array();
  for (const auto& s : scene.sensors) {
    put_lsc(s.lsc);
    sensors.push_back({{"id", s.id},
                       {"position", to_json(s.position)},
                       {"facing", to_json(s.facing)},
                       {"lsc", s.lsc.name},
                       {"role", s.role == SensorRole::spatial ? "spatial" : "gaze"}});
  }

  json occupants = json::array();
  for (const auto& o : scene.occupants) {
    put_lsc(o.lsc);
    occupants.push_back({{"id", o.id},
                         {"head_position", to_json(o.head_position)},
                         {"gaze", to_json(o.gaze)},
                         {"vfoa_aperture_deg", o.vfoa_aperture_deg},
                         {"lsc", o.lsc.name}});
  }

  doc["ldcs"] = std::move(ldcs);
  doc["lscs"] = std::move(lscs);
  doc["patches"] = std::move(patches);
  doc["luminaires"] = std::move(luminaires);
  doc["sensors"] = std::move(sensors);
  doc["occupants"] = std::move(occupants);
  return doc.dump(1) + "\n";
}

DepthImage read_depth_pgm(const std::filesystem::path& path, double meters_per_unit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open depth image '" + path.string() + "'");
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  in >> magic;
  auto skip_comments = [&] {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      in >> std::ws;
    }
  };
  skip_comments();
  in >> width;
  skip_comments();
  in >> height;
  skip_comments();
  in >> maxval;
  if (magic != "P5" || !in || width <= 0 || height <= 0 || maxval <= 255 || maxval > 65535) {
    throw ParseError(path.string() + ": expected a 16-bit binary PGM (P5)");
  }
  in.get();  // single whitespace before the raster

  DepthImage img;
  img.width = width;
  img.height = height;
  img.depth.resize(static_cast<std::size_t>(width) * height);
  std::vector<unsigned char> raw(img.depth.size() * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw ParseError(path.string() + ": truncated raster");
  }
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];  // big-endian
    img.depth[i] = v * meters_per_unit;
  }
  return img;
}

std::string encode_depth_pgm(const DepthImage& depth, double meters_per_unit) {
  std::string out = "P5\n" + std::to_string(depth.width) + " " + std::to_string(depth.height) +
                    "\n65535\n";
  out.reserve(out.size() + depth.depth.size() * 2);
  for (double d : depth.depth) {
    const auto v = static_cast<unsigned>(std::clamp(std::lround(d / meters_per_unit), 0L, 65535L));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xFF));
  }
  return out;
}

DepthSidecar parse_depth_sidecar(std::string_view document) {
  const json doc = parse_document(document);
  const Field f(doc, "");
  DepthSidecar out;
  out.camera.fx = f["fx"].number();
  out.camera.fy = f["fy"].number();
  out.camera.cx = f["cx"].number();
  out.camera.cy = f["cy"].number();
  out.camera.width = f["width"].integer();
  out.camera.height = f["height"].integer();
  if (f.has("rotation")) out.camera.rotation = f["rotation"].mat3();
  if (f.has("position")) out.camera.position = f["position"].vec3();
  if (f.has("depth_scale_m")) out.depth_scale_m = f["depth_scale_m"].number();
  out.camera.validate();
  return out;
}

}  // namespace ils
