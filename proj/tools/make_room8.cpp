// SPDX-License-Identifier: Apache-2.0
// Writes the room8 fixture: a 6 x 4 x 3 m office with eight ceiling
// downlights, two desks, two seated occupants and eleven luxmeters, plus a
// synthetic depth frame, detections and luxmeter ground truth.
#include "ils/optimizer.hpp"
#include "ils/radiosity.hpp"
#include "ils/report.hpp"
#include "ils/scene_io.hpp"

#include <json.hpp>

#include <cmath>
#include <iostream>

namespace {

using namespace ils;

constexpr double kRoomX = 6.0, kRoomY = 4.0, kRoomZ = 3.0, kCell = 0.5;

LightDistributionCurve downlight() {
  LightDistributionCurve ldc;
  ldc.name = "downlight";
  for (int g = 0; g <= 180; g += 5) ldc.polar_deg.push_back(g);
  for (int c = 0; c < 360; c += 30) ldc.azimuth_deg.push_back(c);
  for (double c : ldc.azimuth_deg) {
    std::vector<double> row;
    for (double g : ldc.polar_deg) {
      const double cg = std::cos(deg2rad(g));
      const double v = g < 90.0 ? 650.0 * std::pow(cg, 1.5) * (1.0 + 0.08 * std::cos(deg2rad(2.0 * c))) : 0.0;
      row.push_back(std::round(v * 10.0) / 10.0);
    }
    ldc.candela.push_back(row);
  }
  return ldc;
}

void add_grid(std::vector<Patch>& out, int& id, const Vec3& origin, const Vec3& u, const Vec3& v, int nu, int nv,
              const Vec3& normal, double albedo) {
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const Vec3 c = origin + (i + 0.5) * kCell * u + (j + 0.5) * kCell * v;
      out.push_back(Patch::make(id++, c, normal, u, Vec2(kCell / 2, kCell / 2), albedo));
    }
  }
}

Scene build_scene() {
  Scene s;
  int id = 1;
  const int nx = static_cast<int>(kRoomX / kCell), ny = static_cast<int>(kRoomY / kCell),
            nz = static_cast<int>(kRoomZ / kCell);
  const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();
  add_grid(s.patches, id, Vec3(0, 0, 0), X, Y, nx, ny, Z, 0.3);
  add_grid(s.patches, id, Vec3(0, 0, kRoomZ), X, Y, nx, ny, -Z, 0.8);
  add_grid(s.patches, id, Vec3(0, 0, 0), X, Z, nx, nz, Y, 0.6);
  add_grid(s.patches, id, Vec3(0, kRoomY, 0), X, Z, nx, nz, -Y, 0.6);
  add_grid(s.patches, id, Vec3(0, 0, 0), Y, Z, ny, nz, X, 0.6);
  add_grid(s.patches, id, Vec3(kRoomX, 0, 0), Y, Z, ny, nz, -X, 0.6);
  for (double y : {1.0, 3.0}) {
    for (double x : {2.75, 3.25}) {
      s.patches.push_back(Patch::make(id++, Vec3(x, y, 0.75), Z, X, Vec2(0.25, 0.25), 0.45));
    }
  }

  const auto ldc = downlight();
  int lid = 1;
  for (double y : {1.0, 3.0}) {
    for (double x : {0.75, 2.25, 3.75, 5.25}) {
      Luminaire l;
      l.id = lid++;
      l.position = Vec3(x, y, kRoomZ - 0.05);
      l.ldc = ldc;
      l.power_watts = 96.8;
      s.luminaires.push_back(l);
    }
  }

  const auto cosine = LuxmeterSensitivityCurve::cosine(5.0, "cosine");
  int sid = 1;
  for (double y : {1.0, 2.0, 3.0}) {
    for (double x : {1.5, 3.0, 4.5}) {
      s.sensors.push_back({sid++, Vec3(x, y, 0.8), Z, cosine, SensorRole::spatial});
    }
  }
  s.occupants.push_back({1, Vec3(3.0, 0.45, 1.2), Y, 30.0, cosine});
  s.occupants.push_back({2, Vec3(3.0, 3.55, 1.2), -Y, 30.0, cosine});
  for (const auto& o : s.occupants) s.sensors.push_back({sid++, o.head_position, o.gaze, cosine, SensorRole::gaze});

  Camera& cam = s.camera;
  cam.width = 320;
  cam.height = 240;
  cam.fx = cam.fy = 260.0;
  cam.cx = 160.0;
  cam.cy = 120.0;
  cam.position = Vec3(0.15, 0.15, 2.5);
  const Vec3 fwd = (Vec3(3.0, 2.0, 0.8) - cam.position).normalized();
  const Vec3 right = fwd.cross(Z).normalized();
  cam.rotation.col(0) = right;
  cam.rotation.col(1) = fwd.cross(right);
  cam.rotation.col(2) = fwd;
  return s;
}

std::optional<double> hit_sphere(const Vec3& o, const Vec3& d, const Vec3& c, double r) {
  const Vec3 oc = o - c;
  const double b = oc.dot(d), disc = b * b - (oc.squaredNorm() - r * r);
  if (disc < 0.0) return std::nullopt;
  const double t = -b - std::sqrt(disc);
  return t > 0.0 ? std::optional(t) : std::nullopt;
}

DepthImage render_depth(const Scene& scene) {
  const Scene bodies = with_occupant_bodies(scene);
  const AccelIndex accel = build_accel(bodies.patches);
  const Camera& cam = scene.camera;
  DepthImage img{cam.width, cam.height, std::vector<double>(static_cast<std::size_t>(cam.width) * cam.height, 0.0)};
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Vec3 dc = Vec3((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0).normalized();
      const Vec3 dw = cam.rotation * dc;
      double t = std::numeric_limits<double>::infinity();
      if (auto hit = accel.cast_ray({cam.position, dw, 100.0})) t = hit->t;
      for (const auto& o : scene.occupants) {
        if (auto th = hit_sphere(cam.position, dw, o.head_position, 0.11)) t = std::min(t, *th);
      }
      if (std::isfinite(t)) img.depth[static_cast<std::size_t>(v) * cam.width + u] = std::round(t * dc.z() * 1e3) / 1e3;
    }
  }
  return img;
}

std::string detections(const Scene& scene) {
  const Camera& cam = scene.camera;
  std::string out;
  const Scene bodies = with_occupant_bodies(scene);
  for (int frame = 0; frame < 3; ++frame) {
    for (std::size_t k = 0; k < scene.occupants.size(); ++k) {
      const auto& o = scene.occupants[k];
      double lo_u = cam.width, lo_v = cam.height, hi_u = 0, hi_v = 0;
      for (std::size_t p = scene.patches.size() + 6 * k; p < scene.patches.size() + 6 * (k + 1); ++p) {
        for (const Vec3& c : bodies.patches[p].corners()) {
          const Vec3 px = cam.project(c);
          lo_u = std::min(lo_u, px.x());
          hi_u = std::max(hi_u, px.x());
          lo_v = std::min(lo_v, px.y());
          hi_v = std::max(hi_v, px.y());
        }
      }
      const Vec3 head = cam.project(o.head_position);
      lo_v = std::min(lo_v, head.y() - 12.0);
      lo_u = std::clamp(std::floor(lo_u), 0.0, cam.width - 2.0);
      lo_v = std::clamp(std::floor(lo_v), 0.0, cam.height - 2.0);
      hi_u = std::clamp(std::ceil(hi_u), lo_u + 1.0, static_cast<double>(cam.width));
      hi_v = std::clamp(std::ceil(hi_v), lo_v + 1.0, static_cast<double>(cam.height));
      const double jitter = (frame == 1) ? 1.0 : (frame == 2 ? -1.0 : 0.0);
      double yaw = rad2deg(std::atan2(o.gaze.y(), o.gaze.x()));
      if (yaw < 0.0) yaw += 360.0;
      const int pose = static_cast<int>(std::lround(yaw / 45.0)) % 8;
      nlohmann::json j = {{"frame_id", frame},
                          {"person_id", o.id},
                          {"bbox", {lo_u, lo_v, hi_u - lo_u, hi_v - lo_v}},
                          {"head_px", {std::round(head.x()) + jitter, std::round(head.y())}},
                          {"pose_class", pose},
                          {"K", 8}};
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::string ground_truth(const Scene& scene) {
  // Engine estimate at full output plus a fixed per-sensor deviation
  // standing in for meter and model error.
  const Scene solved = with_occupant_bodies(scene);
  const AccelIndex accel = build_accel(solved.patches);
  const auto model = build_radiosity(solved, accel);
  const std::vector<double> ones(scene.luminaires.size(), 1.0);
  const auto r = evaluate_scenario(solved, model.basis, ones, {}, accel, 10000, {});
  const double offsets[] = {12.5, -31.0, 8.0, 44.5, -6.5, 27.0, -18.0, 3.5, -40.0, 22.0, -15.5};
  std::string out = "sensor_id,lux\n";
  std::size_t k = 0;
  for (const auto& [id, lux] : r.sensor_lux) {
    out += std::to_string(id) + "," + format_fixed(lux + offsets[k++ % std::size(offsets)], 1) + "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data/room8";
  try {
    const Scene scene = build_scene();
    scene.validate();

    nlohmann::json doc = nlohmann::json::parse(save_scene(scene));
    doc["ldcs"] = {{"downlight", {{"file", "downlight_ldc.csv"}}}};
    doc["lscs"] = {{"cosine", {{"file", "cosine_lsc.csv"}}}};
    write_atomic(dir / "scene.json", doc.dump(2) + "\n");
    write_atomic(dir / "downlight_ldc.csv", format_ldc_csv(scene.luminaires.front().ldc));
    write_atomic(dir / "cosine_lsc.csv", format_lsc_csv(scene.sensors.front().lsc));

    if (load_scene_file(dir / "scene.json") != scene) {
      std::cerr << "room8: scene does not survive a save/load round trip\n";
      return 1;
    }

    nlohmann::json intrinsics = {{"fx", scene.camera.fx},       {"fy", scene.camera.fy},
                                 {"cx", scene.camera.cx},       {"cy", scene.camera.cy},
                                 {"width", scene.camera.width}, {"height", scene.camera.height},
                                 {"depth_scale_m", 1e-3}};
    nlohmann::json rot = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) rot.push_back({scene.camera.rotation(r, 0), scene.camera.rotation(r, 1),
                                               scene.camera.rotation(r, 2)});
    intrinsics["rotation"] = rot;
    intrinsics["position"] = {scene.camera.position.x(), scene.camera.position.y(), scene.camera.position.z()};
    write_atomic(dir / "intrinsics.json", intrinsics.dump(2) + "\n");
    write_atomic(dir / "depth.pgm", encode_depth_pgm(render_depth(scene)));
    write_atomic(dir / "detections.jsonl", detections(scene));
    write_atomic(dir / "ground_truth.csv", ground_truth(scene));
    std::cout << "room8: " << scene.patches.size() << " patches, " << scene.luminaires.size() << " luminaires -> "
              << dir.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "room8: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
