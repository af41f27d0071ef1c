// SPDX-License-Identifier: Apache-2.0
#include "ils/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ils {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s, int line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("map csv line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

double mean_gaze_error(const Scene& scene, const ScenarioResult& r, bool& any) {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : scene.sensors) {
    if (s.role != SensorRole::gaze) continue;
    if (auto it = r.epsilon_est.find(s.id); it != r.epsilon_est.end()) {
      sum += it->second;
      ++n;
    }
  }
  any = n > 0;
  return n > 0 ? sum / n : 0.0;
}

}  // namespace

std::string ArtifactStamp::line(std::string_view comment_prefix) const {
  return std::string(comment_prefix) + " ilsctl " + kToolVersion + " inputs=" + input_hash;
}

std::string format_exact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::vector<IlluminationRecord> illumination_map(const Scene& scene, const Eigen::VectorXd& exitance,
                                                 const Eigen::VectorXd& incident) {
  const auto n = scene.patches.size();
  if (static_cast<std::size_t>(exitance.size()) != n || static_cast<std::size_t>(incident.size()) != n) {
    throw InvariantError("illumination map: field sizes do not match the patch count");
  }
  std::vector<IlluminationRecord> map;
  map.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = scene.patches[i];
    const auto k = static_cast<Eigen::Index>(i);
    map.push_back({p.id, p.center, p.normal, p.area(), exitance[k], incident[k]});
  }
  return map;
}

MapFormat parse_map_format(std::string_view text) {
  if (text == "csv") return MapFormat::csv;
  if (text == "mesh" || text == "ply") return MapFormat::mesh;
  throw InvariantError("unsupported map format '" + std::string(text) + "' (expected csv or mesh)");
}

std::string export_map(const std::vector<IlluminationRecord>& map, const Scene& scene, MapFormat format,
                       const ArtifactStamp& stamp) {
  std::ostringstream os;
  if (format == MapFormat::csv) {
    os << stamp.line("#") << '\n';
    os << "patch_id,cx,cy,cz,nx,ny,nz,area_m2,exitance_lm_m2,incident_lux\n";
    for (const auto& r : map) {
      os << r.patch_id;
      for (double v : {r.center.x(), r.center.y(), r.center.z(), r.normal.x(), r.normal.y(), r.normal.z(), r.area,
                       r.exitance, r.incident}) {
        os << ',' << format_exact(v);
      }
      os << '\n';
    }
    return os.str();
  }

  std::vector<const Patch*> patches;
  for (const auto& r : map) {
    auto it = std::find_if(scene.patches.begin(), scene.patches.end(),
                           [&](const Patch& p) { return p.id == r.patch_id; });
    if (it == scene.patches.end()) throw InvariantError("mesh export: unknown patch " + std::to_string(r.patch_id));
    patches.push_back(&*it);
  }
  os << "ply\nformat ascii 1.0\n";
  os << "comment " << stamp.line("").substr(1) << '\n';
  os << "element vertex " << 4 * map.size() << '\n';
  os << "property double x\nproperty double y\nproperty double z\nproperty double lux\n";
  os << "element face " << map.size() << '\n';
  os << "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < map.size(); ++i) {
    for (const Vec3& c : patches[i]->corners()) {
      os << format_exact(c.x()) << ' ' << format_exact(c.y()) << ' ' << format_exact(c.z()) << ' '
         << format_exact(map[i].incident) << '\n';
    }
  }
  for (std::size_t i = 0; i < map.size(); ++i) {
    os << "4 " << 4 * i << ' ' << 4 * i + 1 << ' ' << 4 * i + 2 << ' ' << 4 * i + 3 << '\n';
  }
  return os.str();
}

std::vector<IlluminationRecord> parse_map_csv(std::string_view text) {
  std::vector<IlluminationRecord> out;
  int line_no = 0;
  std::size_t start = 0;
  bool header_seen = false;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 10) throw ParseError("map csv line " + std::to_string(line_no) + ": expected 10 columns");
    IlluminationRecord r;
    r.patch_id = static_cast<int>(to_double(cells[0], line_no));
    r.center = {to_double(cells[1], line_no), to_double(cells[2], line_no), to_double(cells[3], line_no)};
    r.normal = {to_double(cells[4], line_no), to_double(cells[5], line_no), to_double(cells[6], line_no)};
    r.area = to_double(cells[7], line_no);
    r.exitance = to_double(cells[8], line_no);
    r.incident = to_double(cells[9], line_no);
    out.push_back(r);
  }
  return out;
}

std::string sensor_table_csv(const Scene& scene, const ScenarioResult& result,
                             const std::map<int, double>& ground_truth, const ArtifactStamp& stamp) {
  std::ostringstream os;
  os << stamp.line("#") << '\n';
  os << "sensor_id,role,estimate_lux,ground_truth_lux,epsilon_est\n";
  for (const auto& s : scene.sensors) {
    os << s.id << ',' << (s.role == SensorRole::spatial ? "spatial" : "gaze") << ','
       << format_fixed(result.sensor_lux.at(s.id), 3) << ',';
    if (auto it = ground_truth.find(s.id); it != ground_truth.end()) {
      os << format_fixed(it->second, 3) << ',' << format_fixed(result.epsilon_est.at(s.id), 3);
    } else {
      os << ',';
    }
    os << '\n';
  }
  return os.str();
}

std::string sensor_table_text(const Scene& scene, const ScenarioResult& result, const ArtifactStamp& stamp) {
  constexpr std::size_t w = 8;
  std::ostringstream head, est, err;
  head << pad("luxmeter", 12);
  est << pad("estimate", 12);
  err << pad("eps_est", 12);
  double sum = 0.0;
  int n = 0;
  for (const auto& s : scene.sensors) {
    head << ' ' << pad(std::to_string(s.id), w);
    est << ' ' << pad(format_fixed(result.sensor_lux.at(s.id), 1), w);
    if (auto it = result.epsilon_est.find(s.id); it != result.epsilon_est.end()) {
      err << ' ' << pad(format_fixed(it->second, 1), w);
      sum += it->second;
      ++n;
    } else {
      err << ' ' << pad("-", w);
    }
  }
  head << ' ' << pad("avg", w);
  est << ' ' << pad("", w);
  err << ' ' << pad(n > 0 ? format_fixed(sum / n, 1) : "-", w);
  return stamp.line("#") + "\n" + head.str() + "\n" + est.str() + "\n" + err.str() + "\n";
}

std::string scenario_table_csv(const Scene& scene, const std::vector<NamedScenario>& rows,
                               const ArtifactStamp& stamp) {
  std::ostringstream os;
  os << stamp.line("#") << '\n';
  os << "scenario,dims";
  for (const auto& o : scene.occupants) os << ",delta_lux_occupant_" << o.id;
  os << ",epsilon_est_gaze,delta_watt,energy_day_wh\n";
  for (const auto& row : rows) {
    os << row.name << ',' << dims_to_string(row.result.dims);
    for (const auto& o : scene.occupants) os << ',' << format_fixed(row.result.delta_lux.at(o.id), 3);
    bool any = false;
    const double eps = mean_gaze_error(scene, row.result, any);
    os << ',' << (any ? format_fixed(eps, 3) : "") << ',' << format_fixed(row.result.delta_watt, 1) << ','
       << format_fixed(row.result.energy.ils_wh, 1) << '\n';
  }
  return os.str();
}

std::string scenario_table_text(const Scene& scene, const std::vector<NamedScenario>& rows,
                                const ArtifactStamp& stamp) {
  std::ostringstream os;
  os << stamp.line("#") << '\n';
  const std::size_t name_w = 12, dims_w = std::max<std::size_t>(6, scene.luminaires.size() * 2), w = 10;
  os << pad("scenario", name_w) << ' ' << pad("dims", dims_w);
  for (const auto& o : scene.occupants) os << ' ' << pad("dlux_" + std::to_string(o.id), w);
  os << ' ' << pad("eps_est", w) << ' ' << pad("dwatt", w) << '\n';
  for (const auto& row : rows) {
    os << pad(row.name, name_w) << ' ' << pad(dims_to_string(row.result.dims), dims_w);
    for (const auto& o : scene.occupants) os << ' ' << pad(format_fixed(row.result.delta_lux.at(o.id), 1), w);
    bool any = false;
    const double eps = mean_gaze_error(scene, row.result, any);
    os << ' ' << pad(any ? format_fixed(eps, 1) : "-", w) << ' ' << pad(format_fixed(row.result.delta_watt, 1), w)
       << '\n';
  }
  return os.str();
}

std::string dims_to_string(std::span<const double> dims) {
  const bool binary = std::all_of(dims.begin(), dims.end(), [](double d) { return d == 0.0 || d == 1.0; });
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (binary) {
      out += dims[i] == 1.0 ? '1' : '0';
    } else {
      if (i > 0) out += ' ';
      out += format_fixed(dims[i], 4);
    }
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ParseError("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ils
