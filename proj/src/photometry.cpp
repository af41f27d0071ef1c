// SPDX-License-Identifier: Apache-2.0
#include "ils/photometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ils {

namespace {

bool strictly_ascending(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a < b); }) ==
         v.end();
}

// Bracketing index/fraction for x on ascending nodes; x must lie in
// [nodes.front(), nodes.back()]. Returns t == 0 exactly on a node.
std::pair<std::size_t, double> bracket(const std::vector<double>& nodes, double x) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  auto hi = static_cast<std::size_t>(it - nodes.begin());
  if (hi == nodes.size()) return {nodes.size() - 1, 0.0};
  const std::size_t lo = hi - 1;
  return {lo, (x - nodes[lo]) / (nodes[hi] - nodes[lo])};
}

double lerp(double a, double b, double t) { return t == 0.0 ? a : (1.0 - t) * a + t * b; }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_csv_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool try_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(out);
}

double number_at(std::string_view cell, const std::string& where) {
  double v = 0.0;
  if (!try_number(cell, v)) {
    throw ParseError(where + ": expected a number, got '" + std::string(cell) + "'");
  }
  return v;
}

// Non-empty, non-comment lines paired with their 1-based line numbers.
std::vector<std::pair<int, std::string_view>> csv_lines(std::string_view text) {
  std::vector<std::pair<int, std::string_view>> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    auto line = trim(text.substr(start, nl - start));
    if (!line.empty() && line.front() != '#') out.emplace_back(line_no, line);
    start = nl + 1;
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

LightDistributionCurve LightDistributionCurve::isotropic(double flux_lm, std::string name) {
  return constant(flux_lm / (4.0 * kPi), std::move(name));
}

LightDistributionCurve LightDistributionCurve::constant(double cd, std::string name) {
  LightDistributionCurve ldc;
  ldc.name = std::move(name);
  ldc.polar_deg = {0.0, 180.0};
  ldc.azimuth_deg = {0.0};
  ldc.candela = {{cd, cd}};
  return ldc;
}

void LightDistributionCurve::validate() const {
  const std::string who = "LDC '" + name + "'";
  if (polar_deg.empty() || azimuth_deg.empty()) throw InvariantError(who + ": empty angle list");
  if (polar_deg.front() != 0.0) throw InvariantError(who + ": polar angles must start at 0");
  if (polar_deg.back() > 180.0) throw InvariantError(who + ": polar angle beyond 180");
  if (!strictly_ascending(polar_deg)) throw InvariantError(who + ": polar angles not strictly ascending");
  if (azimuth_deg.front() < 0.0 || azimuth_deg.back() >= 360.0) {
    throw InvariantError(who + ": azimuth planes must lie in [0, 360)");
  }
  if (!strictly_ascending(azimuth_deg)) {
    throw InvariantError(who + ": azimuth planes not strictly ascending");
  }
  if (candela.size() != azimuth_deg.size()) throw InvariantError(who + ": row count != azimuth planes");
  for (const auto& row : candela) {
    if (row.size() != polar_deg.size()) throw InvariantError(who + ": row length != polar angles");
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvariantError(who + ": negative or non-finite intensity");
    }
  }
}

double eval_ldc_angles(const LightDistributionCurve& ldc, double azimuth_deg, double polar_deg) {
  if (polar_deg > ldc.polar_deg.back() || polar_deg < 0.0) return 0.0;
  const auto [g, tg] = bracket(ldc.polar_deg, polar_deg);
  const std::size_t g_hi = tg == 0.0 ? g : g + 1;

  auto on_plane = [&](std::size_t c) { return lerp(ldc.candela[c][g], ldc.candela[c][g_hi], tg); };

  const auto& planes = ldc.azimuth_deg;
  if (planes.size() == 1) return on_plane(0);

  double c = std::fmod(azimuth_deg, 360.0);
  if (c < 0.0) c += 360.0;
  if (c >= 360.0) c = 0.0;

  auto it = std::upper_bound(planes.begin(), planes.end(), c);
  std::size_t lo = 0, hi = 0;
  double lo_angle = 0.0, hi_angle = 0.0;
  if (it == planes.begin()) {
    lo = planes.size() - 1;
    hi = 0;
    lo_angle = planes.back() - 360.0;
    hi_angle = planes.front();
  } else if (it == planes.end()) {
    lo = planes.size() - 1;
    hi = 0;
    lo_angle = planes.back();
    hi_angle = planes.front() + 360.0;
  } else {
    hi = static_cast<std::size_t>(it - planes.begin());
    lo = hi - 1;
    lo_angle = planes[lo];
    hi_angle = planes[hi];
  }
  const double tc = (c - lo_angle) / (hi_angle - lo_angle);
  return lerp(on_plane(lo), on_plane(hi), tc);
}

double eval_ldc(const LightDistributionCurve& ldc, const Vec3& direction) {
  const double cos_gamma = std::clamp(-direction.z(), -1.0, 1.0);
  const double gamma = rad2deg(std::acos(cos_gamma));
  const double c = rad2deg(std::atan2(direction.y(), direction.x()));
  return eval_ldc_angles(ldc, c, gamma);
}

LuxmeterSensitivityCurve LuxmeterSensitivityCurve::cosine(double step_deg, std::string name) {
  LuxmeterSensitivityCurve lsc;
  lsc.name = std::move(name);
  const int n = static_cast<int>(std::round(90.0 / step_deg));
  for (int i = 0; i <= n; ++i) {
    const double a = std::min(90.0, i * step_deg);
    lsc.angles_deg.push_back(a);
    lsc.weight.push_back(i == 0 ? 1.0 : (a >= 90.0 ? 0.0 : std::cos(deg2rad(a))));
  }
  return lsc;
}

void LuxmeterSensitivityCurve::validate() const {
  const std::string who = "LSC '" + name + "'";
  if (angles_deg.empty() || angles_deg.size() != weight.size()) {
    throw InvariantError(who + ": angle and weight lists must be non-empty and equal length");
  }
  if (angles_deg.front() != 0.0) throw InvariantError(who + ": first angle must be 0");
  if (weight.front() != 1.0) throw InvariantError(who + ": weight at 0 deg must be exactly 1");
  if (angles_deg.back() > 90.0) throw InvariantError(who + ": angle beyond 90");
  if (!strictly_ascending(angles_deg)) throw InvariantError(who + ": angles not strictly ascending");
  for (double w : weight) {
    if (!(w >= 0.0 && w <= 1.0)) throw InvariantError(who + ": weight outside [0, 1]");
  }
}

double eval_lsc(const LuxmeterSensitivityCurve& lsc, double incidence_deg) {
  if (incidence_deg >= 90.0 || incidence_deg > lsc.angles_deg.back() || incidence_deg < 0.0) {
    return 0.0;
  }
  const auto [i, t] = bracket(lsc.angles_deg, incidence_deg);
  return t == 0.0 ? lsc.weight[i] : lerp(lsc.weight[i], lsc.weight[i + 1], t);
}

LightDistributionCurve parse_ldc_csv(std::string_view text, std::string name) {
  const auto lines = csv_lines(text);
  if (lines.size() < 2) throw ParseError("LDC '" + name + "': need a header row and at least one plane");

  LightDistributionCurve ldc;
  ldc.name = std::move(name);
  const auto header = split_csv_row(lines[0].second);
  for (std::size_t k = 1; k < header.size(); ++k) {
    ldc.polar_deg.push_back(
        number_at(header[k], "LDC '" + ldc.name + "' line " + std::to_string(lines[0].first)));
  }
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto [line_no, line] = lines[r];
    const std::string where = "LDC '" + ldc.name + "' line " + std::to_string(line_no);
    const auto cells = split_csv_row(line);
    if (cells.size() != header.size()) throw ParseError(where + ": expected " +
                                                        std::to_string(header.size()) + " cells");
    ldc.azimuth_deg.push_back(number_at(cells[0], where));
    std::vector<double> row;
    for (std::size_t k = 1; k < cells.size(); ++k) row.push_back(number_at(cells[k], where));
    ldc.candela.push_back(std::move(row));
  }
  ldc.validate();
  return ldc;
}

std::string format_ldc_csv(const LightDistributionCurve& ldc) {
  std::ostringstream os;
  os << "C\\gamma";
  for (double g : ldc.polar_deg) os << ',' << fmt_double(g);
  os << '\n';
  for (std::size_t c = 0; c < ldc.azimuth_deg.size(); ++c) {
    os << fmt_double(ldc.azimuth_deg[c]);
    for (double v : ldc.candela[c]) os << ',' << fmt_double(v);
    os << '\n';
  }
  return os.str();
}

LuxmeterSensitivityCurve parse_lsc_csv(std::string_view text, std::string name) {
  LuxmeterSensitivityCurve lsc;
  lsc.name = std::move(name);
  const auto lines = csv_lines(text);
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto [line_no, line] = lines[r];
    const auto cells = split_csv_row(line);
    double probe = 0.0;
    if (r == 0 && !cells.empty() && !try_number(cells[0], probe)) continue;  // header
    const std::string where = "LSC '" + lsc.name + "' line " + std::to_string(line_no);
    if (cells.size() != 2) throw ParseError(where + ": expected angle_deg,weight");
    lsc.angles_deg.push_back(number_at(cells[0], where));
    lsc.weight.push_back(number_at(cells[1], where));
  }
  lsc.validate();
  return lsc;
}

std::string format_lsc_csv(const LuxmeterSensitivityCurve& lsc) {
  std::ostringstream os;
  os << "angle_deg,weight\n";
  for (std::size_t i = 0; i < lsc.angles_deg.size(); ++i) {
    os << fmt_double(lsc.angles_deg[i]) << ',' << fmt_double(lsc.weight[i]) << '\n';
  }
  return os.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ils
