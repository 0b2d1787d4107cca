#pragma once

// Output formats. All numbers go through std::to_chars (shortest round-trip,
// locale independent) and lines end in '\n', so identical inputs give
// byte-identical files on every platform.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lagdesc/descriptors.hpp"
#include "lagdesc/fieldparse.hpp"
#include "lagdesc/fieldscan.hpp"
#include "lagdesc/verify.hpp"

namespace lagdesc::io {

using Json = nlohmann::ordered_json;

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fieldparse::detail::format_number(v);
}

inline Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const DescriptorSpec& s) {
  Json j;
  j["kind"] = std::string(to_string(s.kind));
  if (s.kind == DescriptorKind::MDp) {
    j["p"] = s.p;
    j["N"] = s.N;
  } else {
    j["tau"] = s.tau;
    j["t0"] = s.t0;
    if (s.kind == DescriptorKind::LForward) j["speed"] = s.speed == SpeedNorm::Phase ? "phase" : "configuration";
  }
  return j;
}

inline Json to_json(const Region& r) {
  Json j = Json::array();
  for (const auto& a : r.axes) j.push_back(Json::array({a.lo, a.hi}));
  return j;
}

/// CSV with one comment line carrying `run_config`, then `x,y[,z],value` rows (x fastest).
inline std::string field_to_csv(const ScalarField& f, const Json& run_config) {
  static constexpr std::array<const char*, 3> names = {"x", "y", "z"};
  std::string out = "# " + run_config.dump() + "\n";
  for (std::size_t a = 0; a < f.resolution.size(); ++a) {
    out += names[a];
    out += ',';
  }
  out += "value\n";
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto idx = f.unravel(i);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      out += num(f.coordinate(a, idx[a]));
      out += ',';
    }
    out += num(f.values[i]);
    out += '\n';
  }
  return out;
}

inline Json field_to_json(const ScalarField& f, const Json& run_config) {
  Json j;
  j["run_config"] = run_config;
  j["region"] = to_json(f.region);
  j["resolution"] = f.resolution;
  j["spec"] = to_json(f.spec);
  Json values = Json::array();
  for (double v : f.values) values.push_back(json_number(v));
  j["values"] = std::move(values);
  Json failures = Json::array();
  for (const auto& c : f.failures) failures.push_back({{"index", c.index}, {"error", c.tag}});
  j["failures"] = std::move(failures);
  return j;
}

inline Json contours_to_json(const ContourSet& c, const Json& run_config) {
  Json j;
  j["run_config"] = run_config;
  Json levels = Json::array();
  for (std::size_t l = 0; l < c.levels.size(); ++l) {
    Json lines = Json::array();
    for (const auto& line : c.polylines[l]) {
      Json pts = Json::array();
      for (const auto& p : line) pts.push_back(Json::array({p[0], p[1]}));
      lines.push_back(std::move(pts));
    }
    levels.push_back({{"level", c.levels[l]}, {"polylines", std::move(lines)}});
  }
  j["contours"] = std::move(levels);
  return j;
}

inline constexpr std::array<const char*, 12> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                         "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                         "#bcbd22", "#17becf", "#393b79", "#ad494a"};

namespace detail {

struct Viewport {
  Interval x, y;
  double left = 70, right = 730, top = 40, bottom = 700;  // plot box inside 800x800
  double px(double v) const { return left + (v - x.lo) / (x.hi - x.lo) * (right - left); }
  double py(double v) const { return bottom - (v - y.lo) / (y.hi - y.lo) * (bottom - top); }
};

inline std::string svg_header(const std::string& comment) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
  std::string safe = comment;
  for (std::size_t pos = safe.find("--"); pos != std::string::npos; pos = safe.find("--", pos)) safe.replace(pos, 2, "- -");
  out += "<!-- " + safe + " -->\n";
  out += "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  return out;
}

inline std::string svg_axes(const Viewport& v, const std::string& xlabel, const std::string& ylabel) {
  std::string out;
  out += "<rect x=\"" + num(v.left) + "\" y=\"" + num(v.top) + "\" width=\"" + num(v.right - v.left) +
         "\" height=\"" + num(v.bottom - v.top) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = v.x.lo + (v.x.hi - v.x.lo) * k / 4.0;
    const double fy = v.y.lo + (v.y.hi - v.y.lo) * k / 4.0;
    out += "<text x=\"" + num(v.px(fx)) + "\" y=\"" + num(v.bottom + 18) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + num(fx) + "</text>\n";
    out += "<text x=\"" + num(v.left - 6) + "\" y=\"" + num(v.py(fy) + 4) +
           "\" font-size=\"12\" text-anchor=\"end\">" + num(fy) + "</text>\n";
  }
  out += "<text x=\"400\" y=\"" + num(v.bottom + 40) + "\" font-size=\"14\" text-anchor=\"middle\">" + xlabel +
         "</text>\n";
  out += "<text x=\"20\" y=\"" + num(0.5 * (v.top + v.bottom)) + "\" font-size=\"14\" text-anchor=\"middle\">" +
         ylabel + "</text>\n";
  return out;
}

}  // namespace detail

/// One path per polyline, colored by level index; legend keyed by level value.
inline std::string contours_to_svg(const ContourSet& c, const Region& region, const Json& run_config,
                                   const std::string& xlabel = "x", const std::string& ylabel = "y") {
  detail::Viewport v{region.axes[0], region.axes[1]};
  std::string out = detail::svg_header(run_config.dump());
  out += detail::svg_axes(v, xlabel, ylabel);
  for (std::size_t l = 0; l < c.levels.size(); ++l) {
    const char* color = kPalette[l % kPalette.size()];
    for (const auto& line : c.polylines[l]) {
      if (line.size() < 2) continue;
      out += "<path fill=\"none\" stroke=\"";
      out += color;
      out += "\" stroke-width=\"1\" d=\"";
      for (std::size_t k = 0; k < line.size(); ++k) {
        out += k == 0 ? "M" : " L";
        out += num(v.px(line[k][0])) + " " + num(v.py(line[k][1]));
      }
      out += "\"/>\n";
    }
  }
  // Legend: at most 12 rows, one per palette color.
  const std::size_t rows = std::min<std::size_t>(c.levels.size(), kPalette.size());
  for (std::size_t l = 0; l < rows; ++l) {
    const double y = 60 + 16 * static_cast<double>(l);
    out += "<line x1=\"740\" y1=\"" + num(y) + "\" x2=\"755\" y2=\"" + num(y) + "\" stroke=\"" + kPalette[l] +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"758\" y=\"" + num(y + 4) + "\" font-size=\"9\">" + num(c.levels[l]) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

inline std::string scan_to_csv(const verify::LineScan& s, const Json& run_config) {
  std::string out = "# " + run_config.dump() + "\n";
  out += "# argmin=" + num(s.argmin) + " min=" + num(s.min_value) + "\n";
  out += "s,value\n";
  for (std::size_t k = 0; k < s.params.size(); ++k) out += num(s.params[k]) + "," + num(s.values[k]) + "\n";
  return out;
}

inline Json scan_to_json(const verify::LineScan& s, const Json& run_config) {
  Json j;
  j["run_config"] = run_config;
  j["argmin"] = s.argmin;
  j["min_value"] = json_number(s.min_value);
  j["params"] = s.params;
  Json values = Json::array();
  for (double v : s.values) values.push_back(json_number(v));
  j["values"] = std::move(values);
  return j;
}

inline std::string scan_to_svg(const verify::LineScan& s, const Json& run_config, const std::string& xlabel) {
  double lo = s.min_value, hi = s.min_value;
  for (double v : s.values)
    if (std::isfinite(v)) hi = std::max(hi, v);
  if (!(hi > lo)) hi = lo + 1.0;
  detail::Viewport v{s.geometry.param, {lo, hi}};
  std::string out = detail::svg_header(run_config.dump());
  out += detail::svg_axes(v, xlabel, "value");
  out += "<path fill=\"none\" stroke=\"" + std::string(kPalette[0]) + "\" stroke-width=\"1.5\" d=\"";
  bool first = true;
  for (std::size_t k = 0; k < s.params.size(); ++k) {
    if (!std::isfinite(s.values[k])) {
      first = true;
      continue;
    }
    out += first ? "M" : " L";
    first = false;
    out += num(v.px(s.params[k])) + " " + num(v.py(s.values[k]));
  }
  out += "\"/>\n";
  out += "<line x1=\"" + num(v.px(s.argmin)) + "\" y1=\"" + num(v.top) + "\" x2=\"" + num(v.px(s.argmin)) +
         "\" y2=\"" + num(v.bottom) + "\" stroke=\"" + kPalette[3] + "\" stroke-dasharray=\"4 3\"/>\n";
  out += "</svg>\n";
  return out;
}

inline Json report_to_json(const verify::VerificationReport& r) {
  Json j;
  j["claim"] = r.claim;
  j["description"] = r.description;
  Json measured = Json::object();
  for (const auto& [k, v] : r.measured) measured[k] = json_number(v);
  j["measured"] = std::move(measured);
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["seconds"] = r.seconds;
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

inline Json reports_to_json(const std::vector<verify::VerificationReport>& reports) {
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  return arr;
}

}  // namespace lagdesc::io
