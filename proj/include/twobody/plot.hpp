#pragma once

// Static SVG line chart: the first table column on x, one polyline for each
// remaining column, shared linear y axis.  Output depends only on the table.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>

#include "twobody/errors.hpp"
#include "twobody/table.hpp"

namespace twobody {

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

inline std::string tick_label(double v) {
  if (std::abs(v) < 1e-300) v = 0.0;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 0.0;
  bool empty = true;
  void add(double v) {
    if (!std::isfinite(v)) return;
    if (empty) {
      lo = hi = v;
      empty = false;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  // Constant data gets a symmetric pad so it renders as a flat line.
  void widen() {
    if (empty) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi == lo) {
      const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace detail

inline std::string render_svg(const OutputTable& table) {
  if (table.rows.size() < 2) throw DomainError("a plot needs at least two rows");
  if (table.columns.size() < 2) throw DomainError("a plot needs a dependent column");

  constexpr double width = 760, height = 480;
  constexpr double left = 80, right = 170, top = 30, bottom = 60;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  static constexpr std::array<const char*, 8> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                      "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

  detail::Range xr, yr;
  for (const auto& row : table.rows) {
    xr.add(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) yr.add(row[c]);
  }
  xr.widen();
  yr.widen();
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) { return top + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fixed2(width) + "\" height=\"" +
         detail::fixed2(height) + "\" viewBox=\"0 0 " + detail::fixed2(width) + " " + detail::fixed2(height) +
         "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + detail::fixed2(left) + "\" y1=\"" + detail::fixed2(top + plot_h) + "\" x2=\"" +
         detail::fixed2(left + plot_w) + "\" y2=\"" + detail::fixed2(top + plot_h) + "\"/>\n";
  svg += "<line x1=\"" + detail::fixed2(left) + "\" y1=\"" + detail::fixed2(top) + "\" x2=\"" +
         detail::fixed2(left) + "\" y2=\"" + detail::fixed2(top + plot_h) + "\"/>\n";
  svg += "</g>\n";

  constexpr int ticks = 5;
  svg += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  for (int i = 0; i <= ticks; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / ticks;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / ticks;
    const double x = px(xv), y = py(yv);
    svg += "<line x1=\"" + detail::fixed2(x) + "\" y1=\"" + detail::fixed2(top + plot_h) + "\" x2=\"" +
           detail::fixed2(x) + "\" y2=\"" + detail::fixed2(top + plot_h + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::fixed2(x) + "\" y=\"" + detail::fixed2(top + plot_h + 18) +
           "\" text-anchor=\"middle\">" + detail::tick_label(xv) + "</text>\n";
    svg += "<line x1=\"" + detail::fixed2(left - 5) + "\" y1=\"" + detail::fixed2(y) + "\" x2=\"" +
           detail::fixed2(left) + "\" y2=\"" + detail::fixed2(y) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::fixed2(left - 8) + "\" y=\"" + detail::fixed2(y + 4) +
           "\" text-anchor=\"end\">" + detail::tick_label(yv) + "</text>\n";
  }
  svg += "<text x=\"" + detail::fixed2(left + plot_w / 2) + "\" y=\"" + detail::fixed2(height - 15) +
         "\" text-anchor=\"middle\">" + detail::xml_escape(table.columns[0]) + "</text>\n";
  svg += "</g>\n";

  for (std::size_t c = 1; c < table.columns.size(); ++c) {
    const char* color = palette[(c - 1) % palette.size()];
    std::string points;
    for (const auto& row : table.rows) {
      if (c >= row.size() || !std::isfinite(row[0]) || !std::isfinite(row[c])) continue;
      if (!points.empty()) points += ' ';
      points += detail::fixed2(px(row[0])) + "," + detail::fixed2(py(row[c]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + points +
           "\"/>\n";
    const double ly = top + 10 + 18 * static_cast<double>(c - 1);
    svg += "<line x1=\"" + detail::fixed2(left + plot_w + 15) + "\" y1=\"" + detail::fixed2(ly) + "\" x2=\"" +
           detail::fixed2(left + plot_w + 40) + "\" y2=\"" + detail::fixed2(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + detail::fixed2(left + plot_w + 46) + "\" y=\"" + detail::fixed2(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + detail::xml_escape(table.columns[c]) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void render_plot(const OutputTable& table, const std::string& path) {
  write_text_atomically(render_svg(table), path);
}

}  // namespace twobody
