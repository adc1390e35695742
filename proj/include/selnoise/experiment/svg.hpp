#pragma once

// Dependency-free SVG emitters. All coordinates go through format_fixed, so
// identical inputs give identical bytes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "selnoise/core/error.hpp"
#include "selnoise/core/numfmt.hpp"
#include "selnoise/eval.hpp"

namespace selnoise::svg {

inline constexpr const char* kColorS0 = "#1f77b4";
inline constexpr const char* kColorS1 = "#d62728";

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace detail {

inline std::string num(double v) { return format_fixed(v, 2); }

struct Axis {
  double lo, hi;    // data range
  double p0, p1;    // pixel range
  double map(double v) const { return p0 + (v - lo) / (hi - lo) * (p1 - p0); }
};

inline std::pair<double, double> padded(double lo, double hi) {
  if (!(hi > lo)) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

inline std::string text(double x, double y, std::string_view body, const char* anchor = "middle", int size = 11) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
         "\" text-anchor=\"" + anchor + "\" font-family=\"sans-serif\">" + escape(body) + "</text>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, const char* stroke, const char* extra = "") {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
         "\" stroke=\"" + stroke + "\"" + extra + "/>\n";
}

inline std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace detail

// Scatter of (y, yhat) with the identity line; color encodes the region bit.
inline std::string parity(const std::vector<ParityRecord>& records, std::string_view title) {
  using namespace detail;
  if (records.empty()) throw ArgumentError("parity plot needs at least one record");
  double lo = records[0].y, hi = records[0].y;
  for (const auto& r : records) {
    lo = std::min({lo, r.y, r.yhat});
    hi = std::max({hi, r.y, r.yhat});
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ArgumentError("parity records must be finite");
  const auto [a, b] = padded(lo, hi);
  const double size = 420, margin = 60;
  const Axis ax{a, b, margin, size - 20}, ay{a, b, size - margin, 20};
  std::string s = header(size, size);
  s += text(size / 2, 14, title);
  s += "<rect x=\"" + num(ax.p0) + "\" y=\"" + num(ay.p1) + "\" width=\"" + num(ax.p1 - ax.p0) + "\" height=\"" +
       num(ay.p0 - ay.p1) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = a + (b - a) * k / 4.0;
    s += line(ax.map(v), ay.p0, ax.map(v), ay.p0 + 5, "black");
    s += text(ax.map(v), ay.p0 + 18, format_fixed(v, 2));
    s += line(ax.p0 - 5, ay.map(v), ax.p0, ay.map(v), "black");
    s += text(ax.p0 - 8, ay.map(v) + 4, format_fixed(v, 2), "end");
  }
  s += text((ax.p0 + ax.p1) / 2, size - 15, "y");
  s += text(15, (ay.p0 + ay.p1) / 2, "y_hat");
  s += line(ax.map(a), ay.map(a), ax.map(b), ay.map(b), "gray", " stroke-dasharray=\"4 3\"");
  for (const auto& r : records)
    s += "<circle cx=\"" + num(ax.map(r.y)) + "\" cy=\"" + num(ay.map(r.yhat)) + "\" r=\"2.5\" fill=\"" +
         (r.s ? kColorS1 : kColorS0) + "\" fill-opacity=\"0.7\"/>\n";
  s += text(ax.p0 + 8, ay.p1 + 14, "s=0", "start");
  s += "<circle cx=\"" + num(ax.p0 + 35) + "\" cy=\"" + num(ay.p1 + 10) + "\" r=\"3\" fill=\"" + kColorS0 + "\"/>\n";
  s += text(ax.p0 + 8, ay.p1 + 28, "s=1", "start");
  s += "<circle cx=\"" + num(ax.p0 + 35) + "\" cy=\"" + num(ay.p1 + 24) + "\" r=\"3\" fill=\"" + kColorS1 + "\"/>\n";
  return s + "</svg>\n";
}

struct BarGroup {
  std::string label;
  std::optional<double> mse_s0;
  std::optional<double> mse_s1;
};

// Grouped bars of mse_s0 / mse_s1, one group per condition.
inline std::string region_bars(const std::vector<BarGroup>& groups, std::string_view title) {
  using namespace detail;
  if (groups.empty()) throw ArgumentError("bar chart needs at least one group");
  double top = 0.0;
  for (const auto& g : groups) {
    if (g.mse_s0) top = std::max(top, *g.mse_s0);
    if (g.mse_s1) top = std::max(top, *g.mse_s1);
  }
  if (!std::isfinite(top)) throw ArgumentError("bar values must be finite");
  if (top <= 0.0) top = 1.0;
  top *= 1.1;
  const double margin = 70, group_w = 70, bar_w = 24, h = 360;
  const double w = margin + group_w * static_cast<double>(groups.size()) + 20;
  const Axis ay{0.0, top, h - 70, 30};
  std::string s = header(w, h);
  s += text(w / 2, 16, title);
  s += line(margin, ay.p0, w - 10, ay.p0, "black");
  s += line(margin, ay.p0, margin, ay.p1, "black");
  for (int k = 0; k <= 4; ++k) {
    const double v = top * k / 4.0;
    s += line(margin - 5, ay.map(v), margin, ay.map(v), "black");
    s += text(margin - 8, ay.map(v) + 4, format_fixed(v, 3), "end");
  }
  s += text(16, (ay.p0 + ay.p1) / 2, "MSE");
  auto bar = [&](double x, std::optional<double> v, const char* color) {
    if (!v) return std::string();
    return "<rect x=\"" + num(x) + "\" y=\"" + num(ay.map(*v)) + "\" width=\"" + num(bar_w) + "\" height=\"" +
           num(ay.p0 - ay.map(*v)) + "\" fill=\"" + color + "\"/>\n";
  };
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double x = margin + group_w * static_cast<double>(i) + (group_w - 2 * bar_w) / 2;
    s += bar(x, groups[i].mse_s0, kColorS0);
    s += bar(x + bar_w, groups[i].mse_s1, kColorS1);
    s += text(x + bar_w, ay.p0 + 16, groups[i].label, "middle", 10);
  }
  s += "<rect x=\"" + num(w - 70) + "\" y=\"30\" width=\"10\" height=\"10\" fill=\"" + kColorS0 + "\"/>\n";
  s += text(w - 55, 39, "s=0", "start");
  s += "<rect x=\"" + num(w - 70) + "\" y=\"46\" width=\"10\" height=\"10\" fill=\"" + kColorS1 + "\"/>\n";
  s += text(w - 55, 55, "s=1", "start");
  return s + "</svg>\n";
}

}  // namespace selnoise::svg
