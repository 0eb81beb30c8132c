// Copyright 2026 The pivot-adapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "pivot/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pivot/errors.h"

namespace pivot {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void Add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void Finish() {
    if (!(lo <= hi)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

struct Frame {
  Range x, y;
  double Px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double Py(double v) const { return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom); }
};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string Tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Open(const std::string& title, const std::string& xl, const std::string& yl,
                 const Frame& f) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(kWidth) +
                  "\" height=\"" + Num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + Num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       Escape(title) + "</text>\n";
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  s += "<g class=\"axes\" stroke=\"black\">\n";
  s += "<line x1=\"" + Num(x0) + "\" y1=\"" + Num(y0) + "\" x2=\"" + Num(x1) + "\" y2=\"" + Num(y0) + "\"/>\n";
  s += "<line x1=\"" + Num(x0) + "\" y1=\"" + Num(y0) + "\" x2=\"" + Num(x0) + "\" y2=\"" + Num(y1) + "\"/>\n";
  s += "</g>\n";
  s += "<text x=\"" + Num(x0) + "\" y=\"" + Num(y0 + 16) + "\" text-anchor=\"middle\">" + Tick(f.x.lo) + "</text>\n";
  s += "<text x=\"" + Num(x1) + "\" y=\"" + Num(y0 + 16) + "\" text-anchor=\"middle\">" + Tick(f.x.hi) + "</text>\n";
  s += "<text x=\"" + Num(x0 - 6) + "\" y=\"" + Num(y0) + "\" text-anchor=\"end\">" + Tick(f.y.lo) + "</text>\n";
  s += "<text x=\"" + Num(x0 - 6) + "\" y=\"" + Num(y1 + 4) + "\" text-anchor=\"end\">" + Tick(f.y.hi) + "</text>\n";
  s += "<text x=\"" + Num((x0 + x1) / 2) + "\" y=\"" + Num(kHeight - 12) + "\" text-anchor=\"middle\">" +
       Escape(xl) + "</text>\n";
  s += "<text x=\"16\" y=\"" + Num((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       Num((y0 + y1) / 2) + ")\">" + Escape(yl) + "</text>\n";
  return s;
}

std::string Legend(int i, const std::string& name, const char* color) {
  const double y = kTop + 10 + 18 * i, x = kWidth - kRight + 12;
  return "<rect x=\"" + Num(x) + "\" y=\"" + Num(y - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
         color + "\"/>\n<text x=\"" + Num(x + 15) + "\" y=\"" + Num(y) + "\">" + Escape(name) +
         "</text>\n";
}

std::string Polyline(const Frame& f, const std::vector<double>& x, const std::vector<double>& y,
                     const char* color, double width, double opacity = 1.0) {
  std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"" +
                  Num(width) + "\" stroke-opacity=\"" + Num(opacity) + "\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ' ';
    s += Num(f.Px(x[i])) + "," + Num(f.Py(y[i]));
  }
  return s + "\"/>\n";
}

}  // namespace

const char* PlotColor(int i) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return kPalette[((i % 8) + 8) % 8];
}

std::string RenderLinePlot(const LinePlot& plot) {
  Frame f;
  for (const Series& s : plot.series) {
    if (s.x.size() != s.y.size()) throw InvalidInput("series '" + s.name + "': x and y lengths differ");
    for (double v : s.x) f.x.Add(v);
    for (double v : s.y) f.y.Add(v);
  }
  f.x.Finish();
  f.y.Finish();
  std::string svg = Open(plot.title, plot.x_label, plot.y_label, f);
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const Series& s = plot.series[i];
    const char* color = PlotColor(static_cast<int>(i));
    if (s.x.size() >= 2) {
      svg += Polyline(f, s.x, s.y, color, 1.8);
    } else if (s.x.size() == 1) {
      svg += "<circle cx=\"" + Num(f.Px(s.x[0])) + "\" cy=\"" + Num(f.Py(s.y[0])) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    svg += Legend(static_cast<int>(i), s.name, color);
  }
  return svg + "</svg>\n";
}

std::string RenderScatter(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<ScatterPoint>& points,
                          const std::vector<std::string>& group_names) {
  Frame f;
  for (const ScatterPoint& p : points) {
    f.x.Add(p.x);
    f.y.Add(p.y);
  }
  f.x.Finish();
  f.y.Finish();
  std::string svg = Open(title, x_label, y_label, f);
  for (const ScatterPoint& p : points) {
    svg += "<circle cx=\"" + Num(f.Px(p.x)) + "\" cy=\"" + Num(f.Py(p.y)) + "\" r=\"3\" fill=\"" +
           PlotColor(p.group) + "\" fill-opacity=\"0.7\"/>\n";
  }
  for (std::size_t g = 0; g < group_names.size(); ++g) {
    svg += Legend(static_cast<int>(g), group_names[g], PlotColor(static_cast<int>(g)));
  }
  return svg + "</svg>\n";
}

std::string RenderTraces(const std::string& title, const std::vector<std::vector<Vec2>>& raw,
                         const std::vector<std::vector<Vec2>>& projected) {
  Frame f;
  for (const auto* set : {&raw, &projected}) {
    for (const auto& tr : *set) {
      for (const Vec2& p : tr) {
        f.x.Add(p.x());
        f.y.Add(p.y());
      }
    }
  }
  f.x.Finish();
  f.y.Finish();
  std::string svg = Open(title, "object x (m)", "object z (m)", f);
  auto draw = [&](const std::vector<std::vector<Vec2>>& set, const char* color, double opacity) {
    for (const auto& tr : set) {
      std::vector<double> x, y;
      for (const Vec2& p : tr) {
        x.push_back(p.x());
        y.push_back(p.y());
      }
      if (x.size() >= 2) svg += Polyline(f, x, y, color, 1.0, opacity);
    }
  };
  draw(raw, "#999999", 0.6);
  draw(projected, PlotColor(0), 0.8);
  svg += Legend(0, "raw", "#999999");
  svg += Legend(1, "projected", PlotColor(0));
  return svg + "</svg>\n";
}

}  // namespace pivot
