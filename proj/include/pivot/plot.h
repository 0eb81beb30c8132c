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


// Self-contained SVG plots (no external renderer).

#ifndef PIVOT_PLOT_H_
#define PIVOT_PLOT_H_

#include <string>
#include <vector>

#include "pivot/shapes.h"

namespace pivot {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

struct LinePlot {
  std::string title, x_label, y_label;
  std::vector<Series> series;
};

// One <polyline> per series with two or more points; a single point is a
// <circle>. Throws InvalidInput when x and y lengths differ.
std::string RenderLinePlot(const LinePlot& plot);

struct ScatterPoint {
  double x = 0.0, y = 0.0;
  int group = 0;
};

// One fill color per group; group_names label the legend.
std::string RenderScatter(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<ScatterPoint>& points,
                          const std::vector<std::string>& group_names);

// Raw traces in grey, projected traces in color, on shared axes.
std::string RenderTraces(const std::string& title, const std::vector<std::vector<Vec2>>& raw,
                         const std::vector<std::vector<Vec2>>& projected);

// Fixed palette, indexed modulo its size.
const char* PlotColor(int i);

}  // namespace pivot

#endif  // PIVOT_PLOT_H_
