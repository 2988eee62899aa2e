#pragma once

// Small self-contained SVG line-plot writer used by the `figures` command.
// Output is deterministic: fixed layout, fixed palette, numbers printed
// with %.6g. Series longer than a few thousand points are thinned with a
// uniform stride before drawing (the data itself is never modified).

#include <string>
#include <vector>

namespace loco {

struct PlotSeries {
  std::string label;      // legend entry, empty = not listed
  std::vector<double> x;
  std::vector<double> y;
  std::string color;      // CSS color, empty = take next palette slot
  bool markers = false;   // draw circles at the points (also implied when size < 2)
};

struct PlotPanel {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<PlotSeries> series;
  std::vector<std::string> notes; // small print under the title
  bool equal_aspect = false;      // same data-units-per-pixel on both axes
};

// Panels are stacked vertically in one SVG document.
void render_svg(const std::vector<PlotPanel>& panels, const std::string& path);

} // namespace loco
