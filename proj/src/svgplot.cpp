#include "loco/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "loco/model.hpp"

namespace loco {

namespace {

constexpr double kWidth = 760.0;
constexpr double kPanelHeight = 340.0;
constexpr double kMarginL = 64.0;
constexpr double kMarginR = 18.0;
constexpr double kMarginT = 46.0;
constexpr double kMarginB = 46.0;
constexpr std::size_t kMaxPoints = 4000;

const char* const kPalette[] = {"#1f6fb4", "#d95f02", "#2a9d4e",
                                "#b4337a", "#6a51a3", "#666666"};
constexpr int kPaletteSize = 6;

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void take(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void ensure_usable() {
    if (lo > hi) { lo = -1.0; hi = 1.0; }
    if (hi - lo < 1e-12) {
      const double pad = std::max(1.0, std::abs(lo)) * 0.1;
      lo -= pad;
      hi += pad;
    }
  }
  void pad(double frac) {
    const double p = (hi - lo) * frac;
    lo -= p;
    hi += p;
  }
  double span() const { return hi - lo; }
  void expand_to(double target) {
    const double c = 0.5 * (lo + hi);
    lo = c - 0.5 * target;
    hi = c + 0.5 * target;
  }
};

double nice_step(double span) {
  const double raw = span / 4.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {5.0, 2.0, 1.0}) {
    if (m * mag <= raw) return m * mag;
  }
  return mag;
}

// Uniform-stride thinning, always keeping the final point.
std::vector<std::size_t> draw_indices(std::size_t n) {
  std::vector<std::size_t> idx;
  if (n <= kMaxPoints) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  const std::size_t stride = (n + kMaxPoints - 1) / kMaxPoints;
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

void render_panel(std::ofstream& out, const PlotPanel& panel, int index, double top) {
  const double box_x = kMarginL;
  const double box_y = top + kMarginT;
  const double box_w = kWidth - kMarginL - kMarginR;
  const double box_h = kPanelHeight - kMarginT - kMarginB;

  Range rx, ry;
  for (const PlotSeries& s : panel.series) {
    for (double v : s.x) rx.take(v);
    for (double v : s.y) ry.take(v);
  }
  rx.ensure_usable();
  ry.ensure_usable();
  rx.pad(0.04);
  ry.pad(0.04);
  if (panel.equal_aspect) {
    const double upp = std::max(rx.span() / box_w, ry.span() / box_h);
    rx.expand_to(upp * box_w);
    ry.expand_to(upp * box_h);
  }

  auto px = [&](double v) { return box_x + (v - rx.lo) / rx.span() * box_w; };
  auto py = [&](double v) { return box_y + (ry.hi - v) / ry.span() * box_h; };

  // grid and tick labels
  const double sx = nice_step(rx.span());
  const double sy = nice_step(ry.span());
  for (double v = std::ceil(rx.lo / sx) * sx; v <= rx.hi + 1e-9 * sx; v += sx) {
    const double gx = px(v);
    out << "<line x1=\"" << num(gx) << "\" y1=\"" << num(box_y) << "\" x2=\"" << num(gx)
        << "\" y2=\"" << num(box_y + box_h) << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << num(gx) << "\" y=\"" << num(box_y + box_h + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#444\">" << num(v + 0.0)
        << "</text>\n";
  }
  for (double v = std::ceil(ry.lo / sy) * sy; v <= ry.hi + 1e-9 * sy; v += sy) {
    const double gy = py(v);
    out << "<line x1=\"" << num(box_x) << "\" y1=\"" << num(gy) << "\" x2=\""
        << num(box_x + box_w) << "\" y2=\"" << num(gy) << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << num(box_x - 6) << "\" y=\"" << num(gy + 4)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#444\">" << num(v + 0.0)
        << "</text>\n";
  }

  out << "<rect x=\"" << num(box_x) << "\" y=\"" << num(box_y) << "\" width=\"" << num(box_w)
      << "\" height=\"" << num(box_h) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(top + 20)
      << "\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111\">" << panel.title
      << "</text>\n";
  double note_y = top + 36;
  for (const std::string& note : panel.notes) {
    out << "<text x=\"" << num(box_x) << "\" y=\"" << num(note_y)
        << "\" font-size=\"11\" fill=\"#666\">" << note << "</text>\n";
    note_y += 13;
  }
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(box_y + box_h + 34)
      << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111\">" << panel.xlabel
      << "</text>\n";
  out << "<text font-size=\"12\" text-anchor=\"middle\" fill=\"#111\" transform=\"translate("
      << num(16) << " " << num(box_y + box_h / 2) << ") rotate(-90)\">" << panel.ylabel
      << "</text>\n";

  out << "<clipPath id=\"clip" << index << "\"><rect x=\"" << num(box_x) << "\" y=\""
      << num(box_y) << "\" width=\"" << num(box_w) << "\" height=\"" << num(box_h)
      << "\"/></clipPath>\n";
  out << "<g clip-path=\"url(#clip" << index << ")\">\n";

  int slot = 0;
  for (const PlotSeries& s : panel.series) {
    const std::string color = s.color.empty() ? kPalette[slot % kPaletteSize] : s.color;
    ++slot;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    const std::vector<std::size_t> idx = draw_indices(n);

    if (n >= 2 && !s.markers) {
      std::string pts;
      auto flush = [&]() {
        if (pts.empty()) return;
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.3\" points=\"" << pts << "\"/>\n";
        pts.clear();
      };
      for (std::size_t i : idx) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
          flush();
          continue;
        }
        if (!pts.empty()) pts += ' ';
        pts += num(px(s.x[i]));
        pts += ',';
        pts += num(py(s.y[i]));
      }
      flush();
    } else {
      for (std::size_t i : idx) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
            << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
  }
  out << "</g>\n";

  // legend, top right corner of the plot box
  double ly = box_y + 16;
  slot = 0;
  for (const PlotSeries& s : panel.series) {
    const std::string color = s.color.empty() ? kPalette[slot % kPaletteSize] : s.color;
    ++slot;
    if (s.label.empty()) continue;
    const double lx = box_x + box_w - 150;
    out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 22)
        << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly)
        << "\" font-size=\"11\" fill=\"#222\">" << s.label << "</text>\n";
    ly += 15;
  }
}

} // namespace

void render_svg(const std::vector<PlotPanel>& panels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");

  const double height = kPanelHeight * std::max<std::size_t>(panels.size(), 1);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    render_panel(out, panels[i], static_cast<int>(i), kPanelHeight * i);
  }
  out << "</svg>\n";
  if (!out) throw ValidationError("write to '" + path + "' failed");
}

} // namespace loco
