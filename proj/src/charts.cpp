#include "tacticrl/charts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tacticrl {

namespace {

constexpr double kWidth = 560, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
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

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xl,
          const std::string& yl) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << f.py(f.y0) << "\" x2=\"" << kWidth - kRight << "\" y2=\""
     << f.py(f.y0) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << f.py(f.y0) << "\" x2=\"" << kLeft << "\" y2=\"" << kTop
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 4, y = f.y0 + (f.y1 - f.y0) * i / 4;
    os << "<text x=\"" << num(f.px(x)) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
       << num(x) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(f.py(y) + 4) << "\" text-anchor=\"end\">" << num(y)
       << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << escape(xl)
     << "</text>\n";
  os << "<text transform=\"translate(16," << kHeight / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(yl) << "</text>\n";
}

}  // namespace

std::string step_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
  double x1 = 1, y1 = 1;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  const Frame f{0, x1, 0, y1};
  std::ostringstream os;
  axes(os, f, title, x_label, y_label);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % 5];
    std::string d;
    for (std::size_t k = 0; k < series[i].points.size(); ++k) {
      auto [x, y] = series[i].points[k];
      if (k == 0) {
        d += "M" + num(f.px(x)) + " " + num(f.py(y));
      } else {
        d += " H" + num(f.px(x)) + " V" + num(f.py(y));
      }
    }
    os << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 14 + 16 * static_cast<double>(i) << "\" fill=\"" << color
       << "\">" << escape(series[i].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string joint_scatter_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::map<std::pair<std::size_t, std::size_t>, std::size_t>& counts) {
  double hi = 1;
  std::size_t peak = 1;
  for (const auto& [k, c] : counts) {
    hi = std::max({hi, static_cast<double>(k.first), static_cast<double>(k.second)});
    peak = std::max(peak, c);
  }
  const Frame f{0, hi + 1, 0, hi + 1};
  std::ostringstream os;
  axes(os, f, title, x_label, y_label);
  os << "<line x1=\"" << f.px(0) << "\" y1=\"" << f.py(0) << "\" x2=\"" << f.px(hi + 1) << "\" y2=\"" << f.py(hi + 1)
     << "\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n";
  for (const auto& [k, c] : counts) {
    const double r = 3 + 12 * std::sqrt(static_cast<double>(c) / static_cast<double>(peak));
    os << "<circle cx=\"" << num(f.px(static_cast<double>(k.first))) << "\" cy=\""
       << num(f.py(static_cast<double>(k.second))) << "\" r=\"" << num(r)
       << "\" fill=\"#1f77b4\" fill-opacity=\"0.6\"><title>" << k.first << "," << k.second << ": " << c
       << "</title></circle>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace tacticrl
