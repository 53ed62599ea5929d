// Histogram data (CSV) and a minimal SVG renderer for per-class score and
// DIV% distributions.

#ifndef SEMDIV_PLOT_HPP
#define SEMDIV_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace semdiv {

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

// Values outside [lo, hi] are clamped into the edge bins.
inline Histogram make_histogram(const std::vector<double>& values, std::size_t bins, double lo,
                                double hi) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("bad histogram range");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    auto b = static_cast<long>(std::floor((v - lo) / h.bin_width()));
    b = std::clamp<long>(b, 0, static_cast<long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

// Shared range over all series, padded when degenerate.
inline std::map<std::string, Histogram> make_histograms(
    const std::map<std::string, std::vector<double>>& series, std::size_t bins) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [name, v] : series) {
    for (double x : v) {
      if (!std::isfinite(x)) continue;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi <= lo) lo -= 0.5, hi += 0.5;
  std::map<std::string, Histogram> out;
  for (const auto& [name, v] : series) out.emplace(name, make_histogram(v, bins, lo, hi));
  return out;
}

// CSV rows: plot,series,bin_lo,bin_hi,count
inline void write_histogram_csv(std::ostream& out, const std::string& plot,
                                const std::map<std::string, Histogram>& hs, bool header = true) {
  if (header) out << "plot,series,bin_lo,bin_hi,count\n";
  for (const auto& [name, h] : hs) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      const double a = h.lo + static_cast<double>(i) * h.bin_width();
      out << plot << ',' << name << ',' << a << ',' << a + h.bin_width() << ',' << h.counts[i]
          << '\n';
    }
  }
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace detail

// Overlaid, semi-transparent bars; one color per series.
inline std::string render_histogram_svg(const std::string& title,
                                        const std::map<std::string, Histogram>& hs,
                                        const std::string& x_label) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  const double W = 640, H = 400, ml = 60, mr = 20, mt = 40, mb = 50;
  const double pw = W - ml - mr, ph = H - mt - mb;
  std::size_t ymax = 1;
  for (const auto& [n, h] : hs) {
    for (auto c : h.counts) ymax = std::max(ymax, c);
  }
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << detail::xml_escape(title) << "</text>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
    << mt + ph << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
    << "\" stroke=\"black\"/>\n";
  std::size_t k = 0;
  for (const auto& [name, h] : hs) {
    const char* color = kColors[k % 5];
    const double bw = pw / static_cast<double>(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      const double bh = ph * static_cast<double>(h.counts[i]) / static_cast<double>(ymax);
      s << "<rect x=\"" << detail::fmt(ml + static_cast<double>(i) * bw) << "\" y=\""
        << detail::fmt(mt + ph - bh) << "\" width=\"" << detail::fmt(bw) << "\" height=\""
        << detail::fmt(bh) << "\" fill=\"" << color << "\" fill-opacity=\"0.45\"/>\n";
    }
    s << "<rect x=\"" << ml + pw - 150 << "\" y=\"" << mt + 8 + 18.0 * static_cast<double>(k)
      << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>";
    s << "<text x=\"" << ml + pw - 132 << "\" y=\"" << mt + 18 + 18.0 * static_cast<double>(k)
      << "\">" << detail::xml_escape(name) << "</text>\n";
    ++k;
  }
  if (!hs.empty()) {
    const auto& h = hs.begin()->second;
    s << "<text x=\"" << ml << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
      << detail::fmt(h.lo) << "</text>\n";
    s << "<text x=\"" << ml + pw << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
      << detail::fmt(h.hi) << "</text>\n";
  }
  s << "<text x=\"" << ml - 8 << "\" y=\"" << mt + 4 << "\" text-anchor=\"end\">" << ymax
    << "</text>\n";
  s << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << detail::xml_escape(x_label) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace semdiv

#endif  // SEMDIV_PLOT_HPP
