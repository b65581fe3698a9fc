#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <utility>

#include "sblfem/errors.hpp"
#include "sblfem/harness.hpp"

namespace sblfem {

namespace {

constexpr double kWidth = 760, kHeight = 500;
constexpr double kLeft = 80, kRight = 250, kTop = 50, kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string eps_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string emit_plot(const std::vector<SweepRow>& rows, const std::string& title) {
  if (rows.empty()) throw ConfigError("no data to plot");

  // Series keyed by (eps1, eps2), points sorted by p.
  std::map<std::pair<double, double>, std::vector<const SweepRow*>> series;
  for (const auto& r : rows) series[{r.eps1, r.eps2}].push_back(&r);
  for (auto& [key, pts] : series)
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->p < b->p; });

  int pmin = rows.front().p, pmax = rows.front().p;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : rows) {
    pmin = std::min(pmin, r.p);
    pmax = std::max(pmax, r.p);
    for (double e : {r.energy_error, r.balanced_error}) {
      if (e > 0.0 && std::isfinite(e)) {
        lo = std::min(lo, std::log10(e));
        hi = std::max(hi, std::log10(e));
      }
    }
  }
  if (!std::isfinite(lo)) throw ConfigError("no positive errors to plot on a log scale");
  double ylo = std::floor(lo), yhi = std::ceil(hi);
  if (yhi <= ylo) yhi = ylo + 1;
  if (pmax == pmin) pmax = pmin + 1;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto X = [&](double p) { return kLeft + pw * (p - pmin) / (pmax - pmin); };
  auto Y = [&](double l) { return kTop + ph * (yhi - l) / (yhi - ylo); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n";
  if (!title.empty())
    os << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"28\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(title) << "</text>\n";

  // Axes, ticks, grid.
  os << "<g stroke=\"black\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(kLeft + pw)
     << "\" y2=\"" << fmt(kTop + ph) << "\"/>\n";
  os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
     << "\" y2=\"" << fmt(kTop + ph) << "\"/>\n";
  for (int p = pmin; p <= pmax; ++p)
    os << "<line x1=\"" << fmt(X(p)) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(X(p))
       << "\" y2=\"" << fmt(kTop + ph + 5) << "\"/>\n";
  for (int k = static_cast<int>(ylo); k <= static_cast<int>(yhi); ++k)
    os << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(Y(k)) << "\" x2=\"" << fmt(kLeft)
       << "\" y2=\"" << fmt(Y(k)) << "\"/>\n";
  os << "</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int p = pmin; p <= pmax; ++p)
    os << "<text x=\"" << fmt(X(p)) << "\" y=\"" << fmt(kTop + ph + 20)
       << "\" text-anchor=\"middle\">" << p << "</text>\n";
  for (int k = static_cast<int>(ylo); k <= static_cast<int>(yhi); ++k)
    os << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(Y(k) + 4)
       << "\" text-anchor=\"end\">1e" << k << "</text>\n";
  os << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 15)
     << "\" text-anchor=\"middle\">polynomial degree p</text>\n";
  os << "<text x=\"20\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << fmt(kTop + ph / 2) << ")\">error (log scale)</text>\n";
  os << "</g>\n";

  // Curves.
  int index = 0;
  for (const auto& [key, pts] : series) {
    const char* color = kPalette[index % (sizeof kPalette / sizeof *kPalette)];
    for (int kind = 0; kind < 2; ++kind) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
         << (kind ? " stroke-dasharray=\"6 4\"" : "") << " class=\""
         << (kind ? "balanced" : "energy") << "\" points=\"";
      bool first = true;
      for (const SweepRow* r : pts) {
        double e = kind ? r->balanced_error : r->energy_error;
        if (!(e > 0.0) || !std::isfinite(e)) continue;
        os << (first ? "" : " ") << fmt(X(r->p)) << ',' << fmt(Y(std::log10(e)));
        first = false;
      }
      os << "\"/>\n";
    }
    ++index;
  }

  // Legend.
  const double lx = kWidth - kRight + 20;
  double ly = kTop + 10;
  os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  index = 0;
  for (const auto& [key, pts] : series) {
    const char* color = kPalette[index % (sizeof kPalette / sizeof *kPalette)];
    os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 30)
       << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fmt(lx + 38) << "\" y=\"" << fmt(ly + 4) << "\">eps1=" << eps_label(key.first)
       << ", eps2=" << eps_label(key.second) << "</text>\n";
    ly += 20;
    ++index;
  }
  ly += 10;
  os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 30) << "\" y2=\""
     << fmt(ly) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  os << "<text x=\"" << fmt(lx + 38) << "\" y=\"" << fmt(ly + 4) << "\">energy norm</text>\n";
  ly += 20;
  os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 30) << "\" y2=\""
     << fmt(ly) << "\" stroke=\"black\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
  os << "<text x=\"" << fmt(lx + 38) << "\" y=\"" << fmt(ly + 4) << "\">balanced norm</text>\n";
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace sblfem
