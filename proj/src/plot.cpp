#include "ifmix/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ifmix {

std::string to_string(PlotKind k) {
  switch (k) {
  case PlotKind::beta_density: return "beta_density";
  case PlotKind::loss_curve: return "loss_curve";
  case PlotKind::sweep_bars: return "sweep_bars";
  }
  return "beta_density";
}

PlotKind parse_plot_kind(const std::string& s) {
  for (auto k : {PlotKind::beta_density, PlotKind::loss_curve, PlotKind::sweep_bars}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown plot kind '" + s + "'");
}

namespace {

constexpr double kWidth = 640, kHeight = 400, kMargin = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string esc(const std::string& s) {
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

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!(lo <= hi)) lo = 0, hi = 1;
    if (hi == lo) hi = lo + 1;
  }
};

// Line chart in the box [x0, x0 + w] x [y0, y0 + h]; one <path> per series,
// broken where values are not finite.
void line_panel(std::ostream& os, const std::vector<Series>& series, double x0, double y0, double w, double h,
                const std::string& title) {
  Range rx, ry;
  for (const auto& s : series) {
    for (double v : s.x) rx.add(v);
    for (double v : s.y) ry.add(v);
  }
  rx.settle();
  ry.settle();
  os << "<g>\n<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  os << "<text x=\"" << x0 + w / 2 << "\" y=\"" << y0 - 8 << "\" text-anchor=\"middle\" font-size=\"12\">" << esc(title)
     << "</text>\n";
  os << "<text x=\"" << x0 << "\" y=\"" << y0 + h + 14 << "\" font-size=\"10\">" << num(rx.lo) << "</text>\n";
  os << "<text x=\"" << x0 + w << "\" y=\"" << y0 + h + 14 << "\" text-anchor=\"end\" font-size=\"10\">" << num(rx.hi)
     << "</text>\n";
  os << "<text x=\"" << x0 - 4 << "\" y=\"" << y0 + h << "\" text-anchor=\"end\" font-size=\"10\">" << num(ry.lo)
     << "</text>\n";
  os << "<text x=\"" << x0 - 4 << "\" y=\"" << y0 + 10 << "\" text-anchor=\"end\" font-size=\"10\">" << num(ry.hi)
     << "</text>\n";
  std::size_t k = 0;
  for (const auto& s : series) {
    std::ostringstream d;
    bool pen = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        pen = false;
        continue;
      }
      const double px = x0 + (s.x[i] - rx.lo) / (rx.hi - rx.lo) * w;
      const double py = y0 + h - (s.y[i] - ry.lo) / (ry.hi - ry.lo) * h;
      d << (pen ? " L" : (d.tellp() > 0 ? " M" : "M")) << num(px) << ' ' << num(py);
      pen = true;
    }
    const char* colour = kPalette[k % std::size(kPalette)];
    os << "<path class=\"series\" data-name=\"" << esc(s.name) << "\" fill=\"none\" stroke=\"" << colour
       << "\" stroke-width=\"1.5\" d=\"" << d.str() << "\"/>\n";
    os << "<text x=\"" << x0 + w - 4 << "\" y=\"" << y0 + 14 + 12 * static_cast<double>(k)
       << "\" text-anchor=\"end\" font-size=\"10\" fill=\"" << colour << "\">" << esc(s.name) << "</text>\n";
    ++k;
  }
  os << "</g>\n";
}

std::string svg_open(double w, double h) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
     << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  return os.str();
}

} // namespace

PlotData beta_density_plot(std::span<const BetaParams> betas, int points) {
  if (betas.empty()) throw std::invalid_argument("beta_density: no Beta parameters given");
  if (points < 2) throw std::invalid_argument("beta_density: need at least two points");
  std::vector<Series> series;
  std::ostringstream csv;
  csv << 'x';
  for (const auto& b : betas) {
    b.validate();
    csv << ',' << b.label();
    series.push_back({b.label(), {}, {}});
  }
  csv << '\n';
  for (int i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(points - 1);
    csv << num(x);
    for (std::size_t k = 0; k < betas.size(); ++k) {
      const double y = beta_pdf(betas[k], x);
      csv << ',' << num(y);
      series[k].x.push_back(x);
      series[k].y.push_back(y);
    }
    csv << '\n';
  }
  std::ostringstream svg;
  svg << svg_open(kWidth, kHeight);
  line_panel(svg, series, kMargin, kMargin, kWidth - 2 * kMargin, kHeight - 2 * kMargin, "Beta densities");
  svg << "</svg>\n";
  return {csv.str(), svg.str()};
}

PlotData loss_curve_plot(std::span<const NamedCurve> curves) {
  if (curves.empty()) throw std::invalid_argument("loss_curve: no metrics given");
  std::size_t rows = 0;
  for (const auto& c : curves) rows = std::max(rows, c.epochs.size());
  std::ostringstream csv;
  csv << "epoch";
  for (const auto& c : curves) csv << ',' << c.name << "_train_loss," << c.name << "_val_acc";
  csv << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    int epoch = static_cast<int>(r);
    for (const auto& c : curves) {
      if (r < c.epochs.size()) {
        epoch = c.epochs[r].epoch;
        break;
      }
    }
    csv << epoch;
    for (const auto& c : curves) {
      if (r < c.epochs.size()) {
        csv << ',' << num(c.epochs[r].train_loss) << ',' << num(c.epochs[r].val_acc);
      } else {
        csv << ",,";
      }
    }
    csv << '\n';
  }
  std::vector<Series> loss, acc;
  for (const auto& c : curves) {
    Series l{c.name + " train_loss", {}, {}}, a{c.name + " val_acc", {}, {}};
    for (const auto& e : c.epochs) {
      l.x.push_back(e.epoch);
      l.y.push_back(e.train_loss);
      a.x.push_back(e.epoch);
      a.y.push_back(e.val_acc);
    }
    loss.push_back(std::move(l));
    acc.push_back(std::move(a));
  }
  const double panel = (2 * kWidth - 3 * kMargin) / 2;
  std::ostringstream svg;
  svg << svg_open(2 * kWidth, kHeight);
  line_panel(svg, loss, kMargin, kMargin, panel, kHeight - 2 * kMargin, "training loss");
  line_panel(svg, acc, 2 * kMargin + panel, kMargin, panel, kHeight - 2 * kMargin, "validation accuracy");
  svg << "</svg>\n";
  return {csv.str(), svg.str()};
}

PlotData sweep_bars_plot(std::span<const SweepRow> rows) {
  if (rows.empty()) throw std::invalid_argument("sweep_bars: no rows given");
  const std::string csv = sweep_to_csv(rows);
  double top = 0.0;
  for (const auto& r : rows) {
    if (std::isfinite(r.mean)) top = std::max(top, r.mean + (std::isfinite(r.std) ? r.std : 0.0));
  }
  if (top <= 0.0) top = 1.0;
  const double w = kWidth - 2 * kMargin, h = kHeight - 2 * kMargin;
  const double slot = w / static_cast<double>(rows.size());
  std::ostringstream svg;
  svg << svg_open(kWidth, kHeight);
  svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  std::vector<std::string> methods;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto it = std::find(methods.begin(), methods.end(), r.method);
    if (it == methods.end()) it = methods.insert(methods.end(), r.method);
    const char* colour = kPalette[static_cast<std::size_t>(it - methods.begin()) % std::size(kPalette)];
    const double mean = std::isfinite(r.mean) ? r.mean : 0.0;
    const double bh = mean / top * h;
    const double x = kMargin + slot * static_cast<double>(i) + slot * 0.15;
    const double y = kMargin + h - bh;
    svg << "<rect class=\"bar\" data-name=\"" << esc(r.dataset + " " + r.method + " " + r.setting) << "\" x=\""
        << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(slot * 0.7) << "\" height=\"" << num(bh)
        << "\" fill=\"" << colour << "\"/>\n";
    if (std::isfinite(r.std) && r.std > 0.0) {
      const double cx = x + slot * 0.35;
      svg << "<line x1=\"" << num(cx) << "\" x2=\"" << num(cx) << "\" y1=\"" << num(y - r.std / top * h) << "\" y2=\""
          << num(y + r.std / top * h) << "\" stroke=\"#000\"/>\n";
    }
    svg << "<text x=\"" << num(x + slot * 0.35) << "\" y=\"" << kMargin + h + 14
        << "\" text-anchor=\"middle\" font-size=\"9\">" << esc(r.method + " " + r.setting) << "</text>\n";
  }
  svg << "</svg>\n";
  return {csv, svg.str()};
}

std::vector<SweepRow> sweep_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("dataset,method,setting,mean,std", 0) != 0) {
    throw std::runtime_error("sweep CSV line 1: expected header dataset,method,setting,mean,std");
  }
  std::vector<SweepRow> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5) throw std::runtime_error("sweep CSV line " + std::to_string(n) + ": expected 5 fields");
    auto parse = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) {
        throw std::runtime_error("sweep CSV line " + std::to_string(n) + ": bad number '" + s + "'");
      }
      return v;
    };
    rows.push_back({f[0], f[1], f[2], parse(f[3]), parse(f[4])});
  }
  return rows;
}

void write_plot(const PlotData& data, const std::filesystem::path& prefix) {
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  for (const auto& [ext, body] : {std::pair<std::string, const std::string*>{".csv", &data.csv}, {".svg", &data.svg}}) {
    std::ofstream out(prefix.string() + ext);
    if (!out) throw std::runtime_error("cannot write " + prefix.string() + ext);
    out << *body;
  }
}

} // namespace ifmix
