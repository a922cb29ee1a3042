#include "ssar/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "ssar/error.hpp"

namespace ssar::cli {

using algorithms::MetricRecord;

PlotKind parse_plot_kind(std::string_view name) {
  if (name == "return") return PlotKind::Return;
  if (name == "score") return PlotKind::Score;
  if (name == "q") return PlotKind::Q;
  if (name == "beta") return PlotKind::Beta;
  if (name == "n") return PlotKind::N;
  throw UserError("bad_plot_kind", "plot kind must be return, score, q, beta or n", {{"kind", std::string(name)}});
}

std::string_view plot_kind_name(PlotKind k) {
  switch (k) {
    case PlotKind::Return: return "return";
    case PlotKind::Score: return "score";
    case PlotKind::Q: return "q";
    case PlotKind::Beta: return "beta";
    case PlotKind::N: return "n";
  }
  return "?";
}

namespace {

double field(const MetricRecord& r, PlotKind k) {
  switch (k) {
    case PlotKind::Return: return r.eval_return_mean;
    case PlotKind::Score: return r.normalized_score;
    case PlotKind::Q: return r.q_mean;
    case PlotKind::Beta: return r.beta_mean;
    case PlotKind::N: return r.n;
  }
  return 0.0;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Fixed two-decimal coordinates keep the SVG small and stable.
std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  return out;
}

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame pad(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    const double c = y0, w = std::max(1.0, std::abs(c) * 0.1);
    y0 = c - w;
    y1 = c + w;
  }
  const double m = 0.05 * (y1 - y0);
  return {x0, x1, y0 - m, y1 + m};
}

std::string axes(const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + coord(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
       "</text>\n";
  const double l = kLeft, r = kWidth - kRight, t = kTop, b = kHeight - kBottom;
  for (double y : ticks(f.y0, f.y1)) {
    s += "<line x1=\"" + coord(l) + "\" y1=\"" + coord(f.py(y)) + "\" x2=\"" + coord(r) + "\" y2=\"" + coord(f.py(y)) +
         "\" stroke=\"#e5e5e5\"/>\n";
    s += "<text x=\"" + coord(l - 6) + "\" y=\"" + coord(f.py(y) + 4) + "\" text-anchor=\"end\">" + num(y) + "</text>\n";
  }
  for (double x : ticks(f.x0, f.x1)) {
    s += "<line x1=\"" + coord(f.px(x)) + "\" y1=\"" + coord(b) + "\" x2=\"" + coord(f.px(x)) + "\" y2=\"" +
         coord(b + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + coord(f.px(x)) + "\" y=\"" + coord(b + 18) + "\" text-anchor=\"middle\">" + num(x) +
         "</text>\n";
  }
  s += "<rect x=\"" + coord(l) + "\" y=\"" + coord(t) + "\" width=\"" + coord(r - l) + "\" height=\"" + coord(b - t) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + coord((l + r) / 2) + "\" y=\"" + coord(kHeight - 18) + "\" text-anchor=\"middle\">" +
       escape(xl) + "</text>\n";
  s += "<text transform=\"translate(18 " + coord((t + b) / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape(yl) + "</text>\n";
  return s;
}

}  // namespace

Curve aggregate(const std::string& label, const std::vector<std::vector<MetricRecord>>& runs, PlotKind kind) {
  if (runs.empty()) throw Error("empty_metrics", "no metrics to plot", {{"series", label}});
  // step -> values, in the order the first run lists them
  std::map<std::uint64_t, std::vector<double>> at;
  for (const auto& run : runs) {
    if (run.empty()) throw Error("empty_metrics", "a metrics file has no records", {{"series", label}});
    for (const auto& r : run) at[r.step].push_back(field(r, kind));
  }
  Curve c;
  c.label = label;
  for (const auto& [step, vals] : at) {
    if (vals.size() != runs.size()) continue;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(vals.size()));
    c.x.push_back(static_cast<double>(step));
    c.mean.push_back(mean);
    c.lo.push_back(mean - sd);
    c.hi.push_back(mean + sd);
  }
  if (c.x.empty()) throw Error("empty_metrics", "runs share no evaluation step", {{"series", label}});
  return c;
}

std::string render_curves(const std::vector<Curve>& curves, const std::string& title, const std::string& x_label,
                          const std::string& y_label) {
  if (curves.empty()) throw Error("empty_metrics", "no curves to plot");
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      x0 = std::min(x0, c.x[i]);
      x1 = std::max(x1, c.x[i]);
      y0 = std::min(y0, c.lo[i]);
      y1 = std::max(y1, c.hi[i]);
    }
  const Frame f = pad(x0, x1, y0, y1);
  std::string s = axes(f, title, x_label, y_label);
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string band;
    for (std::size_t i = 0; i < c.x.size(); ++i) band += coord(f.px(c.x[i])) + "," + coord(f.py(c.hi[i])) + " ";
    for (std::size_t i = c.x.size(); i-- > 0;) band += coord(f.px(c.x[i])) + "," + coord(f.py(c.lo[i])) + " ";
    band.pop_back();
    s += std::string("<polygon points=\"") + band + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    std::string line;
    for (std::size_t i = 0; i < c.x.size(); ++i)
      line += (i ? " " : "") + coord(f.px(c.x[i])) + "," + coord(f.py(c.mean[i]));
    s += std::string("<polyline points=\"") + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    const double ly = kTop + 14 + 20 * static_cast<double>(k);
    const double lx = kWidth - kRight + 12;
    s += "<line x1=\"" + coord(lx) + "\" y1=\"" + coord(ly) + "\" x2=\"" + coord(lx + 22) + "\" y2=\"" + coord(ly) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + coord(lx + 28) + "\" y=\"" + coord(ly + 4) + "\">" + escape(c.label) + "</text>\n";
  }
  return s + "</svg>\n";
}

Histogram make_histogram(std::uint64_t step, const std::string& phase, const std::vector<double>& values, double lo,
                         double hi, std::size_t bins) {
  Histogram h{step, phase, lo, hi, std::vector<std::uint64_t>(bins, 0)};
  for (double v : values) {
    const double u = (v - lo) / (hi - lo) * static_cast<double>(bins);
    const auto b = static_cast<std::size_t>(std::clamp(u, 0.0, static_cast<double>(bins) - 1.0));
    ++h.counts[b];
  }
  return h;
}

std::string histogram_json_line(const Histogram& h) {
  nlohmann::ordered_json j;
  j["step"] = h.step;
  j["phase"] = h.phase;
  j["lo"] = h.lo;
  j["hi"] = h.hi;
  j["counts"] = h.counts;
  return j.dump();
}

std::vector<Histogram> read_histograms(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("metrics_not_found", "cannot open histogram file", {{"path", path.string()}});
  std::vector<Histogram> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("step").get<std::uint64_t>(), j.at("phase").get<std::string>(), j.at("lo").get<double>(),
                     j.at("hi").get<double>(), j.at("counts").get<std::vector<std::uint64_t>>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error("bad_metrics", e.what(), {{"path", path.string()}, {"line", std::to_string(line_no)}});
    }
  }
  return out;
}

std::string render_heatmap(const std::vector<Histogram>& hists, const std::string& title) {
  if (hists.empty()) throw Error("empty_metrics", "no histograms to plot");
  const double y0 = hists.front().lo, y1 = hists.front().hi;
  const double x0 = static_cast<double>(hists.front().step), x1 = static_cast<double>(hists.back().step);
  const Frame f{x0, x1 > x0 ? x1 : x0 + 1.0, y0, y1};
  std::string s = axes(f, title, "step", "beta");
  const double plot_w = kWidth - kLeft - kRight;
  const double col_w = plot_w / static_cast<double>(hists.size());
  for (std::size_t k = 0; k < hists.size(); ++k) {
    const auto& h = hists[k];
    std::uint64_t total = 0;
    for (auto c : h.counts) total += c;
    const double bin_h = (kHeight - kTop - kBottom) / static_cast<double>(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      if (h.counts[b] == 0 || total == 0) continue;
      const double frac = static_cast<double>(h.counts[b]) / static_cast<double>(total);
      s += "<rect x=\"" + coord(kLeft + col_w * static_cast<double>(k)) + "\" y=\"" +
           coord(kHeight - kBottom - bin_h * static_cast<double>(b + 1)) + "\" width=\"" + coord(col_w) +
           "\" height=\"" + coord(bin_h) + "\" fill=\"#1f77b4\" fill-opacity=\"" + coord(0.1 + 0.9 * frac) + "\"/>\n";
    }
  }
  return s + "</svg>\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot write file", {{"path", path.string()}});
  out << text;
  if (!out) throw Error("io_error", "write failed", {{"path", path.string()}});
}

}  // namespace ssar::cli
