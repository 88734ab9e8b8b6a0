#include "osp/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <utility>

#include "osp/csv.hpp"
#include "osp/errors.hpp"
#include "osp/evaluation.hpp"

namespace osp {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

void write_svg(const fs::path& file, const std::string& title, const std::string& xlabel,
               const std::string& ylabel, const std::vector<Series>& series,
               const std::vector<std::string>& notes, bool markers) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << sx(fx) << "\" y=\"" << kTop + ph + 16
        << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\">"
        << num(fy) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  out << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" transform=\"rotate(-90 16 "
      << kTop + ph / 2 << ")\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[i].points) out << num(sx(x)) << "," << num(sy(y)) << " ";
    out << "\"/>\n";
    if (markers)
      for (const auto& [x, y] : series[i].points)
        out << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y)) << "\" r=\"3\" fill=\""
            << color << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(i);
    out << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << kLeft + pw + 30 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kLeft + pw + 35 << "\" y=\"" << ly << "\">" << escape(series[i].label)
        << "</text>\n";
  }
  for (std::size_t i = 0; i < notes.size(); ++i)
    out << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 18 + 16 * static_cast<double>(i)
        << "\">" << escape(notes[i]) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace

std::vector<PlotFile> plot_directory(const fs::path& dir) {
  const CsvTable summary = read_csv(dir / "summary.csv");
  for (const char* c : {"cell", "learner", "lambda", "horizon", "seed", "cum_regret", "status"})
    summary.column(c);

  // (lambda, horizon) -> learner -> per-round sums of cumulative regret
  std::map<std::pair<std::string, double>, std::map<std::string, std::pair<std::vector<double>, int>>>
      curves;
  // (learner, lambda) -> horizon -> (sum, count) of final regret
  std::map<std::pair<std::string, std::string>, std::map<double, std::pair<double, int>>> finals;

  for (std::size_t i = 0; i < summary.rows.size(); ++i) {
    if (summary.text(i, "status") != "ok") continue;
    const std::string learner = summary.text(i, "learner"), lambda = summary.text(i, "lambda");
    const double horizon = summary.number(i, "horizon");
    const CsvTable rounds = read_csv(dir / "cells" / summary.text(i, "cell") / "rounds.csv");
    rounds.column("cum_regret");
    auto& [sum, count] = curves[{lambda, horizon}][learner];
    if (sum.size() < rounds.rows.size()) sum.resize(rounds.rows.size(), 0.0);
    for (std::size_t r = 0; r < rounds.rows.size(); ++r) sum[r] += rounds.number(r, "cum_regret");
    ++count;
    auto& f = finals[{learner, lambda}][horizon];
    f.first += summary.number(i, "cum_regret");
    ++f.second;
  }

  std::vector<PlotFile> files;
  fs::create_directories(dir / "plots");
  for (const auto& [key, by_learner] : curves) {
    std::vector<Series> series;
    for (const auto& [learner, acc] : by_learner) {
      Series s{learner + " (" + std::to_string(acc.second) + " seeds)", {}};
      for (std::size_t r = 0; r < acc.first.size(); ++r)
        s.points.emplace_back(static_cast<double>(r + 1), acc.first[r] / acc.second);
      series.push_back(std::move(s));
    }
    char name[128];
    std::snprintf(name, sizeof name, "regret_lam%s_T%.0f.svg", key.first.c_str(), key.second);
    const fs::path file = dir / "plots" / name;
    write_svg(file, "mean cumulative regret, lambda=" + key.first, "t", "R_t", series, {}, false);
    files.push_back({file, "regret", 0.0});
  }

  for (const auto& [key, by_horizon] : finals) {
    if (by_horizon.size() < 4) continue;
    std::vector<std::pair<double, double>> points;
    Series s{"log mean R_T", {}};
    for (const auto& [t, acc] : by_horizon) {
      const double mean = acc.first / acc.second;
      points.emplace_back(t, mean);
      if (mean > 0.0) s.points.emplace_back(std::log(t), std::log(mean));
    }
    const double slope = regret_scaling_fit(points);
    char note[64];
    std::snprintf(note, sizeof note, "slope=%.3f", slope);
    char name[160];
    std::snprintf(name, sizeof name, "scaling_%s_lam%s.svg", key.first.c_str(), key.second.c_str());
    const fs::path file = dir / "plots" / name;
    write_svg(file, key.first + ", lambda=" + key.second, "log T", "log mean R_T", {s}, {note}, true);
    files.push_back({file, "scaling", slope});
  }
  return files;
}

}  // namespace osp
