// Copyright 2026 The PLS Bandits Authors.
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

// Static SVG line charts rendered from curves.csv, with 10/50/90 bands when
// a sweep cell has several replications.

#ifndef PLS_SVG_HPP_
#define PLS_SVG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pls/sim.hpp"

namespace pls {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvRow {
  std::string run_id;
  std::int64_t t = 0;
  double regret = 0.0;
  double c_u_bits = 0.0;  // +inf when the run logged no valid bit counts
  double c_d_bits = 0.0;
  std::string stage;
  int epoch = 0;
};

inline std::vector<CsvRow> parse_curves_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw CsvError("curves.csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "run_id,t,regret,c_u_bits,c_d_bits,stage,epoch") throw CsvError("curves.csv: unexpected header");
  std::vector<CsvRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw CsvError("curves.csv line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      std::size_t used = 0;
      CsvRow r;
      r.run_id = f[0];
      r.t = std::stoll(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument("t");
      r.regret = std::stod(f[2]);
      r.c_u_bits = f[3] == "inf" ? std::numeric_limits<double>::infinity() : std::stod(f[3]);
      r.c_d_bits = f[4] == "inf" ? std::numeric_limits<double>::infinity() : std::stod(f[4]);
      r.stage = f[5];
      r.epoch = std::stoi(f[6]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw CsvError("curves.csv line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

/// Sweep cell of a run id: the id with its trailing "-r<rep>" removed.
inline std::string cell_of(const std::string& id) {
  const auto pos = id.rfind("-r");
  return pos == std::string::npos ? id : id.substr(0, pos);
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;  // empty: no band
  std::vector<double> hi;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline std::string escape_xml(const std::string& s) {
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

}  // namespace detail

inline std::string render_chart(const ChartSpec& spec, const std::vector<Series>& series) {
  constexpr double kW = 720, kH = 480, kLeft = 80, kRight = 200, kTop = 40, kBottom = 60;
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      for (double y : {s.y[i], s.lo.empty() ? s.y[i] : s.lo[i], s.hi.empty() ? s.y[i] : s.hi[i]}) {
        if (!usable(s.x[i], y)) continue;
        y0 = std::min(y0, ty(y));
        y1 = std::max(y1, ty(y));
      }
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return kLeft + (tx(v) - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double v) { return kH - kBottom - (ty(v) - y0) / (y1 - y0) * (kH - kTop - kBottom); };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << detail::escape_xml(spec.title) << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\""
     << kH - kBottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
     << "\" stroke=\"black\"/>\n";
  auto tick_label = [](double v, bool log) { return detail::fmt(log ? std::pow(10.0, v) : v); };
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double sx = kLeft + (kW - kLeft - kRight) * i / 4.0, sy = kH - kBottom - (kH - kTop - kBottom) * i / 4.0;
    os << "<text x=\"" << sx << "\" y=\"" << kH - kBottom + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << tick_label(fx, spec.log_x) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
       << tick_label(fy, spec.log_y) << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 16 << "\" text-anchor=\"middle\" font-size=\"13\">"
     << detail::escape_xml(spec.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << (kTop + kH - kBottom) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
     << "transform=\"rotate(-90 18 " << (kTop + kH - kBottom) / 2 << ")\">" << detail::escape_xml(spec.y_label)
     << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof(kColors) / sizeof(kColors[0]))];
    if (!s.lo.empty()) {
      std::ostringstream pts;
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (usable(s.x[i], s.hi[i])) pts << detail::fmt(px(s.x[i])) << ',' << detail::fmt(py(s.hi[i])) << ' ';
      for (std::size_t i = s.x.size(); i-- > 0;)
        if (usable(s.x[i], s.lo[i])) pts << detail::fmt(px(s.x[i])) << ',' << detail::fmt(py(s.lo[i])) << ' ';
      os << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\""
         << pts.str() << "\"/>\n";
    }
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (usable(s.x[i], s.y[i])) pts << detail::fmt(px(s.x[i])) << ',' << detail::fmt(py(s.y[i])) << ' ';
    os << "<polyline class=\"curve\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
       << pts.str() << "\"/>\n";
    os << "<text x=\"" << kW - kRight + 10 << "\" y=\"" << kTop + 16 * (k + 1) << "\" font-size=\"11\" fill=\""
       << color << "\">" << detail::escape_xml(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace detail {

// Per cell: a raw curve for single runs, else quantiles over the t values
// shared by every run in the cell.
inline std::vector<Series> cell_series(const std::vector<CsvRow>& rows, double CsvRow::*field) {
  std::map<std::string, std::map<std::string, std::vector<const CsvRow*>>> cells;
  for (const auto& r : rows) cells[cell_of(r.run_id)][r.run_id].push_back(&r);
  std::vector<Series> out;
  for (const auto& [cell, runs] : cells) {
    Series s;
    s.label = cell;
    if (runs.size() == 1) {
      for (const CsvRow* r : runs.begin()->second) {
        s.x.push_back(static_cast<double>(r->t));
        s.y.push_back(r->*field);
      }
    } else {
      // Last value per t in each run, restricted to t common to all runs.
      std::map<std::int64_t, std::vector<double>> by_t;
      for (const auto& [id, pts] : runs) {
        std::map<std::int64_t, double> last;
        for (const CsvRow* r : pts) last[r->t] = r->*field;
        for (const auto& [t, v] : last) by_t[t].push_back(v);
      }
      for (const auto& [t, values] : by_t) {
        if (values.size() != runs.size()) continue;
        s.x.push_back(static_cast<double>(t));
        s.y.push_back(quantile(values, 0.5));
        s.lo.push_back(quantile(values, 0.1));
        s.hi.push_back(quantile(values, 0.9));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

struct SvgFile {
  std::string name;
  std::string content;
};

/// Pure function of the CSV text. An empty sweep yields no files.
inline std::vector<SvgFile> plot_curves(const std::string& csv_text) {
  const auto rows = parse_curves_csv(csv_text);
  std::vector<SvgFile> files;
  if (rows.empty()) return files;

  files.push_back({"regret_vs_t.svg", render_chart({"Cumulative regret", "t", "regret", false, false},
                                                   detail::cell_series(rows, &CsvRow::regret))});
  std::vector<CsvRow> with_bits;
  for (const auto& r : rows)
    if (std::isfinite(r.c_u_bits)) with_bits.push_back(r);
  if (!with_bits.empty()) {
    files.push_back({"uplink_bits_vs_log_t.svg", render_chart({"Uplink bits C_u", "t (log)", "bits", true, false},
                                                              detail::cell_series(with_bits, &CsvRow::c_u_bits))});
    files.push_back({"downlink_bits_vs_log_t.svg",
                     render_chart({"Downlink bits per agent C_d", "t (log)", "bits", true, false},
                                  detail::cell_series(with_bits, &CsvRow::c_d_bits))});
  }

  // Final regret against M for cells that differ only in M.
  std::map<std::string, std::map<double, std::vector<double>>> by_group;
  std::map<std::string, double> final_regret;
  std::map<std::string, std::int64_t> final_t;
  for (const auto& r : rows) {
    if (!final_t.count(r.run_id) || r.t >= final_t[r.run_id]) {
      final_t[r.run_id] = r.t;
      final_regret[r.run_id] = r.regret;
    }
  }
  for (const auto& [id, regret] : final_regret) {
    const std::string cell = cell_of(id);
    const auto m_pos = cell.find("-M");
    if (m_pos == std::string::npos) continue;
    const auto m_end = cell.find('-', m_pos + 2);
    const double M = std::stod(cell.substr(m_pos + 2, m_end - m_pos - 2));
    const std::string group = cell.substr(0, m_pos) + (m_end == std::string::npos ? "" : cell.substr(m_end));
    by_group[group][M].push_back(regret);
  }
  std::vector<Series> m_series;
  for (const auto& [group, points] : by_group) {
    if (points.size() < 2) continue;
    Series s;
    s.label = group;
    bool banded = false;
    for (const auto& [M, values] : points) banded = banded || values.size() > 1;
    for (const auto& [M, values] : points) {
      s.x.push_back(M);
      s.y.push_back(quantile(values, 0.5));
      if (banded) {
        s.lo.push_back(quantile(values, 0.1));
        s.hi.push_back(quantile(values, 0.9));
      }
    }
    m_series.push_back(std::move(s));
  }
  if (!m_series.empty()) {
    files.push_back({"regret_vs_M.svg", render_chart({"Final regret against M", "M (log)", "regret (log)", true, true},
                                                     m_series)});
  }
  return files;
}

}  // namespace pls

#endif  // PLS_SVG_HPP_
