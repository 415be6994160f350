#include "experiment/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "experiment/runner.hpp"
#include "metrics/ber.hpp"
#include "metrics/complexity.hpp"

namespace ponlab::experiment {

using nlohmann::json;

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Data lines of a CSV whose first non-comment line must equal `columns`.
std::vector<std::vector<std::string>> csv_records(const std::string& text, const char* columns,
                                                  CsvComments* comments) {
  std::istringstream is(text);
  std::string line;
  bool header_seen = false;
  std::vector<std::vector<std::string>> out;
  const std::size_t n_cols = split_csv_line(columns).size();
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (comments) {
        std::istringstream ws(line.substr(1));
        std::string token;
        while (ws >> token) {
          if (token.rfind("config_hash=", 0) == 0) comments->config_hash = token.substr(12);
          if (token.rfind("master_seed=", 0) == 0) comments->master_seed = std::stoull(token.substr(12));
        }
      }
      continue;
    }
    if (!header_seen) {
      require(line == columns, ErrorCode::kInvalidArgument, "unexpected CSV header '" + line + "'");
      header_seen = true;
      continue;
    }
    auto cells = split_csv_line(line);
    require(cells.size() == n_cols, ErrorCode::kInvalidArgument, "malformed CSV row '" + line + "'");
    out.push_back(std::move(cells));
  }
  require(header_seen, ErrorCode::kInvalidArgument, "CSV has no header line");
  return out;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

std::string ber_cell(const PointResult& r) { return r.ok() ? fmt("%.9g", r.report.ber) : ""; }

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};

// Piecewise-linear ramp from dark blue (low BER) to yellow (high BER).
std::string ramp(double t) {
  static const double stops[][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

}  // namespace

std::string header_comment(const std::string& kind, const std::string& config_hash, std::uint64_t master_seed) {
  return "# ponlab " + kind + " config_hash=" + config_hash + " master_seed=" + std::to_string(master_seed) + "\n";
}

std::string format_sweep_row(const PointResult& r) {
  return fmt("%g", r.distance_km) + "," + link::to_string(r.scenario) + "," + to_string(r.equalizer) + "," +
         ber_cell(r) + "," + std::to_string(r.ok() ? r.report.bits_counted : 0) + "," + std::to_string(r.seed) + "," +
         r.status + "\n";
}

std::string format_hypermap_row(const PointResult& r) {
  return std::to_string(r.window) + "," + std::to_string(r.levels) + "," + fmt("%g", r.distance_km) + "," +
         link::to_string(r.scenario) + "," + ber_cell(r) + "," + std::to_string(r.ok() ? r.report.bits_counted : 0) +
         "," + std::to_string(r.seed) + "," + r.status + "\n";
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text, CsvComments* comments) {
  std::vector<SweepRow> rows;
  try {
    for (const auto& c : csv_records(text, kSweepColumns, comments))
      rows.push_back({std::stod(c[0]), c[1], c[2], parse_optional(c[3]), std::stoull(c[4]), std::stoull(c[5]), c[6]});
  } catch (const std::logic_error& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed sweep CSV: ") + e.what());
  }
  return rows;
}

std::vector<HypermapRow> parse_hypermap_csv(const std::string& text, CsvComments* comments) {
  std::vector<HypermapRow> rows;
  try {
    for (const auto& c : csv_records(text, kHypermapColumns, comments))
      rows.push_back({std::stoull(c[0]), std::stoi(c[1]), std::stod(c[2]), c[3], parse_optional(c[4]),
                      std::stoull(c[5]), std::stoull(c[6]), c[7]});
  } catch (const std::logic_error& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed hypermap CSV: ") + e.what());
  }
  return rows;
}

std::string render_sweep_svg(const std::string& csv_text) {
  CsvComments meta;
  const auto rows = parse_sweep_csv(csv_text, &meta);
  constexpr double W = 720, H = 460, left = 80, right = 170, top = 50, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  std::vector<std::string> series;
  std::set<double> distances;
  double min_pos = 1.0;
  std::string scenario;
  for (const auto& r : rows) {
    if (std::find(series.begin(), series.end(), r.equalizer) == series.end()) series.push_back(r.equalizer);
    distances.insert(r.distance_km);
    if (r.ber && *r.ber > 0) min_pos = std::min(min_pos, *r.ber);
    scenario = r.scenario;
  }
  const double y_lo = std::floor(std::log10(std::min(1e-4, min_pos / 2)));
  const double y_hi = 0.0;
  double x_lo = distances.empty() ? 0.0 : *distances.begin();
  double x_hi = distances.empty() ? 1.0 : *distances.rbegin();
  if (x_hi <= x_lo) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }
  auto X = [&](double d) { return left + (d - x_lo) / (x_hi - x_lo) * pw; };
  auto Y = [&](double ber) {
    const double l = ber > 0 ? std::max(std::log10(ber), y_lo) : y_lo;
    return top + (y_hi - l) / (y_hi - y_lo) * ph;
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<!-- config_hash=" << meta.config_hash << " master_seed=" << meta.master_seed << " -->\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">BER vs distance ("
    << xml_escape(scenario) << ")</text>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = y_lo; e <= y_hi + 1e-9; e += 1.0) {
    const double y = Y(std::pow(10.0, e));
    s << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
      << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << static_cast<int>(e)
      << "</text>\n";
  }
  for (double d : distances) {
    s << "<text x=\"" << X(d) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << fmt("%g", d)
      << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">Distance (km)</text>\n";
  s << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << top + ph / 2
    << ")\">BER</text>\n";
  const double fec = Y(1e-2);
  s << "<line x1=\"" << left << "\" y1=\"" << fec << "\" x2=\"" << left + pw << "\" y2=\"" << fec
    << "\" stroke=\"#cc0000\" stroke-dasharray=\"6 4\"/>\n";
  s << "<text x=\"" << left + pw - 4 << "\" y=\"" << fec - 5 << "\" text-anchor=\"end\" fill=\"#cc0000\">FEC 1e-2</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    std::string points;
    std::ostringstream marks;
    for (const auto& r : rows) {
      if (r.equalizer != series[k] || !r.ber) continue;
      const double x = X(r.distance_km), y = Y(*r.ber);
      points += fmt("%.2f", x) + "," + fmt("%.2f", y) + " ";
      // Zero-error points sit on the bottom axis as hollow markers.
      marks << "<circle cx=\"" << fmt("%.2f", x) << "\" cy=\"" << fmt("%.2f", y) << "\" r=\"3.5\" fill=\""
            << (*r.ber > 0 ? color : "white") << "\" stroke=\"" << color << "\"/>\n";
    }
    if (!points.empty()) {
      points.pop_back();
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
    }
    s << marks.str();
    const double ly = top + 10 + 20.0 * static_cast<double>(k);
    s << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">" << xml_escape(series[k]) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::optional<std::size_t> hypermap_argmin(const std::vector<HypermapRow>& rows) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.status != "ok" || !r.ber) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = rows[*best];
    if (std::tie(*r.ber, r.window, r.levels) < std::tie(*b.ber, b.window, b.levels)) best = i;
  }
  return best;
}

std::string render_hypermap_svg(const std::string& csv_text) {
  CsvComments meta;
  const auto rows = parse_hypermap_csv(csv_text, &meta);
  std::vector<std::size_t> windows;
  std::vector<int> levels;
  for (const auto& r : rows) {
    if (std::find(windows.begin(), windows.end(), r.window) == windows.end()) windows.push_back(r.window);
    if (std::find(levels.begin(), levels.end(), r.levels) == levels.end()) levels.push_back(r.levels);
  }
  std::sort(windows.begin(), windows.end());
  std::sort(levels.begin(), levels.end());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : rows)
    if (r.ber && *r.ber > 0) {
      lo = std::min(lo, std::log10(*r.ber));
      hi = std::max(hi, std::log10(*r.ber));
    }
  if (!(hi > lo)) {
    lo = std::isfinite(lo) ? lo - 0.5 : -4.0;
    hi = lo + 1.0;
  }
  const auto best = hypermap_argmin(rows);
  constexpr double cell = 70, left = 90, top = 60;
  const double W = left + cell * static_cast<double>(windows.size()) + 40;
  const double H = top + cell * static_cast<double>(levels.size()) + 70;
  std::string scenario = rows.empty() ? "" : rows.front().scenario;
  double km = rows.empty() ? 0.0 : rows.front().distance_km;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<!-- config_hash=" << meta.config_hash << " master_seed=" << meta.master_seed << " -->\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"26\" text-anchor=\"middle\" font-size=\"14\">FC-SCINet BER, "
    << xml_escape(scenario) << " at " << fmt("%g", km) << " km</text>\n";
  for (std::size_t li = 0; li < levels.size(); ++li)
    s << "<text x=\"" << left - 8 << "\" y=\"" << top + cell * (li + 0.5) + 4 << "\" text-anchor=\"end\">L="
      << levels[li] << "</text>\n";
  for (std::size_t wi = 0; wi < windows.size(); ++wi)
    s << "<text x=\"" << left + cell * (wi + 0.5) << "\" y=\"" << top + cell * levels.size() + 18
      << "\" text-anchor=\"middle\">p=" << windows[wi] << "</text>\n";
  s << "<text x=\"" << left + cell * windows.size() / 2 << "\" y=\"" << H - 14
    << "\" text-anchor=\"middle\">window size</text>\n";

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto wi = static_cast<double>(std::find(windows.begin(), windows.end(), r.window) - windows.begin());
    const auto li = static_cast<double>(std::find(levels.begin(), levels.end(), r.levels) - levels.begin());
    const double x = left + cell * wi, y = top + cell * li;
    std::string fill = "#bbbbbb", label = "x";
    if (r.status == "ok" && r.ber) {
      fill = *r.ber > 0 ? ramp((std::log10(*r.ber) - lo) / (hi - lo)) : ramp(0.0);
      label = fmt("%.2e", *r.ber);
    } else if (r.status != "infeasible") {
      fill = "#777777";
      label = "fail";
    }
    s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << fill
      << "\" stroke=\"white\"/>\n";
    s << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"middle\" fill=\""
      << (r.status == "ok" ? "white" : "black") << "\">" << label << "</text>\n";
    if (best && *best == i)
      s << "<rect x=\"" << x + 2 << "\" y=\"" << y + 2 << "\" width=\"" << cell - 4 << "\" height=\"" << cell - 4
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"3\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

const std::vector<ReferenceRow>& reference_rows() {
  static const std::vector<ReferenceRow> rows = {
      {"dnn", 209700, 0.089912, 0.087272, 18854.55, 18300.94},
      {"fc-scinet", 187520, 0.000071, 0.009414, 13.31, 1765.31},
  };
  return rows;
}

ComplexityReport build_complexity_report(const ExperimentConfig& cfg, const std::vector<std::string>& sweep_csv_texts) {
  // (equalizer, scenario) -> distance -> ber; first occurrence of a point wins.
  std::map<std::pair<std::string, std::string>, std::map<double, std::optional<double>>> results;
  std::vector<std::string> sources;
  for (const auto& text : sweep_csv_texts) {
    CsvComments meta;
    for (const auto& r : parse_sweep_csv(text, &meta)) {
      auto& slot = results[{r.equalizer, r.scenario}];
      if (!slot.count(r.distance_km)) slot[r.distance_km] = r.status == "ok" ? r.ber : std::nullopt;
    }
    sources.push_back(meta.config_hash);
  }

  struct Row {
    std::string equalizer;
    std::string expression;
    json inputs;
    std::optional<std::int64_t> rmps;
    std::string rmps_gap;
  };
  std::vector<Row> rows;
  {
    metrics::ComplexityParams p;
    p.n_e = cfg.complexity.dnn_experiments;
    p.n_s = static_cast<std::int64_t>(cfg.dnn.pre + 1 + cfg.dnn.post);
    p.n_layers.assign(cfg.dnn.hidden.begin(), cfg.dnn.hidden.end());
    rows.push_back({"dnn", "n_e*(n_s*n_c*n_1 + n_1*n_2 + n_2*n_3 + n_3*n_o)", metrics::to_json(p),
                    metrics::rmps_dnn(p), ""});
  }
  {
    metrics::ComplexityParams p;
    p.n_e = cfg.complexity.scinet_experiments;
    p.n_s = static_cast<std::int64_t>(cfg.fc_scinet.window);
    p.n_h = static_cast<std::int64_t>(cfg.fc_scinet.hidden);
    p.levels = cfg.fc_scinet.levels;
    Row row{"fc-scinet", "n_s*[(n_s*n_e + n_s) + sum_{l=1..L} (1800*n_h + n_s/2^l)/2 + 30]", metrics::to_json(p),
            std::nullopt, ""};
    try {
      row.rmps = metrics::rmps_scinet(p);
    } catch (const Error& e) {
      row.rmps_gap = e.what();
    }
    rows.push_back(std::move(row));
  }
  for (std::int64_t taps : {9, 21}) {
    json inputs = {{"n_taps", taps}};
    rows.push_back({"ffe" + std::to_string(taps), "n_taps", inputs, taps, ""});
  }

  const std::vector<std::string> scenarios = {"CD", "Realistic"};
  json out_rows = json::array();
  std::ostringstream table;
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %10s %12s %12s %12s %12s | %10s %10s %10s %10s %10s\n", "equalizer", "rmps",
                "mber_cd", "mber_real", "prb_cd", "prb_real", "ref_rmps", "ref_mb_cd", "ref_mb_re", "ref_prb_cd",
                "ref_prb_re");
  table << line;
  auto cell = [](const std::optional<double>& v, const char* pattern) {
    return v ? fmt(pattern, *v) : std::string("-");
  };

  for (const auto& row : rows) {
    json j = {{"equalizer", row.equalizer}, {"expression", row.expression}, {"inputs", row.inputs}};
    json gaps = json::array();
    j["rmps"] = row.rmps ? json(*row.rmps) : json(nullptr);
    if (!row.rmps_gap.empty()) gaps.push_back("rmps: " + row.rmps_gap);
    std::map<std::string, std::optional<double>> mber, prb;
    for (const auto& sc : scenarios) {
      mber[sc] = std::nullopt;
      auto it = results.find({row.equalizer, sc});
      if (it == results.end()) {
        gaps.push_back("no " + sc + " sweep results");
      } else {
        std::vector<double> bers;
        std::size_t failed = 0;
        for (const auto& [d, b] : it->second) b ? bers.push_back(*b) : void(++failed);
        if (failed) gaps.push_back(std::to_string(failed) + " failed " + sc + " points excluded");
        if (!bers.empty()) mber[sc] = metrics::median_ber(bers);
        else gaps.push_back("no successful " + sc + " points");
      }
      if (mber[sc] && row.rmps) prb[sc] = metrics::prb(static_cast<double>(*row.rmps), *mber[sc]);
      else prb[sc] = std::nullopt;
      j["mber"][sc] = mber[sc] ? json(*mber[sc]) : json(nullptr);
      j["prb"][sc] = prb[sc] ? json(*prb[sc]) : json(nullptr);
    }
    const ReferenceRow* ref = nullptr;
    for (const auto& r : reference_rows())
      if (r.equalizer == row.equalizer) ref = &r;
    if (ref) {
      j["reference"] = {
          {"rmps", ref->rmps},
          {"mber", {{"CD", ref->mber_cd}, {"Realistic", ref->mber_realistic}}},
          {"prb", {{"CD", ref->prb_cd}, {"Realistic", ref->prb_realistic}}},
          {"prb_recomputed",
           {{"CD", metrics::prb(static_cast<double>(ref->rmps), ref->mber_cd)},
            {"Realistic", metrics::prb(static_cast<double>(ref->rmps), ref->mber_realistic)}}},
      };
      if (row.rmps) j["reference"]["rmps_residual"] = *row.rmps - ref->rmps;
    } else {
      j["reference"] = nullptr;
    }
    j["gaps"] = gaps;
    out_rows.push_back(j);

    auto opt = [](bool has, double v) { return has ? std::optional<double>(v) : std::nullopt; };
    std::snprintf(line, sizeof(line), "%-10s %10s %12s %12s %12s %12s | %10s %10s %10s %10s %10s\n",
                  row.equalizer.c_str(), row.rmps ? std::to_string(*row.rmps).c_str() : "-",
                  cell(mber["CD"], "%.6g").c_str(), cell(mber["Realistic"], "%.6g").c_str(),
                  cell(prb["CD"], "%.2f").c_str(), cell(prb["Realistic"], "%.2f").c_str(),
                  ref ? std::to_string(ref->rmps).c_str() : "-", cell(opt(ref, ref ? ref->mber_cd : 0), "%.6g").c_str(),
                  cell(opt(ref, ref ? ref->mber_realistic : 0), "%.6g").c_str(),
                  cell(opt(ref, ref ? ref->prb_cd : 0), "%.2f").c_str(),
                  cell(opt(ref, ref ? ref->prb_realistic : 0), "%.2f").c_str());
    table << line;
  }

  const auto& ref = reference_rows();
  const double ref_reduction =
      metrics::complexity_reduction_percent(static_cast<double>(ref[0].rmps), static_cast<double>(ref[1].rmps));
  json report = {
      {"format", "ponlab-complexity-report"},
      {"config_hash", config_hash_hex(cfg)},
      {"master_seed", cfg.master_seed},
      {"sweep_sources", sources},
      {"rows", out_rows},
      {"reference_reduction_percent", ref_reduction},
  };
  if (rows[0].rmps && rows[1].rmps)
    report["reduction_percent"] = metrics::complexity_reduction_percent(static_cast<double>(*rows[0].rmps),
                                                                        static_cast<double>(*rows[1].rmps));
  else
    report["reduction_percent"] = nullptr;

  json closest = json::array();
  for (const auto& m : metrics::search_scinet_instantiations(ref[1].rmps, 5, 64, 3))
    closest.push_back({{"inputs", metrics::to_json(m.params)}, {"value", m.value}, {"residual", m.residual}});
  json global = json::array();
  for (const auto& m : metrics::search_scinet_instantiations(ref[1].rmps, 5))
    global.push_back({{"inputs", metrics::to_json(m.params)}, {"value", m.value}, {"residual", m.residual}});
  report["reference_scinet_instantiations"] = {{"window64_levels3", closest}, {"any", global}};

  table << fmt("\nreference RMpS reduction: %.3f %%\n", ref_reduction);
  if (!report["reduction_percent"].is_null())
    table << fmt("configured RMpS reduction: %.3f %%\n", report["reduction_percent"].get<double>());
  if (!closest.empty())
    table << "closest n_s=64, L=3 instantiation of " << ref[1].rmps << ": n_h=" << closest[0]["inputs"]["n_h"]
          << " n_e=" << closest[0]["inputs"]["n_e"] << " -> " << closest[0]["value"] << " (residual "
          << closest[0]["residual"] << ")\n";
  return {report, table.str()};
}

}  // namespace ponlab::experiment
