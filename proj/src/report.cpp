#include "gramfuzz/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gramfuzz {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::uint64_t to_u64(const std::string& s, const fs::path& f, std::size_t line) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ReportError(f.string() + ":" + std::to_string(line) + ": bad integer '" + s + "'");
  }
}

double to_double(const std::string& s, const fs::path& f, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ReportError(f.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
}

Strategy to_strategy(const std::string& s, const fs::path& f, std::size_t line) {
  auto st = strategy_from_string(s);
  if (!st) throw ReportError(f.string() + ":" + std::to_string(line) + ": unknown strategy '" + s + "'");
  return *st;
}

// Header line plus rows of exactly `cols` fields.
std::vector<std::vector<std::string>> read_table(const fs::path& f, const std::string& header) {
  std::ifstream in(f);
  if (!in) throw ReportError("missing " + f.string());
  std::string line;
  if (!std::getline(in, line)) throw ReportError(f.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ReportError(f.string() + ": unexpected header '" + line + "'");
  const std::size_t cols = split_csv(header).size();
  std::vector<std::vector<std::string>> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto r = split_csv(line);
    if (r.size() != cols)
      throw ReportError(f.string() + ":" + std::to_string(n) + ": expected " +
                        std::to_string(cols) + " fields");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_text(const fs::path& p, const std::string& s, ReportSummary& sum) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw ReportError("cannot write " + p.string());
  f << s;
  sum.written.push_back(p);
}

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

double nice_max(double v) {
  if (v <= 0) return 1;
  double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (m * p >= v) return m * p;
  return 10 * p;
}

}  // namespace

std::vector<StatsRow> read_stats_csv(const fs::path& file) {
  auto table = read_table(file, "cycle,strategy,generated,interesting,parse_ms,mutate_ms,exec_ms");
  std::vector<StatsRow> rows;
  std::size_t line = 1;
  for (const auto& r : table) {
    ++line;
    StatsRow s;
    s.cycle = to_u64(r[0], file, line);
    s.strategy = to_strategy(r[1], file, line);
    s.generated = to_u64(r[2], file, line);
    s.interesting = to_u64(r[3], file, line);
    s.parse_ms = to_double(r[4], file, line);
    s.mutate_ms = to_double(r[5], file, line);
    s.exec_ms = to_double(r[6], file, line);
    if (s.interesting > s.generated)
      throw ReportError(file.string() + ":" + std::to_string(line) + ": interesting exceeds generated");
    rows.push_back(s);
  }
  return rows;
}

std::vector<Admission> read_admissions_csv(const fs::path& file) {
  auto table = read_table(file, "id,exec,strategy,parent,hash,size");
  std::vector<Admission> out;
  std::size_t line = 1;
  for (const auto& r : table) {
    ++line;
    out.push_back({to_u64(r[0], file, line), to_u64(r[1], file, line), to_strategy(r[2], file, line)});
  }
  return out;
}

std::map<Strategy, Series> cumulative_by_cycle(const std::vector<StatsRow>& rows) {
  std::map<Strategy, Series> out;
  std::map<Strategy, double> acc;
  auto sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const StatsRow& a, const StatsRow& b) { return a.cycle < b.cycle; });
  for (const auto& r : sorted) {
    acc[r.strategy] += static_cast<double>(r.interesting);
    out[r.strategy].emplace_back(static_cast<double>(r.cycle), acc[r.strategy]);
  }
  return out;
}

std::map<Strategy, Series> cumulative_by_exec(const std::vector<Admission>& adm) {
  std::map<Strategy, Series> out;
  std::map<Strategy, double> acc;
  for (const auto& a : adm) {
    if (a.strategy == Strategy::seed) continue;
    auto& s = out[a.strategy];
    if (s.empty()) s.emplace_back(0.0, 0.0);
    acc[a.strategy] += 1;
    s.emplace_back(static_cast<double>(a.exec), acc[a.strategy]);
  }
  return out;
}

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<std::pair<std::string, Series>>& series) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const double W = 760, H = 440, L = 70, R = 170, T = 40, B = 55;
  double xmax = 0, ymax = 0;
  for (const auto& [name, s] : series)
    for (auto [x, y] : s) {
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  xmax = nice_max(xmax);
  ymax = nice_max(ymax);
  auto px = [&](double x) { return L + (W - L - R) * x / xmax; };
  auto py = [&](double y) { return H - B - (H - T - B) * y / ymax; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << xml_escape(title) << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double xv = xmax * i / 5, yv = ymax * i / 5;
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
      << fmt(xv) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv)
      << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << py(yv) << "\" x2=\"" << W - R << "\" y2=\"" << py(yv)
      << "\" stroke=\"#e0e0e0\"/>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
    << xml_escape(x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << (T + H - B) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";
  std::size_t k = 0;
  for (const auto& [name, s] : series) {
    const char* color = palette[k % std::size(palette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : s) o << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    o << "\"/>\n";
    double ly = T + 14 * static_cast<double>(k);
    o << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 32 << "\" y2=\""
      << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R + 38 << "\" y=\"" << ly + 4 << "\">" << xml_escape(name)
      << "</text>\n";
    ++k;
  }
  o << "</svg>\n";
  return o.str();
}

ReportSummary write_report(const fs::path& out_dir, const fs::path& report_dir) {
  ReportSummary sum;
  const auto rows = read_stats_csv(out_dir / "stats.csv");
  std::vector<Admission> adm;
  if (fs::exists(out_dir / "admissions.csv")) adm = read_admissions_csv(out_dir / "admissions.csv");

  std::error_code ec;
  fs::create_directories(report_dir, ec);
  if (ec) throw ReportError("cannot create " + report_dir.string() + ": " + ec.message());

  const auto by_cycle = cumulative_by_cycle(rows);
  {
    std::ostringstream s;
    s << "cycle,strategy,cumulative_interesting\n";
    for (const auto& [st, series] : by_cycle)
      for (auto [x, y] : series) s << fmt(x) << ',' << to_string(st) << ',' << fmt(y) << '\n';
    write_text(report_dir / "cumulative.csv", s.str(), sum);
  }
  const auto by_exec = cumulative_by_exec(adm);
  {
    std::ostringstream s;
    s << "exec,strategy,cumulative_interesting\n";
    for (const auto& [st, series] : by_exec)
      for (auto [x, y] : series) s << fmt(x) << ',' << to_string(st) << ',' << fmt(y) << '\n';
    write_text(report_dir / "cumulative_exec.csv", s.str(), sum);
  }
  std::map<Strategy, Series> ratio;
  {
    std::ostringstream s;
    s << "cycle,strategy,generated,interesting,ratio\n";
    for (const auto& r : rows) {
      double q = r.generated ? static_cast<double>(r.interesting) / static_cast<double>(r.generated) : 0.0;
      s << r.cycle << ',' << to_string(r.strategy) << ',' << r.generated << ',' << r.interesting << ','
        << fmt(q) << '\n';
      if (r.generated) ratio[r.strategy].emplace_back(static_cast<double>(r.cycle), q);
    }
    write_text(report_dir / "ratio.csv", s.str(), sum);
  }
  Series dict_enh, dict_naive;
  {
    std::ostringstream s;
    s << "entry,size,enhanced,naive,ratio\n";
    const fs::path df = out_dir / "dictionary.csv";
    if (fs::exists(df)) {
      auto table = read_table(df, "entry,size,tokens,enhanced,naive");
      std::size_t line = 1;
      double ce = 0, cn = 0;
      for (const auto& r : table) {
        ++line;
        auto e = to_u64(r[3], df, line), n = to_u64(r[4], df, line);
        sum.dict_enhanced += e;
        sum.dict_naive += n;
        s << r[0] << ',' << r[1] << ',' << e << ',' << n << ','
          << fmt(n ? static_cast<double>(e) / static_cast<double>(n) : 0.0) << '\n';
        ce += static_cast<double>(e);
        cn += static_cast<double>(n);
        dict_enh.emplace_back(static_cast<double>(line - 1), ce);
        dict_naive.emplace_back(static_cast<double>(line - 1), cn);
      }
    }
    write_text(report_dir / "dictionary.csv", s.str(), sum);
  }
  {
    std::ostringstream s;
    s << "strategy,parse_ms,mutate_ms,exec_ms\n";
    const fs::path tf = out_dir / "timing.csv";
    if (fs::exists(tf)) {
      auto table = read_table(tf, "strategy,applications,generated,interesting,parse_ms,mutate_ms,exec_ms");
      std::size_t line = 1;
      for (const auto& r : table) {
        ++line;
        to_strategy(r[0], tf, line);
        s << r[0] << ',' << fmt(to_double(r[4], tf, line)) << ',' << fmt(to_double(r[5], tf, line))
          << ',' << fmt(to_double(r[6], tf, line)) << '\n';
      }
    } else {
      std::map<Strategy, StatsRow> acc;
      for (const auto& r : rows) {
        auto& a = acc[r.strategy];
        a.parse_ms += r.parse_ms;
        a.mutate_ms += r.mutate_ms;
        a.exec_ms += r.exec_ms;
      }
      for (const auto& [st, a] : acc)
        s << to_string(st) << ',' << fmt(a.parse_ms) << ',' << fmt(a.mutate_ms) << ','
          << fmt(a.exec_ms) << '\n';
    }
    write_text(report_dir / "phases.csv", s.str(), sum);
  }

  if (rows.empty()) return sum;

  auto named = [](const std::map<Strategy, Series>& m) {
    std::vector<std::pair<std::string, Series>> v;
    for (const auto& [st, s] : m)
      if (!s.empty()) v.emplace_back(to_string(st), s);
    return v;
  };
  if (!by_exec.empty())
    write_text(report_dir / "cumulative.svg",
               svg_line_chart("Interesting inputs by strategy", "executions",
                              "cumulative interesting inputs", named(by_exec)),
               sum);
  else
    write_text(report_dir / "cumulative.svg",
               svg_line_chart("Interesting inputs by strategy", "cycle",
                              "cumulative interesting inputs", named(by_cycle)),
               sum);
  if (!ratio.empty())
    write_text(report_dir / "ratio.svg",
               svg_line_chart("Interesting / generated", "cycle", "ratio", named(ratio)), sum);
  if (!dict_enh.empty())
    write_text(report_dir / "dictionary.svg",
               svg_line_chart("Dictionary mutants", "queue entries mutated", "cumulative mutants",
                              {{"enhanced", dict_enh}, {"naive", dict_naive}}),
               sum);
  return sum;
}

}  // namespace gramfuzz
