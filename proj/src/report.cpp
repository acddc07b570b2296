#include "dackrr/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dackrr/errors.hpp"

namespace dackrr {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string rate_csv(const RateResult& result) {
  std::string out = "N,m,lambda,metric,mean,stderr,trials\n";
  for (const auto& r : result.rows) {
    out += std::to_string(r.n) + ',' + std::to_string(r.m) + ',' + format_double(r.lambda) + ',' + r.metric +
           ',' + format_double(r.mean) + ',' + format_double(r.std_error) + ',' + std::to_string(r.trials) + '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("bad number '" + s + "' in rate CSV");
  return v;
}

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("bad integer '" + s + "' in rate CSV");
  return v;
}

}  // namespace

std::vector<RateRow> parse_rate_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "N,m,lambda,metric,mean,stderr,trials")
    throw IoError("rate CSV: unexpected header");
  std::vector<RateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw IoError("rate CSV: expected 7 fields in '" + line + "'");
    RateRow r;
    r.n = parse_size(f[0]);
    r.m = parse_size(f[1]);
    r.lambda = parse_double(f[2]);
    r.metric = f[3];
    r.mean = parse_double(f[4]);
    r.std_error = parse_double(f[5]);
    r.trials = parse_size(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string slopes_csv(const RateResult& result) {
  std::string out = "metric,m_rule,slope,stderr,intercept,points\n";
  for (const auto& f : result.fits)
    out += f.metric + ',' + f.m_label + ',' + format_double(f.fit.slope) + ',' + format_double(f.fit.std_error) +
           ',' + format_double(f.fit.intercept) + ',' + std::to_string(f.fit.points) + '\n';
  return out;
}

std::string rate_svg(const RateResult& result) {
  constexpr double width = 720, height = 480, left = 80, right = 220, top = 30, bottom = 60;
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& r : result.rows) {
    if (!(r.mean > 0.0)) continue;
    x0 = std::min(x0, std::log10(static_cast<double>(r.n)));
    x1 = std::max(x1, std::log10(static_cast<double>(r.n)));
    y0 = std::min(y0, std::log10(r.mean));
    y1 = std::max(y1, std::log10(r.mean));
  }
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!(x0 <= x1)) {
    svg << "<text x=\"20\" y=\"40\">no positive data</text>\n</svg>\n";
    return svg.str();
  }
  if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
  const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.05;
  x0 -= px; x1 += px; y0 -= py; y1 += py;
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double lx) { return left + (lx - x0) / (x1 - x0) * pw; };
  auto sy = [&](double ly) { return top + (y1 - ly) / (y1 - y0) * ph; };

  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">log10 N</text>\n";
  svg << "<text x=\"20\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 20 " << top + ph / 2
      << ")\" text-anchor=\"middle\">log10 mean</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double lx = x0 + (x1 - x0) * t / 4.0, ly = y0 + (y1 - y0) * t / 4.0;
    svg << "<text x=\"" << sx(lx) << "\" y=\"" << top + ph + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
        << format_double(std::round(lx * 100) / 100) << "</text>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << sy(ly) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
        << format_double(std::round(ly * 100) / 100) << "</text>\n";
  }

  // Series keyed by (metric, m) in first-appearance order.
  std::vector<std::pair<std::string, std::size_t>> keys;
  std::map<std::pair<std::string, std::size_t>, std::vector<const RateRow*>> series;
  for (const auto& r : result.rows) {
    auto k = std::make_pair(r.metric, r.m);
    if (!series.count(k)) keys.push_back(k);
    series[k].push_back(&r);
  }

  std::size_t colour = 0;
  double legend_y = top + 10;
  for (const auto& k : keys) {
    const char* c = palette[colour++ % std::size(palette)];
    for (const RateRow* r : series[k]) {
      if (!(r->mean > 0.0)) continue;
      svg << "<circle cx=\"" << sx(std::log10(static_cast<double>(r->n))) << "\" cy=\"" << sy(std::log10(r->mean))
          << "\" r=\"4\" fill=\"" << c << "\"/>\n";
    }
    svg << "<circle cx=\"" << width - right + 15 << "\" cy=\"" << legend_y - 4 << "\" r=\"4\" fill=\"" << c << "\"/>\n";
    svg << "<text x=\"" << width - right + 25 << "\" y=\"" << legend_y << "\" font-size=\"11\">" << k.first
        << " m=" << k.second << "</text>\n";
    legend_y += 16;
  }
  colour = 0;
  for (const auto& f : result.fits) {
    const char* c = palette[colour++ % std::size(palette)];
    const double ln10 = std::log(10.0);
    auto fy = [&](double lx) { return (f.fit.intercept + f.fit.slope * lx * ln10) / ln10; };
    svg << "<line x1=\"" << sx(x0 + px) << "\" y1=\"" << sy(fy(x0 + px)) << "\" x2=\"" << sx(x1 - px) << "\" y2=\""
        << sy(fy(x1 - px)) << "\" stroke=\"" << c << "\" stroke-dasharray=\"5,3\"/>\n";
    svg << "<text x=\"" << width - right + 10 << "\" y=\"" << legend_y << "\" font-size=\"11\" fill=\"" << c
        << "\">slope " << f.metric << " " << f.m_label << ": " << format_double(std::round(f.fit.slope * 1000) / 1000)
        << "</text>\n";
    legend_y += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void emit(const RateResult& result, EmitFormat format, const std::filesystem::path& path) {
  write_text(path, format == EmitFormat::Csv ? rate_csv(result) : rate_svg(result));
}

std::vector<RateRow> read_rate_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rate_csv(buf.str());
}

}  // namespace dackrr
