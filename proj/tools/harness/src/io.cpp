#include "rabiflux/harness/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "rabiflux/errors.hpp"

namespace rabiflux::harness {
namespace {

std::string escape_xml(const std::string& s) {
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

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 1, 2 or 5 times a power of ten, near span / target.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0) * mag;
}

const char* const kPalette[] = {"#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555"};

}  // namespace

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt_exact(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void CsvTable::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ',';
    body_ += fmt(values[i]);
  }
  body_ += '\n';
}

std::string CsvTable::str() const {
  std::string out = "# ";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const auto& [k, v] : comments_) out += "# " + k + "=" + v + "\n";
  return out + body_;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw input_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw input_error("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string spectrum_csv(const Spectrum& s) {
  std::string out = "# field_gauss,amplitude\n";
  bool has_direction = false;
  for (const auto& [k, v] : s.metadata) {
    out += "# " + k + "=" + v + "\n";
    has_direction = has_direction || k == "direction";
  }
  if (!has_direction) out += std::string("# direction=") + to_string(s.direction) + "\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out += fmt_exact(s.field[i]) + "," + fmt_exact(s.amplitude[i]) + "\n";
  return out;
}

void write_spectrum(const std::filesystem::path& path, const Spectrum& s) {
  write_text(path, spectrum_csv(s));
}

Spectrum parse_spectrum(const std::string& text) {
  Spectrum s;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::size_t data_row = 0;
  auto parse_num = [](std::string_view f, double& v) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    if (!f.empty() && f.front() == '+') f.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    return ec == std::errc() && ptr == f.data() + f.size() && !f.empty() && std::isfinite(v);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;  // column header
      auto key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t") + 1);
      s.metadata.emplace_back(key, line.substr(eq + 1));
      continue;
    }
    ++data_row;
    const std::string where = "row " + std::to_string(data_row) + " (line " + std::to_string(line_no) + ")";
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw shape_error(where + ": expected 2 columns, got 1: '" + line + "'");
    if (line.find(',', comma + 1) != std::string::npos)
      throw shape_error(where + ": expected 2 columns, got more: '" + line + "'");
    double f = 0.0, a = 0.0;
    if (!parse_num(std::string_view(line).substr(0, comma), f) ||
        !parse_num(std::string_view(line).substr(comma + 1), a))
      throw input_error(where + ": cannot parse '" + line + "'");
    s.field.push_back(f);
    s.amplitude.push_back(a);
  }
  if (s.size() < 2) throw insufficient_data_error("spectrum needs at least 2 rows");

  s.direction = Spectrum::infer_direction(s.field);
  if (const std::string* d = s.meta("direction")) {
    std::string v = *d;
    v.erase(0, v.find_first_not_of(" \t"));
    v.erase(v.find_last_not_of(" \t") + 1);
    const SweepDirection stated = parse_direction(v);
    if (stated != s.direction)
      throw shape_error("metadata direction '" + v + "' contradicts the field column");
  }
  s.validate();
  return s;
}

Spectrum ingest_spectrum(const std::filesystem::path& path) {
  try {
    return parse_spectrum(read_text(path));
  } catch (const shape_error& e) {
    throw shape_error(path.string() + ": " + e.what());
  } catch (const insufficient_data_error& e) {
    throw insufficient_data_error(path.string() + ": " + e.what());
  } catch (const input_error& e) {
    throw input_error(path.string() + ": " + e.what());
  }
}

std::string render_svg(const Plot& plot) {
  constexpr double W = 800, H = 500, left = 90, right = 20, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax - xmin <= 0) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin <= 0) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
  char buf[256];

  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\" font-size=\"12\">\n",
                W, H, W, H);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt_short(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         escape_xml(plot.title) + "</text>\n";

  // Ticks and grid.
  const double xs = nice_step(xmax - xmin, 6), ys = nice_step(ymax - ymin, 6);
  for (double v = std::ceil(xmin / xs) * xs; v <= xmax + 1e-9 * xs; v += xs) {
    const double px = sx(v);
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#e4e4e4\"/>\n",
                  px, top, px, top + ph);
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">", px, top + ph + 18);
    out += buf + escape_xml(fmt_short(std::abs(v) < 1e-12 * xs ? 0.0 : v)) + "</text>\n";
  }
  for (double v = std::ceil(ymin / ys) * ys; v <= ymax + 1e-9 * ys; v += ys) {
    const double py = sy(v);
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#e4e4e4\"/>\n",
                  left, py, left + pw, py);
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">", left - 6, py + 4);
    out += buf + escape_xml(fmt_short(std::abs(v) < 1e-12 * ys ? 0.0 : v)) + "</text>\n";
  }
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n",
                left, top, pw, ph);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">", left + pw / 2, H - 16);
  out += buf + escape_xml(plot.x_label) + "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"18\" y=\"%.2f\" text-anchor=\"middle\" transform=\"rotate(-90 18 %.2f)\">",
                top + ph / 2, top + ph / 2);
  out += buf + escape_xml(plot.y_label) + "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.points) {
      out += std::string("<g fill=\"") + color + "\">\n";
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\"/>\n", sx(s.x[i]), sy(s.y[i]));
        out += buf;
      }
      out += "</g>\n";
    } else {
      out += std::string("<polyline fill=\"none\" stroke=\"") + color + "\" stroke-width=\"1.2\" points=\"";
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(s.x[i]), sy(s.y[i]));
        out += buf;
      }
      out += "\"/>\n";
    }
    if (!s.name.empty()) {
      const double ly = top + 16 + 16 * static_cast<double>(k);
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"14\" height=\"3\" fill=\"%s\"/>"
                    "<text x=\"%.2f\" y=\"%.2f\">",
                    left + pw - 170, ly - 4, color, left + pw - 150, ly);
      out += buf + escape_xml(s.name) + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

void write_svg(const std::filesystem::path& path, const Plot& plot) {
  write_text(path, render_svg(plot));
}

}  // namespace rabiflux::harness
