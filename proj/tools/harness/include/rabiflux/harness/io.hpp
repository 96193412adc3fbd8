#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rabiflux/spectrum.hpp"

namespace rabiflux::harness {

// 9 significant digits.
std::string fmt(double v);
// Shortest text that parses back to the same double.
std::string fmt_exact(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void comment(const std::string& key, const std::string& value) { comments_.emplace_back(key, value); }
  void row(const std::vector<double>& values);
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> comments_;
  std::string body_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::string spectrum_csv(const Spectrum& s);
void write_spectrum(const std::filesystem::path& path, const Spectrum& s);
Spectrum parse_spectrum(const std::string& text);
Spectrum ingest_spectrum(const std::filesystem::path& path);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool points = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

std::string render_svg(const Plot& plot);
void write_svg(const std::filesystem::path& path, const Plot& plot);

}  // namespace rabiflux::harness
