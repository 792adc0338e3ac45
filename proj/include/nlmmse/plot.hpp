#pragma once

#include <optional>
#include <string>
#include <vector>

namespace nlmmse {

/// Parsed CSV: header plus rows of raw fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column; throws std::invalid_argument when absent.
  std::size_t column(const std::string& name) const;
};

/// RFC 4180 subset (quoted fields, CRLF or LF). Throws ParseError with the
/// byte offset of the bad character, or of the record start for a field
/// count mismatch.
CsvTable parse_csv(const std::string& text);

/// What to draw: `x=<col>;y=<col>[,<col>..];group=<col>[,<col>..]`, or the
/// shortcuts `mse` and `ber`.
struct PlotSpec {
  std::string x = "power_dbw";
  std::vector<std::string> y;
  std::vector<std::string> group;
  bool log_y = true;
  std::string title;
};

PlotSpec parse_plot_spec(const std::string& text);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotResult {
  std::string svg;
  std::vector<PlotSeries> series;
  std::vector<std::string> warnings;
};

/// Groups rows into series; unknown columns throw std::invalid_argument.
PlotResult emit_plot(const std::string& csv_text, const std::string& spec_text);

}  // namespace nlmmse
