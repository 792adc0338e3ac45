#include "nlmmse/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nlmmse/errors.hpp"

namespace nlmmse {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> to_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
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

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  constexpr double width = 760.0, height = 500.0;
  constexpr double left = 80.0, right = 200.0, top = 40.0, bottom = 60.0;
  const double pw = width - left - right, ph = height - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      const double y = spec.log_y ? std::log10(s.y[i]) : s.y[i];
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (xmax - xmin <= 0.0) xmin -= 1.0, xmax += 1.0;
  if (spec.log_y) {
    ymin = std::floor(ymin);
    ymax = std::ceil(ymax);
  }
  if (ymax - ymin <= 0.0) ymin -= 1.0, ymax += 1.0;

  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) {
    const double v = spec.log_y ? std::log10(y) : y;
    return top + (1.0 - (v - ymin) / (ymax - ymin)) * ph;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (!spec.title.empty())
    os << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\">" << xml_escape(spec.title)
       << "</text>\n";

  // x ticks: 5 intervals
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double x = px(xv);
    os << "<line x1=\"" << fmt("%.2f", x) << "\" y1=\"" << top + ph << "\" x2=\"" << fmt("%.2f", x) << "\" y2=\""
       << top + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\">"
       << fmt("%g", std::round(xv * 1000.0) / 1000.0) << "</text>\n";
  }
  // y ticks: decades on a log axis, 5 intervals otherwise
  const int ysteps = spec.log_y ? static_cast<int>(ymax - ymin) : 5;
  for (int i = 0; i <= ysteps; ++i) {
    const double yv = ymin + (ymax - ymin) * i / ysteps;
    const double y = top + (1.0 - (yv - ymin) / (ymax - ymin)) * ph;
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << fmt("%.2f", y) << "\" x2=\"" << left << "\" y2=\""
       << fmt("%.2f", y) << "\" stroke=\"black\"/>\n";
    const std::string label = spec.log_y ? "1e" + std::to_string(static_cast<int>(std::lround(yv))) : fmt("%g", yv);
    os << "<text x=\"" << left - 8 << "\" y=\"" << fmt("%.2f", y + 4) << "\" text-anchor=\"end\">" << label
       << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
     << xml_escape(spec.x) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
    const PlotSeries& ser = series[s];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ser.x.size(); ++i)
      os << (i ? " " : "") << fmt("%.2f", px(ser.x[i])) << ',' << fmt("%.2f", py(ser.y[i]));
    os << "\"/>\n";
    for (std::size_t i = 0; i < ser.x.size(); ++i)
      os << "<circle cx=\"" << fmt("%.2f", px(ser.x[i])) << "\" cy=\"" << fmt("%.2f", py(ser.y[i]))
         << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(s) + 10.0;
    os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly + 4 << "\" font-size=\"10\">" << xml_escape(ser.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::invalid_argument("unknown column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> starts;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    starts.push_back(i);
    std::vector<std::string> fields;
    std::string field;
    bool done = false;
    while (!done) {
      if (i < n && text[i] == '"') {
        const std::size_t open = i++;
        for (;;) {
          if (i >= n) throw ParseError("unterminated quoted field", open);
          if (text[i] == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              field += '"';
              i += 2;
            } else {
              ++i;
              break;
            }
          } else {
            field += text[i++];
          }
        }
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          throw ParseError("unexpected character after closing quote", i);
      }
      while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        if (text[i] == '"') throw ParseError("stray quote in unquoted field", i);
        field += text[i++];
      }
      fields.push_back(std::move(field));
      field.clear();
      if (i >= n) {
        done = true;
      } else if (text[i] == ',') {
        ++i;
      } else {
        if (text[i] == '\r') ++i;
        if (i < n && text[i] == '\n') ++i;
        done = true;
      }
    }
    records.push_back(std::move(fields));
  }
  if (records.empty()) throw ParseError("empty CSV", 0);

  CsvTable table;
  table.header = records.front();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0].empty()) continue;  // blank line
    if (records[r].size() != table.header.size()) {
      throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(records[r].size()),
                       starts[r]);
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

PlotSpec parse_plot_spec(const std::string& text) {
  PlotSpec spec;
  const std::vector<std::string> grouping{"receiver_kind", "modulation", "K", "m", "n", "gain_A"};
  if (text == "mse") {
    spec.y = {"mse_analytical", "mse_linear_analytical", "mse_mc"};
    spec.group = grouping;
    spec.title = "bit MSE";
    return spec;
  }
  if (text == "ber") {
    spec.y = {"ber_lmmse", "ber_lmmse_nc", "ber_ml"};
    spec.group = grouping;
    spec.title = "BER";
    return spec;
  }
  spec.group = grouping;
  for (const std::string& part : split(text, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("plot spec item '" + part + "' must be key=value");
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    if (key == "x") spec.x = value;
    else if (key == "y") spec.y = split(value, ',');
    else if (key == "group") spec.group = value.empty() ? std::vector<std::string>{} : split(value, ',');
    else if (key == "scale") spec.log_y = value != "linear";
    else if (key == "title") spec.title = value;
    else throw std::invalid_argument("unknown plot spec key '" + key + "'");
  }
  if (spec.y.empty() || spec.y.front().empty()) throw std::invalid_argument("plot spec needs y=<column>");
  return spec;
}

PlotResult emit_plot(const std::string& csv_text, const std::string& spec_text) {
  const CsvTable table = parse_csv(csv_text);
  const PlotSpec spec = parse_plot_spec(spec_text);
  const std::size_t xcol = table.column(spec.x);
  std::vector<std::size_t> ycols, gcols;
  for (const auto& y : spec.y) ycols.push_back(table.column(y));
  for (const auto& g : spec.group) gcols.push_back(table.column(g));

  PlotResult result;
  const auto err_col = std::find(table.header.begin(), table.header.end(), "error");
  const auto n_col = std::find(table.header.begin(), table.header.end(), "n");

  // Series keyed by group label then y column, in first-seen order.
  std::vector<std::string> order;
  std::map<std::string, PlotSeries> by_key;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (err_col != table.header.end() && !row[static_cast<std::size_t>(err_col - table.header.begin())].empty()) {
      result.warnings.push_back("row " + std::to_string(r + 1) + " carries an error and was skipped");
      continue;
    }
    const auto x = to_number(row[xcol]);
    if (!x) {
      result.warnings.push_back("row " + std::to_string(r + 1) + ": non-numeric x value");
      continue;
    }
    std::string group;
    for (std::size_t g = 0; g < gcols.size(); ++g) {
      if (row[gcols[g]].empty()) continue;
      group += (group.empty() ? "" : " ") + spec.group[g] + "=" + row[gcols[g]];
    }
    const bool unaugmented = n_col != table.header.end() && row[static_cast<std::size_t>(n_col - table.header.begin())].empty();
    for (std::size_t y = 0; y < ycols.size(); ++y) {
      // The linear-part curve duplicates the main curve for conventional receivers.
      if (unaugmented && (spec.y[y] == "mse_linear_analytical" || spec.y[y] == "ber_lmmse_nc")) continue;
      const auto v = to_number(row[ycols[y]]);
      if (!v || (spec.log_y && !(*v > 0.0))) continue;
      const std::string key = group + " | " + spec.y[y];
      auto [it, inserted] = by_key.try_emplace(key);
      if (inserted) {
        order.push_back(key);
        it->second.label = key;
      }
      it->second.x.push_back(*x);
      it->second.y.push_back(*v);
    }
  }
  for (const auto& key : order) result.series.push_back(std::move(by_key[key]));
  result.svg = render_svg(spec, result.series);
  return result;
}

}  // namespace nlmmse
