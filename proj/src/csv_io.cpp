#include "locfuse/csv_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "locfuse/error.hpp"
#include "src/ini.hpp"

namespace locfuse {

namespace {

using ini::fmt9;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_cell(const std::string& cell, int line_no, const std::string& what) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &consumed);
  } catch (const std::exception&) {
    throw Error("csv-parse",
                "line " + std::to_string(line_no) + ": non-numeric " + what + " '" + cell + "'");
  }
  if (consumed != cell.size()) {
    throw Error("csv-parse",
                "line " + std::to_string(line_no) + ": non-numeric " + what + " '" + cell + "'");
  }
  return v;
}

}  // namespace

std::string write_dataset_csv(const Dataset& dataset) {
  std::string out = "# locfuse-dataset v1\n";
  for (const AccessPoint& ap : dataset.roster) {
    out += "# ap " + ap.ap_id + " " + to_string(ap.tech) + " " + fmt9(ap.position.x) + " " +
           fmt9(ap.position.y) + " " + fmt9(ap.position.z) + " " + fmt9(ap.tx_power_dbm) + "\n";
  }
  for (const Zone& z : dataset.zones) {
    out += "# zone " + z.zone_id + " " + fmt9(z.x_min) + " " + fmt9(z.y_min) + " " +
           fmt9(z.x_max) + " " + fmt9(z.y_max) + "\n";
  }
  out += "sample_id,x_m,y_m,zone";
  for (const AccessPoint& ap : dataset.roster) out += ",rssi_" + ap.ap_id;
  for (const AccessPoint& ap : dataset.roster) out += ",range_" + ap.ap_id;
  out += "\n";
  for (const Sample& s : dataset.samples) {
    out += s.sample_id + "," + fmt9(s.truth.x) + "," + fmt9(s.truth.y) + "," + s.zone_label;
    for (const AccessPoint& ap : dataset.roster) {
      const auto it = s.rssi_dbm.find(ap.ap_id);
      out += ",";
      if (it != s.rssi_dbm.end()) out += fmt9(it->second);
    }
    for (const AccessPoint& ap : dataset.roster) {
      const auto it = s.range_m.find(ap.ap_id);
      out += ",";
      if (it != s.range_m.end()) out += fmt9(it->second);
    }
    out += "\n";
  }
  return out;
}

Dataset parse_dataset_csv(const std::string& text) {
  Dataset dataset;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  // Preamble: roster and zone definitions in comment lines.
  bool header_seen = false;
  std::vector<std::string> header;
  int header_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tag;
      ls >> tag;
      if (tag == "ap") {
        AccessPoint ap;
        std::string tech_token;
        ls >> ap.ap_id >> tech_token >> ap.position.x >> ap.position.y >> ap.position.z >>
            ap.tx_power_dbm;
        const auto tech = tech_from_string(tech_token);
        if (ls.fail() || !tech) {
          throw Error("csv-parse", "line " + std::to_string(line_no) + ": malformed '# ap' line");
        }
        ap.tech = *tech;
        dataset.roster.push_back(std::move(ap));
      } else if (tag == "zone") {
        Zone z;
        ls >> z.zone_id >> z.x_min >> z.y_min >> z.x_max >> z.y_max;
        if (ls.fail()) {
          throw Error("csv-parse", "line " + std::to_string(line_no) + ": malformed '# zone' line");
        }
        dataset.zones.push_back(std::move(z));
      }
      continue;
    }
    header = split_csv_line(line);
    header_line = line_no;
    header_seen = true;
    break;
  }
  if (!header_seen) throw Error("csv-parse", "no header line found");
  if (dataset.roster.empty()) {
    throw Error("csv-parse", "missing '# ap' roster preamble before the header");
  }

  static const char* kFixed[] = {"sample_id", "x_m", "y_m", "zone"};
  if (header.size() < 4) {
    throw Error("csv-parse", "line " + std::to_string(header_line) + ": malformed header");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (header[i] != kFixed[i]) {
      throw Error("csv-parse", "line " + std::to_string(header_line) + ": malformed header, got '" +
                                   header[i] + "' where '" + kFixed[i] + "' expected");
    }
  }
  struct ColumnRef {
    bool is_rssi = false;
    std::string ap_id;
  };
  std::vector<ColumnRef> columns;
  for (std::size_t i = 4; i < header.size(); ++i) {
    ColumnRef ref;
    if (header[i].rfind("rssi_", 0) == 0) {
      ref.is_rssi = true;
      ref.ap_id = header[i].substr(5);
    } else if (header[i].rfind("range_", 0) == 0) {
      ref.is_rssi = false;
      ref.ap_id = header[i].substr(6);
    } else {
      throw Error("csv-parse", "line " + std::to_string(header_line) + ": malformed header column '" +
                                   header[i] + "'");
    }
    const bool known = std::any_of(dataset.roster.begin(), dataset.roster.end(),
                                   [&](const AccessPoint& ap) { return ap.ap_id == ref.ap_id; });
    if (!known) {
      throw Error("csv-parse", "line " + std::to_string(header_line) + ": unknown ap column '" +
                                   header[i] + "'");
    }
    columns.push_back(std::move(ref));
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error("csv-parse", "line " + std::to_string(line_no) + ": expected " +
                                   std::to_string(header.size()) + " cells, got " +
                                   std::to_string(cells.size()));
    }
    Sample s;
    s.sample_id = cells[0];
    s.truth = {parse_cell(cells[1], line_no, "x_m"), parse_cell(cells[2], line_no, "y_m"), 0.0};
    s.zone_label = cells[3];
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const std::string& cell = cells[i + 4];
      if (cell.empty()) continue;  // absent measurement
      const double v = parse_cell(cell, line_no, columns[i].is_rssi ? "rssi cell" : "range cell");
      if (columns[i].is_rssi) {
        s.rssi_dbm[columns[i].ap_id] = v;
      } else {
        s.range_m[columns[i].ap_id] = v;
      }
    }
    dataset.samples.push_back(std::move(s));
  }
  return dataset;
}

void save_dataset_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write '" + path + "'");
  out << write_dataset_csv(dataset);
  if (!out.flush()) throw Error("io", "failed writing '" + path + "'");
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_csv(buf.str());
}

}  // namespace locfuse
