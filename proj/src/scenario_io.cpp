#include "locfuse/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "locfuse/error.hpp"
#include "src/ini.hpp"

namespace locfuse {

using ini::fmt9;

std::string write_scenario(const Scenario& sc) {
  std::string out;
  out += "# locfuse scenario\n";
  out += "[region]\n";
  out += "x_min = " + fmt9(sc.sampling_region.x_min) + "\n";
  out += "y_min = " + fmt9(sc.sampling_region.y_min) + "\n";
  out += "x_max = " + fmt9(sc.sampling_region.x_max) + "\n";
  out += "y_max = " + fmt9(sc.sampling_region.y_max) + "\n";
  for (const Zone& z : sc.zones) {
    out += "\n[zone " + z.zone_id + "]\n";
    out += "x_min = " + fmt9(z.x_min) + "\n";
    out += "y_min = " + fmt9(z.y_min) + "\n";
    out += "x_max = " + fmt9(z.x_max) + "\n";
    out += "y_max = " + fmt9(z.y_max) + "\n";
  }
  for (const WallSegment& w : sc.walls) {
    out += "\n[wall " + w.wall_id + "]\n";
    out += "x1 = " + fmt9(w.x1) + "\n";
    out += "y1 = " + fmt9(w.y1) + "\n";
    out += "x2 = " + fmt9(w.x2) + "\n";
    out += "y2 = " + fmt9(w.y2) + "\n";
  }
  for (const auto& [tech, p] : sc.params) {
    out += std::string("\n[params ") + to_string(tech) + "]\n";
    out += "pl0_db = " + fmt9(p.pl0_db) + "\n";
    out += "path_loss_exponent = " + fmt9(p.path_loss_exponent) + "\n";
    out += "sigma_shadow_db = " + fmt9(p.sigma_shadow_db) + "\n";
    out += "wall_loss_db = " + fmt9(p.wall_loss_db) + "\n";
    out += "range_noise_sigma_m = " + fmt9(p.range_noise_sigma_m) + "\n";
  }
  for (const AccessPoint& ap : sc.roster) {
    out += "\n[ap " + ap.ap_id + "]\n";
    out += std::string("tech = ") + to_string(ap.tech) + "\n";
    out += "x = " + fmt9(ap.position.x) + "\n";
    out += "y = " + fmt9(ap.position.y) + "\n";
    out += "z = " + fmt9(ap.position.z) + "\n";
    out += "tx_dbm = " + fmt9(ap.tx_power_dbm) + "\n";
  }
  return out;
}

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  bool region_seen = false;
  for (const ini::Section& s : ini::parse_sections(text)) {
    if (s.kind == "region") {
      sc.sampling_region = {s.number("x_min"), s.number("y_min"), s.number("x_max"),
                            s.number("y_max")};
      region_seen = true;
    } else if (s.kind == "zone") {
      if (s.name.empty()) throw Error("config-parse", "zone section needs an id");
      sc.zones.push_back(
          {s.name, s.number("x_min"), s.number("y_min"), s.number("x_max"), s.number("y_max")});
    } else if (s.kind == "wall") {
      if (s.name.empty()) throw Error("config-parse", "wall section needs an id");
      sc.walls.push_back(
          {s.name, s.number("x1"), s.number("y1"), s.number("x2"), s.number("y2")});
    } else if (s.kind == "params") {
      const auto tech = tech_from_string(s.name);
      if (!tech) throw Error("config-parse", "unknown technology '" + s.name + "'");
      PropagationParams p;
      p.pl0_db = s.number("pl0_db");
      p.path_loss_exponent = s.number("path_loss_exponent");
      p.sigma_shadow_db = s.number("sigma_shadow_db");
      p.wall_loss_db = s.number("wall_loss_db");
      p.range_noise_sigma_m = s.number("range_noise_sigma_m");
      sc.params[*tech] = p;
    } else if (s.kind == "ap") {
      if (s.name.empty()) throw Error("config-parse", "ap section needs an id");
      const auto tech = tech_from_string(s.text("tech"));
      if (!tech) throw Error("config-parse", "ap '" + s.name + "' has unknown tech");
      sc.roster.push_back({s.name, *tech,
                           {s.number("x"), s.number("y"), s.number("z")}, s.number("tx_dbm")});
    } else {
      throw Error("config-parse",
                  "line " + std::to_string(s.line_no) + ": unknown section [" + s.kind + "]");
    }
  }
  if (!region_seen) throw Error("config-parse", "scenario is missing a [region] section");
  return sc;
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write '" + path + "'");
  out << write_scenario(scenario);
  if (!out.flush()) throw Error("io", "failed writing '" + path + "'");
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace locfuse
