#pragma once

// Internal helpers for the key/value config formats (scenario, experiment).

#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "locfuse/error.hpp"

namespace locfuse::ini {

inline std::string fmt9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline double parse_number(const std::string& value, int line_no) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw Error("config-parse", "line " + std::to_string(line_no) + ": not a number: " + value);
  }
  if (consumed != value.size()) {
    throw Error("config-parse", "line " + std::to_string(line_no) + ": not a number: " + value);
  }
  return v;
}

struct Section {
  std::string kind;  // section token before the first space
  std::string name;  // remainder, empty when absent
  int line_no = 0;
  std::vector<std::pair<std::string, std::pair<std::string, int>>> entries;

  std::string title() const { return kind + (name.empty() ? "" : " " + name); }

  const std::pair<std::string, int>* find(const std::string& key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  double number(const std::string& key) const {
    const auto* v = find(key);
    if (!v) throw Error("config-parse", "section [" + title() + "] missing key '" + key + "'");
    return parse_number(v->first, v->second);
  }

  double number_or(const std::string& key, double fallback) const {
    const auto* v = find(key);
    return v ? parse_number(v->first, v->second) : fallback;
  }

  std::string text(const std::string& key) const {
    const auto* v = find(key);
    if (!v) throw Error("config-parse", "section [" + title() + "] missing key '" + key + "'");
    return v->first;
  }

  std::string text_or(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    return v ? v->first : fallback;
  }
};

inline std::vector<Section> parse_sections(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw Error("config-parse", "line " + std::to_string(line_no) + ": unterminated section");
      }
      const std::string inner = trim(t.substr(1, t.size() - 2));
      Section s;
      s.line_no = line_no;
      const auto space = inner.find(' ');
      if (space == std::string::npos) {
        s.kind = inner;
      } else {
        s.kind = inner.substr(0, space);
        s.name = trim(inner.substr(space + 1));
      }
      sections.push_back(std::move(s));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error("config-parse", "line " + std::to_string(line_no) + ": expected key = value");
    }
    if (sections.empty()) {
      throw Error("config-parse", "line " + std::to_string(line_no) + ": key outside a section");
    }
    sections.back().entries.push_back(
        {trim(t.substr(0, eq)), {trim(t.substr(eq + 1)), line_no}});
  }
  return sections;
}

}  // namespace locfuse::ini
