// Copyright 2026 The Coalflow Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COALFLOW_IO_HPP
#define COALFLOW_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "coalflow/circle_map.hpp"
#include "coalflow/discrete_flow.hpp"

namespace coalflow {

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// {"breakpoints": [[x, y_minus, y_plus], ...]}
inline nlohmann::json map_to_json(const CircleMap& m) {
  nlohmann::json bps = nlohmann::json::array();
  for (const Breakpoint& b : m.breakpoints()) {
    bps.push_back({b.x, b.y_minus, b.y_plus});
  }
  return nlohmann::json{{"breakpoints", bps}};
}

inline CircleMap map_from_json(const nlohmann::json& j) {
  std::vector<Breakpoint> bps;
  for (const auto& row : j.at("breakpoints")) {
    if (row.size() != 3) {
      throw std::invalid_argument("breakpoint row must be [x, y_minus, y_plus]");
    }
    bps.push_back({row[0].get<double>(), row[1].get<double>(),
                   row[2].get<double>()});
  }
  return CircleMap(std::move(bps));
}

// {"window": [t0, t1], "events": [[t, {"breakpoints": ...}], ...]}
inline nlohmann::json flow_to_json(const DiscreteFlow& f) {
  nlohmann::json events = nlohmann::json::array();
  for (const FlowEvent& e : f.events()) {
    events.push_back({e.time, map_to_json(e.map)});
  }
  return nlohmann::json{{"window", {f.window_lo(), f.window_hi()}},
                        {"events", events}};
}

inline DiscreteFlow flow_from_json(const nlohmann::json& j) {
  const auto& w = j.at("window");
  std::vector<FlowEvent> events;
  for (const auto& row : j.at("events")) {
    events.push_back({row.at(0).get<double>(), map_from_json(row.at(1))});
  }
  return DiscreteFlow(w.at(0).get<double>(), w.at(1).get<double>(),
                      std::move(events));
}

// time,position rows, unwrapped lift.
inline std::string path_to_csv(const FlowPath& p) {
  std::ostringstream out;
  out << "time,position\n";
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    out << format_double(p.times[i]) << "," << format_double(p.values[i])
        << "\n";
  }
  return out.str();
}

inline FlowPath path_from_csv(std::istream& in) {
  FlowPath p;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty path CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("bad path CSV row: " + line);
    }
    p.times.push_back(std::stod(line.substr(0, comma)));
    p.values.push_back(std::stod(line.substr(comma + 1)));
  }
  if (!p.times.empty()) {
    p.start_time = p.times.front();
    p.start_x = p.values.front();
  }
  return p;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace coalflow

#endif  // COALFLOW_IO_HPP
