#pragma once

// CSV and metadata output. Floats are written as shortest round-trip
// decimals, so reading a file back reproduces the exact doubles and repeated
// runs produce bit-identical files.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "igeb/errors.hpp"
#include "igeb/integrate.hpp"
#include "igeb/reconstruct.hpp"

namespace igeb {

inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc())
    throw Error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParameterError("parse_double: not a number: '" + text + "'");
  return value;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw Error("write_csv: cannot open " + path);
  for (size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
  if (!out) throw Error("write_csv: write failed for " + path);
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_csv: cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error("read_csv: empty file " + path);
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell));
    if (row.size() != table.header.size())
      throw ParameterError("read_csv: ragged row in " + path);
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline const std::vector<std::string>& state_csv_header() {
  static const std::vector<std::string> h = {
      "t",  "x",  "v1", "v2", "v3", "v4", "v5",
      "v6", "z1", "z2", "z3", "z4", "z5", "z6"};
  return h;
}

// One row per (time step, mesh node): t, x, v1..v6, z1..z6.
inline void write_states_csv(const std::string& path, const Trajectory& traj) {
  const AssembledSystem& sys = *traj.system;
  CsvTable table;
  table.header = state_csv_header();
  table.rows.reserve(traj.states.size() *
                     static_cast<size_t>(sys.mesh.node_count()));
  for (int k = 0; k < static_cast<int>(traj.states.size()); ++k) {
    const double t = traj.grid.t(k);
    for (int a = 0; a < sys.mesh.node_count(); ++a) {
      const Vec12 u = sys.node_state(traj.states[k], a);
      std::vector<double> row;
      row.reserve(14);
      row.push_back(t);
      row.push_back(sys.mesh.node_x(a));
      for (int i = 0; i < 12; ++i) row.push_back(u(i));
      table.rows.push_back(std::move(row));
    }
  }
  write_csv(path, table);
}

// Inverse of write_states_csv: reduced state vectors ordered by time.
inline std::vector<VecX> read_states_csv(const std::string& path,
                                         const Mesh& mesh, int steps) {
  const CsvTable table = read_csv(path);
  if (table.header != state_csv_header())
    throw ParameterError("state file: unexpected header in " + path);
  const int nodes = mesh.node_count();
  if (static_cast<int>(table.rows.size()) != steps * nodes)
    throw ParameterError("state file: row count does not match mesh/grid");
  std::vector<VecX> states;
  states.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    VecX y = VecX::Zero(mesh.reduced_dof_count());
    for (int a = 0; a < nodes; ++a) {
      const std::vector<double>& row =
          table.rows[static_cast<size_t>(k) * nodes + a];
      if (a == 0) {
        for (int i = 0; i < 3; ++i)
          if (std::abs(row[2 + i]) > 1e-10 || std::abs(row[5 + i]) > 1e-10)
            throw ParameterError(
                "state file: clamped-end velocity at x=0 must vanish");
        for (int i = 0; i < 6; ++i) y(i) = row[8 + i];
      } else {
        for (int i = 0; i < 12; ++i) y(12 * a - 6 + i) = row[2 + i];
      }
    }
    states.push_back(std::move(y));
  }
  return states;
}

inline void write_series_csv(const std::string& path, const TimeGrid& grid,
                             const std::vector<std::string>& names,
                             const std::vector<std::vector<double>>& columns) {
  CsvTable table;
  table.header.push_back("t");
  for (const auto& n : names) table.header.push_back(n);
  for (const auto& c : columns)
    if (static_cast<int>(c.size()) != grid.steps)
      throw ShapeError("write_series_csv: column length mismatch");
  for (int k = 0; k < grid.steps; ++k) {
    std::vector<double> row;
    row.push_back(grid.t(k));
    for (const auto& c : columns) row.push_back(c[static_cast<size_t>(k)]);
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

// One row per (time step, mesh node): t, x, p1..p3, q0..q3.
inline void write_frames_csv(const std::string& path, const FrameField& field,
                             const Mesh& mesh, const TimeGrid& grid) {
  if (field.nodes != mesh.node_count() || field.steps != grid.steps)
    throw ShapeError("write_frames_csv: field does not match mesh/grid");
  CsvTable table;
  table.header = {"t", "x", "p1", "p2", "p3", "q0", "q1", "q2", "q3"};
  for (int k = 0; k < grid.steps; ++k)
    for (int a = 0; a < field.nodes; ++a) {
      const Frame& f = field.at(a, k);
      table.rows.push_back({grid.t(k), mesh.node_x(a), f.p(0), f.p(1), f.p(2),
                            f.q.w, f.q.v(0), f.q.v(1), f.q.v(2)});
    }
  write_csv(path, table);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("write_text_file: cannot open " + path);
  out << text;
  if (!out) throw Error("write_text_file: write failed for " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_text_file: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace igeb
