#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dodwda/errors.hpp"
#include "dodwda/scenario.hpp"

namespace dodwda::sim {

/// Shortest decimal form that reloads to the identical double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> csv_header(int agents) {
  std::vector<std::string> cols{"t", "s_t"};
  for (int i = 1; i <= agents; ++i) {
    cols.push_back("nu_" + std::to_string(i));
    cols.push_back("a_" + std::to_string(i));
    cols.push_back("f_" + std::to_string(i));
    cols.push_back("dual_gap_" + std::to_string(i));
  }
  cols.insert(cols.end(), {"nu_star", "f_star", "ybar_norm", "cum_regret",
                           "avg_abs_regret", "bound_avg"});
  return cols;
}

/// Writes the run as one row per round, t = 0..T. Column order is fixed
/// by construction; floats carry 17 significant digits so a reload is
/// bit-exact. The t = 0 row has no regret history, so its cum_regret and
/// avg_abs_regret are 0 and bound_avg holds the full bound.
inline void write_csv(const ScenarioTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open CSV output file: " + path);

  auto header = csv_header(trace.agents);
  for (std::size_t c = 0; c < header.size(); ++c)
    out << (c ? "," : "") << header[c];
  out << "\n";

  for (int t = 0; t <= trace.rounds; ++t) {
    out << t << ',' << format_double(trace.setpoints[t]);
    for (int i = 0; i < trace.agents; ++i) {
      out << ',' << format_double(trace.engine.decisions[t][i](0));
      out << ',' << format_double(trace.adjustments[t][i]);
      out << ',' << format_double(trace.engine.losses[t][i]);
      out << ',' << format_double(trace.engine.dual_gap[t][i]);
    }
    out << ',' << format_double(trace.nu_star[t]);
    out << ',' << format_double(trace.f_star[t]);
    out << ',' << format_double(trace.engine.dual_average_norm[t]);
    out << ',' << format_double(trace.cumulative_regret[t]);
    out << ',' << format_double(trace.average_abs_regret[t]);
    out << ','
        << format_double(t >= 1 ? trace.bound.total / t : trace.bound.total);
    out << "\n";
  }
  if (!out) throw error("failed while writing CSV file: " + path);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return static_cast<int>(c);
    throw contract_violation_error("CSV column not found: " + name);
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open CSV file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw error("empty CSV file: " + path);
  std::stringstream head(line);
  std::string cell;
  while (std::getline(head, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.header.size())
      throw error("ragged CSV row in " + path);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace dodwda::sim
