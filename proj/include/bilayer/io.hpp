#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilayer/diagnostics.hpp"
#include "bilayer/grid.hpp"
#include "bilayer/types.hpp"

/**
 * Deterministic on-disk formats: a diagnostics CSV series and whitespace
 * snapshot files. All numbers use 17 significant digits so values
 * round-trip exactly through text.
 */
namespace bilayer {

inline std::string format_full(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline constexpr const char* series_header =
    "t,energy,mass_u,mass_v,min_u,min_v,entropy,dissipation,eps_dissipation,"
    "balance_residual,dt,newton_iters";

/** Writes the diagnostics series as CSV (fixed column order). */
inline void write_series(const std::vector<DiagnosticsRecord>& records,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << series_header << '\n';
  for (const DiagnosticsRecord& r : records) {
    out << format_full(r.t) << ',' << format_full(r.energy) << ','
        << format_full(r.mass_u) << ',' << format_full(r.mass_v) << ','
        << format_full(r.min_u) << ',' << format_full(r.min_v) << ','
        << format_full(r.entropy) << ',' << format_full(r.dissipation) << ','
        << format_full(r.eps_dissipation) << ','
        << format_full(r.energy_balance_residual) << ',' << format_full(r.dt)
        << ',' << r.newton_iters << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

/** Reads a CSV written by write_series; validates the header. */
inline std::vector<DiagnosticsRecord> read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != series_header)
    throw std::runtime_error("unrecognized series header in " + path);
  std::vector<DiagnosticsRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        cols.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("bad number '" + cell + "' at " + path +
                                 ":" + std::to_string(lineno));
      }
    }
    if (cols.size() != 12)
      throw std::runtime_error("expected 12 columns at " + path + ":" +
                               std::to_string(lineno));
    DiagnosticsRecord r;
    r.t = cols[0];
    r.energy = cols[1];
    r.mass_u = cols[2];
    r.mass_v = cols[3];
    r.min_u = cols[4];
    r.min_v = cols[5];
    r.entropy = cols[6];
    r.dissipation = cols[7];
    r.eps_dissipation = cols[8];
    r.energy_balance_residual = cols[9];
    r.dt = cols[10];
    r.newton_iters = static_cast<int>(cols[11]);
    records.push_back(r);
  }
  return records;
}

/** One saved spatial profile with its provenance. */
struct Snapshot {
  double t = 0.0;
  int n_cells = 0;
  std::string model;
  std::string config_hash;
  std::vector<double> x;
  FilmPair state{std::vector<double>{0.0}, std::vector<double>{0.0}};
  PressurePair pressure;
};

/** Writes node coordinates, heights, and pressures with a tagged header. */
inline void write_snapshot(const std::string& path, double t, const Grid& grid,
                           const std::string& model_tag,
                           const std::string& config_hash,
                           const FilmPair& state, const PressurePair& p) {
  require_size(state, grid.node_count(), "write_snapshot");
  if (p.p1.size() != state.size() || p.p2.size() != state.size())
    throw std::invalid_argument("write_snapshot: pressure size mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# bilayer snapshot\n";
  out << "# t " << format_full(t) << '\n';
  out << "# n_cells " << grid.n_cells << '\n';
  out << "# model " << model_tag << '\n';
  out << "# config_hash " << config_hash << '\n';
  out << "# columns x u v p1 p2\n";
  for (std::size_t i = 0; i < state.size(); ++i) {
    out << format_full(grid.node(i)) << ' ' << format_full(state.u[i]) << ' '
        << format_full(state.v[i]) << ' ' << format_full(p.p1[i]) << ' '
        << format_full(p.p2[i]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

/** Reads a file written by write_snapshot. */
inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "# bilayer snapshot")
    throw std::runtime_error("unrecognized snapshot header in " + path);
  Snapshot snap;
  bool have_t = false, have_n = false;
  while (in.peek() == '#') {
    if (!std::getline(in, line)) break;
    std::stringstream ss(line);
    std::string hash_mark, key;
    ss >> hash_mark >> key;
    if (key == "t") {
      ss >> snap.t;
      have_t = true;
    } else if (key == "n_cells") {
      ss >> snap.n_cells;
      have_n = true;
    } else if (key == "model") {
      ss >> snap.model;
    } else if (key == "config_hash") {
      ss >> snap.config_hash;
    }  // "columns" and unknown comment lines are skipped
  }
  if (!have_t || !have_n || snap.n_cells < 2)
    throw std::runtime_error("incomplete snapshot header in " + path);
  std::vector<double> x, u, v, p1, p2;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    double xi, ui, vi, p1i, p2i;
    if (!(ss >> xi >> ui >> vi >> p1i >> p2i))
      throw std::runtime_error("bad snapshot row in " + path);
    x.push_back(xi);
    u.push_back(ui);
    v.push_back(vi);
    p1.push_back(p1i);
    p2.push_back(p2i);
  }
  if (x.size() != static_cast<std::size_t>(snap.n_cells) + 1)
    throw std::runtime_error("snapshot row count does not match n_cells in " +
                             path);
  snap.x = std::move(x);
  snap.state = FilmPair(std::move(u), std::move(v));
  snap.pressure.p1 = std::move(p1);
  snap.pressure.p2 = std::move(p2);
  return snap;
}

/** Creates the directory (and parents) if needed; returns the path. */
inline std::string ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create directory " + dir + ": " +
                             ec.message());
  return dir;
}

}  // namespace bilayer
