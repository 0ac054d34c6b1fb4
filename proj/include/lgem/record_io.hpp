// Text and binary exports of simulation records and sweep results. Every
// text output carries the config hash; numbers are written in shortest
// round-trip form, independent of the locale.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "lgem/analysis.hpp"
#include "lgem/gem_solver.hpp"

namespace lgem {

std::string format_double(double x);

// t, then in_re, in_im, out_re, out_im per channel.
void write_boundary_csv(std::ostream& os, const SimulationRecord& rec);
// t, z, re_E, im_E, re_sigma, im_sigma (extra channels append re_E<j>, im_E<j>).
void write_snapshots_csv(std::ostream& os, const SimulationRecord& rec);
// t, k, abs_psi
void write_kspectra_csv(std::ostream& os, const SimulationRecord& rec);
// Window energies, input energy and the energy ledger.
std::string window_energies_json(const SimulationRecord& rec);

// Writes boundary.csv, snapshots.csv, kspectra.csv, energies.json and
// config.json into dir (created if missing).
void export_record(const std::string& dir, const SimulationRecord& rec);

// Binary round-trip format: little-endian, magic "LGEMREC\0", version,
// config JSON, then every record array.
void save_record(const std::string& path, const SimulationRecord& rec);
SimulationRecord load_record(const std::string& path);
std::string record_to_bytes(const SimulationRecord& rec);
SimulationRecord record_from_bytes(const std::string& bytes);

// phase, E1, E2, fit_E1, fit_E2
void write_fringe_csv(std::ostream& os, const FringePair& f, const std::string& config_hash);
std::string fringe_summary_json(const FringePair& f, const std::string& config_hash,
                                const std::string& knob);

// x, visibility_E1, visibility_E2
void write_curve_csv(std::ostream& os, const std::vector<VisibilityPoint>& pts,
                     const std::string& x_name, const std::string& config_hash);
std::string curve_summary_json(const std::vector<VisibilityPoint>& pts, const std::string& x_name,
                               const std::string& config_hash, double x_reference);

}  // namespace lgem
