/**
 * @file harness.hpp
 * @brief Monte Carlo experiment driver: sweeps SNR and iteration schemes
 *        over independent seeded trials, aggregates error-block counts, and
 *        writes CSV metrics.
 *
 * Trials are distributed over an OpenMP worker pool. Every trial draws from
 * a substream derived from (seed, snr index, trial index) only, so all
 * schemes see identical channels and payloads at a given SNR and the
 * aggregate counts never depend on the worker count.
 */
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dmimo/receiver.hpp"
#include "dmimo/system_model.hpp"

namespace dmimo {

struct ExperimentSpec {
  SystemConfig base;
  std::vector<IterationPlan> schemes;
  std::vector<double> snr_grid_db;
  int n_blocks = 100; // trials per (scheme, snr) point
  std::string output_path;
  int worker_count = 1;

  /// Measure per-block receive time. Off, the runtime column is written as
  /// zero so repeated runs produce byte-identical CSV.
  bool collect_timing = true;
  bool use_naive_receiver = false; // reference receiver for comparisons
  std::ostream* diagnostics_stream = nullptr; // JSON-lines when non-null

  void validate() const;
};

struct MetricsRow {
  std::string scheme;
  int n_iters = 1;
  double snr_db = 0.0;
  long long blocks = 0;       // user-blocks: trials * K
  long long error_blocks = 0; // user-blocks with bit errors or failed decode
  double bler = 0.0;
  double mean_runtime_per_block = 0.0; // receive seconds per user-block
  double mean_inversion_count = 0.0;   // detector factorizations per user-block
};

std::vector<MetricsRow> run_experiment(const ExperimentSpec& spec);

void emit_csv(const std::vector<MetricsRow>& rows, std::ostream& out);
void emit_csv(const std::vector<MetricsRow>& rows, const std::string& path);
std::vector<MetricsRow> parse_csv(std::istream& in);

/// Executes the oracle suite (detector-path equivalence, block
/// diagonalization, soft-statistics enumeration, probability normalization,
/// inversion accounting, first-iteration collapse) and prints one JSON line
/// per check. Returns false if any check fails.
bool run_conformance(std::ostream& out);

/// Named configurations: "desk" (2x2 RAU/user, 4 antennas each, 2 streams,
/// 16-QAM, rate 1/2) and the 32x32 presets "cqi6_32x32" / "cqi7_32x32".
SystemConfig preset_config(const std::string& name);

/// key = value experiment file mirroring ExperimentSpec (see README).
ExperimentSpec parse_spec_file(const std::string& path);

} // namespace dmimo
