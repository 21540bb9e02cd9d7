/**
 * @file dmimo_cli.cpp
 * @brief Command-line front end: Monte Carlo sweeps, conformance checks,
 *        code listing/export, and constellation table export.
 */
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmimo/harness.hpp"

namespace {

dmimo::IterationPlan plan_from_token(const std::string& token, int default_iters,
                                     int bp_iters) {
  dmimo::IterationPlan plan;
  std::string name = token;
  const auto colon = token.find(':');
  if (colon != std::string::npos) {
    name = token.substr(0, colon);
    plan.detector_iters = std::stoi(token.substr(colon + 1));
  } else {
    plan.detector_iters = default_iters;
  }
  if (name == "lmmse") {
    plan.scheme = dmimo::Scheme::kLmmse;
    plan.detector_iters = 1;
  } else if (name == "id") {
    plan.scheme = dmimo::Scheme::kId;
  } else if (name == "idd") {
    plan.scheme = dmimo::Scheme::kIdd;
  } else {
    throw CLI::ValidationError("--scheme", "unknown scheme '" + name + "'");
  }
  plan.bp_iters_per_pass = bp_iters;
  return plan;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed-MIMO uplink link-level simulator"};
  app.require_subcommand(1);

  // --- run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run a Monte Carlo sweep and write CSV");
  std::string config_path;
  std::string preset = "desk";
  std::vector<std::string> scheme_tokens;
  int iters = 3;
  int bp_iters = 25;
  std::vector<double> snr_db;
  int blocks = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_path;
  int workers = 0;
  bool verbose = false;
  bool naive = false;
  bool lut = false;
  bool no_timing = false;

  run->add_option("--config", config_path, "Experiment file (key = value)");
  run->add_option("--preset", preset, "Config preset: desk, cqi6_32x32, cqi7_32x32");
  run->add_option("--scheme", scheme_tokens,
                  "Schemes: lmmse, id, idd, optionally scheme:iters")
      ->delimiter(',');
  run->add_option("--iters", iters, "Detector iterations for id/idd (default 3)");
  run->add_option("--bp-iters", bp_iters, "BP iterations per decode pass (default 25)");
  run->add_option("--snr-db", snr_db, "SNR grid in dB")->delimiter(',');
  run->add_option("--blocks", blocks, "Trials per (scheme, SNR) point");
  auto* seed_opt = run->add_option("--seed", seed, "Base RNG seed");
  run->add_option("--out", out_path, "Output CSV path");
  run->add_option("--workers", workers, "Worker threads");
  run->add_flag("--verbose", verbose, "JSON-lines per-trial diagnostics on stdout");
  run->add_flag("--naive", naive, "Use the reference (full-variance) receiver");
  run->add_flag("--lut", lut, "Use the sigmoid lookup table in symbol statistics");
  run->add_flag("--no-timing", no_timing,
                "Skip runtime measurement for byte-reproducible CSV");

  // --- conformance ---------------------------------------------------------
  auto* conf = app.add_subcommand("conformance", "Run the oracle checks");

  // --- codes ---------------------------------------------------------------
  auto* codes = app.add_subcommand("codes", "LDPC code utilities");
  codes->require_subcommand(1);
  auto* codes_list = codes->add_subcommand("list", "List built-in codes");
  auto* codes_export = codes->add_subcommand("export", "Write a code as alist text");
  std::string export_name, export_path;
  codes_export->add_option("--name", export_name, "Built-in name or alist path")
      ->required();
  codes_export->add_option("--out", export_path, "Output path (default stdout)");

  // --- constellation ---------------------------------------------------------
  auto* constellation = app.add_subcommand(
      "constellation", "Export the bit-pattern to point labeling table");
  int order_bits = 4;
  std::string map_path;
  constellation->add_option("--bits", order_bits, "Bits per symbol: 2, 4 or 6");
  constellation->add_option("--out", map_path, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);
  seed_set = seed_opt->count() > 0;

  try {
    if (run->parsed()) {
      dmimo::ExperimentSpec spec;
      if (!config_path.empty()) {
        spec = dmimo::parse_spec_file(config_path);
      } else {
        spec.base = dmimo::preset_config(preset);
        spec.schemes = {dmimo::IterationPlan{}};
        spec.snr_grid_db = {spec.base.snr_db};
        spec.n_blocks = 100;
        spec.worker_count = 1;
      }
      if (!scheme_tokens.empty()) {
        spec.schemes.clear();
        for (const auto& tok : scheme_tokens) {
          spec.schemes.push_back(plan_from_token(tok, iters, bp_iters));
        }
      }
      if (!snr_db.empty()) spec.snr_grid_db = snr_db;
      if (blocks > 0) spec.n_blocks = blocks;
      if (seed_set) spec.base.seed = seed;
      if (!out_path.empty()) spec.output_path = out_path;
      if (workers > 0) spec.worker_count = workers;
      if (naive) spec.use_naive_receiver = true;
      if (lut) spec.base.use_sigmoid_lut = true;
      if (no_timing) spec.collect_timing = false;
      if (verbose) spec.diagnostics_stream = &std::cout;

      const auto rows = dmimo::run_experiment(spec);
      if (spec.output_path.empty()) {
        dmimo::emit_csv(rows, std::cout);
      } else {
        dmimo::emit_csv(rows, spec.output_path);
        std::cerr << "wrote " << rows.size() << " rows to " << spec.output_path << "\n";
      }
      return 0;
    }

    if (conf->parsed()) {
      return dmimo::run_conformance(std::cout) ? 0 : 1;
    }

    if (codes_list->parsed()) {
      std::cout << "name n k rate\n";
      for (const auto& info : dmimo::available_codes()) {
        std::ostringstream rate;
        rate.precision(6);
        rate << info.rate;
        std::cout << info.name << ' ' << info.n << ' ' << info.k << ' ' << rate.str()
                  << '\n';
      }
      return 0;
    }

    if (codes_export->parsed()) {
      const dmimo::LdpcCode code = dmimo::load_code(export_name);
      if (export_path.empty()) {
        code.to_alist(std::cout);
      } else {
        std::ofstream out(export_path);
        if (!out) throw std::runtime_error("cannot open '" + export_path + "'");
        code.to_alist(out);
      }
      return 0;
    }

    if (constellation->parsed()) {
      const auto c = dmimo::Constellation::qam(order_bits);
      if (map_path.empty()) {
        dmimo::export_labeling(c, std::cout);
      } else {
        std::ofstream out(map_path);
        if (!out) throw std::runtime_error("cannot open '" + map_path + "'");
        dmimo::export_labeling(c, out);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
