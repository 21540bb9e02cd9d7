#include "dmimo/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dmimo {

void ExperimentSpec::validate() const {
  base.validate();
  if (schemes.empty()) {
    throw std::invalid_argument("ExperimentSpec: at least one scheme required");
  }
  for (const auto& plan : schemes) plan.validate();
  if (snr_grid_db.empty()) {
    throw std::invalid_argument("ExperimentSpec: SNR grid is empty");
  }
  for (std::size_t i = 1; i < snr_grid_db.size(); ++i) {
    if (!(snr_grid_db[i] > snr_grid_db[i - 1])) {
      throw std::invalid_argument("ExperimentSpec: SNR grid must be strictly increasing");
    }
  }
  if (n_blocks < 1) {
    throw std::invalid_argument("ExperimentSpec: n_blocks must be >= 1");
  }
  if (worker_count < 1) {
    throw std::invalid_argument("ExperimentSpec: worker_count must be >= 1");
  }
}

std::vector<MetricsRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const LinkContext ctx = make_link_context(spec.base);
  const int n_users = spec.base.num_users;

  std::vector<MetricsRow> rows;
  rows.reserve(spec.schemes.size() * spec.snr_grid_db.size());

  for (const auto& plan : spec.schemes) {
    for (std::size_t si = 0; si < spec.snr_grid_db.size(); ++si) {
      SystemConfig cfg = spec.base;
      cfg.snr_db = spec.snr_grid_db[si];
      const double sigma2 = cfg.noise_variance();

      long long errors = 0;
      long long inversions = 0;
      double runtime = 0.0;
      std::string failure;

#pragma omp parallel for num_threads(spec.worker_count) schedule(dynamic) \
    reduction(+ : errors, inversions, runtime)
      for (int trial = 0; trial < spec.n_blocks; ++trial) {
        try {
          // Substream keyed by (seed, snr point, trial): identical blocks
          // across schemes, identical counts across worker configurations.
          Rng rng(derive_seed(cfg.seed, 0xb10c0000ULL + si, trial));
          const ChannelRealization chan = draw_channel(cfg, rng);
          const SuppressionSet supp =
              build_suppression(chan, cfg.rau_antennas, sigma2);
          const auto payload = random_payload(cfg, ctx, rng);
          const TransmitBlock tb = transmit(cfg, chan, ctx, payload, rng);

          const auto t0 = std::chrono::steady_clock::now();
          const ReceiveResult res =
              spec.use_naive_receiver
                  ? receive_block_naive(cfg, supp, tb.received, plan, ctx, payload)
                  : receive_block(cfg, supp, tb.received, plan, ctx, payload);
          if (spec.collect_timing) {
            runtime += std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
          }

          for (int kk = 0; kk < n_users; ++kk) {
            errors += res.block_error[kk];
            for (const auto& it : res.diagnostics[kk]) inversions += it.inversions;
          }

          if (spec.diagnostics_stream != nullptr) {
            nlohmann::json line;
            line["scheme"] = scheme_name(plan.scheme);
            line["n_iters"] = plan.effective_iters();
            line["snr_db"] = cfg.snr_db;
            line["trial"] = trial;
            std::vector<int> errs(res.block_error.begin(), res.block_error.end());
            line["block_error"] = errs;
            std::vector<std::vector<double>> nus(n_users);
            for (int kk = 0; kk < n_users; ++kk) {
              for (const auto& it : res.diagnostics[kk]) {
                nus[kk].push_back(it.mean_nu);
              }
            }
            line["mean_nu"] = nus;
#pragma omp critical(dmimo_diag_stream)
            { *spec.diagnostics_stream << line.dump() << '\n'; }
          }
        } catch (const std::exception& e) {
#pragma omp critical(dmimo_harness_error)
          {
            if (failure.empty()) failure = e.what();
          }
        }
      }
      if (!failure.empty()) {
        throw std::runtime_error("run_experiment: trial failed: " + failure);
      }

      MetricsRow row;
      row.scheme = scheme_name(plan.scheme);
      row.n_iters = plan.effective_iters();
      row.snr_db = cfg.snr_db;
      row.blocks = static_cast<long long>(spec.n_blocks) * n_users;
      row.error_blocks = errors;
      row.bler = static_cast<double>(errors) / static_cast<double>(row.blocks);
      row.mean_runtime_per_block = runtime / static_cast<double>(row.blocks);
      row.mean_inversion_count =
          static_cast<double>(inversions) / static_cast<double>(row.blocks);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

} // namespace

void emit_csv(const std::vector<MetricsRow>& rows, std::ostream& out) {
  out << "scheme,n_iters,snr_db,blocks,error_blocks,bler,"
         "mean_runtime_per_block,mean_inversion_count\n";
  for (const auto& r : rows) {
    out << r.scheme << ',' << r.n_iters << ',' << format_real(r.snr_db) << ','
        << r.blocks << ',' << r.error_blocks << ',' << format_real(r.bler) << ','
        << format_real(r.mean_runtime_per_block) << ','
        << format_real(r.mean_inversion_count) << '\n';
  }
}

void emit_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
  }
  emit_csv(rows, out);
  out.flush();
  if (!out) {
    throw std::runtime_error("emit_csv: write to '" + path + "' failed");
  }
}

std::vector<MetricsRow> parse_csv(std::istream& in) {
  std::vector<MetricsRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    MetricsRow r;
    std::getline(ls, r.scheme, ',');
    std::getline(ls, field, ',');
    r.n_iters = std::stoi(field);
    std::getline(ls, field, ',');
    r.snr_db = std::stod(field);
    std::getline(ls, field, ',');
    r.blocks = std::stoll(field);
    std::getline(ls, field, ',');
    r.error_blocks = std::stoll(field);
    std::getline(ls, field, ',');
    r.bler = std::stod(field);
    std::getline(ls, field, ',');
    r.mean_runtime_per_block = std::stod(field);
    std::getline(ls, field, ',');
    r.mean_inversion_count = std::stod(field);
    rows.push_back(std::move(r));
  }
  return rows;
}

SystemConfig preset_config(const std::string& name) {
  SystemConfig cfg;
  if (name == "desk") {
    // Small enough for minutes-scale sweeps, structurally identical to the
    // 32x32 configurations.
    cfg.num_raus = 2;
    cfg.num_users = 2;
    cfg.rau_antennas = 4;
    cfg.user_antennas = 4;
    cfg.streams_per_user = {2, 2};
    cfg.bits_per_symbol = 4;
    cfg.ldpc_code = "wifi_n648_r12";
    cfg.block_symbols = 162;
    return cfg;
  }
  if (name == "cqi6_32x32" || name == "cqi7_32x32") {
    cfg.num_raus = 4;
    cfg.num_users = 4;
    cfg.rau_antennas = 8;
    cfg.user_antennas = 8;
    cfg.streams_per_user = {4, 4, 4, 4};
    cfg.block_symbols = 162;
    if (name == "cqi6_32x32") {
      cfg.bits_per_symbol = 4; // Q_m = 4, R_c = 3/4
      cfg.ldpc_code = "wifi_n648_r34";
    } else {
      cfg.bits_per_symbol = 6; // Q_m = 6, R_c = 2/3
      cfg.ldpc_code = "wifi_n648_r23";
    }
    return cfg;
  }
  throw std::invalid_argument("preset_config: unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Experiment files: "key = value" lines, '#' comments. See README for keys.
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

IterationPlan parse_scheme_token(const std::string& token, int default_iters,
                                 int bp_iters) {
  IterationPlan plan;
  std::string name = token;
  const auto colon = token.find(':');
  if (colon != std::string::npos) {
    name = token.substr(0, colon);
    plan.detector_iters = std::stoi(token.substr(colon + 1));
  } else {
    plan.detector_iters = default_iters;
  }
  if (name == "lmmse") {
    plan.scheme = Scheme::kLmmse;
    plan.detector_iters = 1;
  } else if (name == "id") {
    plan.scheme = Scheme::kId;
  } else if (name == "idd") {
    plan.scheme = Scheme::kIdd;
  } else {
    throw std::invalid_argument("unknown scheme '" + name + "'");
  }
  plan.bp_iters_per_pass = bp_iters;
  return plan;
}

} // namespace

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("parse_spec_file: cannot open '" + path + "'");
  }

  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream oss;
      oss << "parse_spec_file: " << path << ":" << lineno << ": expected key = value";
      throw std::runtime_error(oss.str());
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  ExperimentSpec spec;
  if (auto it = kv.find("preset"); it != kv.end()) {
    spec.base = preset_config(it->second);
    kv.erase(it);
  }

  int default_iters = 3;
  int bp_iters = 25;
  std::string schemes_value = "lmmse";

  for (const auto& [key, value] : kv) {
    if (key == "base.M") spec.base.num_raus = std::stoi(value);
    else if (key == "base.K") spec.base.num_users = std::stoi(value);
    else if (key == "base.N_R") spec.base.rau_antennas = std::stoi(value);
    else if (key == "base.N_U") spec.base.user_antennas = std::stoi(value);
    else if (key == "base.N_RI") {
      spec.base.streams_per_user.clear();
      for (const auto& tok : split_list(value)) {
        spec.base.streams_per_user.push_back(std::stoi(tok));
      }
    } else if (key == "base.constellation_order") {
      spec.base.bits_per_symbol = std::stoi(value);
    } else if (key == "base.code") {
      spec.base.ldpc_code = value;
    } else if (key == "base.code_rate") {
      // informational; checked against the loaded code below
    } else if (key == "base.N_L") {
      spec.base.block_symbols = std::stoi(value);
    } else if (key == "base.snr_db") {
      spec.base.snr_db = std::stod(value);
    } else if (key == "base.seed") {
      spec.base.seed = std::stoull(value);
    } else if (key == "base.channel_model") {
      if (value == "iid_rayleigh") spec.base.channel_model = ChannelModel::kIidRayleigh;
      else if (value == "per_rau_large_scale") {
        spec.base.channel_model = ChannelModel::kPerRauLargeScale;
      } else {
        throw std::runtime_error("parse_spec_file: unknown channel_model '" + value + "'");
      }
    } else if (key == "base.precoder") {
      if (value == "columns") spec.base.precoder_mode = PrecoderMode::kColumns;
      else if (value == "right_singular") {
        spec.base.precoder_mode = PrecoderMode::kRightSingular;
      } else {
        throw std::runtime_error("parse_spec_file: unknown precoder '" + value + "'");
      }
    } else if (key == "base.use_sigmoid_lut") {
      spec.base.use_sigmoid_lut = value == "true" || value == "1";
    } else if (key == "schemes") {
      schemes_value = value;
    } else if (key == "iters") {
      default_iters = std::stoi(value);
    } else if (key == "bp_iters_per_pass") {
      bp_iters = std::stoi(value);
    } else if (key == "snr_grid_db") {
      spec.snr_grid_db.clear();
      for (const auto& tok : split_list(value)) {
        spec.snr_grid_db.push_back(std::stod(tok));
      }
    } else if (key == "n_blocks") {
      spec.n_blocks = std::stoi(value);
    } else if (key == "output_path") {
      spec.output_path = value;
    } else if (key == "worker_count") {
      spec.worker_count = std::stoi(value);
    } else if (key == "collect_timing") {
      spec.collect_timing = value == "true" || value == "1";
    } else if (key == "use_naive_receiver") {
      spec.use_naive_receiver = value == "true" || value == "1";
    } else {
      throw std::runtime_error("parse_spec_file: unknown key '" + key + "'");
    }
  }

  spec.schemes.clear();
  for (const auto& tok : split_list(schemes_value)) {
    spec.schemes.push_back(parse_scheme_token(tok, default_iters, bp_iters));
  }

  if (auto it = kv.find("base.code_rate"); it != kv.end()) {
    // Accepts "a/b" or a decimal.
    double want;
    const auto slash = it->second.find('/');
    if (slash != std::string::npos) {
      want = std::stod(it->second.substr(0, slash)) /
             std::stod(it->second.substr(slash + 1));
    } else {
      want = std::stod(it->second);
    }
    const double got = load_code(spec.base.ldpc_code).rate();
    if (std::abs(want - got) > 1e-6) {
      std::ostringstream oss;
      oss << "parse_spec_file: base.code_rate " << want
          << " does not match the selected code's rate " << got;
      throw std::runtime_error(oss.str());
    }
  }
  return spec;
}

} // namespace dmimo
