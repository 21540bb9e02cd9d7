/**
 * @file bench_detector.cpp
 * @brief Benchmarks the eigendecomposition detection path against the
 *        per-column reference path, and harness throughput against worker
 *        count. Prints a table; no pass/fail.
 */
#include <chrono>
#include <cstdio>
#include <vector>

#include "dmimo/detector.hpp"
#include "dmimo/harness.hpp"
#include "dmimo/rng.hpp"

using namespace dmimo;

namespace {

ComplexMatrix random_matrix(Rng& rng, int rows, int cols) {
  ComplexMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = rng.cgaussian(1.0);
  }
  return m;
}

double time_detect(bool naive, int n_ri, int n_r, int n_l, int reps) {
  Rng rng(derive_seed(7, n_ri, n_l));
  const ComplexMatrix h = random_matrix(rng, n_r, n_ri);
  ComplexMatrix sigma = random_matrix(rng, 2 * n_r, n_r);
  sigma = (sigma.adjoint() * sigma / n_r +
           0.1 * ComplexMatrix::Identity(n_r, n_r))
              .eval();
  const ComplexMatrix y = random_matrix(rng, n_r, n_l);
  const SoftBlock soft = SoftBlock::first_iteration(n_ri, n_l);

  double best = 1e300;
  for (int rep = 0; rep < reps; ++rep) {
    DetectorState state = prepare(h, 0.5 * (sigma + sigma.adjoint()));
    const auto t0 = std::chrono::steady_clock::now();
    if (naive) {
      isdic_detect_naive(state, y, soft);
    } else {
      isdic_detect_evd(state, y, soft);
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, dt);
  }
  return best;
}

} // namespace

int main() {
  std::printf("# detection paths, block detect time (best of 5), N_R = 2 N_RI\n");
  std::printf("%6s %6s %12s %12s %8s\n", "N_RI", "N_L", "evd_s", "naive_s", "ratio");
  for (int n_ri : {2, 4, 8}) {
    for (int n_l : {64, 128, 256, 512, 1024}) {
      const double evd = time_detect(false, n_ri, 2 * n_ri, n_l, 5);
      const double naive = time_detect(true, n_ri, 2 * n_ri, n_l, 5);
      std::printf("%6d %6d %12.3e %12.3e %8.2f\n", n_ri, n_l, evd, naive, naive / evd);
    }
  }

  std::printf("\n# harness scaling, desk preset, idd:3\n");
  std::printf("%8s %12s %12s\n", "workers", "seconds", "blocks/s");
  for (int workers : {1, 2, 4}) {
    ExperimentSpec spec;
    spec.base = preset_config("desk");
    spec.base.snr_db = 10.0;
    IterationPlan idd;
    idd.scheme = Scheme::kIdd;
    idd.detector_iters = 3;
    spec.schemes = {idd};
    spec.snr_grid_db = {10.0};
    spec.n_blocks = 64;
    spec.worker_count = workers;
    spec.collect_timing = false;
    const auto t0 = std::chrono::steady_clock::now();
    run_experiment(spec);
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%8d %12.3f %12.1f\n", workers, dt, spec.n_blocks / dt);
  }
  return 0;
}
