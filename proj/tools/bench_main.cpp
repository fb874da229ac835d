// Benchmark comparing the OpenMP kernels against their serial reference
// implementations: multiplier-bootstrap statistics, per-cell estimation,
// and a Monte Carlo batch.  Run with DIDFORGE_THREADS to cap threads.

#include <chrono>
#include <cstdio>

#include "didforge/dgp.hpp"
#include "didforge/inference.hpp"
#include "didforge/parallel.hpp"
#include "didforge/reference.hpp"

using namespace didforge;

namespace {

double seconds(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

DgpConfig staggered_config(int n, std::uint64_t seed) {
  DgpConfig c = DgpConfig::make(n, 4, 2, 1, {2, 3}, seed);
  c.assignment.intercepts << -0.6, -0.6;
  c.assignment.coef_x1.setConstant(0.3);
  c.assignment.coef_z.setConstant(0.3);
  c.outcome.theta_t << 0, 0.4, 0.8, 1.2;
  c.outcome.delta_t.setConstant(0.5);
  c.outcome.beta_t.setConstant(0.8);
  c.treatment.base = 1.0;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 4000;
  const int draws = argc > 2 ? std::atoi(argv[2]) : 2000;
  std::printf("didforge-bench: n=%d draws=%d threads=%d\n", n, draws,
              max_threads());

  auto [data, oracle] = generate(staggered_config(n, 7));
  (void)oracle;

  std::vector<GroupTimeResult> serial_results, parallel_results;
  const double t_cells_serial =
      seconds([&] { serial_results = reference::estimate_all(data, Method::DR); });
  const double t_cells_parallel =
      seconds([&] { parallel_results = estimate_all(data, Method::DR); });
  bool cells_match = serial_results.size() == parallel_results.size();
  for (std::size_t i = 0; cells_match && i < serial_results.size(); ++i)
    cells_match = serial_results[i].estimate == parallel_results[i].estimate;
  std::printf("cells (dr, %zu cells): serial %.3fs  parallel %.3fs  match=%s\n",
              serial_results.size(), t_cells_serial, t_cells_parallel,
              cells_match ? "yes" : "NO");

  std::vector<AggregateResult> aggs{aggregate_overall(parallel_results, data)};
  InfluenceMatrix infl = build_influence_matrix(parallel_results, aggs);
  Eigen::MatrixXd ref_stats, omp_stats;
  const double t_boot_serial = seconds([&] {
    ref_stats =
        reference::bootstrap_stats(infl, draws, Multiplier::Rademacher, 42);
  });
  const double t_boot_parallel = seconds([&] {
    omp_stats = bootstrap_stats(infl, draws, Multiplier::Rademacher, 42);
  });
  std::printf("bootstrap (%d draws): serial %.3fs  parallel %.3fs  match=%s\n",
              draws, t_boot_serial, t_boot_parallel,
              ref_stats == omp_stats ? "yes" : "NO");

  // Monte Carlo batch: repeated generate+estimate, replicate-parallel.
  const int reps = 20;
  std::vector<double> est_serial(reps), est_parallel(reps);
  const double t_mc_serial = seconds([&] {
    for (int r = 0; r < reps; ++r) {
      auto [d, o] = generate(staggered_config(n / 4, 100 + r));
      (void)o;
      est_serial[r] = aggregate_overall(reference::estimate_all(d, Method::DR), d)
                          .estimate;
    }
  });
  const double t_mc_parallel = seconds([&] {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
#endif
    for (int r = 0; r < reps; ++r) {
      AttOptions opts;
      opts.threads = 1;
      auto [d, o] = generate(staggered_config(n / 4, 100 + r));
      (void)o;
      est_parallel[r] =
          aggregate_overall(reference::estimate_all(d, Method::DR, opts), d)
              .estimate;
    }
  });
  std::printf("mc batch (%d reps): serial %.3fs  parallel %.3fs  match=%s\n",
              reps, t_mc_serial, t_mc_parallel,
              est_serial == est_parallel ? "yes" : "NO");
  return 0;
}
