// Microbenchmarks for the hot paths: witness evaluation, spectrum assembly,
// certification, decomposition, and the simplex minimizer.

#include <random>

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "sepcert/cones.hpp"
#include "sepcert/decomp.hpp"
#include "sepcert/ds_state.hpp"
#include "sepcert/matcore.hpp"
#include "sepcert/multiqubit.hpp"
#include "sepcert/range_criterion.hpp"

namespace {

sepcert::MMatrix random_dnn(std::mt19937& rng, int d) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i) {
      m(i, i) = unif(rng);
      for (int j = i + 1; j < d; ++j) m(i, j) = m(j, i) = unif(rng);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues()(0) >= 1e-6) return sepcert::MMatrix(sepcert::SymMatrix(m));
  }
}

sepcert::DsState random_ds(std::mt19937& rng, int d) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  sepcert::WeightMap p;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) p[{i, j}] = unif(rng);
  }
  return sepcert::DsState::create(d, p, false);
}

void bm_witness_value(benchmark::State& state) {
  const sepcert::Witness horn = sepcert::horn_matrix();
  Eigen::MatrixXd m(5, 5);
  m << 1, 1, 0, 0, 1,
       1, 2, 1, 0, 0,
       0, 1, 2, 1, 0,
       0, 0, 1, 1, 1,
       1, 0, 0, 1, 3;
  const sepcert::MMatrix mm{sepcert::SymMatrix(m)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sepcert::witness_value(horn, mm));
  }
}
BENCHMARK(bm_witness_value);

void bm_pt_spectrum(benchmark::State& state) {
  std::mt19937 rng(1u);
  const sepcert::DsState rho = random_ds(rng, static_cast<int>(state.range(0)));
  const sepcert::Tolerance tol;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sepcert::pt_spectrum(rho, tol).flattened());
  }
}
BENCHMARK(bm_pt_spectrum)->Arg(3)->Arg(6)->Arg(12);

void bm_certify_d3(benchmark::State& state) {
  std::mt19937 rng(2u);
  const sepcert::DsState rho = sepcert::from_m_matrix(random_dnn(rng, 3));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sepcert::certify(rho));
  }
}
BENCHMARK(bm_certify_d3);

void bm_separable_from_cp(benchmark::State& state) {
  std::mt19937 rng(3u);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int d = static_cast<int>(state.range(0));
  sepcert::CpFactorization factor;
  factor.b = Eigen::MatrixXd(d, 3);
  for (int i = 0; i < d; ++i) {
    for (int r = 0; r < 3; ++r) factor.b(i, r) = unif(rng);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(sepcert::separable_from_cp(factor));
  }
}
BENCHMARK(bm_separable_from_cp)->Arg(3)->Arg(5);

void bm_min_quad_over_simplex(benchmark::State& state) {
  const sepcert::Witness horn = sepcert::horn_matrix();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sepcert::min_quad_over_simplex(horn.w, 16, 400));
  }
}
BENCHMARK(bm_min_quad_over_simplex);

void bm_range_criterion(benchmark::State& state) {
  std::mt19937 rng(4u);
  const sepcert::DsState rho = random_ds(rng, 6);
  const sepcert::Tolerance tol;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sepcert::range_criterion_test(rho, tol));
  }
}
BENCHMARK(bm_range_criterion);

void bm_family_ranks(benchmark::State& state) {
  const auto rho = sepcert::family_rho(static_cast<int>(state.range(0)), 1.0, 1.0);
  const sepcert::Tolerance tol;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sepcert::ranks_profile(rho, tol));
  }
}
BENCHMARK(bm_family_ranks)->Arg(5)->Arg(9);

void bm_extremality(benchmark::State& state) {
  const auto rho = sepcert::family_rho(static_cast<int>(state.range(0)), 1.0, 1.0);
  const sepcert::Tolerance tol;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sepcert::extremality_dimension(rho, tol));
  }
}
BENCHMARK(bm_extremality)->Arg(5)->Arg(9);

}  // namespace

BENCHMARK_MAIN();
