#include <benchmark/benchmark.h>

#include "ncasp/spectral.hpp"
#include "bench_common.hpp"

using namespace ncasp;

// Conjugated planted-block instances, the JBD workload of the spectra command.
static void JointBlockDiagonalize(benchmark::State& state) {
  const int blocks = static_cast<int>(state.range(0));
  Rng rng(2);
  const int block_size = 3;
  const int n = blocks * block_size;

  Eigen::HouseholderQR<Matrix> qr(bench::random_symmetric(n, rng));
  const Matrix q = qr.householderQ();
  std::vector<Matrix> shifts;
  for (int g = 0; g < 2; ++g) {
    Matrix s = Matrix::Zero(n, n);
    for (int b = 0; b < blocks; ++b) {
      s.block(b * block_size, b * block_size, block_size, block_size) =
          bench::random_symmetric(block_size, rng);
    }
    shifts.push_back(q * s * q.transpose());
  }
  const ShiftSet shift_set(n, shifts);
  for (auto _ : state) {
    benchmark::DoNotOptimize(joint_block_diagonalize(shift_set));
  }
  state.SetComplexityN(n);
}
BENCHMARK(JointBlockDiagonalize)->DenseRange(2, 10, 2)->Complexity()
    ->Unit(benchmark::kMillisecond);
