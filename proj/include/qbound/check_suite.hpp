#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qbound/bounds.hpp"

namespace qbound {

// Seeded generators for random probes and channels.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi);
  int integer(int lo, int hi);  // inclusive
  CVector gaussian_vector(int dim);
  // Haar-distributed pure state.
  PureState pure_state(const std::vector<int>& dims);
  // Full-rank mixed state from a Ginibre matrix.
  DensityMatrix mixed_state(const std::vector<int>& dims);
  CMatrix hermitian(int dim);
  CMatrix unitary(int dim);
  // theta with every entry in [-limit, limit].
  RVector theta(int q, double limit);

 private:
  std::mt19937_64 engine_;
};

struct CheckResult {
  std::string module;
  std::string name;
  bool passed;
  double metric;  // worst observed deviation (or the tested value)
  std::string detail;
};

// Invariant checks over every module; deterministic for a given seed.
std::vector<CheckResult> run_check_suite(std::uint64_t seed);
std::string format_check_table(const std::vector<CheckResult>& results);

}  // namespace qbound
