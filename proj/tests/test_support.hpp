#pragma once

#include <numbers>

#include "qbound/linalg.hpp"

namespace qbound::testing {

inline constexpr double kPi = std::numbers::pi;
inline const Complex kI{0.0, 1.0};

inline double gap(const CMatrix& a, const CMatrix& b) { return max_abs(CMatrix(a - b)); }
inline double gap(const RMatrix& a, const RMatrix& b) { return max_abs(RMatrix(a - b)); }
inline double rel_gap(const RMatrix& a, const RMatrix& b) { return (a - b).norm() / b.norm(); }

inline RVector vec(std::initializer_list<double> values) {
  RVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline CVector basis(int dim, int index) {
  CVector v = CVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

}  // namespace qbound::testing
