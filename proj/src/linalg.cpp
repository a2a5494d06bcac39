#include "atm/linalg.hpp"

#include <limits>

namespace atm {

bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

double condition_number(const CMatrix& m) {
  if (!all_finite(m)) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

}  // namespace atm
