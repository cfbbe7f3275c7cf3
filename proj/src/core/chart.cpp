#include "finsler/chart.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace finsler {

ManifoldChart::ManifoldChart(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size())
    throw FinslerError(ErrorCode::invalid_argument, "chart bounds have different lengths");
  if (lower_.size() < 2) throw FinslerError(ErrorCode::invalid_argument, "chart dimension must be at least 2");
  if (lower_.size() > kMaxDim)
    throw FinslerError(ErrorCode::invalid_argument,
                       "chart dimension exceeds supported maximum of " + std::to_string(kMaxDim));
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (std::isnan(lower_[i]) || std::isnan(upper_[i]) || !(lower_[i] < upper_[i]))
      throw FinslerError(ErrorCode::invalid_argument,
                         "chart axis " + std::to_string(i) + " has lower bound not below upper bound");
  }
}

ManifoldChart ManifoldChart::full(int dimension) {
  const double inf = std::numeric_limits<double>::infinity();
  return ManifoldChart(Vec::Constant(dimension, -inf), Vec::Constant(dimension, inf));
}

bool ManifoldChart::contains(const Vec& x) const {
  if (x.size() != lower_.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !(x[i] > lower_[i]) || !(x[i] < upper_[i])) return false;
  }
  return true;
}

void ManifoldChart::require_contains(const Vec& x, const char* what) const {
  if (x.size() != lower_.size())
    throw FinslerError(ErrorCode::invalid_argument,
                       std::string(what) + " has dimension " + std::to_string(x.size()) + ", chart has " +
                           std::to_string(lower_.size()));
  if (!contains(x)) {
    std::ostringstream os;
    os << what << " (" << x.transpose() << ") lies outside chart " << describe();
    throw DomainError(os.str());
  }
}

std::string ManifoldChart::describe() const {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (i) os << " x ";
    os << "(" << lower_[i] << ", " << upper_[i] << ")";
  }
  return os.str();
}

}  // namespace finsler
