#include "statopt/param.hpp"

#include <cmath>

#include "statopt/errors.hpp"

namespace statopt {

bool all_finite(const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

ParamPoint::ParamPoint(Vec coords) : coords_(std::move(coords)) {
  if (coords_.size() == 0) throw ValidationError("ParamPoint: dimension must be positive");
  if (!all_finite(coords_)) throw ValidationError("ParamPoint: coordinates must be finite");
}

ParamPoint::ParamPoint(std::initializer_list<double> coords)
    : ParamPoint(Vec::Map(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}

ParamPoint ParamPoint::scalar(double value) { return ParamPoint(Vec::Constant(1, value)); }

ParamPoint ParamPoint::zeros(std::size_t dim) {
  return ParamPoint(Vec::Zero(static_cast<Eigen::Index>(dim)));
}

double ParamPoint::distance_to(const ParamPoint& other) const {
  if (other.dim() != dim()) throw ValidationError("ParamPoint: dimension mismatch");
  return (coords_ - other.coords_).norm();
}

bool ParamPoint::operator==(const ParamPoint& other) const {
  return dim() == other.dim() && coords_ == other.coords_;
}

}  // namespace statopt
