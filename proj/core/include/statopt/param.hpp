#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <initializer_list>

namespace statopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Parameter vector. Always non-empty and finite.
class ParamPoint {
 public:
  explicit ParamPoint(Vec coords);
  ParamPoint(std::initializer_list<double> coords);

  static ParamPoint scalar(double value);
  static ParamPoint zeros(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(coords_.size()); }
  const Vec& coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[static_cast<Eigen::Index>(i)]; }

  double norm() const { return coords_.norm(); }
  double distance_to(const ParamPoint& other) const;

  bool operator==(const ParamPoint& other) const;

 private:
  Vec coords_;
};

bool all_finite(const Vec& v);

}  // namespace statopt
