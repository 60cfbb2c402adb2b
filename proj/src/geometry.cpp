#include "taxorank/geometry.hpp"

#include <cmath>
#include <string>

#include "taxorank/errors.hpp"

namespace taxorank {

std::string_view geometry_name(Geometry g) {
  return g == Geometry::euclidean ? "euclidean" : "poincare";
}

Geometry parse_geometry(std::string_view name) {
  if (name == "euclidean") return Geometry::euclidean;
  if (name == "poincare") return Geometry::poincare;
  throw ParseError("unknown geometry '" + std::string(name) + "'");
}

double cosine(const Vector& u, const Vector& v) {
  double nu = u.norm();
  double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return u.dot(v) / (nu * nv);
}

double poincare_distance(const Vector& u, const Vector& v) {
  double uu = u.squaredNorm();
  double vv = v.squaredNorm();
  if (uu >= 1.0 || vv >= 1.0) throw OutOfBallError("point outside the Poincare ball");
  double diff = (u - v).squaredNorm();
  double gamma = 1.0 + 2.0 * diff / ((1.0 - uu) * (1.0 - vv));
  return std::acosh(std::max(gamma, 1.0));
}

double space_similarity(Geometry g, const Vector& u, const Vector& v) {
  return g == Geometry::euclidean ? cosine(u, v) : -poincare_distance(u, v);
}

Vector einstein_midpoint(std::span<const Vector> points) {
  if (points.empty()) throw ConfigError("Einstein midpoint of an empty set");
  const auto dim = points.front().size();
  Vector weighted = Vector::Zero(dim);
  double total = 0.0;
  for (const auto& x : points) {
    if (x.size() != dim) throw DimensionMismatchError("Einstein midpoint inputs differ in size");
    double xx = x.squaredNorm();
    if (xx >= 1.0) throw OutOfBallError("Einstein midpoint input outside the ball");
    Vector klein = 2.0 * x / (1.0 + xx);
    double gamma = 1.0 / std::sqrt(1.0 - klein.squaredNorm());
    weighted += gamma * klein;
    total += gamma;
  }
  Vector klein_mid = weighted / total;
  return klein_mid / (1.0 + std::sqrt(std::max(0.0, 1.0 - klein_mid.squaredNorm())));
}

void project_to_ball(Eigen::Ref<Vector> v, double eps) {
  double n = v.norm();
  if (n >= 1.0 - eps) v *= (1.0 - eps) / n;
}

}  // namespace taxorank
