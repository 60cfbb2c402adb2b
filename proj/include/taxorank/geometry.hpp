#pragma once

#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace taxorank {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Geometry { euclidean, poincare };

std::string_view geometry_name(Geometry g);
Geometry parse_geometry(std::string_view name);

/// Cosine similarity; 0 when either side has zero norm.
double cosine(const Vector& u, const Vector& v);

/// Hyperbolic distance in the Poincare ball:
/// arcosh(1 + 2|u-v|^2 / ((1-|u|^2)(1-|v|^2))). Throws OutOfBallError unless
/// both points lie strictly inside the unit ball.
double poincare_distance(const Vector& u, const Vector& v);

/// Similarity used for ranking in a space: cosine for Euclidean geometry,
/// negative hyperbolic distance for the ball.
double space_similarity(Geometry g, const Vector& u, const Vector& v);

/// Aggregates ball points through Klein coordinates weighted by Lorentz
/// factors, then maps the Klein midpoint back to the ball.
Vector einstein_midpoint(std::span<const Vector> points);

/// Rescales v so that its norm is at most 1 - eps.
void project_to_ball(Eigen::Ref<Vector> v, double eps);

}  // namespace taxorank
