#pragma once

#include <Eigen/Core>

#include <vector>

namespace spheresr {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A point on the unit sphere S^2. The constructor renormalizes, so the
/// invariant |v| = 1 holds to machine precision for any nonzero input.
class SpherePoint {
  public:
    SpherePoint() : v_(0.0, 0.0, 1.0) {}
    explicit SpherePoint(const Vec3& v);
    SpherePoint(double x, double y, double z) : SpherePoint(Vec3(x, y, z)) {}

    const Vec3& vec() const { return v_; }
    double x() const { return v_.x(); }
    double y() const { return v_.y(); }
    double z() const { return v_.z(); }

    double dot(const SpherePoint& o) const { return v_.dot(o.v_); }

    bool operator==(const SpherePoint& o) const { return v_ == o.v_; }

  private:
    Vec3 v_;
};

/// Orthonormal right-handed tangent frame (base, t1, t2) with t1 x t2 = base.
struct TangentFrame {
    SpherePoint base;
    Vec3 t1;
    Vec3 t2;
};

/// Skew matrix M generating the one-parameter rotation family t -> exp(-t M).
/// The flow moves axis_point along the tangent direction with index
/// direction_index at unit speed: -M p = t_r.
struct RotationGenerator {
    SpherePoint axis_point;
    int direction_index = 1;  // 1 or 2
    Mat3 matrix = Mat3::Zero();
};

/// Geodesic distance arccos(a . b), with the dot product clamped to [-1, 1].
/// Bitwise-equal inputs give exactly 0.
double geodesic_distance(const SpherePoint& a, const SpherePoint& b);

/// Deterministic local frame: t1 = normalize(ref x p), t2 = p x t1, with
/// ref = (0,0,1) away from the poles and ref = (1,0,0) within 1e-6 of them.
TangentFrame tangent_frame(const SpherePoint& p);

/// Generator of the rotation flow along frame.t{r}. Consistency:
/// -M p = t_r, and exp(-t M) is a rotation fixing the axis t_{3-r}.
RotationGenerator rotation_generator(const TangentFrame& frame, int r);

/// Same, with the default frame from tangent_frame(p).
RotationGenerator rotation_generator(const SpherePoint& p, int r);

/// exp(-t * gen.matrix) via the Rodrigues formula (exact rotation matrix).
Mat3 rotation_matrix(const RotationGenerator& gen, double t);

/// M quasi-uniform points from the golden-angle Fibonacci lattice.
std::vector<SpherePoint> fibonacci_grid(int m);

/// Minimum pairwise geodesic distance. Throws std::invalid_argument for
/// fewer than two points.
double min_separation(const std::vector<SpherePoint>& points);

/// Index of the grid point closest to p (brute force).
int nearest_grid_point(const std::vector<SpherePoint>& grid, const SpherePoint& p);

}  // namespace spheresr
