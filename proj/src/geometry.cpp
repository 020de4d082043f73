#include "spheresr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spheresr {

namespace {

Mat3 cross_matrix(const Vec3& w) {
    Mat3 m;
    m << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
        -w.y(), w.x(), 0.0;
    return m;
}

}  // namespace

SpherePoint::SpherePoint(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("SpherePoint: cannot normalize zero or non-finite vector");
    v_ = v / n;
}

double geodesic_distance(const SpherePoint& a, const SpherePoint& b) {
    if (a == b) return 0.0;
    const double d = std::clamp(a.dot(b), -1.0, 1.0);
    return std::acos(d);
}

TangentFrame tangent_frame(const SpherePoint& p) {
    Vec3 ref(0.0, 0.0, 1.0);
    if (std::abs(p.vec().dot(ref)) > 1.0 - 1e-6) ref = Vec3(1.0, 0.0, 0.0);
    TangentFrame f;
    f.base = p;
    f.t1 = ref.cross(p.vec()).normalized();
    f.t2 = p.vec().cross(f.t1);
    return f;
}

RotationGenerator rotation_generator(const TangentFrame& frame, int r) {
    if (r != 1 && r != 2) throw std::invalid_argument("rotation_generator: r must be 1 or 2");
    // The axis w = t_r x p is the unique choice with -M p = t_r and no
    // component along p, so exp(-tM) rotates in the plane span(p, t_r).
    const Vec3 t = (r == 1) ? frame.t1 : frame.t2;
    RotationGenerator gen;
    gen.axis_point = frame.base;
    gen.direction_index = r;
    gen.matrix = cross_matrix(t.cross(frame.base.vec()));
    return gen;
}

RotationGenerator rotation_generator(const SpherePoint& p, int r) {
    return rotation_generator(tangent_frame(p), r);
}

Mat3 rotation_matrix(const RotationGenerator& gen, double t) {
    // gen.matrix = [w]_x with |w| = 1, so exp(-t [w]x) = I - sin(t) [w]x + (1-cos(t)) [w]x^2.
    const Mat3& k = gen.matrix;
    return Mat3::Identity() - std::sin(t) * k + (1.0 - std::cos(t)) * (k * k);
}

std::vector<SpherePoint> fibonacci_grid(int m) {
    if (m < 1) throw std::invalid_argument("fibonacci_grid: need at least one point");
    std::vector<SpherePoint> pts;
    pts.reserve(m);
    const double golden_angle = M_PI * (std::sqrt(5.0) + 1.0);
    for (int i = 0; i < m; ++i) {
        const double z = -1.0 + (2.0 * i + 1.0) / m;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double theta = golden_angle * i;
        pts.emplace_back(r * std::cos(theta), r * std::sin(theta), z);
    }
    return pts;
}

double min_separation(const std::vector<SpherePoint>& points) {
    if (points.size() < 2)
        throw std::invalid_argument("min_separation: undefined for fewer than two points");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            best = std::min(best, geodesic_distance(points[i], points[j]));
    return best;
}

int nearest_grid_point(const std::vector<SpherePoint>& grid, const SpherePoint& p) {
    if (grid.empty()) throw std::invalid_argument("nearest_grid_point: empty grid");
    int best = 0;
    double best_dot = -2.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid[i].dot(p);
        if (d > best_dot) {
            best_dot = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace spheresr
