#include "spheresr/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace spheresr {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

double bump(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

int scan_points(int degree) { return std::max(8000, 200 * degree); }

}  // namespace

double rho(double t) {
    if (t < 0.0) throw std::domain_error("rho: negative argument");
    if (t <= 0.5) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = bump(2.0 - 2.0 * t);
    const double b = bump(2.0 * t - 1.0);
    return a / (a + b);
}

KernelTable build_kernel(int degree) {
    if (degree < 2) throw std::invalid_argument("build_kernel: degree must be >= 2");
    KernelTable table;
    table.degree = degree;
    table.coeffs.resize(degree + 1);
    double total = 0.0;
    for (int n = 0; n <= degree; ++n) {
        table.coeffs[n] = rho(double(n) / degree) * (2.0 * n + 1.0) / kFourPi;
        total += table.coeffs[n];
    }
    table.normalization = 1.0 / total;
    return table;
}

double eval_kernel(const KernelTable& table, double t, int order) {
    if (order < 0 || order > 3)
        throw std::invalid_argument("eval_kernel: derivative order must be in 0..3");
    return eval_kernel_derivs<3>(table, t)[order];
}

double rot_deriv_G(const RotationGenerator& gen, const SpherePoint& xi, const SpherePoint& xi0) {
    return (-(gen.matrix * xi.vec())).dot(xi0.vec());
}

double rot_deriv_F(const KernelTable& table, std::span<const RotationGenerator> gens,
                   const SpherePoint& xi, const SpherePoint& xi0) {
    const std::size_t order = gens.size();
    if (order < 1 || order > 3)
        throw std::invalid_argument("rot_deriv_F: need between 1 and 3 generators");
    const double t = std::clamp(xi.dot(xi0), -1.0, 1.0);

    if (order == 1) {
        const auto f = eval_kernel_derivs<1>(table, t);
        const Vec3 va = -(gens[0].matrix * xi.vec());
        return f[1] * va.dot(xi0.vec());
    }
    if (order == 2) {
        // D_a D_b F = F'' (Aa xi . xi0)(Ab xi . xi0) + F' ((Ab Aa xi) . xi0)
        const auto f = eval_kernel_derivs<2>(table, t);
        const Vec3 va = -(gens[0].matrix * xi.vec());
        const Vec3 vb = -(gens[1].matrix * xi.vec());
        const Vec3 vba = -(gens[1].matrix * va);
        const Vec3& p0 = xi0.vec();
        return f[2] * va.dot(p0) * vb.dot(p0) + f[1] * vba.dot(p0);
    }
    const auto f = eval_kernel_derivs<3>(table, t);
    const Vec3& p0 = xi0.vec();
    const Vec3 va = -(gens[0].matrix * xi.vec());
    const Vec3 vb = -(gens[1].matrix * xi.vec());
    const Vec3 vc = -(gens[2].matrix * xi.vec());
    const Vec3 vba = -(gens[1].matrix * va);
    const Vec3 vca = -(gens[2].matrix * va);
    const Vec3 vcb = -(gens[2].matrix * vb);
    const Vec3 vcba = -(gens[2].matrix * vba);
    const double da = va.dot(p0), db = vb.dot(p0), dc = vc.dot(p0);
    return f[3] * da * db * dc +
           f[2] * (vba.dot(p0) * dc + db * vca.dot(p0) + da * vcb.dot(p0)) +
           f[1] * vcba.dot(p0);
}

double localization_scan(const KernelTable& table, int k, int order, Exec exec) {
    if (k < 3 || k > 5) throw std::invalid_argument("localization_scan: k must be 3, 4 or 5");
    if (order < 0 || order > 3)
        throw std::invalid_argument("localization_scan: order must be in 0..3");
    const int pts = scan_points(table.degree);
    const double n = table.degree;
    const double scale = std::pow(n, 2.0 * order);
    double best = 0.0;
    const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(static) reduction(max : best) if (par)
    for (int i = 1; i <= pts; ++i) {
        const double theta = M_PI * i / pts;
        const double v = std::abs(eval_kernel_derivs<3>(table, std::cos(theta))[order]);
        const double env = std::pow(1.0 + n * theta, k);
        best = std::max(best, v * env / scale);
    }
    return best;
}

std::vector<ScanSample> scan_curve(const KernelTable& table, int k, int order, int samples) {
    if (samples < 2) throw std::invalid_argument("scan_curve: need at least two samples");
    const double c = localization_scan(table, k, order);
    const double n = table.degree;
    const double scale = std::pow(n, 2.0 * order);
    std::vector<ScanSample> curve;
    curve.reserve(samples);
    for (int i = 1; i <= samples; ++i) {
        const double theta = M_PI * i / samples;
        ScanSample s;
        s.theta = theta;
        s.value = eval_kernel_derivs<3>(table, std::cos(theta))[order];
        s.envelope = c * scale / std::pow(1.0 + n * theta, k);
        curve.push_back(s);
    }
    return curve;
}

}  // namespace spheresr
