#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "spheresr/certificate.hpp"
#include "spheresr/geometry.hpp"
#include "spheresr/kernel.hpp"

using namespace spheresr;

namespace {

std::vector<SpherePoint> random_separated_nodes(std::mt19937_64& rng, int count,
                                                double min_dist) {
    std::vector<SpherePoint> nodes;
    while (static_cast<int>(nodes.size()) < count) {
        const auto cand = oracles::random_point(rng);
        bool ok = true;
        for (const auto& p : nodes)
            if (geodesic_distance(p, cand) < min_dist) {
                ok = false;
                break;
            }
        if (ok) nodes.push_back(cand);
    }
    return nodes;
}

std::vector<double> random_signs(std::mt19937_64& rng, int count) {
    std::vector<double> u(count);
    for (auto& v : u) v = (rng() & 1) ? 1.0 : -1.0;
    return u;
}

std::vector<TangentFrame> default_frames(const std::vector<SpherePoint>& nodes) {
    std::vector<TangentFrame> f;
    for (const auto& p : nodes) f.push_back(tangent_frame(p));
    return f;
}

}  // namespace

TEST_CASE("single-node system is the diagonal reference matrix") {
    const KernelTable table = build_kernel(12);
    const double fp1 = eval_kernel(table, 1.0, 1);
    const std::vector<SpherePoint> nodes = {SpherePoint(0.2, -0.4, 0.89)};
    const auto sys = assemble_system(nodes, {1.0}, table, default_frames(nodes));
    Eigen::Matrix3d expect;
    expect << 1.0, 0, 0, 0, -fp1, 0, 0, 0, -fp1;
    CHECK((sys.matrix - expect).cwiseAbs().maxCoeff() < 1e-10);

    const auto sol = solve_certificate(nodes, {1.0}, table);
    CHECK(sol.certificate.alpha[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(sol.certificate.beta[0]) < 1e-14);
    CHECK(std::abs(sol.certificate.gamma[0]) < 1e-14);
}

TEST_CASE("assembled blocks carry the node identities on their diagonals") {
    const int degree = 24;
    const KernelTable table = build_kernel(degree);
    const double fp1 = eval_kernel(table, 1.0, 1);
    std::mt19937_64 rng(31);
    const auto nodes = random_separated_nodes(rng, 7, 4.0 / degree);
    const auto signs = random_signs(rng, 7);
    const auto sys = assemble_system(nodes, signs, table, default_frames(nodes));
    const int s = 7;
    const double scale = 1e-12 * degree * degree;
    for (int k = 0; k < s; ++k) {
        CHECK(sys.matrix(k, k) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(sys.matrix(s + k, k)) < scale);          // F_1^1 diag
        CHECK(std::abs(sys.matrix(2 * s + k, k)) < scale);      // F_1^2 diag
        CHECK(std::abs(sys.matrix(k, s + k)) < scale);          // ~F_1^1 diag
        CHECK(std::abs(sys.matrix(k, 2 * s + k)) < scale);      // ~F_1^2 diag
        CHECK(std::abs(sys.matrix(s + k, 2 * s + k)) < scale);  // F_2^{1,2} diag
        CHECK(std::abs(sys.matrix(2 * s + k, s + k)) < scale);  // F_2^{2,1} diag
        CHECK(sys.matrix(s + k, s + k) == doctest::Approx(-fp1).epsilon(1e-12));
        CHECK(sys.matrix(2 * s + k, 2 * s + k) == doctest::Approx(-fp1).epsilon(1e-12));
    }
    // F_0 symmetry
    for (int k = 0; k < s; ++k)
        for (int m = 0; m < s; ++m)
            CHECK(std::abs(sys.matrix(k, m) - sys.matrix(m, k)) < 1e-12);
}

TEST_CASE("degenerate and invalid inputs are rejected") {
    const KernelTable table = build_kernel(8);
    const SpherePoint p(0.2, 0.3, 0.93);
    CHECK_THROWS_AS(assemble_system({p, p}, {1.0, 1.0}, table, default_frames({p, p})),
                    std::invalid_argument);
    CHECK_THROWS_AS(assemble_system({p}, {0.5}, table, default_frames({p})),
                    std::invalid_argument);
    CHECK_THROWS_AS(assemble_system({}, {}, table, {}), std::invalid_argument);
}

TEST_CASE("near-coincident nodes raise the ill-posed error naming the pair") {
    const KernelTable table = build_kernel(20);
    const SpherePoint a(0.2, 0.3, 0.93);
    const SpherePoint b(a.vec() + Vec3(1e-10, 0, 0));
    const SpherePoint c(-0.6, 0.7, 0.3);
    try {
        solve_certificate({c, a, b}, {1.0, 1.0, -1.0}, table);
        FAIL("expected IllPosedSystemError");
    } catch (const IllPosedSystemError& e) {
        CHECK(e.node_a == 1);
        CHECK(e.node_b == 2);
        CHECK(e.distance < 1e-8);
    }
}

TEST_CASE("separated configurations solve to interpolation accuracy") {
    const int degree = 40;
    const KernelTable table = build_kernel(degree);
    std::mt19937_64 rng(37);
    const auto nodes = random_separated_nodes(rng, 10, 4.0 / degree);
    const auto signs = random_signs(rng, 10);
    const auto sys = assemble_system(nodes, signs, table, default_frames(nodes));
    const auto sol = solve_certificate(nodes, signs, table);

    CHECK(sol.report.interp_error < 1e-8);
    CHECK(sol.report.grad_norm < 1e-6 * degree * degree);
    CHECK(sol.report.coefficients.alpha_inf <= 1.5);
    CHECK(sol.report.coefficients.n_beta_inf <= 1.0);
    CHECK(sol.report.coefficients.n_gamma_inf <= 1.0);
    CHECK(sol.report.system_diagnostics.condition_estimate < 1e8);
    CHECK(sol.report.system_diagnostics.schur_i_minus_fs_norm < 1.0);

    Eigen::VectorXd coeff(3 * 10);
    coeff << sol.certificate.alpha, sol.certificate.beta, sol.certificate.gamma;
    CHECK((sys.matrix * coeff - sys.rhs).cwiseAbs().maxCoeff() < 1e-9);

    for (int m = 0; m < 10; ++m)
        CHECK(std::abs(eval_certificate(sol.certificate, nodes[m]) - signs[m]) < 1e-8);
}

TEST_CASE("certificate gradient and Hessian match flow finite differences") {
    const int degree = 16;
    const KernelTable table = build_kernel(degree);
    std::mt19937_64 rng(41);
    const auto nodes = random_separated_nodes(rng, 5, 4.0 / degree);
    const auto sol = solve_certificate(nodes, random_signs(rng, 5), table);
    const auto q = [&](const SpherePoint& p) { return eval_certificate(sol.certificate, p); };

    for (int i = 0; i < 25; ++i) {
        const auto xi = oracles::random_point(rng);
        const TangentFrame f = tangent_frame(xi);
        const RotationGenerator g[2] = {rotation_generator(f, 1), rotation_generator(f, 2)};

        const Eigen::Vector2d grad = eval_certificate_gradient(sol.certificate, xi);
        const double scale_g = degree;  // |D q| = O(N)
        for (int r = 0; r < 2; ++r) {
            const double fd = oracles::flow_diff(q, g[r], xi, 1e-5);
            CHECK(std::abs(fd - grad[r]) <= 1e-4 * std::max(std::abs(grad[r]), scale_g));
        }

        const Eigen::Matrix2d hess = eval_certificate_hessian(sol.certificate, xi);
        const double scale_h = double(degree) * degree;
        const double h = 1e-4;
        for (int r1 = 0; r1 < 2; ++r1)
            for (int r2 = 0; r2 < 2; ++r2) {
                const auto inner = [&](const SpherePoint& p) {
                    return oracles::flow_diff(q, g[r2], p, h);
                };
                const double fd = (inner(oracles::flow(g[r1], xi, h)) -
                                   inner(oracles::flow(g[r1], xi, -h))) /
                                  (2.0 * h);
                const double exact = (r1 == r2) ? hess(r1, r1) : hess(0, 1);
                CHECK(std::abs(fd - exact) <= 1e-3 * std::max(std::abs(exact), scale_h));
            }
    }
}

TEST_CASE("validation passes under separation and flags clustered nodes") {
    const int degree = 20;
    const KernelTable table = build_kernel(degree);
    std::mt19937_64 rng(43);
    const auto nodes = random_separated_nodes(rng, 6, 4.0 / degree);
    const auto signs = random_signs(rng, 6);
    const auto sol = solve_certificate(nodes, signs, table);
    ValidationOptions opts;
    opts.far_grid_size = std::max(50 * degree * degree, 20000);
    const auto report = validate_certificate(sol.certificate, sol.report, opts);
    CHECK(report.validated);
    CHECK(report.off_support_max < 1.0 - 1e-3);
    CHECK(report.hessian_ok);

    // Below the separation threshold the certificate must break down.
    const auto base = oracles::random_point(rng);
    const TangentFrame f = tangent_frame(base);
    std::vector<SpherePoint> clustered = {base};
    for (int i = 1; i < 4; ++i)
        clustered.push_back(SpherePoint(std::cos(i * 0.5 / degree) * base.vec() +
                                        std::sin(i * 0.5 / degree) * f.t1));
    bool flagged = false;
    try {
        const auto bad = solve_certificate(clustered, {1.0, -1.0, 1.0, -1.0}, table);
        const auto vb = validate_certificate(bad.certificate, bad.report, opts);
        flagged = vb.off_support_max >= 1.0 || !vb.hessian_ok;
    } catch (const IllPosedSystemError&) {
        flagged = true;
    }
    CHECK(flagged);
}

TEST_CASE("single-node certificate reduces to the kernel itself") {
    const int degree = 20;
    const KernelTable table = build_kernel(degree);
    const SpherePoint node(0.1, 0.7, std::sqrt(1.0 - 0.01 - 0.49));
    const auto sol = solve_certificate({node}, {1.0}, table);

    std::mt19937_64 rng(47);
    for (int i = 0; i < 200; ++i) {
        const auto xi = oracles::random_point(rng);
        CHECK(eval_certificate(sol.certificate, xi) ==
              doctest::Approx(eval_kernel(table, std::clamp(xi.dot(node), -1.0, 1.0)))
                  .epsilon(1e-12));
    }
    ValidationOptions opts;
    opts.far_grid_size = 30000;
    const auto report = validate_certificate(sol.certificate, sol.report, opts);
    CHECK(report.off_support_max < 1.0);
    CHECK(report.hessian_ok);
}

TEST_CASE("ring counts obey the linear-in-m bound with one constant") {
    std::mt19937_64 rng(53);
    double fitted = 0.0;
    for (int degree : {20, 40}) {
        for (int trial = 0; trial < 3; ++trial) {
            const double nu = 4.0;
            const auto nodes = random_separated_nodes(rng, 24, nu / degree);
            for (const auto& center : nodes) {
                const int rings = static_cast<int>(M_PI * degree / nu);
                for (int m = 1; m <= rings; ++m) {
                    int count = 0;
                    for (const auto& p : nodes) {
                        const double d = geodesic_distance(center, p);
                        if (d > nu * m / degree && d <= nu * (m + 1) / degree) ++count;
                    }
                    fitted = std::max(fitted, double(count) / m);
                }
            }
        }
    }
    CHECK(fitted > 0.0);
    CHECK(fitted <= 16.0);  // frozen after calibration; the paper's bound is c*m
}

TEST_CASE("off-diagonal kernel row sums shrink as the separation grows") {
    const int degree = 40;
    const KernelTable table = build_kernel(degree);
    std::mt19937_64 rng(59);
    std::vector<double> row_sums;
    for (double nu : {2.0, 3.0, 4.0, 6.0}) {
        double acc = 0.0;
        for (int trial = 0; trial < 3; ++trial) {
            const auto nodes = random_separated_nodes(rng, 10, nu / degree);
            double worst = 0.0;
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                double sum = 0.0;
                for (std::size_t m = 0; m < nodes.size(); ++m)
                    if (m != k)
                        sum += std::abs(eval_kernel(
                            table, std::clamp(nodes[k].dot(nodes[m]), -1.0, 1.0)));
                worst = std::max(worst, sum);
            }
            acc += worst;
        }
        row_sums.push_back(acc / 3.0);
    }
    for (std::size_t i = 0; i + 1 < row_sums.size(); ++i)
        CHECK(row_sums[i + 1] <= row_sums[i] * (1.0 + 1e-9));
}

TEST_CASE("the polynomial is invariant to the per-node frame choice") {
    const int degree = 24;
    const KernelTable table = build_kernel(degree);
    std::mt19937_64 rng(61);
    const auto nodes = random_separated_nodes(rng, 6, 4.0 / degree);
    const auto signs = random_signs(rng, 6);
    const auto base = solve_certificate(nodes, signs, table);

    std::vector<TangentFrame> rotated = default_frames(nodes);
    for (auto& f : rotated) {
        const double a = 2.0 * M_PI * oracles::unit_double(rng);
        const Vec3 t1 = std::cos(a) * f.t1 + std::sin(a) * f.t2;
        const Vec3 t2 = -std::sin(a) * f.t1 + std::cos(a) * f.t2;
        f.t1 = t1;
        f.t2 = t2;
    }
    const auto mixed = solve_certificate(nodes, signs, table, rotated);
    for (int i = 0; i < 100; ++i) {
        const auto xi = oracles::random_point(rng);
        CHECK(std::abs(eval_certificate(base.certificate, xi) -
                       eval_certificate(mixed.certificate, xi)) < 1e-9);
    }
}

TEST_CASE("non-negative certificate: interpolation, antipode value, range") {
    std::mt19937_64 rng(67);
    const SpherePoint single(0.3, -0.2, std::sqrt(1.0 - 0.09 - 0.04));
    const auto q1 = nonneg_certificate({single}, 5);
    CHECK(q1(single) == 1.0);
    CHECK(q1(SpherePoint(-single.vec())) == doctest::Approx(0.5).epsilon(1e-15));

    std::vector<SpherePoint> nodes;
    for (int i = 0; i < 12; ++i) nodes.push_back(oracles::random_point(rng));
    const auto q = nonneg_certificate(nodes, 12);
    for (const auto& node : nodes) CHECK(q(node) == 1.0);
    double sup = 0.0, inf = 1.0;
    for (int i = 0; i < 100000; ++i) {
        const double v = q(oracles::random_point(rng));
        sup = std::max(sup, v);
        inf = std::min(inf, v);
    }
    CHECK(sup < 1.0);
    CHECK(inf >= 0.0);

    CHECK_THROWS_AS(nonneg_certificate(nodes, 11), std::invalid_argument);
}

TEST_CASE("heatmap attains the sign at nodes and stays within the validated range") {
    const int degree = 15;
    const KernelTable table = build_kernel(degree);
    std::mt19937_64 rng(71);
    const auto nodes = random_separated_nodes(rng, 4, 4.0 / degree);
    const std::vector<double> signs = {1.0, -1.0, 1.0, 1.0};
    const auto sol = solve_certificate(nodes, signs, table);
    const auto rows = heatmap_export(sol.certificate, 181, 360);
    CHECK(rows.size() == 181u * 360u);

    for (std::size_t m = 0; m < nodes.size(); ++m) {
        double best_dist = M_PI;
        double best_q = 0.0;
        for (const auto& r : rows) {
            const double lat = r.lat * M_PI / 180.0, lon = r.lon * M_PI / 180.0;
            const SpherePoint p(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                                std::sin(lat));
            const double d = geodesic_distance(p, nodes[m]);
            if (d < best_dist) {
                best_dist = d;
                best_q = r.q;
            }
        }
        CHECK(std::abs(best_q - signs[m]) < 0.05);
    }
    for (const auto& r : rows) CHECK(std::abs(r.q) <= 1.0 + 1e-9);
}
