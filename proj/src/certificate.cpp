#include "spheresr/certificate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>

namespace spheresr {

namespace {

double inf_norm(const Eigen::MatrixXd& m) {
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

std::pair<int, int> closest_pair(const std::vector<SpherePoint>& nodes) {
    int a = 0, b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            const double d = geodesic_distance(nodes[i], nodes[j]);
            if (d < best) {
                best = d;
                a = static_cast<int>(i);
                b = static_cast<int>(j);
            }
        }
    return {a, b};
}

bool negative_definite(const Eigen::Matrix2d& h) {
    const double det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
    const double tr = h(0, 0) + h(1, 1);
    return det > 0.0 && tr < 0.0;
}

SpherePoint ring_point(const TangentFrame& frame, double radius, double angle) {
    const Vec3 v = std::cos(radius) * frame.base.vec() +
                   std::sin(radius) * (std::cos(angle) * frame.t1 + std::sin(angle) * frame.t2);
    return SpherePoint(v);
}

}  // namespace

AssembledSystem assemble_system(const std::vector<SpherePoint>& nodes,
                                const std::vector<double>& signs, const KernelTable& table,
                                const std::vector<TangentFrame>& frames, Exec exec) {
    const int s = static_cast<int>(nodes.size());
    if (s < 1) throw std::invalid_argument("assemble_system: need at least one node");
    if (signs.size() != nodes.size() || frames.size() != nodes.size())
        throw std::invalid_argument("assemble_system: nodes, signs and frames sizes differ");
    for (double u : signs)
        if (std::abs(std::abs(u) - 1.0) > 1e-12)
            throw std::invalid_argument("assemble_system: signs must be +-1");
    for (int i = 0; i + 1 < s; ++i)
        for (int j = i + 1; j < s; ++j)
            if (geodesic_distance(nodes[i], nodes[j]) <= 0.0)
                throw std::invalid_argument("assemble_system: duplicate nodes give a degenerate system");

    std::vector<Mat3> m1(s), m2(s);
    for (int i = 0; i < s; ++i) {
        m1[i] = rotation_generator(frames[i], 1).matrix;
        m2[i] = rotation_generator(frames[i], 2).matrix;
    }

    AssembledSystem sys;
    sys.matrix.resize(3 * s, 3 * s);
    sys.rhs = Eigen::VectorXd::Zero(3 * s);
    for (int k = 0; k < s; ++k) sys.rhs[k] = signs[k];

    const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(static) if (par)
    for (int k = 0; k < s; ++k) {
        const Vec3& xk = nodes[k].vec();
        for (int m = 0; m < s; ++m) {
            const Vec3& xm = nodes[m].vec();
            const double t = std::clamp(xk.dot(xm), -1.0, 1.0);
            const auto f = eval_kernel_derivs<2>(table, t);

            // D at xi_k acts through the frame tangents: A_{k,r} xi_k = t_{k,r}.
            const double da1 = frames[k].t1.dot(xm);
            const double da2 = frames[k].t2.dot(xm);
            // D at xi_m acts on the first slot through A_{m,r} = -M_{m,r}.
            const Vec3 vb1 = -(m1[m] * xk);
            const Vec3 vb2 = -(m2[m] * xk);
            const double db1 = vb1.dot(xm);
            const double db2 = vb2.dot(xm);
            // Second-order Leibniz cross terms (A_{m,r2} A_{k,r1} xi_k) . xi_m.
            const double w11 = (-(m1[m] * frames[k].t1)).dot(xm);
            const double w12 = (-(m2[m] * frames[k].t1)).dot(xm);
            const double w21 = (-(m1[m] * frames[k].t2)).dot(xm);
            const double w22 = (-(m2[m] * frames[k].t2)).dot(xm);

            sys.matrix(k, m) = f[0];
            sys.matrix(k, s + m) = f[1] * db1;
            sys.matrix(k, 2 * s + m) = f[1] * db2;
            sys.matrix(s + k, m) = f[1] * da1;
            sys.matrix(2 * s + k, m) = f[1] * da2;
            sys.matrix(s + k, s + m) = f[2] * da1 * db1 + f[1] * w11;
            sys.matrix(s + k, 2 * s + m) = f[2] * da1 * db2 + f[1] * w12;
            sys.matrix(2 * s + k, s + m) = f[2] * da2 * db1 + f[1] * w21;
            sys.matrix(2 * s + k, 2 * s + m) = f[2] * da2 * db2 + f[1] * w22;
        }
    }
    return sys;
}

CertificateSolution solve_certificate(const std::vector<SpherePoint>& nodes,
                                      const std::vector<double>& signs, const KernelTable& table,
                                      Exec exec) {
    std::vector<TangentFrame> frames;
    frames.reserve(nodes.size());
    for (const auto& p : nodes) frames.push_back(tangent_frame(p));
    return solve_certificate(nodes, signs, table, frames, exec);
}

CertificateSolution solve_certificate(const std::vector<SpherePoint>& nodes,
                                      const std::vector<double>& signs, const KernelTable& table,
                                      const std::vector<TangentFrame>& frames, Exec exec) {
    const int s = static_cast<int>(nodes.size());
    AssembledSystem sys = assemble_system(nodes, signs, table, frames, exec);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.matrix);
    const Eigen::MatrixXd inv = lu.inverse();
    const double cond = inf_norm(sys.matrix) * inf_norm(inv);
    if (!std::isfinite(cond) || cond > 1e12) {
        if (s >= 2) {
            auto [a, b] = closest_pair(nodes);
            std::ostringstream msg;
            msg << "solve_certificate: ill-posed configuration (condition estimate " << cond
                << "); closest node pair (" << a << ", " << b << ") at distance "
                << geodesic_distance(nodes[a], nodes[b]);
            throw IllPosedSystemError(msg.str(), a, b, geodesic_distance(nodes[a], nodes[b]));
        }
        throw IllPosedSystemError("solve_certificate: ill-posed single-node system", 0, 0, 0.0);
    }
    const Eigen::VectorXd coeff = lu.solve(sys.rhs);

    CertificateSolution out;
    Certificate& cert = out.certificate;
    cert.degree = table.degree;
    cert.nodes = nodes;
    cert.frames = frames;
    cert.signs = signs;
    cert.kernel = table;
    cert.alpha = coeff.segment(0, s);
    cert.beta = coeff.segment(s, s);
    cert.gamma = coeff.segment(2 * s, s);
    cert.gens1.reserve(s);
    cert.gens2.reserve(s);
    for (int i = 0; i < s; ++i) {
        cert.gens1.push_back(rotation_generator(frames[i], 1));
        cert.gens2.push_back(rotation_generator(frames[i], 2));
    }

    CertificateReport& report = out.report;
    SystemDiagnostics& diag = report.system_diagnostics;
    const double fp1 = eval_kernel_derivs<1>(table, 1.0)[1];

    const auto f0 = sys.matrix.block(0, 0, s, s);
    const auto ft1 = sys.matrix.block(0, s, s, s);
    const auto ft2 = sys.matrix.block(0, 2 * s, s, s);
    const auto f1 = sys.matrix.block(s, 0, s, s);
    const auto f2 = sys.matrix.block(2 * s, 0, s, s);
    const auto b11 = sys.matrix.block(s, s, s, s);
    const auto b12 = sys.matrix.block(s, 2 * s, s, s);
    const auto b21 = sys.matrix.block(2 * s, s, s, s);
    const auto b22 = sys.matrix.block(2 * s, 2 * s, s, s);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(s, s);

    diag.i_minus_f0_norm = inf_norm(eye - f0);
    diag.f1_norm = std::max(inf_norm(f1), inf_norm(f2));
    diag.f1_tilde_norm = std::max(inf_norm(ft1), inf_norm(ft2));
    diag.f2_mixed_norm = std::max(inf_norm(b12), inf_norm(b21));
    diag.f2_diag_dev_norm =
        std::max(inf_norm(-fp1 * eye - b11), inf_norm(-fp1 * eye - b22));
    diag.condition_estimate = cond;

    // Two-level Schur quantities; they witness why the system is invertible.
    Eigen::PartialPivLU<Eigen::MatrixXd> lu22(b22);
    const Eigen::MatrixXd x21 = lu22.solve(Eigen::MatrixXd(b21));
    const Eigen::MatrixXd x1 = lu22.solve(Eigen::MatrixXd(f2));
    const Eigen::MatrixXd fs2 = b11 - b12 * x21;
    const Eigen::MatrixXd fs1 = f1 - b12 * x1;
    const Eigen::MatrixXd fst1 = ft1 - ft2 * x21;
    Eigen::PartialPivLU<Eigen::MatrixXd> lus2(fs2);
    const Eigen::MatrixXd fs = f0 - fst1 * lus2.solve(fs1) - ft2 * x1;
    diag.schur_fs1_norm = inf_norm(fs1);
    diag.schur_fs2_dev_norm = inf_norm(eye - fs2 / (-fp1));
    diag.schur_i_minus_fs_norm = inf_norm(eye - fs);

    CoefficientDiagnostics& cd = report.coefficients;
    cd.alpha_inf = cert.alpha.cwiseAbs().maxCoeff();
    cd.n_beta_inf = table.degree * cert.beta.cwiseAbs().maxCoeff();
    cd.n_gamma_inf = table.degree * cert.gamma.cwiseAbs().maxCoeff();
    cd.alpha_minus_u_inf = 0.0;
    for (int i = 0; i < s; ++i)
        cd.alpha_minus_u_inf = std::max(cd.alpha_minus_u_inf, std::abs(cert.alpha[i] - signs[i]));

    report.min_separation = s >= 2 ? min_separation(nodes) : M_PI;
    report.interp_error = 0.0;
    report.grad_norm = 0.0;
    for (int m = 0; m < s; ++m) {
        report.interp_error =
            std::max(report.interp_error, std::abs(eval_certificate(cert, nodes[m]) - signs[m]));
        for (int r = 1; r <= 2; ++r) {
            const RotationGenerator& g = (r == 1) ? cert.gens1[m] : cert.gens2[m];
            double grad = 0.0;
            for (int i = 0; i < s; ++i) {
                const RotationGenerator pair1[2] = {g, cert.gens1[i]};
                const RotationGenerator pair2[2] = {g, cert.gens2[i]};
                grad += cert.alpha[i] * rot_deriv_F(table, {&g, 1}, nodes[m], nodes[i]) +
                        cert.beta[i] * rot_deriv_F(table, pair1, nodes[m], nodes[i]) +
                        cert.gamma[i] * rot_deriv_F(table, pair2, nodes[m], nodes[i]);
            }
            report.grad_norm = std::max(report.grad_norm, std::abs(grad));
        }
    }
    return out;
}

double eval_certificate(const Certificate& cert, const SpherePoint& xi) {
    const int s = static_cast<int>(cert.nodes.size());
    double q = 0.0;
    for (int m = 0; m < s; ++m) {
        const Vec3& xm = cert.nodes[m].vec();
        const double t = std::clamp(xi.vec().dot(xm), -1.0, 1.0);
        const auto f = eval_kernel_derivs<1>(cert.kernel, t);
        // (A_{m,1} xi) . xi_m = t2 . (xi x xi_m); (A_{m,2} xi) . xi_m = -t1 . (xi x xi_m)
        const Vec3 cr = xi.vec().cross(xm);
        const double d1 = cert.frames[m].t2.dot(cr);
        const double d2 = -cert.frames[m].t1.dot(cr);
        q += cert.alpha[m] * f[0] + (cert.beta[m] * d1 + cert.gamma[m] * d2) * f[1];
    }
    return q;
}

Eigen::Vector2d eval_certificate_gradient(const Certificate& cert, const SpherePoint& xi) {
    const int s = static_cast<int>(cert.nodes.size());
    const TangentFrame fx = tangent_frame(xi);
    const RotationGenerator gx[2] = {rotation_generator(fx, 1), rotation_generator(fx, 2)};
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (int r = 0; r < 2; ++r) {
        for (int m = 0; m < s; ++m) {
            const RotationGenerator pair1[2] = {gx[r], cert.gens1[m]};
            const RotationGenerator pair2[2] = {gx[r], cert.gens2[m]};
            grad[r] += cert.alpha[m] * rot_deriv_F(cert.kernel, {&gx[r], 1}, xi, cert.nodes[m]) +
                       cert.beta[m] * rot_deriv_F(cert.kernel, pair1, xi, cert.nodes[m]) +
                       cert.gamma[m] * rot_deriv_F(cert.kernel, pair2, xi, cert.nodes[m]);
        }
    }
    return grad;
}

Eigen::Matrix2d eval_certificate_hessian(const Certificate& cert, const SpherePoint& xi) {
    const int s = static_cast<int>(cert.nodes.size());
    const TangentFrame fx = tangent_frame(xi);
    const RotationGenerator gx[2] = {rotation_generator(fx, 1), rotation_generator(fx, 2)};
    auto entry = [&](int r1, int r2) {
        double h = 0.0;
        for (int m = 0; m < s; ++m) {
            const RotationGenerator pair[2] = {gx[r1], gx[r2]};
            const RotationGenerator triple1[3] = {gx[r1], gx[r2], cert.gens1[m]};
            const RotationGenerator triple2[3] = {gx[r1], gx[r2], cert.gens2[m]};
            h += cert.alpha[m] * rot_deriv_F(cert.kernel, pair, xi, cert.nodes[m]) +
                 cert.beta[m] * rot_deriv_F(cert.kernel, triple1, xi, cert.nodes[m]) +
                 cert.gamma[m] * rot_deriv_F(cert.kernel, triple2, xi, cert.nodes[m]);
        }
        return h;
    };
    Eigen::Matrix2d h;
    h(0, 0) = entry(0, 0);
    h(1, 1) = entry(1, 1);
    h(0, 1) = h(1, 0) = entry(0, 1);
    return h;
}

CertificateReport validate_certificate(const Certificate& cert, const CertificateReport& solved,
                                       const ValidationOptions& options, Exec exec) {
    CertificateReport report = solved;
    const int s = static_cast<int>(cert.nodes.size());
    const double radius = options.sigma / cert.degree;
    const double cos_radius = std::cos(radius);

    const auto grid = fibonacci_grid(options.far_grid_size);
    double far_max = 0.0;
    const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(static) reduction(max : far_max) if (par)
    for (std::size_t i = 0; i < grid.size(); ++i) {
        bool inside_cap = false;
        for (int m = 0; m < s && !inside_cap; ++m)
            inside_cap = grid[i].dot(cert.nodes[m]) > cos_radius;
        if (!inside_cap) far_max = std::max(far_max, std::abs(eval_certificate(cert, grid[i])));
    }
    report.off_support_max = far_max;

    bool ok = true;
    const int per_ring = std::max(options.near_samples / 2, 1);
    for (int m = 0; m < s && ok; ++m) {
        const double u = cert.signs[m];
        ok = negative_definite(u * eval_certificate_hessian(cert, cert.nodes[m]));
        for (int ring = 0; ring < 2 && ok; ++ring) {
            const double r = (ring == 0) ? 0.5 * radius : radius;
            for (int i = 0; i < per_ring && ok; ++i) {
                const double angle = 2.0 * M_PI * (i + 0.5 * ring) / per_ring;
                const SpherePoint p = ring_point(cert.frames[m], r, angle);
                ok = negative_definite(u * eval_certificate_hessian(cert, p));
                if (ring == 1) ok = ok && std::abs(eval_certificate(cert, p)) < 1.0;
            }
        }
    }
    report.hessian_ok = ok;
    report.validated = true;
    return report;
}

NonnegCertificate::NonnegCertificate(std::vector<SpherePoint> nodes, int degree)
    : nodes_(std::move(nodes)), degree_(degree) {
    if (static_cast<int>(nodes_.size()) > degree_)
        throw std::invalid_argument(
            "nonneg_certificate: sparsity violation, need |nodes| <= degree");
}

double NonnegCertificate::operator()(const SpherePoint& xi) const {
    double prod = 1.0;
    for (const auto& node : nodes_) {
        if (xi == node) return 1.0;
        prod *= 1.0 - std::clamp(xi.dot(node), -1.0, 1.0);
    }
    return 1.0 - std::ldexp(prod, -(static_cast<int>(nodes_.size()) + 1));
}

NonnegCertificate nonneg_certificate(const std::vector<SpherePoint>& nodes, int degree) {
    return NonnegCertificate(nodes, degree);
}

std::vector<HeatmapRow> heatmap_export(const Certificate& cert, int lat_steps, int lon_steps) {
    if (lat_steps < 2 || lon_steps < 1)
        throw std::invalid_argument("heatmap_export: need lat_steps >= 2 and lon_steps >= 1");
    std::vector<HeatmapRow> rows;
    rows.reserve(static_cast<std::size_t>(lat_steps) * lon_steps);
    for (int i = 0; i < lat_steps; ++i) {
        const double lat = -90.0 + 180.0 * i / (lat_steps - 1);
        const double lat_rad = lat * M_PI / 180.0;
        for (int j = 0; j < lon_steps; ++j) {
            const double lon = -180.0 + 360.0 * j / lon_steps;
            const double lon_rad = lon * M_PI / 180.0;
            const SpherePoint p(std::cos(lat_rad) * std::cos(lon_rad),
                                std::cos(lat_rad) * std::sin(lon_rad), std::sin(lat_rad));
            rows.push_back({lat, lon, eval_certificate(cert, p)});
        }
    }
    return rows;
}

}  // namespace spheresr
