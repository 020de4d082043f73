#include "spheresr/harmonics.hpp"

#include <cmath>
#include <stdexcept>

namespace spheresr {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

void check_order(int order) {
    if (order < 0 || order > 3)
        throw std::invalid_argument("legendre: derivative order must be in 0..3");
}

}  // namespace

double legendre(int n, double t, int order) {
    check_order(order);
    if (n < 0) throw std::invalid_argument("legendre: negative degree");
    std::vector<double> c(n + 1, 0.0);
    c[n] = 1.0;
    return legendre_series_sums<3>(c.data(), n, t)[order];
}

double ultraspherical_p5(int n, double t) {
    if (n < 0) throw std::invalid_argument("ultraspherical_p5: negative degree");
    // C_n^{3/2} recurrence, then normalize by C_n^{3/2}(1) = (n+1)(n+2)/2.
    double cm = 1.0;       // C_0
    double c = 3.0 * t;    // C_1 = 2 lambda t
    if (n == 0) return 1.0;
    for (int k = 2; k <= n; ++k) {
        const double next = (2.0 * (k + 0.5) * t * c - (k + 1.0) * cm) / k;
        cm = c;
        c = next;
    }
    return c / ((n + 1.0) * (n + 2.0) / 2.0);
}

double real_sph_harmonic(int n, int j, const SpherePoint& p) {
    if (n < 0 || j < 1 || j > 2 * n + 1)
        throw std::out_of_range("real_sph_harmonic: index out of range");
    const int m = j / 2;
    const double z = p.z();
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));

    // Normalized associated Legendre \bar P_n^m via the stable sectoral +
    // upward recurrence.
    double pmm = std::sqrt(1.0 / kFourPi);
    for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
    double pk = pmm;
    if (n > m) {
        double pkm1 = pmm;
        pk = std::sqrt(2.0 * m + 3.0) * z * pmm;
        for (int k = m + 2; k <= n; ++k) {
            const double a = std::sqrt((4.0 * k * k - 1.0) / (double(k) * k - double(m) * m));
            const double b = std::sqrt((double(k - 1) * (k - 1) - double(m) * m) /
                                       (4.0 * double(k - 1) * (k - 1) - 1.0));
            const double next = a * (z * pk - b * pkm1);
            pkm1 = pk;
            pk = next;
        }
    }
    if (m == 0) return pk;

    const double rho = std::hypot(p.x(), p.y());
    double cosphi = 1.0, sinphi = 0.0;
    if (rho > 0.0) {
        cosphi = p.x() / rho;
        sinphi = p.y() / rho;
    }
    double cm = cosphi, sm = sinphi;  // cos(m phi), sin(m phi)
    for (int k = 2; k <= m; ++k) {
        const double cn = cm * cosphi - sm * sinphi;
        sm = sm * cosphi + cm * sinphi;
        cm = cn;
    }
    const double azimuth = (j % 2 == 0) ? cm : sm;
    return std::sqrt(2.0) * pk * azimuth;
}

void eval_harmonics_point(int degree, const SpherePoint& p, double* out) {
    if (degree < 0) throw std::invalid_argument("eval_harmonics_point: negative degree");
    const double z = p.z();
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double rho = std::hypot(p.x(), p.y());
    double cosphi = 1.0, sinphi = 0.0;
    if (rho > 0.0) {
        cosphi = p.x() / rho;
        sinphi = p.y() / rho;
    }

    const double sqrt2 = std::sqrt(2.0);
    double pmm = std::sqrt(1.0 / kFourPi);
    double cm = 1.0, sm = 0.0;
    for (int m = 0; m <= degree; ++m) {
        if (m > 0) {
            pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
            const double cn = cm * cosphi - sm * sinphi;
            sm = sm * cosphi + cm * sinphi;
            cm = cn;
        }
        const double az_c = (m == 0) ? 1.0 : sqrt2 * cm;
        const double az_s = sqrt2 * sm;
        double pkm1 = 0.0, pk = pmm;
        for (int n = m; n <= degree; ++n) {
            if (n > m) {
                double next;
                if (n == m + 1) {
                    next = std::sqrt(2.0 * m + 3.0) * z * pk;
                } else {
                    const double a =
                        std::sqrt((4.0 * n * n - 1.0) / (double(n) * n - double(m) * m));
                    const double b = std::sqrt((double(n - 1) * (n - 1) - double(m) * m) /
                                               (4.0 * double(n - 1) * (n - 1) - 1.0));
                    next = a * (z * pk - b * pkm1);
                }
                pkm1 = pk;
                pk = next;
            }
            double* row = out + n * n;
            if (m == 0) {
                row[0] = pk;  // j = 1
            } else {
                row[2 * m - 1] = pk * az_c;  // j = 2m
                row[2 * m] = pk * az_s;      // j = 2m + 1
            }
        }
    }
}

double projection_kernel(int degree, double t) {
    if (degree < 0) throw std::invalid_argument("projection_kernel: negative degree");
    std::vector<double> c(degree + 1);
    for (int n = 0; n <= degree; ++n) c[n] = (2.0 * n + 1.0) / kFourPi;
    return legendre_series_sums<0>(c.data(), degree, t)[0];
}

double DiracEnsemble::tv_norm() const {
    double s = 0.0;
    for (const auto& a : atoms) s += std::abs(a.weight);
    return s;
}

void DiracEnsemble::require_distinct_locations() const {
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i)
        for (std::size_t j = i + 1; j < atoms.size(); ++j)
            if (geodesic_distance(atoms[i].location, atoms[j].location) <= 0.0)
                throw std::invalid_argument("DiracEnsemble: coincident atom locations");
}

MomentVector moments(const DiracEnsemble& f, int degree) {
    if (degree < 0) throw std::invalid_argument("moments: negative degree");
    MomentVector y(degree);
    std::vector<double> buf(MomentVector::size_for_degree(degree));
    for (const auto& atom : f.atoms) {
        eval_harmonics_point(degree, atom.location, buf.data());
        for (int i = 0; i < y.values.size(); ++i) y.values[i] += atom.weight * buf[i];
    }
    return y;
}

Eigen::MatrixXd sampling_matrix(const std::vector<SpherePoint>& grid, int degree, Exec exec) {
    if (grid.empty()) throw std::invalid_argument("sampling_matrix: empty grid");
    const int rows = MomentVector::size_for_degree(degree);
    const int cols = static_cast<int>(grid.size());
    Eigen::MatrixXd a(rows, cols);
    const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(static) if (par)
    for (int k = 0; k < cols; ++k) eval_harmonics_point(degree, grid[k], a.col(k).data());
    return a;
}

}  // namespace spheresr
