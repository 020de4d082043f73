#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

#include "spheresr/geometry.hpp"
#include "spheresr/parallel.hpp"

namespace spheresr {

/// l-th derivative (l = 0..3) of the Legendre polynomial P_n at t, via the
/// three-term recurrence differentiated l times. Throws for l > 3.
double legendre(int n, double t, int order = 0);

/// Gegenbauer polynomial of dimension d = 5 normalized to P(1) = 1,
/// i.e. C_n^{3/2}(t) / C_n^{3/2}(1). Used by the derivative cross-check
/// P'_{n,3}(t) = n(n+1)/2 * P_{n-1,5}(t).
double ultraspherical_p5(int n, double t);

/// Sums S_l = sum_{n=0}^{n_max} c[n] * d^l/dt^l P_n(t) for l = 0..L in one
/// recurrence pass. This is the inner kernel of every zonal-kernel
/// evaluation, so it is header-inlined.
template <int L>
std::array<double, L + 1> legendre_series_sums(const double* c, int n_max, double t) {
    static_assert(L >= 0 && L <= 3);
    std::array<double, L + 1> sums{};
    // p = P_n and derivatives, pm = P_{n-1} and derivatives.
    std::array<double, L + 1> pm{}, p{};
    pm[0] = 1.0;  // P_0
    sums[0] += c[0] * pm[0];
    if (n_max == 0) return sums;
    p[0] = t;  // P_1
    if constexpr (L >= 1) p[1] = 1.0;
    for (int l = 0; l <= L; ++l) sums[l] += c[1] * p[l];
    for (int n = 1; n < n_max; ++n) {
        std::array<double, L + 1> next{};
        const double an = 2.0 * n + 1.0;
        const double inv = 1.0 / (n + 1.0);
        next[0] = (an * t * p[0] - n * pm[0]) * inv;
        if constexpr (L >= 1) next[1] = (an * (t * p[1] + p[0]) - n * pm[1]) * inv;
        if constexpr (L >= 2) next[2] = (an * (t * p[2] + 2.0 * p[1]) - n * pm[2]) * inv;
        if constexpr (L >= 3) next[3] = (an * (t * p[3] + 3.0 * p[2]) - n * pm[3]) * inv;
        pm = p;
        p = next;
        for (int l = 0; l <= L; ++l) sums[l] += c[n + 1] * p[l];
    }
    return sums;
}

/// Real orthonormal spherical harmonic Y_{n,j}(p), j = 1..2n+1.
/// j = 1 is the zonal (m = 0) harmonic; j = 2k / j = 2k+1 are the cosine /
/// sine harmonics of azimuthal order k. No Condon-Shortley phase.
double real_sph_harmonic(int n, int j, const SpherePoint& p);

/// All Y_{n,j}(p) for n = 0..N in (n, j) lexicographic order; out must hold
/// (N+1)^2 values. Index of (n, j) is n^2 + j - 1.
void eval_harmonics_point(int degree, const SpherePoint& p, double* out);

/// Projection kernel K_N(t) = sum_{n<=N} (2n+1)/(4pi) P_n(t).
double projection_kernel(int degree, double t);

/// Finite signed sum of point masses sum_m c_m delta_{xi_m}.
struct DiracEnsemble {
    struct Atom {
        double weight = 0.0;
        SpherePoint location;
    };
    std::vector<Atom> atoms;

    double tv_norm() const;
    /// Throws std::invalid_argument if two atoms share a location.
    void require_distinct_locations() const;
};

/// Coefficients y_{n,j} = <f, Y_{n,j}>, 0 <= n <= N, stored lexicographically;
/// total length (N+1)^2.
struct MomentVector {
    int degree = 0;
    Eigen::VectorXd values;

    static int size_for_degree(int degree) { return (degree + 1) * (degree + 1); }
    static int index(int n, int j) { return n * n + j - 1; }

    MomentVector() = default;
    explicit MomentVector(int degree_)
        : degree(degree_), values(Eigen::VectorXd::Zero(size_for_degree(degree_))) {}
};

/// Exact moments of a Dirac ensemble: y_{n,j} = sum_m c_m Y_{n,j}(xi_m).
MomentVector moments(const DiracEnsemble& f, int degree);

/// Dense (N+1)^2 x |grid| matrix whose column k holds {Y_{n,j}(grid_k)}.
/// Column-major, so each grid point's harmonics are contiguous.
Eigen::MatrixXd sampling_matrix(const std::vector<SpherePoint>& grid, int degree,
                                Exec exec = Exec::Parallel);

}  // namespace spheresr
