#pragma once

#include <array>
#include <span>
#include <vector>

#include "spheresr/geometry.hpp"
#include "spheresr/harmonics.hpp"
#include "spheresr/parallel.hpp"

namespace spheresr {

/// Smooth cutoff: 1 on [0, 1/2], 0 on [1, inf), and the exp-based partition
/// bump phi(2-2t) / (phi(2-2t) + phi(2t-1)) in between, phi(s) = exp(-1/s).
/// Monotone decreasing, C-infinity, symmetric about t = 3/4.
double rho(double t);

/// Band-limited zonal kernel F_N(t) = C(N) * sum_n rho(n/N) (2n+1)/(4pi) P_n(t),
/// normalized so F_N(1) = 1. coeffs[n] stores rho(n/N) (2n+1)/(4pi).
struct KernelTable {
    int degree = 0;
    std::vector<double> coeffs;
    double normalization = 0.0;  // C(N) = 1 / sum coeffs
};

/// Builds the table for N >= 2. Guarantees F_N(1) = 1 and F_N'(1) >= N^2/64.
KernelTable build_kernel(int degree);

/// l-th univariate derivative of F_N at t, l = 0..3.
double eval_kernel(const KernelTable& table, double t, int order = 0);

/// All derivatives 0..L of F_N at t in a single recurrence pass.
template <int L>
std::array<double, L + 1> eval_kernel_derivs(const KernelTable& table, double t) {
    auto sums = legendre_series_sums<L>(table.coeffs.data(), table.degree, t);
    for (double& v : sums) v *= table.normalization;
    return sums;
}

/// Rotational derivative of the dot-product harmonic G(xi, xi0) = xi . xi0
/// along the generator flow: d/dt (exp(-tM) xi . xi0) at t = 0 = (-M xi) . xi0.
double rot_deriv_G(const RotationGenerator& gen, const SpherePoint& xi, const SpherePoint& xi0);

/// Iterated rotational derivative of xi -> F_N(xi . xi0) along up to three
/// generator flows; gens are listed outermost first, i.e. gens = {a, b}
/// computes D_a D_b F_N(xi, xi0). Closed Leibniz forms, validated against
/// nested finite differences in the tests.
double rot_deriv_F(const KernelTable& table, std::span<const RotationGenerator> gens,
                   const SpherePoint& xi, const SpherePoint& xi0);

/// Fitted localization constant
///   c = sup_theta |F_N^(l)(cos theta)| (1 + N theta)^k / N^(2l)
/// over a dense theta grid in (0, pi]. k in {3,4,5}, l in 0..3.
double localization_scan(const KernelTable& table, int k, int order,
                         Exec exec = Exec::Parallel);

/// One scan sample for CSV export: the kernel value at theta and the fitted
/// envelope c * N^(2l) / (1 + N theta)^k.
struct ScanSample {
    double theta;
    double value;
    double envelope;
};

/// Dense scan curve for the kernel-scan CLI subcommand.
std::vector<ScanSample> scan_curve(const KernelTable& table, int k, int order, int samples);

}  // namespace spheresr
