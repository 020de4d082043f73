#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

#include "spheresr/geometry.hpp"
#include "spheresr/kernel.hpp"
#include "spheresr/parallel.hpp"

namespace spheresr {

/// Dual interpolating polynomial q in V_N:
///   q(xi) = sum_m alpha_m F_N(xi . xi_m)
///         + beta_m D_{xi_m,1} F_N(xi, xi_m) + gamma_m D_{xi_m,2} F_N(xi, xi_m).
/// Frames are stored per node; the polynomial itself is invariant to the
/// frame choice (only (beta, gamma) mix under in-plane rotations).
struct Certificate {
    int degree = 0;
    std::vector<SpherePoint> nodes;
    std::vector<TangentFrame> frames;
    std::vector<RotationGenerator> gens1;  // per-node generator, direction 1
    std::vector<RotationGenerator> gens2;  // per-node generator, direction 2
    std::vector<double> signs;
    Eigen::VectorXd alpha, beta, gamma;
    KernelTable kernel;
};

struct SystemDiagnostics {
    double i_minus_f0_norm = 0.0;         // ||I - F_0||_inf
    double f1_norm = 0.0;                 // max_r ||F_1^r||_inf
    double f1_tilde_norm = 0.0;           // max_r ||~F_1^r||_inf
    double f2_mixed_norm = 0.0;           // max ||F_2^{1,2}||_inf, ||F_2^{2,1}||_inf
    double f2_diag_dev_norm = 0.0;        // max_r ||-F'(1) I - F_2^{r,r}||_inf
    double condition_estimate = 0.0;      // inf-norm condition of the full system
    double schur_fs1_norm = 0.0;          // ||F_{s,1}||_inf
    double schur_fs2_dev_norm = 0.0;      // ||I - F_{s,2} / (-F'(1))||_inf
    double schur_i_minus_fs_norm = 0.0;   // ||I - F_s||_inf
};

struct CoefficientDiagnostics {
    double alpha_inf = 0.0;
    double n_beta_inf = 0.0;
    double n_gamma_inf = 0.0;
    double alpha_minus_u_inf = 0.0;
};

struct CertificateReport {
    double interp_error = 0.0;      // max_m |q(xi_m) - u_m|
    double grad_norm = 0.0;         // max_{m,r} |D_{xi_m,r} q(xi_m)|
    double off_support_max = 0.0;   // max |q| on the far-field validation grid
    bool hessian_ok = false;
    double min_separation = 0.0;
    SystemDiagnostics system_diagnostics;
    CoefficientDiagnostics coefficients;
    bool validated = false;  // off_support_max / hessian_ok only set after validation
};

/// Thrown when the interpolation system is numerically singular.
class IllPosedSystemError : public std::runtime_error {
  public:
    IllPosedSystemError(const std::string& what, int node_a, int node_b, double distance)
        : std::runtime_error(what), node_a(node_a), node_b(node_b), distance(distance) {}
    int node_a;
    int node_b;
    double distance;
};

struct AssembledSystem {
    Eigen::MatrixXd matrix;  // 3s x 3s, block order (alpha, beta, gamma)
    Eigen::VectorXd rhs;     // (u, 0, 0)
};

/// The interpolation system of blocks
///   [ F_0    ~F_1^1  ~F_1^2 ]
///   [ F_1^1  F_2^11  F_2^12 ]
///   [ F_1^2  F_2^21  F_2^22 ]
/// with F_0[k,m] = F_N(xi_k . xi_m), F_1^r[k,m] = D_{xi_k,r} F_N(xi_k, xi_m),
/// ~F_1^r[k,m] = D_{xi_m,r} F_N(xi_k, xi_m) and
/// F_2^{r1,r2}[k,m] = D_{xi_k,r1} D_{xi_m,r2} F_N(xi_k, xi_m).
AssembledSystem assemble_system(const std::vector<SpherePoint>& nodes,
                                const std::vector<double>& signs, const KernelTable& table,
                                const std::vector<TangentFrame>& frames,
                                Exec exec = Exec::Parallel);

struct CertificateSolution {
    Certificate certificate;
    CertificateReport report;
};

/// Solves the 3s x 3s system by dense partial-pivot LU and fills the system
/// and coefficient diagnostics plus interp_error / grad_norm. Throws
/// IllPosedSystemError when the condition estimate exceeds 1e12.
CertificateSolution solve_certificate(const std::vector<SpherePoint>& nodes,
                                      const std::vector<double>& signs,
                                      const KernelTable& table, Exec exec = Exec::Parallel);

/// Same with caller-provided frames (used by the frame-covariance tests).
CertificateSolution solve_certificate(const std::vector<SpherePoint>& nodes,
                                      const std::vector<double>& signs,
                                      const KernelTable& table,
                                      const std::vector<TangentFrame>& frames,
                                      Exec exec = Exec::Parallel);

/// q(xi).
double eval_certificate(const Certificate& cert, const SpherePoint& xi);

/// (D_{xi,1} q, D_{xi,2} q) in the canonical frame at xi.
Eigen::Vector2d eval_certificate_gradient(const Certificate& cert, const SpherePoint& xi);

/// [[D1 D1 q, D1 D2 q], [D1 D2 q, D2 D2 q]] with generators anchored at xi.
Eigen::Matrix2d eval_certificate_hessian(const Certificate& cert, const SpherePoint& xi);

struct ValidationOptions {
    int far_grid_size = 20000;
    double sigma = 0.2;     // caps of radius sigma / N around nodes
    int near_samples = 32;  // ring samples per node, split over two rings
};

/// Far field: max |q| over a Fibonacci grid excluding the node caps.
/// Near field: sign-flipped Hessian negative-definiteness at each node and on
/// two rings inside the cap, plus |q| < 1 on the cap rim. Failures are report
/// fields, not exceptions.
CertificateReport validate_certificate(const Certificate& cert, const CertificateReport& solved,
                                       const ValidationOptions& options,
                                       Exec exec = Exec::Parallel);

/// Explicit non-negative certificate 1 - 2^{-(s+1)} prod_m (1 - xi . xi_m),
/// valid in V_N whenever s = |nodes| <= N.
class NonnegCertificate {
  public:
    NonnegCertificate(std::vector<SpherePoint> nodes, int degree);
    double operator()(const SpherePoint& xi) const;
    int degree() const { return degree_; }
    const std::vector<SpherePoint>& nodes() const { return nodes_; }

  private:
    std::vector<SpherePoint> nodes_;
    int degree_;
};

NonnegCertificate nonneg_certificate(const std::vector<SpherePoint>& nodes, int degree);

struct HeatmapRow {
    double lat;  // degrees in [-90, 90]
    double lon;  // degrees in [-180, 180)
    double q;
};

/// Equiangular lat/lon table of q values (Figure-1 style export).
std::vector<HeatmapRow> heatmap_export(const Certificate& cert, int lat_steps, int lon_steps);

}  // namespace spheresr
