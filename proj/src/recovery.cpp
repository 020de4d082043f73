#include "spheresr/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <stdexcept>

namespace spheresr {

namespace {

constexpr int kScreenPeriod = 25;
constexpr int kObjectiveWindow = 50;
constexpr double kScreenKeep = 0.9;  // keep columns with dual attraction above this
constexpr int kTraceStride = 25;

double shrink(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

/// Dual attraction of column j: how strongly the current dual variable wants
/// to activate it. At a fixed point it is <= 1 on inactive columns.
double attraction(double g, bool nonneg) { return nonneg ? -g : std::abs(g); }

}  // namespace

MeasurementOperator::MeasurementOperator(std::vector<SpherePoint> grid, int degree, Exec exec)
    : grid_(std::move(grid)), degree_(degree) {
    if (grid_.empty()) throw std::invalid_argument("MeasurementOperator: empty grid");
    matrix_ = sampling_matrix(grid_, degree_, exec);
}

void MeasurementOperator::apply(const Eigen::VectorXd& w, Eigen::VectorXd& y, Exec exec) const {
    const int m = cols();
    y.setZero(rows());
    if (exec == Exec::Serial) {
        for (int j = 0; j < m; ++j)
            if (w[j] != 0.0) y += w[j] * matrix_.col(j);
        return;
    }
#pragma omp parallel
    {
        Eigen::VectorXd local = Eigen::VectorXd::Zero(rows());
#pragma omp for schedule(static) nowait
        for (int j = 0; j < m; ++j)
            if (w[j] != 0.0) local += w[j] * matrix_.col(j);
#pragma omp critical
        y += local;
    }
}

void MeasurementOperator::apply_columns(const Eigen::VectorXd& w, const std::vector<int>& columns,
                                        Eigen::VectorXd& y) const {
    y.setZero(rows());
    for (int j : columns)
        if (w[j] != 0.0) y += w[j] * matrix_.col(j);
}

void MeasurementOperator::apply_transpose(const Eigen::VectorXd& p, Eigen::VectorXd& v,
                                          Exec exec) const {
    const int m = cols();
    v.resize(m);
    const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(static) if (par)
    for (int j = 0; j < m; ++j) v[j] = matrix_.col(j).dot(p);
}

void MeasurementOperator::apply_transpose_columns(const Eigen::VectorXd& p,
                                                  const std::vector<int>& columns,
                                                  Eigen::VectorXd& v) const {
    for (int j : columns) v[j] = matrix_.col(j).dot(p);
}

double MeasurementOperator::operator_norm() const {
    if (norm_ > 0.0) return norm_;
    std::mt19937_64 rng(0x5eed5eedULL);
    Eigen::VectorXd v(cols());
    for (int j = 0; j < cols(); ++j)
        v[j] = 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
    v.normalize();
    Eigen::VectorXd u(rows()), vt(cols());
    double lambda = 0.0;
    for (int it = 0; it < 50; ++it) {
        apply(v, u);
        apply_transpose(u, vt);
        lambda = vt.norm();
        if (lambda == 0.0) break;
        v = vt / lambda;
    }
    norm_ = std::sqrt(lambda) * 1.001;
    return norm_;
}

namespace {

RecoveryResult solve_l1(const MomentVector& y, const MeasurementOperator& op,
                        const SolverOptions& opts, bool nonneg) {
    if (opts.max_iters < 1 || opts.primal_tol <= 0.0 || opts.dual_tol <= 0.0)
        throw std::invalid_argument("solver options: tolerances must be positive, max_iters >= 1");
    if (y.degree != op.degree())
        throw std::invalid_argument("tv_min_recover: moment degree does not match operator");
    if (op.cols() < op.rows())
        throw std::invalid_argument("tv_min_recover: grid must have at least (N+1)^2 points");

    const int m = op.cols();
    const int d = op.rows();
    RecoveryResult out;
    out.measure.grid = op.grid();
    out.measure.weights = Eigen::VectorXd::Zero(m);

    const double ynorm = y.values.norm();
    if (ynorm == 0.0) {
        out.report.converged = true;
        return out;
    }

    const double big_l = op.operator_norm();
    const double tau = opts.step_ratio / big_l;
    const double sigma = 1.0 / (opts.step_ratio * big_l);

    // Near-feasible warm start: A A^T is close to (M / 4pi) I on a
    // quasi-uniform grid, so (4pi / M) A^T y nearly interpolates y and its
    // objective starts above the optimum.
    Eigen::VectorXd w(m);
    op.apply_transpose(y.values, w);
    w *= 4.0 * M_PI / m;
    if (nonneg) w = w.cwiseMax(0.0);
    const double wmax = w.cwiseAbs().maxCoeff();

    std::vector<char> active(m, 0);
    std::vector<int> support;
    for (int j = 0; j < m; ++j) {
        if (std::abs(w[j]) >= 0.05 * wmax) {
            active[j] = 1;
            support.push_back(j);
        } else {
            w[j] = 0.0;
        }
    }

    Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd aw(d), aw_prev(d), abar(d), g = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd w_avg;
    if (opts.trace_objective) w_avg = w;
    op.apply_columns(w, support, aw);
    aw_prev = aw;

    std::deque<double> window;
    double residual = (aw - y.values).norm();
    double objective = w.cwiseAbs().sum();
    int iterations = 0;
    bool converged = false;

    auto rescreen = [&](bool& found_violator) {
        op.apply_transpose(p, g);
        found_violator = false;
        support.clear();
        for (int j = 0; j < m; ++j) {
            const bool keep = w[j] != 0.0 || attraction(g[j], nonneg) > kScreenKeep;
            if (keep && !active[j] && attraction(g[j], nonneg) > 1.0) found_violator = true;
            active[j] = keep ? 1 : 0;
            if (keep) support.push_back(j);
        }
    };

    for (int k = 1; k <= opts.max_iters; ++k) {
        iterations = k;
        abar = 2.0 * aw - aw_prev;
        p += sigma * (abar - y.values);

        const bool screen_now = (k - 1) % kScreenPeriod == 0;
        bool violator = false;
        if (screen_now)
            rescreen(violator);
        else
            op.apply_transpose_columns(p, support, g);

        aw_prev = aw;
        for (int j : support) {
            const double v = w[j] - tau * g[j];
            w[j] = nonneg ? std::max(v - tau, 0.0) : shrink(v, tau);
        }
        op.apply_columns(w, support, aw);

        residual = (aw - y.values).norm();
        objective = 0.0;
        for (int j : support) objective += std::abs(w[j]);

        if (opts.trace_objective) {
            w_avg += (w - w_avg) / (k + 1);
            if (k % kTraceStride == 0)
                out.report.averaged_objective_trace.push_back(w_avg.cwiseAbs().sum());
        }

        window.push_back(objective);
        if (static_cast<int>(window.size()) > kObjectiveWindow) window.pop_front();
        if (residual < opts.primal_tol * ynorm &&
            static_cast<int>(window.size()) == kObjectiveWindow) {
            const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
            if (*hi - *lo <= opts.dual_tol * std::max(std::abs(objective), 1e-300)) {
                // Verify the fixed-point conditions on all columns before
                // stopping; reactivate any column the dual still attracts.
                bool found = false;
                rescreen(found);
                if (!found) {
                    converged = true;
                    break;
                }
                window.clear();
            }
        }
    }

    out.measure.weights = std::move(w);
    out.report.residual = residual;
    out.report.objective = objective;
    out.report.iterations = iterations;
    out.report.converged = converged;
    return out;
}

}  // namespace

RecoveryResult tv_min_recover(const MomentVector& y, const MeasurementOperator& op,
                              const SolverOptions& opts) {
    SolverOptions o = opts;
    o.nonneg = false;
    return solve_l1(y, op, o, false);
}

RecoveryResult tv_min_recover(const MomentVector& y, const std::vector<SpherePoint>& grid,
                              const SolverOptions& opts) {
    return tv_min_recover(y, MeasurementOperator(grid, y.degree), opts);
}

RecoveryResult nonneg_recover(const MomentVector& y, const MeasurementOperator& op,
                              const SolverOptions& opts) {
    SolverOptions o = opts;
    o.nonneg = true;
    return solve_l1(y, op, o, true);
}

RecoveryResult nonneg_recover(const MomentVector& y, const std::vector<SpherePoint>& grid,
                              const SolverOptions& opts) {
    return nonneg_recover(y, MeasurementOperator(grid, y.degree), opts);
}

DiracEnsemble extract_support(const GridMeasure& m, double weight_floor, double cluster_radius) {
    if (cluster_radius < 0.0)
        throw std::invalid_argument("extract_support: cluster_radius must be >= 0");
    std::vector<int> surviving;
    for (int j = 0; j < m.weights.size(); ++j)
        if (std::abs(m.weights[j]) >= weight_floor) surviving.push_back(j);
    std::sort(surviving.begin(), surviving.end(), [&](int a, int b) {
        const double wa = std::abs(m.weights[a]), wb = std::abs(m.weights[b]);
        if (wa != wb) return wa > wb;
        return a < b;
    });

    DiracEnsemble out;
    std::vector<char> used(m.weights.size(), 0);
    for (int seed : surviving) {
        if (used[seed]) continue;
        std::vector<int> members;
        for (int j : surviving)
            if (!used[j] && geodesic_distance(m.grid[seed], m.grid[j]) <= cluster_radius) {
                members.push_back(j);
                used[j] = 1;
            }
        DiracEnsemble::Atom atom;
        if (members.size() == 1) {
            atom.location = m.grid[seed];  // bit-exact grid point
            atom.weight = m.weights[seed];
        } else {
            Vec3 mean = Vec3::Zero();
            double wsum = 0.0;
            for (int j : members) {
                mean += std::abs(m.weights[j]) * m.grid[j].vec();
                wsum += m.weights[j];
            }
            atom.location = mean.norm() > 1e-12 ? SpherePoint(mean) : m.grid[seed];
            atom.weight = wsum;
        }
        out.atoms.push_back(atom);
    }
    return out;
}

RecoveryReport recovery_report(const DiracEnsemble& truth, const DiracEnsemble& recovered,
                               const MomentVector& y) {
    RecoveryReport r;
    r.residual = (moments(recovered, y.degree).values - y.values).norm();

    struct Pair {
        double dist;
        int t, rec;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < truth.atoms.size(); ++i)
        for (std::size_t j = 0; j < recovered.atoms.size(); ++j)
            pairs.push_back({geodesic_distance(truth.atoms[i].location,
                                               recovered.atoms[j].location),
                             static_cast<int>(i), static_cast<int>(j)});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.t != b.t) return a.t < b.t;
        return a.rec < b.rec;
    });
    std::vector<char> tm(truth.atoms.size(), 0), rm(recovered.atoms.size(), 0);
    for (const Pair& pr : pairs) {
        if (tm[pr.t] || rm[pr.rec]) continue;
        tm[pr.t] = rm[pr.rec] = 1;
        r.support_distance = std::max(r.support_distance, pr.dist);
        r.weight_error = std::max(
            r.weight_error, std::abs(truth.atoms[pr.t].weight - recovered.atoms[pr.rec].weight));
    }
    for (char matched : tm)
        if (!matched) r.support_distance = M_PI;
    for (char matched : rm)
        if (!matched) ++r.spurious_atoms;
    return r;
}

}  // namespace spheresr
