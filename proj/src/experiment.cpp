#include "spheresr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "spheresr/io.hpp"

namespace spheresr {

namespace {

double unit_double(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

SpherePoint random_sphere_point(std::mt19937_64& rng) {
    const double z = 2.0 * unit_double(rng) - 1.0;
    const double phi = 2.0 * M_PI * unit_double(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return SpherePoint(r * std::cos(phi), r * std::sin(phi), z);
}

}  // namespace

int ExperimentConfig::resolved_grid_size() const {
    if (grid_size > 0) return grid_size;
    return std::max(50 * degree * degree, 20000);
}

void ExperimentConfig::validate() const {
    if (degree < 2) throw std::invalid_argument("config: degree must be >= 2");
    if (num_atoms < 1) throw std::invalid_argument("config: num_atoms must be >= 1");
    if (separation_factor < 0.0)
        throw std::invalid_argument("config: separation_factor must be >= 0");
    const int g = resolved_grid_size();
    if (g < (degree + 1) * (degree + 1))
        throw std::invalid_argument("config: grid_size must be at least (N+1)^2");
    if (weight_law.kind == WeightLaw::Kind::Uniform && !(weight_law.a <= weight_law.b))
        throw std::invalid_argument("config: uniform weight law needs a <= b");
    // Cap-packing feasibility: num_atoms caps of radius nu/(2N) must fit.
    const double cap = 1.0 - std::cos(separation_factor / (2.0 * degree));
    if (num_atoms * cap > 1.9)
        throw std::invalid_argument("config: packing infeasible for this separation_factor");
}

bool operator==(const WeightLaw& x, const WeightLaw& y) {
    if (x.kind != y.kind) return false;
    if (x.kind == WeightLaw::Kind::UnitSigns) return true;
    return x.a == y.a && x.b == y.b;
}

bool operator==(const ExperimentConfig& x, const ExperimentConfig& y) {
    return x.seed == y.seed && x.degree == y.degree && x.num_atoms == y.num_atoms &&
           x.separation_factor == y.separation_factor && x.weight_law == y.weight_law &&
           x.grid_size == y.grid_size && x.solver.max_iters == y.solver.max_iters &&
           x.solver.primal_tol == y.solver.primal_tol && x.solver.dual_tol == y.solver.dual_tol &&
           x.solver.step_ratio == y.solver.step_ratio && x.solver.nonneg == y.solver.nonneg &&
           x.snap_to_grid == y.snap_to_grid && x.weight_floor_factor == y.weight_floor_factor &&
           x.cluster_radius_factor == y.cluster_radius_factor &&
           x.certificate.sigma == y.certificate.sigma &&
           x.certificate.near_samples == y.certificate.near_samples &&
           x.certificate.grid_multiplier == y.certificate.grid_multiplier &&
           x.certificate.grid_min == y.certificate.grid_min &&
           x.thresholds.support_distance == y.thresholds.support_distance &&
           x.thresholds.weight_error == y.thresholds.weight_error;
}

DiracEnsemble gen_ensemble(const ExperimentConfig& cfg) {
    if (cfg.snap_to_grid) return gen_ensemble(cfg, fibonacci_grid(cfg.resolved_grid_size()));
    return gen_ensemble(cfg, {});
}

DiracEnsemble gen_ensemble(const ExperimentConfig& cfg, const std::vector<SpherePoint>& grid) {
    cfg.validate();
    if (cfg.snap_to_grid && grid.empty())
        throw std::invalid_argument("gen_ensemble: snapping requested but no grid given");

    std::mt19937_64 rng(cfg.seed);
    const double min_dist = cfg.separation_factor / cfg.degree;
    std::vector<SpherePoint> points;
    points.reserve(cfg.num_atoms);
    long attempts = 0;
    while (static_cast<int>(points.size()) < cfg.num_atoms) {
        if (++attempts > 1000000)
            throw std::runtime_error("gen_ensemble: retry budget exhausted (10^6 rejections)");
        SpherePoint cand = random_sphere_point(rng);
        if (cfg.snap_to_grid) cand = grid[nearest_grid_point(grid, cand)];
        bool ok = true;
        for (const auto& p : points) {
            const double d = geodesic_distance(p, cand);
            if (d <= 0.0 || d < min_dist) {
                ok = false;
                break;
            }
        }
        if (ok) points.push_back(cand);
    }

    DiracEnsemble f;
    f.atoms.reserve(cfg.num_atoms);
    for (const auto& p : points) {
        double w;
        if (cfg.weight_law.kind == WeightLaw::Kind::UnitSigns) {
            w = (rng() & 1) ? 1.0 : -1.0;
        } else {
            w = cfg.weight_law.a + (cfg.weight_law.b - cfg.weight_law.a) * unit_double(rng);
        }
        f.atoms.push_back({w, p});
    }
    return f;
}

PipelineResult run_pipeline(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    io::write_config_json(path("config.json"), cfg);
    std::ofstream log(path("run.log"), std::ios::app);
    const auto t0 = std::chrono::system_clock::now();
    log << "start " << std::chrono::duration_cast<std::chrono::milliseconds>(
                           t0.time_since_epoch())
                           .count()
        << " ms since epoch\n";

    PipelineResult result;
    const int grid_size = cfg.resolved_grid_size();
    const auto grid = fibonacci_grid(grid_size);
    result.truth = gen_ensemble(cfg, grid);
    io::write_ensemble_csv(path("ensemble.csv"), result.truth);

    const MomentVector y = moments(result.truth, cfg.degree);
    io::write_moments_json(path("moments.json"), y);

    MeasurementOperator op(grid, cfg.degree);
    const RecoveryResult rec = cfg.solver.nonneg ? nonneg_recover(y, op, cfg.solver)
                                                 : tv_min_recover(y, op, cfg.solver);

    const double wmax = rec.measure.weights.size() ? rec.measure.weights.cwiseAbs().maxCoeff() : 0.0;
    const double spacing = std::sqrt(4.0 * M_PI / grid_size);
    result.recovered = extract_support(rec.measure, cfg.weight_floor_factor * wmax,
                                       cfg.cluster_radius_factor * spacing);
    io::write_ensemble_csv(path("recovered.csv"), result.recovered);

    result.recovery = recovery_report(result.truth, result.recovered, y);
    result.recovery.residual = rec.report.residual;
    result.recovery.iterations = rec.report.iterations;
    result.recovery.converged = rec.report.converged;
    result.recovery.objective = rec.report.objective;
    io::write_recovery_report_json(path("recovery_report.json"), result.recovery);

    // Certificate on the true support; failures are recorded, not fatal.
    try {
        const KernelTable table = build_kernel(cfg.degree);
        std::vector<SpherePoint> nodes;
        std::vector<double> signs;
        for (const auto& a : result.truth.atoms) {
            nodes.push_back(a.location);
            signs.push_back(a.weight >= 0.0 ? 1.0 : -1.0);
        }
        CertificateSolution sol = solve_certificate(nodes, signs, table);
        ValidationOptions vopts;
        vopts.sigma = cfg.certificate.sigma;
        vopts.near_samples = cfg.certificate.near_samples;
        vopts.far_grid_size =
            std::max(cfg.certificate.grid_multiplier * cfg.degree * cfg.degree,
                     cfg.certificate.grid_min);
        result.certificate = validate_certificate(sol.certificate, sol.report, vopts);
        result.certificate_solved = true;
    } catch (const std::exception& e) {
        result.certificate_error = e.what();
    }
    io::write_certificate_report_json(path("certificate_report.json"), result.certificate,
                                      result.certificate_error);

    result.passed = result.recovery.converged &&
                    result.recovery.support_distance <= cfg.thresholds.support_distance &&
                    result.recovery.weight_error <= cfg.thresholds.weight_error;

    const auto t1 = std::chrono::system_clock::now();
    log << "done in " << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
        << " ms, passed=" << result.passed << '\n';
    return result;
}

}  // namespace spheresr
