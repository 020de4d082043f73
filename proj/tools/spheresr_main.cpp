// Command-line driver: gen | measure | recover | certify | kernel-scan |
// heatmap | pipeline. Structured artifacts are JSON, point/weight tables CSV.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "spheresr/certificate.hpp"
#include "spheresr/experiment.hpp"
#include "spheresr/geometry.hpp"
#include "spheresr/harmonics.hpp"
#include "spheresr/io.hpp"
#include "spheresr/kernel.hpp"
#include "spheresr/parallel.hpp"
#include "spheresr/recovery.hpp"

namespace {

using namespace spheresr;

ExperimentConfig load_config(const std::string& config_path, bool have_seed,
                             std::uint64_t seed) {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = io::read_config_json(config_path);
    if (have_seed) cfg.seed = seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();
    CLI::App app{"Sparse spike recovery on the sphere via TV minimization and dual certificates"};
    app.require_subcommand(1);

    std::string config_path, out_path, nodes_path, moments_path, ensemble_path, report_path;
    std::string heatmap_path, matrix_path;
    std::uint64_t seed = 0;
    bool have_seed = false;
    int degree = 40, grid_size = 0, order = 0, envelope_k = 3, samples = 2000;
    int lat_steps = 181, lon_steps = 360, max_iters = 0;
    double nu_check = 0.0, sigma = 0.2, tol = 0.0;
    bool nonneg = false;

    app.add_option("--config", config_path, "experiment config JSON (global)");
    auto* seed_opt = app.add_option("--seed", seed, "seed override (global)");
    app.add_option("--out", out_path, "output file or directory (global)");

    auto* gen = app.add_subcommand("gen", "generate a separated random ensemble");
    auto* measure = app.add_subcommand("measure", "project an ensemble onto V_N");
    measure->add_option("--ensemble", ensemble_path, "input ensemble CSV x,y,z,weight")
        ->required();
    measure->add_option("--degree", degree, "projection degree N");
    measure->add_option("--matrix-out", matrix_path, "also dump the sampling matrix (binary)");
    measure->add_option("--grid-size", grid_size, "grid size for --matrix-out");

    auto* recover = app.add_subcommand("recover", "TV-minimization recovery from moments");
    recover->add_option("--moments", moments_path, "moments JSON")->required();
    recover->add_option("--grid-size", grid_size, "recovery grid size");
    recover->add_option("--degree", degree, "expected degree (cross-checked)");
    recover->add_flag("--nonneg", nonneg, "restrict to non-negative measures");
    recover->add_option("--max-iters", max_iters, "solver iteration cap");
    recover->add_option("--tol", tol, "primal feasibility tolerance");
    recover->add_option("--report", report_path, "recovery report JSON");
    recover->add_option("--dump-matrix", matrix_path, "dump the sampling matrix (binary)");

    auto* certify = app.add_subcommand("certify", "solve + validate a dual certificate");
    certify->add_option("--degree", degree, "kernel degree N");
    certify->add_option("--nodes", nodes_path, "nodes CSV x,y,z[,sign]")->required();
    certify->add_option("--nu-check", nu_check, "warn if min separation < nu/N");
    certify->add_option("--grid", grid_size, "far-field validation grid size");
    certify->add_option("--sigma", sigma, "near-field cap radius factor sigma/N");
    certify->add_option("--report", report_path, "certificate report JSON");
    certify->add_option("--heatmap", heatmap_path, "lat,lon,q heatmap CSV");

    auto* scan = app.add_subcommand("kernel-scan", "localized-kernel decay scan CSV");
    scan->add_option("--degree", degree, "kernel degree N");
    scan->add_option("--order", order, "derivative order 0..3");
    scan->add_option("--k", envelope_k, "envelope exponent k in {3,4,5}");
    scan->add_option("--samples", samples, "number of theta samples");

    auto* heatmap = app.add_subcommand("heatmap", "certificate heatmap for a node file");
    heatmap->add_option("--degree", degree, "kernel degree N");
    heatmap->add_option("--nodes", nodes_path, "nodes CSV x,y,z[,sign]")->required();
    heatmap->add_option("--lat-steps", lat_steps, "latitude samples");
    heatmap->add_option("--lon-steps", lon_steps, "longitude samples");

    auto* pipeline = app.add_subcommand("pipeline", "full gen/measure/recover/certify run");

    CLI11_PARSE(app, argc, argv);
    have_seed = seed_opt->count() > 0;

    try {
        if (gen->parsed()) {
            ExperimentConfig cfg = load_config(config_path, have_seed, seed);
            const DiracEnsemble f = gen_ensemble(cfg);
            const std::string out = out_path.empty() ? "ensemble.csv" : out_path;
            io::write_ensemble_csv(out, f);
            std::printf("wrote %zu atoms to %s\n", f.atoms.size(), out.c_str());
        } else if (measure->parsed()) {
            const DiracEnsemble f = io::read_ensemble_csv(ensemble_path);
            const MomentVector y = moments(f, degree);
            const std::string out = out_path.empty() ? "moments.json" : out_path;
            io::write_moments_json(out, y);
            if (!matrix_path.empty()) {
                if (grid_size <= 0)
                    throw std::runtime_error("measure: --matrix-out needs --grid-size");
                io::write_matrix_binary(matrix_path,
                                        sampling_matrix(fibonacci_grid(grid_size), degree));
            }
            std::printf("wrote %d moments to %s\n", (int)y.values.size(), out.c_str());
        } else if (recover->parsed()) {
            const MomentVector y = io::read_moments_json(moments_path);
            if (degree != 40 && degree != y.degree)
                throw std::runtime_error("recover: --degree does not match the moments file");
            if (grid_size <= 0) grid_size = std::max(50 * y.degree * y.degree, 20000);
            SolverOptions opts;
            if (max_iters > 0) opts.max_iters = max_iters;
            if (tol > 0.0) opts.primal_tol = tol;
            MeasurementOperator op(fibonacci_grid(grid_size), y.degree);
            if (!matrix_path.empty()) io::write_matrix_binary(matrix_path, op.matrix());
            const RecoveryResult res =
                nonneg ? nonneg_recover(y, op, opts) : tv_min_recover(y, op, opts);
            const double wmax = res.measure.weights.cwiseAbs().maxCoeff();
            const double spacing = std::sqrt(4.0 * M_PI / grid_size);
            const DiracEnsemble rec =
                extract_support(res.measure, 1e-4 * wmax, 2.0 * spacing);
            const std::string out = out_path.empty() ? "recovered.csv" : out_path;
            io::write_ensemble_csv(out, rec);
            if (!report_path.empty()) io::write_recovery_report_json(report_path, res.report);
            std::printf("recovered %zu atoms (residual %.3e, %d iterations)\n", rec.atoms.size(),
                        res.report.residual, res.report.iterations);
            if (!res.report.converged) return 2;
        } else if (certify->parsed()) {
            const io::NodeFile nf = io::read_nodes_csv(nodes_path);
            const KernelTable table = build_kernel(degree);
            if (nu_check > 0.0 && nf.nodes.size() >= 2 &&
                min_separation(nf.nodes) < nu_check / degree)
                std::fprintf(stderr, "warning: min separation %.6f below %.6f = nu/N\n",
                             min_separation(nf.nodes), nu_check / degree);
            CertificateSolution sol = solve_certificate(nf.nodes, nf.signs, table);
            ValidationOptions vopts;
            vopts.sigma = sigma;
            vopts.far_grid_size =
                grid_size > 0 ? grid_size : std::max(50 * degree * degree, 20000);
            const CertificateReport report =
                validate_certificate(sol.certificate, sol.report, vopts);
            if (!report_path.empty()) io::write_certificate_report_json(report_path, report);
            if (!heatmap_path.empty())
                io::write_heatmap_csv(heatmap_path,
                                      heatmap_export(sol.certificate, lat_steps, lon_steps));
            std::printf("interp_error %.3e, off_support_max %.6f, hessian_ok %d\n",
                        report.interp_error, report.off_support_max, report.hessian_ok);
            if (!(report.off_support_max < 1.0 && report.hessian_ok)) return 2;
        } else if (scan->parsed()) {
            const KernelTable table = build_kernel(degree);
            const auto curve = scan_curve(table, envelope_k, order, samples);
            const std::string out = out_path.empty() ? "kernel_scan.csv" : out_path;
            io::write_scan_csv(out, curve);
            std::printf("wrote %zu scan rows to %s\n", curve.size(), out.c_str());
        } else if (heatmap->parsed()) {
            const io::NodeFile nf = io::read_nodes_csv(nodes_path);
            const KernelTable table = build_kernel(degree);
            CertificateSolution sol = solve_certificate(nf.nodes, nf.signs, table);
            const std::string out = out_path.empty() ? "heatmap.csv" : out_path;
            io::write_heatmap_csv(out, heatmap_export(sol.certificate, lat_steps, lon_steps));
            std::printf("wrote heatmap to %s\n", out.c_str());
        } else if (pipeline->parsed()) {
            ExperimentConfig cfg = load_config(config_path, have_seed, seed);
            const std::string out = out_path.empty() ? "run" : out_path;
            const PipelineResult result = run_pipeline(cfg, out);
            std::printf("pipeline %s: support_distance %.3e, weight_error %.3e\n",
                        result.passed ? "passed" : "FAILED", result.recovery.support_distance,
                        result.recovery.weight_error);
            if (!result.passed) return 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
