// Times the OpenMP kernels against their serial reference implementations:
// sampling-matrix assembly, operator forward/adjoint products, certificate
// system assembly, the far-field certificate scan and the localization scan.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "spheresr/certificate.hpp"
#include "spheresr/geometry.hpp"
#include "spheresr/harmonics.hpp"
#include "spheresr/kernel.hpp"
#include "spheresr/parallel.hpp"
#include "spheresr/recovery.hpp"

namespace {

using namespace spheresr;
using clock_type = std::chrono::steady_clock;

double time_once(const std::function<void()>& fn) {
    const auto t0 = clock_type::now();
    fn();
    const auto t1 = clock_type::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

double time_best(const std::function<void()>& fn, int reps = 3) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) best = std::min(best, time_once(fn));
    return best;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name,
                1e3 * serial, 1e3 * parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();
    const int degree = argc > 1 ? std::atoi(argv[1]) : 25;
    const int grid_size = argc > 2 ? std::atoi(argv[2]) : 20000;
    std::printf("N = %d, grid = %d, threads = %d\n\n", degree, grid_size, thread_count());

    const auto grid = fibonacci_grid(grid_size);
    const KernelTable table = build_kernel(degree);

    report("sampling_matrix",
           time_best([&] { sampling_matrix(grid, degree, Exec::Serial); }),
           time_best([&] { sampling_matrix(grid, degree, Exec::Parallel); }));

    MeasurementOperator op(grid, degree);
    std::mt19937_64 rng(7);
    Eigen::VectorXd w(op.cols()), p(op.rows()), out;
    for (int i = 0; i < w.size(); ++i) w[i] = (rng() >> 11) * 0x1.0p-53 - 0.5;
    for (int i = 0; i < p.size(); ++i) p[i] = (rng() >> 11) * 0x1.0p-53 - 0.5;

    report("operator forward",
           time_best([&] { op.apply(w, out, Exec::Serial); }),
           time_best([&] { op.apply(w, out, Exec::Parallel); }));
    report("operator adjoint",
           time_best([&] { op.apply_transpose(p, out, Exec::Serial); }),
           time_best([&] { op.apply_transpose(p, out, Exec::Parallel); }));

    // A separated node set for the certificate kernels.
    ExperimentConfig cfg;
    cfg.degree = degree;
    cfg.num_atoms = 12;
    cfg.separation_factor = 4.0;
    cfg.snap_to_grid = false;
    cfg.grid_size = grid_size;
    const DiracEnsemble f = gen_ensemble(cfg);
    std::vector<SpherePoint> nodes;
    std::vector<double> signs;
    std::vector<TangentFrame> frames;
    for (const auto& a : f.atoms) {
        nodes.push_back(a.location);
        signs.push_back(a.weight >= 0 ? 1.0 : -1.0);
        frames.push_back(tangent_frame(a.location));
    }

    report("assemble_system",
           time_best([&] { assemble_system(nodes, signs, table, frames, Exec::Serial); }),
           time_best([&] { assemble_system(nodes, signs, table, frames, Exec::Parallel); }));

    const CertificateSolution sol = solve_certificate(nodes, signs, table);
    ValidationOptions vopts;
    vopts.far_grid_size = grid_size;
    report("validate_certificate",
           time_best([&] { validate_certificate(sol.certificate, sol.report, vopts, Exec::Serial); }, 1),
           time_best([&] { validate_certificate(sol.certificate, sol.report, vopts, Exec::Parallel); }, 1));

    report("localization_scan",
           time_best([&] { localization_scan(table, 3, 0, Exec::Serial); }),
           time_best([&] { localization_scan(table, 3, 0, Exec::Parallel); }));
    return 0;
}
