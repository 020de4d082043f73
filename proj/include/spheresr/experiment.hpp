#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spheresr/certificate.hpp"
#include "spheresr/geometry.hpp"
#include "spheresr/harmonics.hpp"
#include "spheresr/recovery.hpp"

namespace spheresr {

struct WeightLaw {
    enum class Kind { UnitSigns, Uniform };
    Kind kind = Kind::UnitSigns;
    double a = 0.5;  // bounds for the uniform law
    double b = 1.5;
};

struct PassThresholds {
    double support_distance = 0.0;  // exact support recovery expected on-grid
    double weight_error = 1e-3;
};

struct CertificateParams {
    double sigma = 0.2;
    int near_samples = 32;
    int grid_multiplier = 50;  // far-field grid = max(multiplier * N^2, grid_min)
    int grid_min = 20000;
};

/// One reproducible experiment: generation, measurement, recovery and
/// certification are all determined by this struct plus the seed.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    int degree = 40;
    int num_atoms = 10;
    double separation_factor = 4.0;  // nu_eff >= 0; minimum separation nu_eff / N
    WeightLaw weight_law;
    int grid_size = 0;  // 0 resolves to max(50 N^2, 20000)
    SolverOptions solver;
    bool snap_to_grid = true;
    double weight_floor_factor = 1e-4;   // weight floor = factor * max |w|
    double cluster_radius_factor = 2.0;  // cluster radius = factor * sqrt(4pi/M)
    CertificateParams certificate;
    PassThresholds thresholds;

    int resolved_grid_size() const;
    /// Throws std::invalid_argument when a field invariant or the spherical
    /// cap-packing feasibility bound s (1 - cos(nu/2N)) <= 1.9 is violated.
    void validate() const;
};

bool operator==(const WeightLaw&, const WeightLaw&);
bool operator==(const ExperimentConfig&, const ExperimentConfig&);

/// Rejection-samples num_atoms locations with pairwise separation at least
/// nu_eff / N (snapped to the recovery grid first when snap_to_grid is set),
/// then draws weights per the weight law. Deterministic in the seed.
DiracEnsemble gen_ensemble(const ExperimentConfig& cfg);
DiracEnsemble gen_ensemble(const ExperimentConfig& cfg, const std::vector<SpherePoint>& grid);

struct PipelineResult {
    DiracEnsemble truth;
    DiracEnsemble recovered;
    RecoveryReport recovery;
    CertificateReport certificate;
    bool certificate_solved = false;
    std::string certificate_error;
    bool passed = false;
};

/// gen -> moments -> recover -> extract_support -> report, plus certificate
/// solve + validation on the true support. Writes config.json, ensemble.csv,
/// moments.json, recovered.csv, certificate_report.json, recovery_report.json
/// into out_dir. Timestamps go to run.log only, so artifacts are
/// byte-identical for identical config + seed.
PipelineResult run_pipeline(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace spheresr
