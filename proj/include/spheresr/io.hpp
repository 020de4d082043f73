#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "spheresr/certificate.hpp"
#include "spheresr/experiment.hpp"
#include "spheresr/geometry.hpp"
#include "spheresr/harmonics.hpp"
#include "spheresr/kernel.hpp"
#include "spheresr/recovery.hpp"

namespace spheresr::io {

/// Point lists as CSV rows `x,y,z` (17 significant digits, exact round trip).
void write_points_csv(const std::string& path, const std::vector<SpherePoint>& points);
std::vector<SpherePoint> read_points_csv(const std::string& path);

/// Point lists as a JSON array of [x, y, z] triples.
void write_points_json(const std::string& path, const std::vector<SpherePoint>& points);
std::vector<SpherePoint> read_points_json(const std::string& path);

/// Ensembles as CSV rows `x,y,z,weight`.
void write_ensemble_csv(const std::string& path, const DiracEnsemble& ensemble);
DiracEnsemble read_ensemble_csv(const std::string& path);

/// Node files for `certify`: rows `x,y,z[,sign]`; missing signs default to +1.
struct NodeFile {
    std::vector<SpherePoint> nodes;
    std::vector<double> signs;
};
NodeFile read_nodes_csv(const std::string& path);

/// MomentVector as JSON {"N": n, "values": [...]} in (n, j) order.
void write_moments_json(const std::string& path, const MomentVector& y);
MomentVector read_moments_json(const std::string& path);

/// Row-major binary matrix with an 8-byte header: rows then cols, each a
/// 32-bit little-endian integer, followed by row-major float64 data.
void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_binary(const std::string& path);

void write_certificate_report_json(const std::string& path, const CertificateReport& report,
                                   const std::string& error = "");
void write_recovery_report_json(const std::string& path, const RecoveryReport& report);

void write_heatmap_csv(const std::string& path, const std::vector<HeatmapRow>& rows);
void write_scan_csv(const std::string& path, const std::vector<ScanSample>& samples);

void write_config_json(const std::string& path, const ExperimentConfig& cfg);
ExperimentConfig read_config_json(const std::string& path);

}  // namespace spheresr::io
