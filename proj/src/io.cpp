#include "spheresr/io.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spheresr::io {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(path, mode);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream f(path, mode);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

std::vector<std::vector<double>> read_csv_rows(const std::string& path, std::size_t min_cols,
                                               std::size_t max_cols) {
    auto f = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < min_cols || row.size() > max_cols)
            throw std::runtime_error("unexpected column count in " + path + ": " + line);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_json_file(const std::string& path, const json& j) {
    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
    auto f = open_in(path);
    return json::parse(f);
}

void put_u32_le(std::ofstream& f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(std::ifstream& f) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw std::runtime_error("truncated binary matrix header");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

}  // namespace

void write_points_csv(const std::string& path, const std::vector<SpherePoint>& points) {
    auto f = open_out(path);
    for (const auto& p : points) f << fmt(p.x()) << ',' << fmt(p.y()) << ',' << fmt(p.z()) << '\n';
}

std::vector<SpherePoint> read_points_csv(const std::string& path) {
    std::vector<SpherePoint> pts;
    for (const auto& row : read_csv_rows(path, 3, 3)) pts.emplace_back(row[0], row[1], row[2]);
    return pts;
}

void write_points_json(const std::string& path, const std::vector<SpherePoint>& points) {
    json j = json::array();
    for (const auto& p : points) j.push_back({p.x(), p.y(), p.z()});
    write_json_file(path, j);
}

std::vector<SpherePoint> read_points_json(const std::string& path) {
    const json j = read_json_file(path);
    std::vector<SpherePoint> pts;
    for (const auto& a : j) pts.emplace_back(a.at(0).get<double>(), a.at(1).get<double>(),
                                             a.at(2).get<double>());
    return pts;
}

void write_ensemble_csv(const std::string& path, const DiracEnsemble& ensemble) {
    auto f = open_out(path);
    for (const auto& a : ensemble.atoms)
        f << fmt(a.location.x()) << ',' << fmt(a.location.y()) << ',' << fmt(a.location.z())
          << ',' << fmt(a.weight) << '\n';
}

DiracEnsemble read_ensemble_csv(const std::string& path) {
    DiracEnsemble e;
    for (const auto& row : read_csv_rows(path, 4, 4))
        e.atoms.push_back({row[3], SpherePoint(row[0], row[1], row[2])});
    return e;
}

NodeFile read_nodes_csv(const std::string& path) {
    NodeFile nf;
    for (const auto& row : read_csv_rows(path, 3, 4)) {
        nf.nodes.emplace_back(row[0], row[1], row[2]);
        nf.signs.push_back(row.size() == 4 ? row[3] : 1.0);
    }
    return nf;
}

void write_moments_json(const std::string& path, const MomentVector& y) {
    json j;
    j["N"] = y.degree;
    j["values"] = std::vector<double>(y.values.data(), y.values.data() + y.values.size());
    write_json_file(path, j);
}

MomentVector read_moments_json(const std::string& path) {
    const json j = read_json_file(path);
    MomentVector y(j.at("N").get<int>());
    const auto vals = j.at("values").get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != y.values.size())
        throw std::runtime_error("moments file has wrong length for its degree: " + path);
    for (int i = 0; i < y.values.size(); ++i) y.values[i] = vals[i];
    return y;
}

void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& m) {
    auto f = open_out(path, std::ios::binary);
    put_u32_le(f, static_cast<std::uint32_t>(m.rows()));
    put_u32_le(f, static_cast<std::uint32_t>(m.cols()));
    std::vector<double> row(m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
        f.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(sizeof(double) * row.size()));
    }
}

Eigen::MatrixXd read_matrix_binary(const std::string& path) {
    auto f = open_in(path, std::ios::binary);
    const std::uint32_t rows = get_u32_le(f);
    const std::uint32_t cols = get_u32_le(f);
    Eigen::MatrixXd m(rows, cols);
    std::vector<double> row(cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
        f.read(reinterpret_cast<char*>(row.data()),
               static_cast<std::streamsize>(sizeof(double) * cols));
        if (!f) throw std::runtime_error("truncated binary matrix data: " + path);
        for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = row[j];
    }
    return m;
}

void write_certificate_report_json(const std::string& path, const CertificateReport& report,
                                   const std::string& error) {
    json j;
    j["interp_error"] = report.interp_error;
    j["grad_norm"] = report.grad_norm;
    j["off_support_max"] = report.off_support_max;
    j["hessian_ok"] = report.hessian_ok;
    j["min_separation"] = report.min_separation;
    j["validated"] = report.validated;
    const SystemDiagnostics& d = report.system_diagnostics;
    j["system_diagnostics"] = {{"i_minus_f0_norm", d.i_minus_f0_norm},
                               {"f1_norm", d.f1_norm},
                               {"f1_tilde_norm", d.f1_tilde_norm},
                               {"f2_mixed_norm", d.f2_mixed_norm},
                               {"f2_diag_dev_norm", d.f2_diag_dev_norm},
                               {"condition_estimate", d.condition_estimate},
                               {"schur_fs1_norm", d.schur_fs1_norm},
                               {"schur_fs2_dev_norm", d.schur_fs2_dev_norm},
                               {"schur_i_minus_fs_norm", d.schur_i_minus_fs_norm}};
    const CoefficientDiagnostics& c = report.coefficients;
    j["coefficients"] = {{"alpha_inf", c.alpha_inf},
                         {"n_beta_inf", c.n_beta_inf},
                         {"n_gamma_inf", c.n_gamma_inf},
                         {"alpha_minus_u_inf", c.alpha_minus_u_inf}};
    if (!error.empty()) j["error"] = error;
    write_json_file(path, j);
}

void write_recovery_report_json(const std::string& path, const RecoveryReport& report) {
    json j;
    j["support_distance"] = report.support_distance;
    j["weight_error"] = report.weight_error;
    j["residual"] = report.residual;
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    j["objective"] = report.objective;
    j["spurious_atoms"] = report.spurious_atoms;
    if (!report.averaged_objective_trace.empty())
        j["averaged_objective_trace"] = report.averaged_objective_trace;
    write_json_file(path, j);
}

void write_heatmap_csv(const std::string& path, const std::vector<HeatmapRow>& rows) {
    auto f = open_out(path);
    f << "lat,lon,q\n";
    for (const auto& r : rows) f << fmt(r.lat) << ',' << fmt(r.lon) << ',' << fmt(r.q) << '\n';
}

void write_scan_csv(const std::string& path, const std::vector<ScanSample>& samples) {
    auto f = open_out(path);
    f << "theta,value,envelope\n";
    for (const auto& s : samples)
        f << fmt(s.theta) << ',' << fmt(s.value) << ',' << fmt(s.envelope) << '\n';
}

void write_config_json(const std::string& path, const ExperimentConfig& cfg) {
    json law;
    if (cfg.weight_law.kind == WeightLaw::Kind::UnitSigns) {
        law = {{"type", "unit-signs"}};
    } else {
        law = {{"type", "uniform"}, {"a", cfg.weight_law.a}, {"b", cfg.weight_law.b}};
    }
    json j = {
        {"seed", cfg.seed},
        {"degree", cfg.degree},
        {"num_atoms", cfg.num_atoms},
        {"separation_factor", cfg.separation_factor},
        {"weight_law", law},
        {"grid_size", cfg.grid_size},
        {"solver",
         {{"max_iters", cfg.solver.max_iters},
          {"primal_tol", cfg.solver.primal_tol},
          {"dual_tol", cfg.solver.dual_tol},
          {"step_ratio", cfg.solver.step_ratio},
          {"nonneg", cfg.solver.nonneg}}},
        {"snap_to_grid", cfg.snap_to_grid},
        {"weight_floor_factor", cfg.weight_floor_factor},
        {"cluster_radius_factor", cfg.cluster_radius_factor},
        {"certificate",
         {{"sigma", cfg.certificate.sigma},
          {"near_samples", cfg.certificate.near_samples},
          {"grid_multiplier", cfg.certificate.grid_multiplier},
          {"grid_min", cfg.certificate.grid_min}}},
        {"thresholds",
         {{"support_distance", cfg.thresholds.support_distance},
          {"weight_error", cfg.thresholds.weight_error}}},
    };
    write_json_file(path, j);
}

ExperimentConfig read_config_json(const std::string& path) {
    const json j = read_json_file(path);
    ExperimentConfig cfg;
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.degree = j.at("degree").get<int>();
    cfg.num_atoms = j.at("num_atoms").get<int>();
    cfg.separation_factor = j.at("separation_factor").get<double>();
    const json& law = j.at("weight_law");
    const std::string type = law.at("type").get<std::string>();
    if (type == "unit-signs") {
        cfg.weight_law.kind = WeightLaw::Kind::UnitSigns;
    } else if (type == "uniform") {
        cfg.weight_law.kind = WeightLaw::Kind::Uniform;
        cfg.weight_law.a = law.at("a").get<double>();
        cfg.weight_law.b = law.at("b").get<double>();
    } else {
        throw std::runtime_error("unknown weight law: " + type);
    }
    cfg.grid_size = j.at("grid_size").get<int>();
    const json& s = j.at("solver");
    cfg.solver.max_iters = s.at("max_iters").get<int>();
    cfg.solver.primal_tol = s.at("primal_tol").get<double>();
    cfg.solver.dual_tol = s.at("dual_tol").get<double>();
    cfg.solver.step_ratio = s.at("step_ratio").get<double>();
    cfg.solver.nonneg = s.at("nonneg").get<bool>();
    cfg.snap_to_grid = j.at("snap_to_grid").get<bool>();
    cfg.weight_floor_factor = j.at("weight_floor_factor").get<double>();
    cfg.cluster_radius_factor = j.at("cluster_radius_factor").get<double>();
    const json& c = j.at("certificate");
    cfg.certificate.sigma = c.at("sigma").get<double>();
    cfg.certificate.near_samples = c.at("near_samples").get<int>();
    cfg.certificate.grid_multiplier = c.at("grid_multiplier").get<int>();
    cfg.certificate.grid_min = c.at("grid_min").get<int>();
    const json& t = j.at("thresholds");
    cfg.thresholds.support_distance = t.at("support_distance").get<double>();
    cfg.thresholds.weight_error = t.at("weight_error").get<double>();
    return cfg;
}

}  // namespace spheresr::io
