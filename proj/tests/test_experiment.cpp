#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "spheresr/experiment.hpp"
#include "spheresr/io.hpp"

using namespace spheresr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("spheresr_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.seed = 7;
    cfg.degree = 16;
    cfg.num_atoms = 5;
    cfg.separation_factor = 4.0;
    cfg.grid_size = 15000;
    cfg.certificate.grid_min = 15000;
    cfg.certificate.grid_multiplier = 50;
    return cfg;
}

}  // namespace

TEST_CASE("config validation enforces the documented invariants") {
    ExperimentConfig cfg = small_config();
    CHECK_NOTHROW(cfg.validate());

    ExperimentConfig bad = cfg;
    bad.degree = 1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.num_atoms = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.separation_factor = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.grid_size = 100;  // < (N+1)^2
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    // caps of radius nu/(2N) cannot tile more than the sphere
    bad.degree = 2;
    bad.separation_factor = 6.0;
    bad.num_atoms = 50;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("config JSON round trip is exact") {
    ExperimentConfig cfg = small_config();
    cfg.weight_law.kind = WeightLaw::Kind::Uniform;
    cfg.weight_law.a = 0.25;
    cfg.weight_law.b = 1.75;
    cfg.solver.primal_tol = 3.5e-9;
    cfg.thresholds.weight_error = 2e-3;
    const auto dir = temp_dir("config");
    io::write_config_json((dir / "config.json").string(), cfg);
    const ExperimentConfig back = io::read_config_json((dir / "config.json").string());
    CHECK(back == cfg);
}

TEST_CASE("ensemble generation is separated, deterministic and validates packing") {
    ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.degree = 20;
    cfg.num_atoms = 2;
    cfg.separation_factor = 4.0;
    cfg.snap_to_grid = false;
    const DiracEnsemble a = gen_ensemble(cfg);
    CHECK(a.atoms.size() == 2);
    CHECK(geodesic_distance(a.atoms[0].location, a.atoms[1].location) >= 0.2);

    const DiracEnsemble b = gen_ensemble(cfg);
    REQUIRE(a.atoms.size() == b.atoms.size());
    for (std::size_t i = 0; i < a.atoms.size(); ++i) {
        CHECK(a.atoms[i].weight == b.atoms[i].weight);
        CHECK(a.atoms[i].location == b.atoms[i].location);
    }
    for (const auto& atom : a.atoms) CHECK(std::abs(atom.weight) == 1.0);

    cfg.snap_to_grid = true;
    cfg.grid_size = 20000;
    const auto grid = fibonacci_grid(cfg.grid_size);
    const DiracEnsemble snapped = gen_ensemble(cfg, grid);
    for (const auto& atom : snapped.atoms)
        CHECK(atom.location == grid[nearest_grid_point(grid, atom.location)]);
    CHECK(min_separation({snapped.atoms[0].location, snapped.atoms[1].location}) >= 0.2);
}

TEST_CASE("IO round trips: points, ensembles, nodes, moments, matrices") {
    const auto dir = temp_dir("io");
    std::mt19937_64 rng(5);

    std::vector<SpherePoint> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(oracles::random_point(rng));
    io::write_points_csv((dir / "p.csv").string(), pts);
    const auto pts_csv = io::read_points_csv((dir / "p.csv").string());
    io::write_points_json((dir / "p.json").string(), pts);
    const auto pts_json = io::read_points_json((dir / "p.json").string());
    REQUIRE(pts_csv.size() == pts.size());
    REQUIRE(pts_json.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts_csv[i] == pts[i]);
        CHECK(pts_json[i] == pts[i]);
    }

    DiracEnsemble f;
    for (int i = 0; i < 6; ++i)
        f.atoms.push_back({oracles::unit_double(rng) - 0.5, oracles::random_point(rng)});
    io::write_ensemble_csv((dir / "f.csv").string(), f);
    const DiracEnsemble g = io::read_ensemble_csv((dir / "f.csv").string());
    REQUIRE(g.atoms.size() == f.atoms.size());
    for (std::size_t i = 0; i < f.atoms.size(); ++i) {
        CHECK(g.atoms[i].weight == f.atoms[i].weight);
        CHECK(g.atoms[i].location == f.atoms[i].location);
    }

    {
        std::ofstream nodes(dir / "nodes.csv");
        nodes << "0.0,0.0,1.0\n0.0,1.0,0.0,-1\n# comment\n1.0,0.0,0.0,1\n";
    }
    const io::NodeFile nf = io::read_nodes_csv((dir / "nodes.csv").string());
    REQUIRE(nf.nodes.size() == 3);
    CHECK(nf.signs[0] == 1.0);
    CHECK(nf.signs[1] == -1.0);
    CHECK(nf.signs[2] == 1.0);

    const MomentVector y = moments(f, 7);
    io::write_moments_json((dir / "y.json").string(), y);
    const MomentVector back = io::read_moments_json((dir / "y.json").string());
    CHECK(back.degree == 7);
    CHECK((back.values - y.values).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd m(3, 5);
    for (int i = 0; i < 15; ++i) m(i / 5, i % 5) = std::sqrt(double(i) + 0.5);
    io::write_matrix_binary((dir / "m.bin").string(), m);
    const Eigen::MatrixXd mm = io::read_matrix_binary((dir / "m.bin").string());
    CHECK(mm.rows() == 3);
    CHECK(mm.cols() == 5);
    CHECK((mm - m).cwiseAbs().maxCoeff() == 0.0);

    // header layout: rows, cols as 32-bit little-endian
    std::ifstream raw(dir / "m.bin", std::ios::binary);
    unsigned char header[8];
    raw.read(reinterpret_cast<char*>(header), 8);
    CHECK(header[0] == 3);
    CHECK(header[4] == 5);
}

TEST_CASE("pipeline produces byte-identical artifacts and passes at separation 4") {
    const ExperimentConfig cfg = small_config();
    const auto dir1 = temp_dir("pipe1");
    const auto dir2 = temp_dir("pipe2");
    const PipelineResult r1 = run_pipeline(cfg, dir1.string());
    const PipelineResult r2 = run_pipeline(cfg, dir2.string());

    CHECK(r1.passed);
    CHECK(r1.recovery.support_distance == 0.0);
    CHECK(r1.recovery.weight_error < 1e-3);
    CHECK(r1.certificate_solved);
    CHECK(r1.certificate.off_support_max < 1.0);

    for (const char* name : {"config.json", "ensemble.csv", "moments.json", "recovered.csv",
                             "certificate_report.json", "recovery_report.json"}) {
        CAPTURE(name);
        CHECK(fs::exists(dir1 / name));
        CHECK(slurp(dir1 / name) == slurp(dir2 / name));
    }
}

TEST_CASE("pipeline reports failure for a crowded sub-separation configuration") {
    ExperimentConfig cfg;
    cfg.seed = 11;
    cfg.degree = 12;
    cfg.num_atoms = 60;
    cfg.separation_factor = 0.5;
    cfg.grid_size = 20000;
    cfg.certificate.grid_min = 20000;
    cfg.solver.max_iters = 1500;
    const auto dir = temp_dir("pipefail");
    const PipelineResult r = run_pipeline(cfg, dir.string());
    CHECK_FALSE(r.passed);
    CHECK(fs::exists(dir / "recovery_report.json"));
}

TEST_CASE("command line drives the full tool chain") {
    const auto dir = temp_dir("cli");
    const std::string cli = SPHERESR_CLI_PATH;
    const auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " > " + (dir / "out.txt").string() + " 2>&1";
        return std::system(cmd.c_str());
    };

    ExperimentConfig cfg = small_config();
    cfg.degree = 10;
    cfg.grid_size = 8000;
    cfg.num_atoms = 3;
    cfg.certificate.grid_min = 8000;
    io::write_config_json((dir / "config.json").string(), cfg);

    CHECK(run("gen --config " + (dir / "config.json").string() + " --out " +
              (dir / "ensemble.csv").string()) == 0);
    CHECK(run("measure --ensemble " + (dir / "ensemble.csv").string() + " --degree 10 --out " +
              (dir / "moments.json").string()) == 0);
    CHECK(run("recover --moments " + (dir / "moments.json").string() +
              " --grid-size 8000 --out " + (dir / "recovered.csv").string() + " --report " +
              (dir / "recovery.json").string()) == 0);
    CHECK(run("certify --degree 10 --nodes " + (dir / "ensemble.csv").string() +
              " --grid 8000 --nu-check 4 --report " + (dir / "cert.json").string() +
              " --heatmap " + (dir / "heat.csv").string()) == 0);
    CHECK(run("kernel-scan --degree 10 --order 0 --k 3 --samples 100 --out " +
              (dir / "scan.csv").string()) == 0);
    CHECK(run("heatmap --degree 10 --nodes " + (dir / "ensemble.csv").string() +
              " --lat-steps 19 --lon-steps 36 --out " + (dir / "heat2.csv").string()) == 0);
    CHECK(run("pipeline --config " + (dir / "config.json").string() + " --out " +
              (dir / "run").string()) == 0);

    // recovered ensemble should match the generated one
    const DiracEnsemble truth = io::read_ensemble_csv((dir / "ensemble.csv").string());
    const DiracEnsemble rec = io::read_ensemble_csv((dir / "recovered.csv").string());
    const RecoveryReport rep = recovery_report(truth, rec, moments(truth, 10));
    CHECK(rep.support_distance == 0.0);

    // scan CSV has the documented header
    std::ifstream scan(dir / "scan.csv");
    std::string header;
    std::getline(scan, header);
    CHECK(header == "theta,value,envelope");
    std::ifstream heat(dir / "heat.csv");
    std::getline(heat, header);
    CHECK(header == "lat,lon,q");
}
