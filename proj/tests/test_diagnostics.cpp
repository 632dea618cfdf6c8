#include "nep/config.hpp"
#include "nep/diagnostics.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace nep;

namespace {

SparseMatrix unit_mass() {
    static const SparseMatrix M = fem::assemble_mass(fem::build_rect_mesh({0, 1, 0, 1}, 2, 2));
    return M;
}

// History u_k = base + (sum_{j <= k} d_j) e with a fixed unit direction e.
std::vector<Controls> history_from_steps(const std::vector<double>& steps) {
    const SparseMatrix M = unit_mass();
    const Vector e = Vector::Ones(M.rows()) / std::sqrt(Vector::Ones(M.rows()).dot(M * Vector::Ones(M.rows())));
    std::vector<Controls> h;
    double acc = 0.0;
    for (double d : steps) {
        acc += d;
        h.push_back({Vector::Constant(M.rows(), 0.25) + acc * e});
    }
    return h;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("nep_test_" + name);
}

}  // namespace

TEST(Kappa, GeometricSequenceIsLinear) {
    std::vector<double> steps;
    for (int k = 0; k < 10; ++k) steps.push_back(std::pow(0.3, k));
    const auto kappa = kappa_numeric(unit_mass(), history_from_steps(steps));
    ASSERT_EQ(kappa.size(), 10u);
    for (int i = 0; i < 3; ++i) EXPECT_FALSE(kappa[static_cast<std::size_t>(i)]);
    for (std::size_t i = 3; i < 10; ++i) {
        ASSERT_TRUE(kappa[i]);
        EXPECT_NEAR(*kappa[i], 1.0, 1e-6);
    }
}

TEST(Kappa, QuadraticSequence) {
    std::vector<double> steps{1.0};
    for (int j = 1; j <= 7; ++j) steps.push_back(std::pow(0.9, std::pow(2.0, j)));
    const auto kappa = kappa_numeric(unit_mass(), history_from_steps(steps));
    for (std::size_t i = 4; i < kappa.size(); ++i) {
        ASSERT_TRUE(kappa[i]);
        EXPECT_NEAR(*kappa[i], 2.0, 1e-6);
    }
}

TEST(Kappa, StagnationIsUndefined) {
    const auto kappa = kappa_numeric(unit_mass(), history_from_steps({1.0, 0.5, 0.25, 0.0, 0.0}));
    EXPECT_FALSE(kappa[3]);
    EXPECT_FALSE(kappa[4]);
}

TEST(ExactRates, HalvingErrors) {
    const SparseMatrix M = unit_mass();
    const Controls exact{Vector::Constant(M.rows(), 0.25)};
    std::vector<double> steps{1.0};
    for (int k = 1; k < 8; ++k) steps.push_back(-std::pow(0.5, k));
    // errors are 1, 0.5, 0.25, ... after the first step: u_k - exact = 2^{1-k} e
    const auto rates = kappa_exact_and_rate(M, history_from_steps(steps), exact);
    EXPECT_FALSE(rates.rate[0]);
    EXPECT_FALSE(rates.order[1]);
    for (std::size_t i = 1; i < 8; ++i) EXPECT_NEAR(*rates.rate[i], 0.5, 1e-12);
    for (std::size_t i = 2; i < 8; ++i) EXPECT_NEAR(*rates.order[i], 1.0, 1e-9);
}

TEST(ExactRates, ExactIterateIsUndefined) {
    const SparseMatrix M = unit_mass();
    const Controls exact{Vector::Constant(M.rows(), 0.25)};
    const auto rates = kappa_exact_and_rate(M, {exact, exact, exact}, exact);
    for (const auto& r : rates.rate) EXPECT_FALSE(r);
}

TEST(Csv, EmptyTableHasOnlyHeader) {
    EXPECT_EQ(format_csv({}), "k,kappa,kappa_ex,R,nodes,opt,gmres\n");
    EXPECT_TRUE(parse_csv(format_csv({})).rows.empty());
}

TEST(Csv, RoundTrip) {
    ConvergenceTable t;
    t.rows.push_back({1, std::nullopt, std::nullopt, std::nullopt, 2480, 1.2345678901234567e-3, 108});
    t.rows.push_back({2, 1.9141, std::nullopt, 0.1 / 3.0, 12, 5e-300, std::nullopt});
    t.rows.push_back({3, -5.5, 2.0, 1e-17, 0, 0.0, 7});
    EXPECT_EQ(parse_csv(format_csv(t)), t);
    const auto path = temp_path("table.csv");
    emit_csv(t, path.string());
    EXPECT_EQ(read_csv(path.string()), t);
    std::filesystem::remove(path);
}

TEST(Csv, Errors) {
    EXPECT_THROW(parse_csv("k,kappa\n"), IoError);
    EXPECT_THROW(parse_csv("k,kappa,kappa_ex,R,nodes,opt,gmres\n1,,,,3\n"), IoError);
    EXPECT_THROW(parse_csv("k,kappa,kappa_ex,R,nodes,opt,gmres\n1,x,,,3,0.1,\n"), IoError);
    EXPECT_THROW(emit_csv({}, "/nonexistent-dir/table.csv"), IoError);
    EXPECT_THROW(read_csv("/nonexistent-dir/table.csv"), IoError);
}

namespace {

struct VtkFile {
    std::vector<std::array<double, 3>> points;
    std::vector<std::vector<int>> cells;
    std::map<std::string, std::vector<double>> arrays;
};

VtkFile read_vtk(const std::string& path) {
    std::ifstream in(path);
    VtkFile f;
    std::string line, word;
    std::getline(in, line);
    EXPECT_EQ(line, "# vtk DataFile Version 3.0");
    std::getline(in, line);
    std::getline(in, line);
    EXPECT_EQ(line, "ASCII");
    std::size_t npoints = 0;
    while (in >> word) {
        if (word == "POINTS") {
            in >> npoints >> word;
            f.points.resize(npoints);
            for (auto& p : f.points) in >> p[0] >> p[1] >> p[2];
        } else if (word == "CELLS") {
            std::size_t n, total;
            in >> n >> total;
            for (std::size_t c = 0; c < n; ++c) {
                int k;
                in >> k;
                std::vector<int> ids(static_cast<std::size_t>(k));
                for (auto& id : ids) in >> id;
                f.cells.push_back(ids);
            }
        } else if (word == "CELL_TYPES") {
            std::size_t n;
            in >> n;
            for (std::size_t c = 0; c < n; ++c) {
                int t;
                in >> t;
                EXPECT_EQ(t, 5);
            }
        } else if (word == "SCALARS") {
            std::string name, type, lookup, table;
            int comps;
            in >> name >> type >> comps >> lookup >> table;
            auto& v = f.arrays[name];
            v.resize(npoints);
            for (auto& x : v) in >> x;
        }
    }
    return f;
}

}  // namespace

TEST(Vtk, SingleCellMesh) {
    fem::Mesh mesh = fem::build_rect_mesh({0, 1, 0, 1}, 1, 1);
    const auto m = mesh.num_vertices();
    std::vector<PlayerSpec> pl{{fem::Region::everywhere(), Vector::Zero(m), -Vector::Ones(m), Vector::Ones(m)}};
    NepProblem P(std::move(mesh), pl, 1.0, 1.0, Vector::Zero(m), Vector::Constant(m, 0.5));
    IterateState it;
    it.u = {Vector::LinSpaced(m, 1, 4)};
    it.y = Vector::Zero(m);
    it.p = {Vector::Constant(m, -2.0)};
    const auto path = temp_path("single.vtk");
    emit_fields(P, it, path.string());
    const auto f = read_vtk(path.string());
    EXPECT_EQ(f.points.size(), 4u);
    EXPECT_EQ(f.cells.size(), 2u);
    for (const char* name : {"state", "control_sum", "control_1", "adjoint_1", "psi"}) {
        ASSERT_TRUE(f.arrays.count(name)) << name;
        EXPECT_EQ(f.arrays.at(name).size(), 4u);
    }
    EXPECT_EQ(f.arrays.at("control_1")[3], 4.0);
    EXPECT_EQ(f.arrays.at("adjoint_1")[0], -2.0);
    std::filesystem::remove(path);
}

TEST(Vtk, RoundTripsSolverFields) {
    auto ex = make_example2(16, 16, 0.1);
    SolverConfig cfg;
    cfg.method = Method::ActiveSet;
    const auto rep = run_solver(ex.problem, ex.initial, cfg);
    const auto path = temp_path("ex2.vtk");
    emit_fields(ex.problem, rep.final, path.string());
    const auto f = read_vtk(path.string());
    ASSERT_EQ(f.points.size(), static_cast<std::size_t>(ex.problem.num_nodes()));
    for (std::size_t i = 0; i < f.points.size(); ++i) {
        EXPECT_EQ(f.arrays.at("state")[i], rep.final.y[static_cast<Eigen::Index>(i)]);
        EXPECT_EQ(f.arrays.at("control_3")[i], rep.final.u[2][static_cast<Eigen::Index>(i)]);
        EXPECT_EQ(f.points[i][0], ex.problem.mesh().vertices()[i].x);
    }
    std::filesystem::remove(path);
    IterateState bad = rep.final;
    bad.u.pop_back();
    EXPECT_THROW(emit_fields(ex.problem, bad, path.string()), ArgumentError);
    EXPECT_THROW(emit_fields(ex.problem, rep.final, "/nonexistent-dir/x.vtk"), IoError);
}

TEST(Penalty, StateViolationShrinksLikeOneOverRho) {
    // One player tracking y_d = 2 above the bound psi = 0.5.
    auto violation = [](double rho) {
        fem::Mesh mesh = fem::build_rect_mesh({0, 1, 0, 1}, 16, 16);
        const auto m = mesh.num_vertices();
        std::vector<PlayerSpec> pl{{fem::Region::everywhere(), Vector::Constant(m, 2.0), Vector::Constant(m, -1e3),
                                    Vector::Constant(m, 1e3)}};
        NepProblem P(std::move(mesh), pl, 1e-3, rho, Vector::Zero(m), Vector::Constant(m, 0.5));
        SolverConfig cfg;
        cfg.method = Method::ActiveSet;
        const auto rep = run_solver(P, default_initial_guess(P), cfg);
        EXPECT_TRUE(rep.converged()) << "rho = " << rho;
        return (rep.final.y - P.psi()).maxCoeff();
    };
    const double v10 = violation(10.0);
    const double v100 = violation(100.0);
    const double v1000 = violation(1000.0);
    EXPECT_GT(v10, 0.0);
    EXPECT_LT(v100, 0.3 * v10);
    EXPECT_LT(v1000, 0.3 * v100);
}

TEST(Table, RowsFollowReport) {
    auto ex = make_example2(16, 16, 0.1);
    const auto rep = run_solver(ex.problem, ex.initial, {});
    const auto t = build_table(ex.problem, rep, &ex.exact.u_bar);
    ASSERT_EQ(t.rows.size(), rep.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        EXPECT_EQ(t.rows[i].k, rep.rows[i].k);
        EXPECT_EQ(t.rows[i].nodes, rep.rows[i].nodes);
        EXPECT_TRUE(t.rows[i].gmres.has_value());
    }
    EXPECT_FALSE(t.rows[0].R);
    const auto again = build_table(ex.problem, run_solver(ex.problem, ex.initial, {}), &ex.exact.u_bar);
    EXPECT_EQ(format_csv(again), format_csv(t));
}

TEST(Config, ParsesPlayersAndSolver) {
    const std::string text = R"(
[mesh]
nx = 10
ny = 12
x_min = -1
[problem]
alpha = 0.5
psi = 2
psi_y = 1
[solver]
method = as
max_outer = 7
gmres_tol = 1e-9
[player1]
region = all
y_d = 1
u_a = -2
u_b = 3
[player2]
region = -1, 0, 0, 1
y_d = 0.5
)";
    const auto cfg = parse_config(text);
    EXPECT_EQ(cfg.nx, 10);
    EXPECT_EQ(cfg.ny, 12);
    EXPECT_DOUBLE_EQ(cfg.domain.x_min, -1.0);
    EXPECT_DOUBLE_EQ(cfg.alpha, 0.5);
    EXPECT_DOUBLE_EQ(cfg.psi_y, 1.0);
    EXPECT_EQ(cfg.solver.method, Method::ActiveSet);
    EXPECT_EQ(cfg.solver.max_outer, 7);
    EXPECT_DOUBLE_EQ(cfg.solver.gmres.tol, 1e-9);
    ASSERT_EQ(cfg.players.size(), 2u);
    EXPECT_FALSE(cfg.players[0].region);
    ASSERT_TRUE(cfg.players[1].region);
    EXPECT_DOUBLE_EQ(cfg.players[1].region->x_max, 0.0);
    const auto built = build_problem(cfg);
    EXPECT_EQ(built.problem.num_players(), 2);
    EXPECT_EQ(built.problem.num_nodes(), 11 * 13);
    EXPECT_DOUBLE_EQ(built.problem.psi()[0], 2.0);  // (x, y) = (-1, 0)
    EXPECT_DOUBLE_EQ(built.problem.psi()[built.problem.num_nodes() - 1], 3.0);
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_config("[mesh]\nnx = 4\n"), ArgumentError);
    EXPECT_THROW(parse_config("[player1]\n[solver]\nmethod = cg\n"), ArgumentError);
    EXPECT_THROW(parse_config("[player1]\n[mesh]\nnx = four\n"), ArgumentError);
    EXPECT_THROW(parse_config("[player1]\nregion = 0, 1\n"), ArgumentError);
    EXPECT_THROW(parse_config("[player1]\n[player3]\n"), ArgumentError);
    EXPECT_THROW(parse_config("[player1\n"), ArgumentError);
    EXPECT_THROW(load_config("/nonexistent-dir/a.ini"), IoError);
}
