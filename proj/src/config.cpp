#include "nep/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <sstream>

namespace nep {

namespace pt = boost::property_tree;

namespace {

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
    try {
        return tree.get<T>(key, fallback);
    } catch (const pt::ptree_bad_data& e) {
        throw ArgumentError("config: invalid value for '" + key + "'");
    }
}

fem::Rect parse_rect(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string item;
    std::vector<double> v;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
        } catch (const std::exception&) {
            throw ArgumentError("config: invalid rectangle for '" + key + "'");
        }
    }
    if (v.size() != 4) throw ArgumentError("config: '" + key + "' needs x_min,x_max,y_min,y_max");
    return {v[0], v[1], v[2], v[3]};
}

}  // namespace

ProblemConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ArgumentError(std::string("config: ") + e.what());
    }

    ProblemConfig c;
    c.domain.x_min = get(tree, "mesh.x_min", c.domain.x_min);
    c.domain.x_max = get(tree, "mesh.x_max", c.domain.x_max);
    c.domain.y_min = get(tree, "mesh.y_min", c.domain.y_min);
    c.domain.y_max = get(tree, "mesh.y_max", c.domain.y_max);
    c.nx = get(tree, "mesh.nx", c.nx);
    c.ny = get(tree, "mesh.ny", c.ny);

    c.alpha = get(tree, "problem.alpha", c.alpha);
    c.rho = get(tree, "problem.rho", c.rho);
    c.mu = get(tree, "problem.mu", c.mu);
    c.psi = get(tree, "problem.psi", c.psi);
    c.psi_x = get(tree, "problem.psi_x", c.psi_x);
    c.psi_y = get(tree, "problem.psi_y", c.psi_y);
    c.source = get(tree, "problem.source", c.source);
    c.y0 = get(tree, "problem.y0", c.y0);

    const std::string method = get<std::string>(tree, "solver.method", "ssn");
    if (method == "ssn") {
        c.solver.method = Method::Ssn;
    } else if (method == "as") {
        c.solver.method = Method::ActiveSet;
    } else {
        throw ArgumentError("config: solver.method must be 'ssn' or 'as'");
    }
    c.solver.max_outer = get(tree, "solver.max_outer", c.solver.max_outer);
    c.solver.gmres.tol = get(tree, "solver.gmres_tol", c.solver.gmres.tol);
    c.solver.gmres.restart = get(tree, "solver.gmres_restart", c.solver.gmres.restart);
    c.solver.gmres.maxiter = get(tree, "solver.gmres_maxiter", c.solver.gmres.maxiter);
    c.solver.residual_tol = get(tree, "solver.residual_tol", c.solver.residual_tol);

    for (int nu = 1;; ++nu) {
        const auto section = tree.get_child_optional("player" + std::to_string(nu));
        if (!section) break;
        PlayerConfig p;
        const std::string prefix = "player" + std::to_string(nu) + ".";
        const std::string region = get<std::string>(tree, prefix + "region", "all");
        if (region != "all") p.region = parse_rect(region, prefix + "region");
        p.y_d = get(tree, prefix + "y_d", p.y_d);
        p.u_a = get(tree, prefix + "u_a", p.u_a);
        p.u_b = get(tree, prefix + "u_b", p.u_b);
        c.players.push_back(p);
    }
    if (c.players.empty()) throw ArgumentError("config: no [player1] section");
    for (const auto& [name, child] : tree) {
        if (name == "mesh" || name == "problem" || name == "solver") continue;
        bool known = false;
        for (std::size_t nu = 1; nu <= c.players.size(); ++nu) known |= name == "player" + std::to_string(nu);
        if (!known) throw ArgumentError("config: unexpected section [" + name + "] (players are numbered from 1 without gaps)");
    }
    return c;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("config: cannot open " + path);
    std::stringstream buf;
    buf << file.rdbuf();
    return parse_config(buf.str());
}

BuiltProblem build_problem(const ProblemConfig& c) {
    fem::Mesh mesh = fem::build_rect_mesh(c.domain, c.nx, c.ny);
    const Eigen::Index m = mesh.num_vertices();
    std::vector<PlayerSpec> players;
    for (const auto& p : c.players) {
        if (p.u_a > p.u_b) throw ArgumentError("config: u_a > u_b");
        players.push_back({p.region ? fem::Region::box(*p.region) : fem::Region::everywhere(),
                           Vector::Constant(m, p.y_d), Vector::Constant(m, p.u_a), Vector::Constant(m, p.u_b)});
    }
    Vector psi = fem::interpolate(mesh, [&c](const fem::Point& x) { return c.psi + c.psi_x * x.x + c.psi_y * x.y; });
    std::optional<Vector> source;
    if (c.source != 0.0) source = Vector::Constant(m, c.source);
    NepProblem problem(std::move(mesh), std::move(players), c.alpha, c.rho, Vector::Constant(m, c.mu), std::move(psi),
                       std::move(source));
    InitialGuess initial = default_initial_guess(problem, c.y0);
    return {std::move(problem), std::move(initial)};
}

}  // namespace nep
