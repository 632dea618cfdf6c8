#include "nep/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace nep {

namespace {

constexpr double kRoundoff = 1e2 * std::numeric_limits<double>::epsilon();

double block_norm(const SparseMatrix& M, const Controls& u) {
    double sum = 0.0;
    for (const auto& c : u) sum += c.dot(M * c);
    return std::sqrt(std::max(0.0, sum));
}

std::optional<double> log_ratio(double a, double b, double c) {
    // log(a / b) / log(b / c)
    const double den = std::log(b / c);
    if (den == 0.0 || !std::isfinite(den)) return std::nullopt;
    const double val = std::log(a / b) / den;
    if (!std::isfinite(val)) return std::nullopt;
    return val;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Estimates kappa_numeric(const SparseMatrix& M, const std::vector<Controls>& history) {
    const std::size_t n = history.size();
    Estimates kappa(n);
    std::vector<double> diff(n, 0.0), scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        scale[i] = block_norm(M, history[i]);
        if (i > 0) diff[i] = block_norm(M, control_difference(history[i], history[i - 1]));
    }
    // Index i holds u_{i+1}; row k = i + 1 needs d_k, d_{k-1}, d_{k-2}.
    for (std::size_t i = 3; i < n; ++i) {
        const double floor = kRoundoff * std::max(scale[i], 1.0);
        if (diff[i] <= floor || diff[i - 1] <= floor || diff[i - 2] <= floor) continue;
        kappa[i] = log_ratio(diff[i], diff[i - 1], diff[i - 2]);
    }
    return kappa;
}

ExactRates kappa_exact_and_rate(const SparseMatrix& M, const std::vector<Controls>& history, const Controls& exact) {
    const std::size_t n = history.size();
    ExactRates out{Estimates(n), Estimates(n)};
    const double floor = kRoundoff * std::max(block_norm(M, exact), 1.0);
    std::vector<double> err(n);
    for (std::size_t i = 0; i < n; ++i) err[i] = block_norm(M, control_difference(history[i], exact));
    for (std::size_t i = 1; i < n; ++i) {
        if (err[i] <= floor || err[i - 1] <= floor) continue;
        out.rate[i] = err[i] / err[i - 1];
        if (i >= 2 && err[i - 2] > floor) out.order[i] = log_ratio(err[i], err[i - 1], err[i - 2]);
    }
    return out;
}

ConvergenceTable build_table(const NepProblem& problem, const SolveReport& report, const Controls* exact) {
    const Estimates kappa = kappa_numeric(problem.mass(), report.u_history);
    ExactRates rates;
    if (exact) rates = kappa_exact_and_rate(problem.mass(), report.u_history, *exact);

    ConvergenceTable table;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const ReportRow& r = report.rows[i];
        TableRow row;
        row.k = r.k;
        row.nodes = r.nodes;
        row.opt = r.opt;
        row.gmres = r.gmres;
        if (i < kappa.size()) row.kappa = kappa[i];
        if (exact && i < rates.rate.size()) {
            row.R = rates.rate[i];
            row.kappa_ex = rates.order[i];
        }
        table.rows.push_back(row);
    }
    return table;
}

std::string format_csv(const ConvergenceTable& table) {
    std::ostringstream out;
    out << "k,kappa,kappa_ex,R,nodes,opt,gmres\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : table.rows) {
        out << r.k << ',' << opt(r.kappa) << ',' << opt(r.kappa_ex) << ',' << opt(r.R) << ',' << r.nodes << ','
            << format_double(r.opt) << ',' << (r.gmres ? std::to_string(*r.gmres) : std::string()) << '\n';
    }
    return out.str();
}

void emit_csv(const ConvergenceTable& table, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw IoError("emit_csv: cannot open " + path);
    file << format_csv(table);
    if (!file) throw IoError("emit_csv: write failed for " + path);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_number(const std::string& s, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw IoError("parse_csv: line " + std::to_string(line) + ": invalid number '" + s + "'");
    }
    return v;
}

std::optional<double> parse_optional(const std::string& s, int line) {
    if (s.empty()) return std::nullopt;
    return parse_number(s, line);
}

}  // namespace

ConvergenceTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "k,kappa,kappa_ex,R,nodes,opt,gmres") {
        throw IoError("parse_csv: missing or unexpected header");
    }
    ConvergenceTable table;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 7) throw IoError("parse_csv: line " + std::to_string(lineno) + ": expected 7 fields");
        TableRow r;
        r.k = static_cast<int>(parse_number(f[0], lineno));
        r.kappa = parse_optional(f[1], lineno);
        r.kappa_ex = parse_optional(f[2], lineno);
        r.R = parse_optional(f[3], lineno);
        r.nodes = static_cast<long>(parse_number(f[4], lineno));
        r.opt = parse_number(f[5], lineno);
        if (auto g = parse_optional(f[6], lineno)) r.gmres = static_cast<int>(*g);
        table.rows.push_back(r);
    }
    return table;
}

ConvergenceTable read_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("read_csv: cannot open " + path);
    std::stringstream buf;
    buf << file.rdbuf();
    return parse_csv(buf.str());
}

void emit_fields(const NepProblem& problem, const IterateState& iterate, const std::string& path) {
    const auto& mesh = problem.mesh();
    const Eigen::Index m = mesh.num_vertices();
    if (iterate.y.size() != m || static_cast<int>(iterate.u.size()) != problem.num_players() ||
        static_cast<int>(iterate.p.size()) != problem.num_players()) {
        throw ArgumentError("emit_fields: iterate does not match the problem");
    }
    std::ofstream out(path);
    if (!out) throw IoError("emit_fields: cannot open " + path);
    out.precision(17);

    out << "# vtk DataFile Version 3.0\n"
        << "nash equilibrium fields\n"
        << "ASCII\n"
        << "DATASET UNSTRUCTURED_GRID\n"
        << "POINTS " << m << " double\n";
    for (const auto& v : mesh.vertices()) out << v.x << ' ' << v.y << " 0\n";

    const std::size_t nt = mesh.num_triangles();
    out << "CELLS " << nt << ' ' << 4 * nt << '\n';
    for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << nt << '\n';
    for (std::size_t i = 0; i < nt; ++i) out << "5\n";

    out << "POINT_DATA " << m << '\n';
    auto scalars = [&out](const std::string& name, const Vector& v) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
    };
    Vector sum = Vector::Zero(m);
    for (const auto& u : iterate.u) sum += u;
    scalars("state", iterate.y);
    scalars("control_sum", sum);
    for (std::size_t nu = 0; nu < iterate.u.size(); ++nu) scalars("control_" + std::to_string(nu + 1), iterate.u[nu]);
    for (std::size_t nu = 0; nu < iterate.p.size(); ++nu) scalars("adjoint_" + std::to_string(nu + 1), iterate.p[nu]);
    scalars("psi", problem.psi());
    if (!out) throw IoError("emit_fields: write failed for " + path);
}

}  // namespace nep
