#include "nep/semismooth.hpp"

namespace nep {

namespace {

void check_box(const Vector& v, const Vector& a, const Vector& b) {
    if (a.size() != v.size() || b.size() != v.size()) throw ArgumentError("project_box: size mismatch");
    if ((a.array() > b.array()).any()) throw ArgumentError("project_box: lower bound exceeds upper bound");
}

long mask_difference(const Mask& a, const Mask& b) {
    if (a.size() != b.size()) throw ArgumentError("set_change_count: mask sizes differ");
    return static_cast<long>((a.array() != b.array()).count());
}

}  // namespace

Vector project_box(const Vector& v, const Vector& a, const Vector& b) {
    check_box(v, a, b);
    return v.cwiseMin(b).cwiseMax(a);
}

Mask newton_derivative_box(const Vector& v, const Vector& a, const Vector& b) {
    check_box(v, a, b);
    return ((v.array() > a.array()) && (v.array() < b.array())).cast<double>();
}

Mask newton_derivative_max(const Vector& v, const Vector& a) {
    if (a.size() != v.size()) throw ArgumentError("newton_derivative_max: size mismatch");
    return (v.array() > a.array()).cast<double>();
}

bool ActiveSets::is_partition() const {
    for (const auto& s : players) {
        if (s.lower.size() != s.upper.size() || s.lower.size() != s.inactive.size()) return false;
        const Eigen::ArrayXd total = s.lower.array() + s.upper.array() + s.inactive.array();
        if ((total != 1.0).any()) return false;
        if ((s.lower.array() * (1.0 - s.lower.array()) != 0.0).any()) return false;
        if ((s.upper.array() * (1.0 - s.upper.array()) != 0.0).any()) return false;
    }
    return true;
}

ActiveSets classify_sets(const NepProblem& problem, const Vector& y, const Controls& p) {
    const int n = problem.num_players();
    if (static_cast<int>(p.size()) != n) throw StateError("classify_sets: one adjoint per player is required");
    if (y.size() != problem.num_nodes()) throw ArgumentError("classify_sets: state has wrong size");

    ActiveSets sets;
    sets.players.reserve(static_cast<std::size_t>(n));
    for (int nu = 0; nu < n; ++nu) {
        const auto& pl = problem.player(nu);
        if (p[static_cast<std::size_t>(nu)].size() != y.size()) throw StateError("classify_sets: adjoint has wrong size");
        const Vector v = -p[static_cast<std::size_t>(nu)] / problem.alpha();
        PlayerSets s;
        s.lower = (v.array() <= pl.u_a.array()).cast<double>();
        // A node with u_a = u_b and v on the bound belongs to A_a only.
        s.upper = ((v.array() >= pl.u_b.array()) && (v.array() > pl.u_a.array())).cast<double>();
        s.inactive = Vector::Ones(y.size()) - s.lower - s.upper;
        sets.players.push_back(std::move(s));
    }
    sets.state = newton_derivative_max(problem.mu() + problem.rho() * (y - problem.psi()), Vector::Zero(y.size()));
    return sets;
}

long set_change_count(const ActiveSets& s1, const ActiveSets& s2) {
    if (s1.players.size() != s2.players.size()) throw ArgumentError("set_change_count: player counts differ");
    long count = mask_difference(s1.state, s2.state);
    for (std::size_t nu = 0; nu < s1.players.size(); ++nu) {
        count += mask_difference(s1.players[nu].lower, s2.players[nu].lower);
        count += mask_difference(s1.players[nu].upper, s2.players[nu].upper);
        count += mask_difference(s1.players[nu].inactive, s2.players[nu].inactive);
    }
    return count;
}

}  // namespace nep
