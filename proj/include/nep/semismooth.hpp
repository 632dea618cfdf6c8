#pragma once

// Pointwise projection, Newton derivatives of max/projection and nodal
// active-set bookkeeping.

#include "nep/problem.hpp"
#include "nep/types.hpp"

namespace nep {

/// max(a, min(v, b)) node by node. Throws ArgumentError if a > b somewhere.
Vector project_box(const Vector& v, const Vector& a, const Vector& b);

/// 1 where a < v < b, 0 otherwise (including exact touches).
Mask newton_derivative_box(const Vector& v, const Vector& a, const Vector& b);

/// 1 where v > a, 0 where v <= a.
Mask newton_derivative_max(const Vector& v, const Vector& a);

struct PlayerSets {
    Mask lower;     // A_a: -p/alpha <= u_a
    Mask upper;     // A_b: -p/alpha >= u_b
    Mask inactive;  // I: everything else
};

struct ActiveSets {
    std::vector<PlayerSets> players;
    Mask state;  // Y: mu + rho (y - psi) > 0

    /// True if every player's masks partition the node set.
    bool is_partition() const;
};

/// Nodal classification from a state and one adjoint per player.
ActiveSets classify_sets(const NepProblem& problem, const Vector& y, const Controls& p);

/// Number of (mask, node) pairs whose membership differs, summed over all
/// player masks and the state mask.
long set_change_count(const ActiveSets& s1, const ActiveSets& s2);

}  // namespace nep
