#ifndef QKPZ_COHERENCE_HPP
#define QKPZ_COHERENCE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qkpz/rules.hpp"
#include "qkpz/symexpr.hpp"
#include "qkpz/tree.hpp"
#include "qkpz/upsilon.hpp"

namespace qkpz {

// Tree-indexed expansion with exact symbolic coefficients; the empty tree
// holds the scalar part.
using Expansion = TreeMap<SymExpr>;

struct TruncationTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Taylor lift of base^(order) composed with E around its scalar part (which
// must be the bare solution symbol): sum_k base^(order+k)/k! (E - u 1)^k.
// tilde removes the scalar part of the result.
Expansion lift_compose(FuncBase base, int order, const Expansion& e, int max_noises,
                       bool tilde = false);

Expansion mul(const Expansion& a, const Expansion& b, int max_noises);

struct SystemExpansion {
    int max_noises = 0;
    int N = 0;  // parameter-derivative truncation in the V formula
    Nonlinearity nl;
    Expansion U;
    Expansion DU;  // abstract space derivative of U, scalar part v_x/q
    Expansion Fhat;
    std::map<ParamIndex, Expansion> V;  // the four first-order components
};

// Solve the implicit system for (U, V_alpha, Fhat) exactly on the tree basis,
// stage by stage in (noise count, edge count); the final result satisfies the
// fixed-point equations identically (asserted).
SystemExpansion expand_system(int max_noises, int N, const Nonlinearity& nl = {});

// Plain substitution sweeps without the exact inversion of q: converges only
// in the v_c-adic sense, used as an independent oracle for the linear solves.
Expansion neumann_solution_U(int max_noises, int N, int sweeps,
                             const Nonlinearity& nl = {});

struct CoherenceEntry {
    std::string component;
    TreePtr key;
    SymExpr coefficient;
    SymExpr upsilon_over_s;
    bool pass = false;
};

struct CoherenceReport {
    int max_noises = 0;
    bool all_pass = false;
    std::vector<CoherenceEntry> entries;
};

// Coefficient-by-coefficient comparison of every expansion against the
// corresponding elementary differential divided by the symmetry factor.
CoherenceReport check_coherence(const SystemExpansion& sys);

// The common ratio <C, I_alpha Fhat> extracted from the expansion, where C is
// D^{(0,m)}U when beta is absent and V_beta otherwise; asserts the ratio is
// the same for every tree with a nonzero Fhat coefficient.
SymExpr planted_coefficient(const SystemExpansion& sys, const ParamIndex& alpha,
                            const MultiIndex& m,
                            const std::optional<ParamIndex>& beta = std::nullopt);

}  // namespace qkpz

#endif
