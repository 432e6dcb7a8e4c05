#ifndef QKPZ_RENORM_HPP
#define QKPZ_RENORM_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qkpz/symexpr.hpp"
#include "qkpz/tree.hpp"
#include "qkpz/upsilon.hpp"

namespace qkpz {

struct NotLocalInput : std::domain_error {
    using std::domain_error::domain_error;
};

struct SectorUnsupported : std::domain_error {
    using std::domain_error::domain_error;
};

struct NonlocalResidue : std::runtime_error {
    SymExpr residue;
    explicit NonlocalResidue(SymExpr r)
        : std::runtime_error("nonlocal residue: " + r.str()), residue(std::move(r)) {}
};

// Formal renormalisation constant C(tau).  The tree may be parametrised: the
// h decorations of its integration edges record the parameter-derivative
// orders of the corresponding slots, evaluated on the diagonal.  No numeric
// value is ever assigned; all statements about these constants are linear
// relations with symbolic coefficients.
struct FormalConstant {
    TreePtr tree;

    TreePtr base() const;                       // h stripped everywhere
    std::vector<int> slot_derivatives() const;  // h per integration edge, preorder
    std::string name() const;                   // "C(<tree>)"
};

enum class CountertermMode {
    FhatOverQ,  // sum C(tau) Upsilon_Fhat[tau] / (q S(tau)), parametrised trees
    FLocal,     // sum C(tau) Upsilon_F[tau] / S(tau), unparametrised trees
};

// One summand of a counterterm: contributes constant * weight * value.
struct CountertermTerm {
    FormalConstant constant;
    TreePtr tree;   // the tree whose elementary differential appears
    Rat weight;     // 1/S(tree) (or a reduction weight)
    SymExpr value;  // normal-form differential, q-division folded in for raw mode
};

struct CountertermExpr {
    CountertermMode mode = CountertermMode::FhatOverQ;
    std::vector<CountertermTerm> terms;
};

CountertermExpr assemble_counterterm(const std::vector<TreePtr>& trees,
                                     CountertermMode mode, const Nonlinearity& nl = {});

// Literal membership test for the local subset: Upsilon_Fhat[tau] equals
// q * Upsilon_F[P tau], where the projection P keeps tau only when every
// parameter-derivative decoration vanishes.
bool is_local(const TreePtr& tau, const Nonlinearity& nl = {});

struct LocalityReport {
    SymExpr graded;    // coefficient of the grading symbol; must vanish
    SymExpr value;     // grading-free part of the covariant combination
    SymExpr expected;  // q * Upsilon_F of the projected combination
    bool graded_zero = false;
    bool pass = false;
    std::vector<std::pair<std::string, SymExpr>> ledger;  // per-piece values
};

// Verifies that the covariant derivative of the pair (tau1, tau2) stays local:
// the parameter-graded part of its differential cancels exactly and the
// remaining part equals q times the plain differential of the projection.
// The argument values enter through the hypothesis substitution
// Upsilon_Fhat[tau_i] := q Upsilon_F[P tau_i], so the check is the inductive
// step: locality of the arguments implies locality of the combination.
LocalityReport check_locality(const TreePtr& tau1, const TreePtr& tau2,
                              const Nonlinearity& nl = {});

enum class NullKind { SingleEdge, Cherry };

struct NullReport {
    NullKind kind = NullKind::SingleEdge;
    int k = 0;
    int l = 0;
    bool in_claim = false;  // single edge k > 1, cherry k + l > 1
    SymExpr value;          // hatted differential of the decorated combination
    SymExpr local;          // q * plain differential of the projection
    bool pass = false;
};

// Higher parameter-derivative decorations annihilate the differential: the
// claim covers single edges with k > 1 and cherries with k + l > 1.  Boundary
// cases are evaluated and reported as out-of-claim.
NullReport check_null(const TreePtr& tau1, const TreePtr& tau2, NullKind kind, int k,
                      int l = 0, const Nonlinearity& nl = {});

// A linear relation: C(lhs) = sum over rhs of coeff * C(tree).
struct Constraint {
    std::string label;
    TreePtr lhs;
    std::vector<std::pair<TreePtr, SymExpr>> rhs;
};

struct ConstraintTable {
    int sector = 0;
    std::vector<Constraint> relations;
    int generators = 0;  // covariant-derivative words backing the table
    int rank = 0;        // of the generator coefficient matrix (rational probe)
};

// The relations the chain-rule symmetry imposes on the formal constants of
// the given noise sector.  Sector 2 returns the two closed-form relations;
// sector 4 generates covariant-derivative pairs over the admissible trees of
// the lower sectors, verifies each one symbolically, and derives the
// relations from their contents.
ConstraintTable chain_rule_constraints(int sector, const Nonlinearity& nl = {});

// Rewrites a raw (FhatOverQ) counterterm as a local (FLocal) one using the
// constraint table; throws NonlocalResidue when a parametrised contribution
// survives or a coefficient fails to close to the local form.
CountertermExpr reduce_to_local(const CountertermExpr& ct, const ConstraintTable& table,
                                const Nonlinearity& nl = {});

// The distinguished tree set whose constants are pinned to the covariance
// renormalisation: the two-noise cherry plus the four three-noise chains.
std::vector<TreePtr> ito_tree_set();

// The surviving local counterterm on that set under the Gaussian-vanishing
// convention (only the two-noise cherry contributes): C * g' g.
CountertermExpr ito_counterterm(const Nonlinearity& nl = {});

}  // namespace qkpz

#endif
