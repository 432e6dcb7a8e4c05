#ifndef QKPZ_UPSILON_HPP
#define QKPZ_UPSILON_HPP

#include <stdexcept>

#include "qkpz/symexpr.hpp"
#include "qkpz/tree.hpp"

namespace qkpz {

// Configuration of the right-hand side.  The default matches the reduced
// divergence form: F_1 = (f - a')(dx u)^2, F_xi = g.  `full` adds the lower
// order k(u) dx u + h(u) terms to F_1.  `perturb_ghat` drops the q factor in
// the hatted noise coefficient -- a deliberate wrong variant used as a
// negative control by the test suite.
struct Nonlinearity {
    bool full = false;
    bool perturb_ghat = false;
};

struct Unsupported : std::domain_error {
    using std::domain_error::domain_error;
};

// The components of the nonlinearities as normal-form expressions.
SymExpr nonlinearity_F1(const Nonlinearity& nl = {});
SymExpr nonlinearity_Fxi(const Nonlinearity& nl = {});
SymExpr nonlinearity_Fhat1(const Nonlinearity& nl = {});
SymExpr nonlinearity_Fhatxi(const Nonlinearity& nl = {});

// Elementary differential for the plain (commutative) nonlinearity: slot
// partials in u for thin edges, dx u for thick edges.  Requires an
// unparametrised tree with zero node decorations.
SymExpr upsilon_F(const TreePtr& tau, const Nonlinearity& nl = {});

// Elementary differential for the hatted nonlinearity: the non-commutative
// derivative string over the planar child order (first child applied first,
// innermost), times the product of the children's values.
SymExpr upsilon_Fhat(const TreePtr& tau, const Nonlinearity& nl = {});

// Elementary differential of the component V_alpha on a product of planted
// trees; alpha = 0 gives the solution component (base symbol u).
SymExpr upsilon_V(const ParamIndex& alpha, const TreePtr& tau,
                  const Nonlinearity& nl = {});

}  // namespace qkpz

#endif
