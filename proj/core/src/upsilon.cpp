#include "qkpz/upsilon.hpp"

namespace qkpz {

namespace {

void require_zero_decorations(const TreePtr& tau) {
    if (!tau->deco.is_zero())
        throw Unsupported("upsilon: polynomial node decorations are out of scope");
    for (const auto& c : tau->children) require_zero_decorations(c.sub);
}

Slot slot_for(const MultiIndex& st) {
    if (st == MultiIndex{0, 0}) return Slot::U;
    if (st == MultiIndex{0, 1}) return Slot::Ux;
    throw Unsupported("upsilon_F: unsupported edge space-time part");
}

}  // namespace

SymExpr nonlinearity_F1(const Nonlinearity& nl) {
    SymExpr e = (SymExpr::func(FuncBase::f) - SymExpr::func(FuncBase::a, 1)) *
                SymExpr::ux().pow(2);
    if (nl.full)
        e += SymExpr::func(FuncBase::k) * SymExpr::ux() + SymExpr::func(FuncBase::h);
    return e;
}

SymExpr nonlinearity_Fxi(const Nonlinearity&) { return SymExpr::func(FuncBase::g); }

SymExpr nonlinearity_Fhat1(const Nonlinearity& nl) {
    SymExpr a0 = SymExpr::func(FuncBase::a, 0);
    SymExpr a1 = SymExpr::func(FuncBase::a, 1);
    SymExpr a2 = SymExpr::func(FuncBase::a, 2);
    SymExpr fhat = SymExpr::q() * (SymExpr::func(FuncBase::f) - a1) +
                   a0 * a1 * a1 * SymExpr::vvar(kVCC) + a0 * a2 * SymExpr::vvar(kVC);
    SymExpr e = fhat * SymExpr::ux().pow(2) +
                Rat(2) * a0 * a1 * SymExpr::ux() * SymExpr::vvar(kVCX) +
                a1 * SymExpr::ux() * SymExpr::vvar(kVX);
    if (nl.full)
        e += SymExpr::q() * (SymExpr::func(FuncBase::k) * SymExpr::ux() +
                             SymExpr::func(FuncBase::h));
    return e;
}

SymExpr nonlinearity_Fhatxi(const Nonlinearity& nl) {
    SymExpr g = SymExpr::func(FuncBase::g);
    return nl.perturb_ghat ? g : SymExpr::q() * g;
}

SymExpr upsilon_F(const TreePtr& tau, const Nonlinearity& nl) {
    require_zero_decorations(tau);
    if (has_params(tau))
        throw Unsupported("upsilon_F: expected an unparametrised tree");
    SymExpr e = tau->noise == NoiseKind::Xi ? nonlinearity_Fxi(nl)
                                            : nonlinearity_F1(nl);
    for (const auto& c : tau->children) e = slot_partial(slot_for(c.idx.st), e);
    for (const auto& c : tau->children) e *= upsilon_F(c.sub, nl);
    return e;
}

SymExpr upsilon_Fhat(const TreePtr& tau, const Nonlinearity& nl) {
    require_zero_decorations(tau);
    SymExpr e = tau->noise == NoiseKind::Xi ? nonlinearity_Fhatxi(nl)
                                            : nonlinearity_Fhat1(nl);
    for (const auto& c : tau->children) e = v_derivative(c.idx, e);
    for (const auto& c : tau->children) e *= upsilon_Fhat(c.sub, nl);
    return e;
}

SymExpr upsilon_V(const ParamIndex& alpha, const TreePtr& tau,
                  const Nonlinearity& nl) {
    require_zero_decorations(tau);
    if (tau->noise != NoiseKind::One)
        throw Unsupported("upsilon_V: expected a product of planted trees");
    SymExpr e = alpha == ParamIndex{0, {0, 0}} ? SymExpr::u_sym()
                                               : SymExpr::vvar(alpha);
    for (const auto& c : tau->children) e = v_derivative(c.idx, e);
    for (const auto& c : tau->children) e *= upsilon_Fhat(c.sub, nl);
    return e;
}

}  // namespace qkpz
