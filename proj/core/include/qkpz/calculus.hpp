#ifndef QKPZ_CALCULUS_HPP
#define QKPZ_CALCULUS_HPP

#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qkpz/tree.hpp"

namespace qkpz {

// A finitely supported character on trees, coefficient ring C.
template <class C>
using Character = TreeMap<C>;

struct StarDomain : std::domain_error {
    using std::domain_error::domain_error;
};

// Decoration-raising derivation: sum over all distributions of k over the
// chosen nodes (preorder indices; nullopt = all nodes).
TreeSum uparrow(const TreePtr& tau, const MultiIndex& k,
                const std::optional<std::set<int>>& nodes = std::nullopt);

// Graft sigma onto every node of tau with an edge carrying a (minus the
// binomial lowering beta); new edges are appended rightmost, then the result
// is canonicalized.
TreeSum graft(const TreePtr& sigma, const ParamIndex& a, const TreePtr& tau);

// Independent multi-graft: each planted factor I_{a_i}(sigma_i) attaches to a
// node of the *original* tau (never inside another factor).
struct PlantedFactor {
    ParamIndex a;
    TreePtr sub;
};
TreeSum multi_graft(const std::vector<PlantedFactor>& factors, const TreePtr& tau);

// sigma * tau = uparrow^k (prod_i I_{a_i}(sigma_i) grafted onto tau) for
// sigma = X^k prod_i I_{a_i}(sigma_i).  Throws StarDomain when sigma's root
// carries the driving noise.
TreeSum star(const TreePtr& sigma, const TreePtr& tau);

// Extension of the product used by the adjoint preparation map: the first
// argument may carry a root noise, which multiplies the result at the root;
// terms where both roots carry the driving noise vanish.
TreeSum star_extended(const TreePtr& tau, const TreePtr& sigma);

// Abstract derivative D_i (i = 0 time, 1 space): Leibniz over the root
// factors, D_i I_a = I_{a+e_i} (space-time part only), D_i X^n = n_i X^{n-e_i}.
TreeSum abstract_derivative(int i, const TreePtr& tau);
TreeSum abstract_derivative(int i, const TreeSum& s);

// Projection onto unparametrised trees: identity when every h = 0, else 0.
TreeSum project_unparam(const TreePtr& tau);
TreeSum project_unparam(const TreeSum& s);

// R*_ell(tau) = [tau +] sum_sigma ell(sigma)/S(sigma) (tau * sigma).
template <class C>
Character<C> prep_map_adjoint(const Character<C>& ell, const TreePtr& tau,
                              bool include_identity = false) {
    Character<C> out;
    if (include_identity) {
        auto [it, ins] = out.try_emplace(tau, C(1));
        if (!ins) it->second += C(1);
    }
    for (const auto& [sigma, c] : ell) {
        Rat s = Rat(1) / Rat(symmetry_factor(sigma));
        for (const auto& [t, r] : star_extended(tau, sigma)) {
            C v = c * (r * s);
            auto [it, ins] = out.try_emplace(t, v);
            if (!ins) it->second += v;
        }
    }
    return out;
}

// Covariant derivative: a formal two-part combination whose prefixes act at
// the level of renormalisation constants, carried symbolically here.
enum class PrefixKind {
    AMult,  // partial^m (a .)
    Plain,  // (partial^m .)
};

struct GradedPart {
    PrefixKind prefix;
    int order;  // m
    TreeSum trees;
};

struct GradedCounterterm {
    std::vector<GradedPart> parts;
};

// nabla^m_{tau2} tau1: part (i) prefix partial^m(a .) on tau1 with I{m}(tau2)
// attached at the root; part (ii) prefix (partial^m .) on
// (1/2) sum_{k+l=m} 1/(k! l!) One[Ix{k}(tau1), Ix{l}(tau2)].
GradedCounterterm nabla(const TreePtr& tau1, const TreePtr& tau2, int m);

// Linear-extension helpers.
TreeSum apply_linear(const TreeSum& s, const std::function<TreeSum(const TreePtr&)>& f);

}  // namespace qkpz

#endif
