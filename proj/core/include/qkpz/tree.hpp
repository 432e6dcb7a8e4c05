#ifndef QKPZ_TREE_HPP
#define QKPZ_TREE_HPP

#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "qkpz/multiindex.hpp"

namespace qkpz {

// Noise label per node: One encodes Xi_1 (the constant 1), Xi encodes Xi_xi.
enum class NoiseKind { One, Xi };

struct Tree;
using TreePtr = std::shared_ptr<const Tree>;

// A planted child edge I_alpha(sub).
struct Child {
    ParamIndex idx;
    TreePtr sub;
};

// Partially planar decorated rooted tree, stored in canonical form: within
// every maximal run of consecutive children whose h values are all 0 the
// children are sorted by the fixed total order below; children with h >= 1
// are never moved.
struct Tree {
    NoiseKind noise = NoiseKind::One;
    MultiIndex deco{};
    std::vector<Child> children;
};

struct IncompatibleNoise : std::domain_error {
    using std::domain_error::domain_error;
};

// Strict weak order used for map keys and (together with degree) for the
// canonical sorting of commuting runs.
int structural_cmp(const Tree& a, const Tree& b);
int child_cmp(const Child& a, const Child& b);
bool tree_equal(const TreePtr& a, const TreePtr& b);
bool child_equal(const Child& a, const Child& b);

struct TreeLess {
    bool operator()(const TreePtr& a, const TreePtr& b) const {
        return structural_cmp(*a, *b) < 0;
    }
};

template <class Coeff>
using TreeMap = std::map<TreePtr, Coeff, TreeLess>;

// Exact-rational linear combination of canonical trees.
using TreeSum = TreeMap<Rat>;

// Two adjacent child edges commute iff both have h = 0 or the planted
// subtrees (decoration and subtree) are identical.
bool children_commute(const Child& a, const Child& b);

// Factory; sorts commuting runs (subtrees are assumed canonical already).
TreePtr make_tree(NoiseKind noise, MultiIndex deco, std::vector<Child> children);
TreePtr canonicalize(const Tree& raw);  // canonicalizes subtrees recursively

// Representative of the commutation class of tau: all children are sorted as
// if they commuted (parameter-free edges first, in canonical order, then
// parametrised edges structurally), recursively.  Coefficient identities that
// hold per commutation class are stated on this representative.
TreePtr commutative_representative(const TreePtr& tau);

TreePtr one_tree();                 // 1 = X^0, empty tree, noise One
TreePtr xi_tree();                  // the bare noise
TreePtr poly_tree(MultiIndex k);    // X^k

bool is_one(const Tree& t);

// Roots identified, decorations added, t1's children precede t2's.
TreePtr tree_product(const TreePtr& t1, const TreePtr& t2);

// I_alpha(tau): single-child tree with zero root decoration and noise One.
TreePtr plant(const ParamIndex& alpha, const TreePtr& tau);

Int symmetry_factor(const TreePtr& tau);

// <sigma,tau> = S(tau) * delta(sigma,tau).
Int inner_product(const TreePtr& sigma, const TreePtr& tau);

Rat degree(const TreePtr& tau, const Rat& alpha_n, const Rat& kappa);

struct DecompBlock {
    ParamIndex idx;
    TreePtr sub;
    int multiplicity = 1;
};
struct Decomposition {
    MultiIndex k;
    std::vector<DecompBlock> blocks;
    NoiseKind noise;
};
// Grouping of identical planted children respecting the commutation quotient
// (multiplicities maximal within commuting runs).
Decomposition decompose(const TreePtr& tau);

int noise_count(const TreePtr& tau);
int edge_count(const TreePtr& tau);
int node_count(const TreePtr& tau);

// Strip all parameter-derivative decorations (h := 0 on every edge).
TreePtr strip_params(const TreePtr& tau);
bool has_params(const TreePtr& tau);  // any edge with h != 0

// --- TreeSum helpers -------------------------------------------------------

template <class Coeff>
void add_term(TreeMap<Coeff>& s, const TreePtr& t, const Coeff& c) {
    auto [it, fresh] = s.emplace(t, c);
    if (!fresh) {
        it->second += c;
        if (it->second == Coeff{}) s.erase(it);
    } else if (c == Coeff{}) {
        s.erase(it);
    }
}

template <class Coeff>
void add_scaled(TreeMap<Coeff>& s, const TreeMap<Coeff>& other, const Coeff& factor) {
    for (const auto& [t, c] : other) add_term(s, t, Coeff(c * factor));
}

}  // namespace qkpz

#endif
