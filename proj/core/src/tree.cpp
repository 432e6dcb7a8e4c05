#include "qkpz/tree.hpp"

#include <algorithm>

namespace qkpz {

namespace {

// Reference exponents used only for the deterministic canonical ordering.
const Rat kRefAlpha = Rat(-3) / 2;
const Rat kRefKappa = Rat(1) / 100;

Rat degree_impl(const Tree& t, const Rat& alpha_n, const Rat& kappa) {
    Rat d = 0;
    if (t.noise == NoiseKind::Xi) d += alpha_n - kappa;
    d += t.deco.parabolic();
    for (const auto& c : t.children) {
        // deg(I_alpha(tau)) = deg(tau) + 2 - |st|_s; h contributes 0.
        d += degree_impl(*c.sub, alpha_n, kappa) + 2 - c.idx.st.parabolic();
    }
    return d;
}

bool canonical_child_less(const Child& a, const Child& b) {
    Rat da = degree_impl(*a.sub, kRefAlpha, kRefKappa) + 2 - a.idx.st.parabolic();
    Rat db = degree_impl(*b.sub, kRefAlpha, kRefKappa) + 2 - b.idx.st.parabolic();
    if (da != db) return da < db;
    return child_cmp(a, b) < 0;
}

}  // namespace

int structural_cmp(const Tree& a, const Tree& b) {
    if (a.noise != b.noise) return a.noise < b.noise ? -1 : 1;
    if (a.deco != b.deco) return a.deco < b.deco ? -1 : 1;
    if (a.children.size() != b.children.size())
        return a.children.size() < b.children.size() ? -1 : 1;
    for (size_t i = 0; i < a.children.size(); ++i) {
        int c = child_cmp(a.children[i], b.children[i]);
        if (c != 0) return c;
    }
    return 0;
}

int child_cmp(const Child& a, const Child& b) {
    if (a.idx != b.idx) return a.idx < b.idx ? -1 : 1;
    return structural_cmp(*a.sub, *b.sub);
}

bool tree_equal(const TreePtr& a, const TreePtr& b) { return structural_cmp(*a, *b) == 0; }
bool child_equal(const Child& a, const Child& b) { return child_cmp(a, b) == 0; }

bool children_commute(const Child& a, const Child& b) {
    if (a.idx.h == 0 && b.idx.h == 0) return true;
    return child_equal(a, b);
}

TreePtr make_tree(NoiseKind noise, MultiIndex deco, std::vector<Child> children) {
    // Sort each maximal run of consecutive h=0 children; never move h>=1 edges.
    size_t i = 0;
    while (i < children.size()) {
        if (children[i].idx.h != 0) { ++i; continue; }
        size_t j = i;
        while (j < children.size() && children[j].idx.h == 0) ++j;
        std::sort(children.begin() + i, children.begin() + j, canonical_child_less);
        i = j;
    }
    auto t = std::make_shared<Tree>();
    t->noise = noise;
    t->deco = deco;
    t->children = std::move(children);
    return t;
}

TreePtr canonicalize(const Tree& raw) {
    std::vector<Child> cs;
    cs.reserve(raw.children.size());
    for (const auto& c : raw.children) cs.push_back({c.idx, canonicalize(*c.sub)});
    return make_tree(raw.noise, raw.deco, std::move(cs));
}

TreePtr commutative_representative(const TreePtr& tau) {
    std::vector<Child> cs;
    cs.reserve(tau->children.size());
    for (const auto& c : tau->children)
        cs.push_back({c.idx, commutative_representative(c.sub)});
    std::stable_sort(cs.begin(), cs.end(),
                     [](const Child& a, const Child& b) { return child_cmp(a, b) < 0; });
    // make_tree re-sorts the leading h=0 run into canonical (degree) order.
    return make_tree(tau->noise, tau->deco, std::move(cs));
}

TreePtr one_tree() {
    static const TreePtr t = make_tree(NoiseKind::One, {}, {});
    return t;
}

TreePtr xi_tree() {
    static const TreePtr t = make_tree(NoiseKind::Xi, {}, {});
    return t;
}

TreePtr poly_tree(MultiIndex k) { return make_tree(NoiseKind::One, k, {}); }

bool is_one(const Tree& t) {
    return t.noise == NoiseKind::One && t.deco.is_zero() && t.children.empty();
}

TreePtr tree_product(const TreePtr& t1, const TreePtr& t2) {
    if (t1->noise == NoiseKind::Xi && t2->noise == NoiseKind::Xi)
        throw IncompatibleNoise("tree_product: both roots carry Xi");
    NoiseKind noise =
        (t1->noise == NoiseKind::Xi || t2->noise == NoiseKind::Xi) ? NoiseKind::Xi
                                                                   : NoiseKind::One;
    std::vector<Child> cs = t1->children;
    cs.insert(cs.end(), t2->children.begin(), t2->children.end());
    return make_tree(noise, t1->deco + t2->deco, std::move(cs));
}

TreePtr plant(const ParamIndex& alpha, const TreePtr& tau) {
    return make_tree(NoiseKind::One, {}, {{alpha, tau}});
}

Int symmetry_factor(const TreePtr& tau) {
    Int s = factorial(tau->deco);
    auto d = decompose(tau);
    for (const auto& b : d.blocks) {
        Int ss = symmetry_factor(b.sub);
        for (int i = 0; i < b.multiplicity; ++i) s *= ss;
        s *= factorial(b.multiplicity);
    }
    return s;
}

Int inner_product(const TreePtr& sigma, const TreePtr& tau) {
    if (!tree_equal(sigma, tau)) return 0;
    return symmetry_factor(tau);
}

Rat degree(const TreePtr& tau, const Rat& alpha_n, const Rat& kappa) {
    return degree_impl(*tau, alpha_n, kappa);
}

Decomposition decompose(const TreePtr& tau) {
    Decomposition d;
    d.k = tau->deco;
    d.noise = tau->noise;
    // Greedy grouping: a child merges with an earlier group of identical
    // children provided every child in between commutes with it.
    std::vector<size_t> group_last;  // index into tau->children of group rep
    for (size_t i = 0; i < tau->children.size(); ++i) {
        const Child& c = tau->children[i];
        bool merged = false;
        for (size_t g = d.blocks.size(); g-- > 0;) {
            const Child rep{d.blocks[g].idx, d.blocks[g].sub};
            bool blocked = false;
            for (size_t j = group_last[g] + 1; j < i; ++j)
                if (!children_commute(tau->children[j], c)) { blocked = true; break; }
            if (blocked) break;  // a non-commuting edge separates all earlier groups
            if (child_equal(rep, c)) {
                d.blocks[g].multiplicity += 1;
                group_last[g] = i;
                merged = true;
                break;
            }
        }
        if (!merged) {
            d.blocks.push_back({c.idx, c.sub, 1});
            group_last.push_back(i);
        }
    }
    return d;
}

int noise_count(const TreePtr& tau) {
    int n = tau->noise == NoiseKind::Xi ? 1 : 0;
    for (const auto& c : tau->children) n += noise_count(c.sub);
    return n;
}

int edge_count(const TreePtr& tau) {
    int n = static_cast<int>(tau->children.size());
    for (const auto& c : tau->children) n += edge_count(c.sub);
    return n;
}

int node_count(const TreePtr& tau) { return edge_count(tau) + 1; }

TreePtr strip_params(const TreePtr& tau) {
    std::vector<Child> cs;
    cs.reserve(tau->children.size());
    for (const auto& c : tau->children)
        cs.push_back({{0, c.idx.st}, strip_params(c.sub)});
    return make_tree(tau->noise, tau->deco, std::move(cs));
}

bool has_params(const TreePtr& tau) {
    for (const auto& c : tau->children)
        if (c.idx.h != 0 || has_params(c.sub)) return true;
    return false;
}

}  // namespace qkpz
