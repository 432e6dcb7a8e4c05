#include "qkpz/calculus.hpp"

#include <algorithm>
#include <functional>

namespace qkpz {

namespace {

// Rebuild tau with per-node (preorder index) decoration increments.
TreePtr add_decorations(const TreePtr& t, int& counter,
                        const std::map<int, MultiIndex>& incr) {
    int my = counter++;
    std::vector<Child> cs;
    cs.reserve(t->children.size());
    for (const auto& c : t->children)
        cs.push_back({c.idx, add_decorations(c.sub, counter, incr)});
    MultiIndex deco = t->deco;
    if (auto it = incr.find(my); it != incr.end()) deco = deco + it->second;
    return make_tree(t->noise, deco, std::move(cs));
}

// All splittings of k over the node list, each with coefficient 1.
void distributions(const std::vector<int>& nodes, size_t i, MultiIndex rem,
                   std::map<int, MultiIndex>& acc,
                   const std::function<void(const std::map<int, MultiIndex>&)>& emit) {
    if (i + 1 == nodes.size()) {
        acc[nodes[i]] = rem;
        emit(acc);
        acc.erase(nodes[i]);
        return;
    }
    for (int t = 0; t <= rem.t; ++t)
        for (int x = 0; x <= rem.x; ++x) {
            MultiIndex part{t, x};
            if (!part.is_zero()) acc[nodes[i]] = part;
            distributions(nodes, i + 1, rem - part, acc, emit);
            acc.erase(nodes[i]);
        }
}

// Attach grouped factors at their assigned preorder nodes, with binomial
// decoration lowering, in a single rebuild pass.
TreeSum attach_grouped(const TreePtr& t, int& counter,
                       const std::map<int, std::vector<PlantedFactor>>& groups) {
    int my = counter++;
    std::vector<std::pair<std::vector<Child>, Rat>> combos{{{}, Rat(1)}};
    for (const auto& c : t->children) {
        TreeSum sub = attach_grouped(c.sub, counter, groups);
        std::vector<std::pair<std::vector<Child>, Rat>> next;
        for (const auto& [cs, r0] : combos)
            for (const auto& [s, r] : sub) {
                auto cs2 = cs;
                cs2.push_back({c.idx, s});
                next.emplace_back(std::move(cs2), r0 * r);
            }
        combos = std::move(next);
    }

    TreeSum out;
    auto git = groups.find(my);
    const std::vector<PlantedFactor>* mine = git == groups.end() ? nullptr : &git->second;
    for (const auto& [cs, r0] : combos) {
        struct State {
            MultiIndex deco;
            std::vector<Child> extra;
            Rat coeff;
        };
        std::vector<State> states{{t->deco, {}, r0}};
        if (mine) {
            for (const auto& f : *mine) {
                std::vector<State> next;
                for (const auto& st : states)
                    for (int bt = 0; bt <= std::min(st.deco.t, f.a.st.t); ++bt)
                        for (int bx = 0; bx <= std::min(st.deco.x, f.a.st.x); ++bx) {
                            MultiIndex beta{bt, bx};
                            State s2 = st;
                            s2.coeff *= Rat(binomial(st.deco, beta));
                            s2.deco = s2.deco - beta;
                            s2.extra.push_back({{f.a.h, f.a.st - beta}, f.sub});
                            next.push_back(std::move(s2));
                        }
                states = std::move(next);
            }
        }
        for (auto& st : states) {
            auto cs2 = cs;
            for (auto& e : st.extra) cs2.push_back(std::move(e));
            add_term(out, make_tree(t->noise, st.deco, std::move(cs2)), st.coeff);
        }
    }
    return out;
}

void assignments(int n_factors, int n_nodes, std::vector<int>& acc,
                 const std::function<void(const std::vector<int>&)>& emit) {
    if (static_cast<int>(acc.size()) == n_factors) {
        emit(acc);
        return;
    }
    for (int v = 0; v < n_nodes; ++v) {
        acc.push_back(v);
        assignments(n_factors, n_nodes, acc, emit);
        acc.pop_back();
    }
}

}  // namespace

TreeSum uparrow(const TreePtr& tau, const MultiIndex& k,
                const std::optional<std::set<int>>& nodes) {
    int n = node_count(tau);
    std::vector<int> allowed;
    for (int i = 0; i < n; ++i)
        if (!nodes || nodes->count(i)) allowed.push_back(i);
    TreeSum out;
    if (k.is_zero() || allowed.empty()) {
        if (k.is_zero()) add_term(out, tau, Rat(1));
        return out;
    }
    std::map<int, MultiIndex> acc;
    distributions(allowed, 0, k, acc, [&](const std::map<int, MultiIndex>& d) {
        int counter = 0;
        add_term(out, add_decorations(tau, counter, d), Rat(1));
    });
    return out;
}

TreeSum multi_graft(const std::vector<PlantedFactor>& factors, const TreePtr& tau) {
    TreeSum out;
    int n_nodes = node_count(tau);
    std::vector<int> acc;
    assignments(static_cast<int>(factors.size()), n_nodes, acc,
                [&](const std::vector<int>& phi) {
                    std::map<int, std::vector<PlantedFactor>> groups;
                    for (size_t i = 0; i < factors.size(); ++i)
                        groups[phi[i]].push_back(factors[i]);
                    int counter = 0;
                    for (const auto& [t, c] : attach_grouped(tau, counter, groups))
                        add_term(out, t, c);
                });
    return out;
}

TreeSum graft(const TreePtr& sigma, const ParamIndex& a, const TreePtr& tau) {
    return multi_graft({{a, sigma}}, tau);
}

TreeSum star(const TreePtr& sigma, const TreePtr& tau) {
    if (sigma->noise == NoiseKind::Xi)
        throw StarDomain("star: left factor's root carries the driving noise");
    std::vector<PlantedFactor> factors;
    for (const auto& c : sigma->children) factors.push_back({c.idx, c.sub});
    TreeSum grafted = multi_graft(factors, tau);
    TreeSum out;
    for (const auto& [t, c] : grafted)
        for (const auto& [t2, c2] : uparrow(t, sigma->deco)) add_term(out, t2, Rat(c * c2));
    return out;
}

TreeSum star_extended(const TreePtr& tau, const TreePtr& sigma) {
    std::vector<PlantedFactor> factors;
    for (const auto& c : tau->children) factors.push_back({c.idx, c.sub});
    TreeSum grafted = multi_graft(factors, sigma);
    TreeSum raised;
    for (const auto& [t, c] : grafted)
        for (const auto& [t2, c2] : uparrow(t, tau->deco)) add_term(raised, t2, Rat(c * c2));
    if (tau->noise == NoiseKind::One) return raised;
    TreeSum out;
    for (const auto& [t, c] : raised) {
        if (t->noise == NoiseKind::Xi) continue;  // Xi * Xi at one node vanishes
        add_term(out, tree_product(xi_tree(), t), c);
    }
    return out;
}

TreeSum abstract_derivative(int i, const TreePtr& tau) {
    MultiIndex e = i == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1};
    TreeSum out;
    for (size_t j = 0; j < tau->children.size(); ++j) {
        auto cs = tau->children;
        cs[j].idx.st = cs[j].idx.st + e;
        add_term(out, make_tree(tau->noise, tau->deco, std::move(cs)), Rat(1));
    }
    int mult = i == 0 ? tau->deco.t : tau->deco.x;
    if (mult > 0)
        add_term(out, make_tree(tau->noise, tau->deco - e, tau->children), Rat(mult));
    return out;
}

TreeSum apply_linear(const TreeSum& s, const std::function<TreeSum(const TreePtr&)>& f) {
    TreeSum out;
    for (const auto& [t, c] : s)
        for (const auto& [t2, c2] : f(t)) add_term(out, t2, Rat(c * c2));
    return out;
}

TreeSum abstract_derivative(int i, const TreeSum& s) {
    return apply_linear(s, [i](const TreePtr& t) { return abstract_derivative(i, t); });
}

TreeSum project_unparam(const TreePtr& tau) {
    TreeSum out;
    if (!has_params(tau)) add_term(out, tau, Rat(1));
    return out;
}

TreeSum project_unparam(const TreeSum& s) {
    return apply_linear(s, [](const TreePtr& t) { return project_unparam(t); });
}

GradedCounterterm nabla(const TreePtr& tau1, const TreePtr& tau2, int m) {
    GradedCounterterm out;

    GradedPart single{PrefixKind::AMult, m, {}};
    TreePtr attached = tree_product(
        tau1, make_tree(NoiseKind::One, {}, {{{m, {0, 0}}, tau2}}));
    add_term(single.trees, attached, Rat(1));
    out.parts.push_back(std::move(single));

    GradedPart cherry{PrefixKind::Plain, m, {}};
    for (int k = 0; k <= m; ++k) {
        int l = m - k;
        TreePtr ch = make_tree(NoiseKind::One, {},
                               {{{k, {0, 1}}, tau1}, {{l, {0, 1}}, tau2}});
        Rat w = Rat(1, 2) / Rat(factorial(k) * factorial(l));
        add_term(cherry.trees, ch, w);
    }
    out.parts.push_back(std::move(cherry));
    return out;
}

}  // namespace qkpz
