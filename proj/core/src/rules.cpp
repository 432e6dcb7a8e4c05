#include "qkpz/rules.hpp"

#include <algorithm>
#include <functional>

namespace qkpz {

namespace {

bool node_admissible(const Tree& node, RuleKind kind) {
    int thick = 0, thin = 0;
    for (const auto& c : node.children) {
        if (c.idx.st == MultiIndex{0, 0}) ++thin;
        else if (c.idx.st == MultiIndex{0, 1}) ++thick;
        else return false;  // no other edge kinds in either rule
    }
    if (node.noise == NoiseKind::Xi) {
        if (thick != 0) return false;
    } else {
        if (kind == RuleKind::Saturated && thick != 2) return false;
        if (kind == RuleKind::Full && thick > 2) return false;
    }
    if (kind == RuleKind::Saturated && !node.deco.is_zero()) return false;
    return true;
}

bool conforms_impl(const Tree& t, RuleKind kind, bool check_this_node) {
    if (check_this_node && !node_admissible(t, kind)) return false;
    for (const auto& c : t.children)
        if (!conforms_impl(*c.sub, kind, true)) return false;
    return true;
}

// 2E - T: the (positive) degree contribution of the edge structure.
int edge_weight(const TreePtr& t) {
    int w = 0;
    for (const auto& c : t->children)
        w += (2 - c.idx.st.parabolic()) + edge_weight(c.sub);
    return w;
}

struct Generator {
    RuleKind kind;
    int budget;  // max allowed 2E - T anywhere
    std::vector<std::vector<TreePtr>> memo;
    std::vector<bool> done;

    // Enumerate child multisets from a pool (non-decreasing index to avoid
    // duplicate multisets) and hand the complete lists to `emit`.
    void pick(const std::vector<TreePtr>& pool, const MultiIndex& st, int count_exact,
              int rem_noise, int rem_w, size_t min_i, std::vector<Child>& acc,
              const std::function<void(int, int, std::vector<Child>&)>& next) const {
        if (count_exact == 0) {
            next(rem_noise, rem_w, acc);
            return;
        }
        for (size_t i = min_i; i < pool.size(); ++i) {
            int nn = noise_count(pool[i]);
            int ww = edge_weight(pool[i]) + 2 - st.parabolic();
            if (nn > rem_noise || ww > rem_w) continue;
            acc.push_back({{0, st}, pool[i]});
            pick(pool, st, count_exact - 1, rem_noise - nn, rem_w - ww, i, acc, next);
            acc.pop_back();
        }
    }

    // Unbounded thin children consuming exactly rem_noise.
    void pick_thin_all(const std::vector<TreePtr>& pool, int rem_noise, int rem_w,
                       size_t min_i, std::vector<Child>& acc,
                       const std::function<void(std::vector<Child>&)>& emit) const {
        if (rem_noise == 0) {
            emit(acc);
            return;
        }
        for (size_t i = min_i; i < pool.size(); ++i) {
            int nn = noise_count(pool[i]);
            int ww = edge_weight(pool[i]) + 2;
            if (nn > rem_noise || ww > rem_w) continue;
            acc.push_back({{0, {0, 0}}, pool[i]});
            pick_thin_all(pool, rem_noise - nn, rem_w - ww, i, acc, emit);
            acc.pop_back();
        }
    }

    const std::vector<TreePtr>& gen(int n) {
        if (n < static_cast<int>(done.size()) && done[n]) return memo[n];
        if (n >= static_cast<int>(done.size())) {
            done.resize(n + 1, false);
            memo.resize(n + 1);
        }
        std::set<TreePtr, TreeLess> out;

        std::vector<TreePtr> smaller;
        for (int m = 1; m < n; ++m)
            for (const auto& t : gen(m)) smaller.push_back(t);

        std::vector<int> thick_counts =
            kind == RuleKind::Saturated ? std::vector<int>{2} : std::vector<int>{0, 1, 2};

        // Closure loop: One-root nodes may have a single child carrying all n
        // noises (Full rule chains like I(I(Xi...))), so n-noise results feed
        // back into the candidate pool until nothing new appears.
        bool grew = true;
        bool first_pass = true;
        while (grew) {
            grew = false;
            std::vector<TreePtr> pool = smaller;
            for (const auto& t : out) pool.push_back(t);

            if (first_pass && n >= 1) {
                // Xi root: thin children with total noise n-1 (all < n).
                std::vector<Child> acc;
                pick_thin_all(smaller, n - 1, budget, 0, acc,
                              [&](std::vector<Child>& cs) {
                                  out.insert(make_tree(NoiseKind::Xi, {}, cs));
                              });
            }

            for (int tc : thick_counts) {
                std::vector<Child> acc;
                pick(pool, {0, 1}, tc, n, budget, 0, acc,
                     [&](int rn, int rw, std::vector<Child>& acc2) {
                         pick_thin_all(pool, rn, rw, 0, acc2,
                                       [&](std::vector<Child>& cs) {
                                           if (cs.empty()) return;  // exclude "1"
                                           auto t = make_tree(NoiseKind::One, {}, cs);
                                           if (out.insert(t).second) grew = true;
                                       });
                     });
            }
            first_pass = false;
        }

        memo[n].assign(out.begin(), out.end());
        done[n] = true;
        return memo[n];
    }
};

}  // namespace

bool conforms(const TreePtr& tau, const RuleSet& rules) {
    return conforms_impl(*tau, rules.kind, true);
}

bool conforms_below_root(const TreePtr& tau, const RuleSet& rules) {
    return conforms_impl(*tau, rules.kind, false);
}

std::vector<TreePtr> enumerate_negative(const RuleSet& rules, const EnumConfig& cfg) {
    if (!cfg.subcritical())
        throw NotSubcritical("enumerate_negative: alpha_n - kappa <= -2");
    std::vector<TreePtr> result;
    for (int n : cfg.noise_counts) {
        // degree = n(alpha_n - kappa) + (2E - T) < 0, so 2E - T <= budget
        Rat bound = -Rat(n) * (cfg.alpha_n - cfg.kappa);
        Int num = boost::multiprecision::numerator(bound);
        Int den = boost::multiprecision::denominator(bound);
        Int fl = num / den;  // bound > 0 here, truncation = floor
        int budget = static_cast<int>(fl);
        if (Rat(budget) == bound) budget -= 1;  // strict inequality

        Generator g{rules.kind, budget, {}, {}};
        for (const auto& t : g.gen(n)) {
            if (degree(t, cfg.alpha_n, cfg.kappa) < 0 && conforms(t, rules))
                result.push_back(t);
        }
    }
    std::sort(result.begin(), result.end(),
              [](const TreePtr& a, const TreePtr& b) { return structural_cmp(*a, *b) < 0; });
    return result;
}

std::vector<TreePtr> parametrise(const std::vector<TreePtr>& s, int N) {
    std::set<TreePtr, TreeLess> out;
    std::function<std::vector<TreePtr>(const TreePtr&)> assign =
        [&](const TreePtr& t) -> std::vector<TreePtr> {
        std::vector<std::vector<Child>> partial{{}};
        for (const auto& c : t->children) {
            std::vector<TreePtr> subs = assign(c.sub);
            std::vector<std::vector<Child>> next;
            for (const auto& p : partial)
                for (const auto& sv : subs)
                    for (int h = 0; h <= N; ++h) {
                        auto q = p;
                        q.push_back({{h, c.idx.st}, sv});
                        next.push_back(std::move(q));
                    }
            partial = std::move(next);
        }
        std::vector<TreePtr> res;
        for (auto& cs : partial) res.push_back(make_tree(t->noise, t->deco, cs));
        return res;
    };
    for (const auto& t : s)
        for (const auto& v : assign(t)) out.insert(v);
    return {out.begin(), out.end()};
}

}  // namespace qkpz
