#ifndef QKPZ_RULES_HPP
#define QKPZ_RULES_HPP

#include <set>
#include <vector>

#include "qkpz/tree.hpp"

namespace qkpz {

enum class RuleKind {
    Full,       // {(thin^k, Xi)} U {(thick^l, thin^k) : l in {0,1,2}}
    Saturated,  // {(thin^k, Xi)} U {(thick^2, thin^k)}; node decorations vanish
};

struct RuleSet {
    RuleKind kind = RuleKind::Saturated;
};

struct EnumConfig {
    Rat alpha_n = Rat(-3) / 2;
    Rat kappa = Rat(1) / 100;
    std::set<int> noise_counts = {2};
    int max_param_deriv = 4;  // N

    bool subcritical() const { return alpha_n - kappa > -2; }
};

struct NotSubcritical : std::domain_error {
    using std::domain_error::domain_error;
};

// Every node's (thick-count, thin-count, noise) matches a rule signature.
bool conforms(const TreePtr& tau, const RuleSet& rules);

// Same check skipping the root node (used for intermediate expansion trees
// whose root is still to be merged into a bigger tree).
bool conforms_below_root(const TreePtr& tau, const RuleSet& rules);

std::vector<TreePtr> enumerate_negative(const RuleSet& rules, const EnumConfig& cfg);

// All h-assignments in {0..N} per integration edge, canonically deduplicated.
std::vector<TreePtr> parametrise(const std::vector<TreePtr>& s, int N);

}  // namespace qkpz

#endif
