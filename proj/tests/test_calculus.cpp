#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qkpz/calculus.hpp>
#include <qkpz/tree_io.hpp>

using namespace qkpz;

namespace {

TreeSum sum_of(std::initializer_list<std::pair<const char*, Rat>> terms) {
    TreeSum s;
    for (const auto& [text, c] : terms) add_term(s, parse_tree(text), c);
    return s;
}

bool same(const TreeSum& a, const TreeSum& b) {
    TreeSum d = a;
    for (const auto& [t, c] : b) add_term(d, t, Rat(-c));
    return d.empty();
}

}  // namespace

TEST_CASE("uparrow distributes a decoration over the nodes") {
    const TreeSum s = uparrow(parse_tree("Xi[I(Xi)]"), MultiIndex{0, 1});
    CHECK(same(s, sum_of({{"X^(0,1)Xi[I(Xi)]", 1}, {"Xi[I(X^(0,1)Xi)]", 1}})));
    // Restricting to the root keeps a single term.
    const TreeSum r = uparrow(parse_tree("Xi[I(Xi)]"), MultiIndex{0, 1}, std::set<int>{0});
    CHECK(same(r, sum_of({{"X^(0,1)Xi[I(Xi)]", 1}})));
}

TEST_CASE("graft without space-time part attaches everywhere") {
    const TreeSum s = graft(xi_tree(), ParamIndex{0, {0, 0}}, parse_tree("Xi[I(Xi)]"));
    CHECK(same(s, sum_of({{"Xi[I(Xi),I(Xi)]", 1}, {"Xi[I(Xi[I(Xi)])]", 1}})));
}

TEST_CASE("graft lowers the edge decoration against node polynomials") {
    // Grafting with a spatial edge onto X^(0,1)Xi produces the binomial
    // lowering term where the edge loses its spatial part against the node.
    const TreeSum s = graft(xi_tree(), ParamIndex{0, {0, 1}}, parse_tree("X^(0,1)Xi"));
    CHECK(same(s, sum_of({{"X^(0,1)Xi[Ix(Xi)]", 1}, {"Xi[I(Xi)]", 1}})));
}

TEST_CASE("star product of a planted product") {
    CHECK(same(star(parse_tree("One[I(Xi)]"), xi_tree()), sum_of({{"Xi[I(Xi)]", 1}})));
    CHECK(same(star(parse_tree("One[Ix(Xi),Ix(Xi)]"), one_tree()),
               sum_of({{"One[Ix(Xi),Ix(Xi)]", 1}})));
    CHECK_THROWS_AS(star(xi_tree(), xi_tree()), StarDomain);
    // Multi-graft semantics: each factor lands on a node of the original tree,
    // never inside the other factor.
    const TreeSum s = star(parse_tree("One[I(Xi),I(Xi)]"), parse_tree("Xi[I(Xi)]"));
    for (const auto& [t, c] : s) CHECK(noise_count(t) == 4);
}

TEST_CASE("extended star annihilates colliding noises") {
    CHECK(star_extended(xi_tree(), xi_tree()).empty());
    CHECK_FALSE(star_extended(parse_tree("Xi[I(Xi)]"), parse_tree("One[I(Xi)]")).empty());
}

TEST_CASE("abstract derivative") {
    CHECK(same(abstract_derivative(1, poly_tree(MultiIndex{0, 1})), sum_of({{"One", 1}})));
    CHECK(same(abstract_derivative(1, parse_tree("One[I(Xi)]")),
               sum_of({{"One[Ix(Xi)]", 1}})));
    // Leibniz over root factors.
    const TreeSum s = abstract_derivative(1, parse_tree("One[I(Xi),I(Xi)]"));
    CHECK(same(s, sum_of({{"One[I(Xi),Ix(Xi)]", 2}})));
    CHECK(abstract_derivative(0, one_tree()).empty());
}

TEST_CASE("projection onto unparametrised trees") {
    CHECK(same(project_unparam(parse_tree("One[Ix(Xi),Ix(Xi)]")),
               sum_of({{"One[Ix(Xi),Ix(Xi)]", 1}})));
    CHECK(project_unparam(parse_tree("One[Ix{1}(Xi),Ix(Xi)]")).empty());
}

TEST_CASE("adjoint preparation map") {
    Character<Rat> ell;
    ell[parse_tree("One[Ix(Xi),Ix(Xi)]")] = Rat(1, 2);

    const auto out = prep_map_adjoint(ell, parse_tree("Xi[I(Xi)]"), true);
    // The identity part keeps the argument itself with coefficient 1.
    const auto self = out.find(parse_tree("Xi[I(Xi)]"));
    REQUIRE(self != out.end());
    CHECK(self->second == 1);
    // Every correction term gains the noises of the character's support.
    for (const auto& [t, c] : out)
        if (!tree_equal(t, parse_tree("Xi[I(Xi)]"))) CHECK(noise_count(t) == 4);
}

TEST_CASE("preparation map intertwines the star product") {
    // R*_ell(sigma * tau) = sigma * (R*_ell tau) on a deterministic instance.
    Character<Rat> ell;
    ell[parse_tree("One[Ix(Xi),Ix(Xi)]")] = Rat(1, 3);
    ell[parse_tree("One[I(Xi)]")] = Rat(-2);
    const TreePtr sigma = parse_tree("One[I(Xi)]");
    const TreePtr tau = parse_tree("Xi[I(Xi)]");

    Character<Rat> lhs;
    for (const auto& [t, c] : star(sigma, tau))
        for (const auto& [t2, c2] : prep_map_adjoint(ell, t, true))
            add_term(lhs, t2, Rat(c * c2));

    Character<Rat> rhs;
    for (const auto& [t, c] : prep_map_adjoint(ell, tau, true))
        for (const auto& [t2, c2] : star(sigma, t)) add_term(rhs, t2, Rat(c * c2));

    CHECK(same(lhs, rhs));
}

TEST_CASE("covariant derivative skeleton") {
    const GradedCounterterm g0 = nabla(xi_tree(), xi_tree(), 0);
    REQUIRE(g0.parts.size() == 2);
    CHECK(g0.parts[0].prefix == PrefixKind::AMult);
    CHECK(g0.parts[0].order == 0);
    CHECK(same(g0.parts[0].trees, sum_of({{"Xi[I(Xi)]", 1}})));
    CHECK(g0.parts[1].prefix == PrefixKind::Plain);
    CHECK(same(g0.parts[1].trees, sum_of({{"One[Ix(Xi),Ix(Xi)]", Rat(1, 2)}})));

    const GradedCounterterm g1 = nabla(xi_tree(), xi_tree(), 1);
    REQUIRE(g1.parts.size() == 2);
    CHECK(g1.parts[0].order == 1);
    CHECK(same(g1.parts[0].trees, sum_of({{"Xi[I{1}(Xi)]", 1}})));
    CHECK(same(g1.parts[1].trees, sum_of({{"One[Ix{1}(Xi),Ix(Xi)]", Rat(1, 2)},
                                          {"One[Ix(Xi),Ix{1}(Xi)]", Rat(1, 2)}})));
}
