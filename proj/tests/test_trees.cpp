#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qkpz/tree.hpp>
#include <qkpz/tree_io.hpp>

using namespace qkpz;

TEST_CASE("parse/render round trip") {
    for (const char* text : {
             "Xi",
             "One",
             "Xi[I(Xi)]",
             "One[Ix(Xi),Ix(Xi)]",
             "One[Ix{1}(Xi),Ix(Xi)]",
             "Xi[I{2}(Xi)]",
             "X^(1,0)Xi",
             "One[I^(1,0)(Xi)]",
             "Xi[Ix(Xi),I(Xi[I(Xi)])]",
         }) {
        const TreePtr t = parse_tree(text);
        CHECK(render_tree(t) == text);
        CHECK(tree_equal(parse_tree(render_tree(t)), t));
    }
}

TEST_CASE("parse errors carry position and expectation") {
    CHECK_THROWS_AS(parse_tree("Xi[I(Xi)"), ParseError);
    CHECK_THROWS_AS(parse_tree("Bogus"), ParseError);
    CHECK_THROWS_AS(parse_tree("Xi]"), ParseError);
    try {
        parse_tree("Xi[J(Xi)]");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.position == 3);
    }
}

TEST_CASE("json round trip") {
    for (const char* text : {"Xi", "One[Ix(Xi),Ix{1}(Xi)]", "Xi[I(Xi[I(Xi)])]"}) {
        const TreePtr t = parse_tree(text);
        CHECK(tree_equal(tree_from_json(tree_to_json(t)), t));
    }
}

TEST_CASE("canonical form sorts commuting runs only") {
    // Both children unparametrised: they commute and are sorted.
    CHECK(tree_equal(parse_tree("One[Ix(Xi),I(Xi)]"), parse_tree("One[I(Xi),Ix(Xi)]")));
    // A parametrised child blocks the exchange.
    CHECK_FALSE(tree_equal(parse_tree("One[Ix{1}(Xi),Ix(Xi)]"),
                           parse_tree("One[Ix(Xi),Ix{1}(Xi)]")));
    // Identical children always commute, including parametrised ones.
    CHECK(tree_equal(parse_tree("One[Ix{1}(Xi),Ix{1}(Xi)]"),
                     parse_tree("One[Ix{1}(Xi),Ix{1}(Xi)]")));
}

TEST_CASE("commutative representative identifies mirror decorations") {
    const TreePtr m10 = parse_tree("One[Ix{1}(Xi),Ix(Xi)]");
    const TreePtr m01 = parse_tree("One[Ix(Xi),Ix{1}(Xi)]");
    CHECK_FALSE(tree_equal(m10, m01));
    CHECK(tree_equal(commutative_representative(m10), commutative_representative(m01)));
}

TEST_CASE("symmetry factors") {
    CHECK(symmetry_factor(parse_tree("Xi")) == 1);
    CHECK(symmetry_factor(parse_tree("Xi[I(Xi)]")) == 1);
    CHECK(symmetry_factor(parse_tree("One[Ix(Xi),Ix(Xi)]")) == 2);
    CHECK(symmetry_factor(parse_tree("One[I(Xi),I(Xi)]")) == 2);
    CHECK(symmetry_factor(parse_tree("One[I(Xi),Ix(Xi)]")) == 1);
    CHECK(symmetry_factor(parse_tree("One[I(Xi),I(Xi),I(Xi)]")) == 6);
}

TEST_CASE("inner product is the diagonal symmetry factor") {
    const TreePtr a = parse_tree("One[Ix(Xi),Ix(Xi)]");
    const TreePtr b = parse_tree("Xi[I(Xi)]");
    CHECK(inner_product(a, a) == symmetry_factor(a));
    CHECK(inner_product(b, b) == 1);
    CHECK(inner_product(a, b) == 0);
}

TEST_CASE("degree under the default exponents") {
    const Rat an = Rat(-3) / 2;
    const Rat ka = Rat(1) / 100;
    const Rat noise = degree(xi_tree(), an, ka);
    // Thin edge: one integration (+2), one extra noise.
    CHECK(degree(parse_tree("Xi[I(Xi)]"), an, ka) == 2 * noise + 2);
    // Thick cherry: two integrations, each losing one parabolic unit.
    CHECK(degree(parse_tree("One[Ix(Xi),Ix(Xi)]"), an, ka) == 2 * noise + 2);
    CHECK(degree(parse_tree("Xi[I(Xi)]"), an, ka) < 0);
    // A node polynomial decoration raises the degree by its parabolic weight.
    CHECK(degree(parse_tree("X^(0,1)Xi"), an, ka) == noise + 1);
}

TEST_CASE("product, plant and decompose") {
    const TreePtr p = plant(ParamIndex{0, {0, 1}}, xi_tree());
    CHECK(render_tree(p) == "One[Ix(Xi)]");

    const TreePtr prod = tree_product(p, p);
    CHECK(render_tree(prod) == "One[Ix(Xi),Ix(Xi)]");
    CHECK_THROWS_AS(tree_product(xi_tree(), xi_tree()), IncompatibleNoise);

    const Decomposition d = decompose(prod);
    REQUIRE(d.blocks.size() == 1);
    CHECK(d.blocks[0].multiplicity == 2);
    CHECK(tree_equal(d.blocks[0].sub, xi_tree()));
    CHECK(d.noise == NoiseKind::One);
}

TEST_CASE("parameter decorations strip and detect") {
    const TreePtr t = parse_tree("One[Ix{1}(Xi),Ix(Xi)]");
    CHECK(has_params(t));
    CHECK_FALSE(has_params(strip_params(t)));
    CHECK(tree_equal(strip_params(t), parse_tree("One[Ix(Xi),Ix(Xi)]")));
}

TEST_CASE("tree sums cancel exactly") {
    TreeSum s;
    add_term(s, parse_tree("Xi[I(Xi)]"), Rat(2, 3));
    add_term(s, parse_tree("Xi[I(Xi)]"), Rat(-2, 3));
    CHECK(s.empty());
    add_term(s, parse_tree("Xi"), Rat(0));
    CHECK(s.empty());
}

TEST_CASE("counting helpers") {
    const TreePtr t = parse_tree("One[Ix(Xi),Ix(One[Ix(Xi),Ix(Xi)])]");
    CHECK(noise_count(t) == 3);
    CHECK(edge_count(t) == 4);
    CHECK(node_count(t) == 5);
}
