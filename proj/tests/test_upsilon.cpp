#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qkpz/tree_io.hpp>
#include <qkpz/upsilon.hpp>

using namespace qkpz;

namespace {
const SymExpr g = SymExpr::func(FuncBase::g);
const SymExpr gp = SymExpr::func(FuncBase::g, 1);
const SymExpr f = SymExpr::func(FuncBase::f);
const SymExpr ap = SymExpr::func(FuncBase::a, 1);
const SymExpr a = SymExpr::func(FuncBase::a);
const SymExpr q = SymExpr::q();
}  // namespace

TEST_CASE("nonlinearity components") {
    CHECK(equal(nonlinearity_Fxi(), g));
    CHECK(equal(nonlinearity_F1(), (f - ap) * SymExpr::ux(2)));
    const Nonlinearity full{.full = true};
    CHECK(equal(nonlinearity_F1(full),
                (f - ap) * SymExpr::ux(2) + SymExpr::func(FuncBase::k) * SymExpr::ux() +
                    SymExpr::func(FuncBase::h)));
    CHECK(equal(nonlinearity_Fhatxi(), q * g));
}

TEST_CASE("plain differentials of the warm-up trees") {
    CHECK(equal(upsilon_F(xi_tree()), g));
    CHECK(equal(upsilon_F(parse_tree("Xi[I(Xi)]")), g * gp));
    CHECK(equal(upsilon_F(parse_tree("One[Ix(Xi),Ix(Xi)]")), 2 * (f - ap) * g.pow(2)));
    CHECK_THROWS_AS(upsilon_F(parse_tree("Xi[I{1}(Xi)]")), Unsupported);
}

TEST_CASE("hatted differentials of the warm-up trees") {
    CHECK(equal(upsilon_Fhat(parse_tree("Xi[I(Xi)]")), q * g * gp - p_c() * g.pow(2)));
    CHECK(equal(upsilon_Fhat(parse_tree("Xi[I{1}(Xi)]")), -q * ap * g.pow(2)));
    CHECK(equal(upsilon_Fhat(parse_tree("One[Ix(Xi),Ix(Xi)]")),
                2 * a * p_c() * g.pow(2) + 2 * q * f * g.pow(2)));
    CHECK(equal(upsilon_Fhat(parse_tree("One[Ix{1}(Xi),Ix(Xi)]")),
                2 * q * a * ap * g.pow(2)));
    CHECK(equal(upsilon_Fhat(parse_tree("One[Ix(Xi),Ix{1}(Xi)]")),
                2 * q * a * ap * g.pow(2)));
}

TEST_CASE("component differentials on planted products") {
    // The solution component reproduces the expansion coefficients.
    CHECK(equal(upsilon_V(ParamIndex{0, {0, 0}}, parse_tree("One[I(Xi)]")), g));
    CHECK(equal(upsilon_V(kVC, one_tree()), SymExpr::vvar(kVC)));
    CHECK(equal(upsilon_V(kVC, parse_tree("One[I{1}(Xi)]")), q * g));
    CHECK(equal(upsilon_V(kVC, parse_tree("One[I(Xi)]")), ap * g * SymExpr::vvar(kVCC)));
    CHECK_THROWS_AS(upsilon_V(kVC, xi_tree()), Unsupported);
}

TEST_CASE("negative-control variant changes the hatted noise coefficient") {
    const Nonlinearity bad{.perturb_ghat = true};
    CHECK_FALSE(equal(nonlinearity_Fhatxi(bad), nonlinearity_Fhatxi()));
    CHECK_FALSE(equal(upsilon_Fhat(parse_tree("Xi[I(Xi)]"), bad),
                      upsilon_Fhat(parse_tree("Xi[I(Xi)]"))));
    // The plain differential is untouched by the hatted perturbation.
    CHECK(equal(upsilon_F(parse_tree("Xi[I(Xi)]"), bad),
                upsilon_F(parse_tree("Xi[I(Xi)]"))));
}
