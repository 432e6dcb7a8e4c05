#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include <qkpz/quadrature.hpp>

using namespace qkpz;

TEST_CASE("adaptive quadrature on smooth integrands") {
    CHECK(std::fabs(integrate([](double x) { return x * x; }, 0, 1) - 1.0 / 3.0) < 1e-12);
    CHECK(std::fabs(integrate([](double x) { return std::sin(x); }, 0, M_PI) - 2.0) < 1e-10);
    CHECK(integrate([](double) { return 1.0; }, 1, 1) == 0.0);
}

TEST_CASE("polynomial bump kernel has unit mass") {
    const Mollifier m = Mollifier::poly_bump();
    CHECK(m.support == 1.0);
    const double mass = integrate(m.rho, -1, 1);
    CHECK(std::fabs(mass - 1.0) < 1e-12);
    CHECK(m.rho(1.5) == 0.0);
}

TEST_CASE("covariance constant scales like 1/eps") {
    const Mollifier m = Mollifier::poly_bump();
    // The squared L^2 norm of the bump is 5/7; rescaling divides by eps.
    for (double eps : {1.0, 0.1, 0.01})
        CHECK(std::fabs(eps * ito_constant(m, eps) - 5.0 / 7.0) < 1e-10);
    CHECK_THROWS_AS(ito_constant(m, 0.0), QuadratureFailure);
}

TEST_CASE("tabulated kernels") {
    const std::string path = "qkpz_test_mollifier.tmp";
    {
        std::ofstream out(path);
        out << "-1 0\n0 1\n1 0\n";
    }
    const Mollifier m = Mollifier::from_file(path);
    CHECK(m.support == 1.0);
    CHECK(std::fabs(m.rho(0.0) - 1.0) < 1e-15);
    CHECK(std::fabs(m.rho(0.5) - 0.5) < 1e-15);
    CHECK(m.rho(2.0) == 0.0);
    std::remove(path.c_str());

    CHECK_THROWS_AS(Mollifier::from_file("does-not-exist.tmp"), QuadratureFailure);
    {
        std::ofstream out(path);
        out << "0 1\n";
    }
    CHECK_THROWS_AS(Mollifier::from_file(path), QuadratureFailure);
    {
        std::ofstream out(path);
        out << "0 1\n0 2\n";
    }
    CHECK_THROWS_AS(Mollifier::from_file(path), QuadratureFailure);
    std::remove(path.c_str());
}
