#ifndef QKPZ_QUADRATURE_HPP
#define QKPZ_QUADRATURE_HPP

#include <functional>
#include <stdexcept>
#include <string>

namespace qkpz {

struct QuadratureFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Even, compactly supported kernel of unit mass.
struct Mollifier {
    std::function<double(double)> rho;
    double support = 1.0;

    // (15/16)(1 - x^2)^2 on [-1, 1].
    static Mollifier poly_bump();
    // Piecewise-linear kernel from a two-column "x value" table; the table
    // must be symmetric enough for the caller's purposes -- no checks beyond
    // monotone abscissae are performed.
    static Mollifier from_file(const std::string& path);
};

// Adaptive Simpson integration to the given absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

// Squared L^2 norm of the rescaled kernel rho_eps(x) = rho(x/eps)/eps.
double ito_constant(const Mollifier& rho, double eps);

}  // namespace qkpz

#endif
