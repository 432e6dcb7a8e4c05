#ifndef QKPZ_SYMEXPR_HPP
#define QKPZ_SYMEXPR_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "qkpz/multiindex.hpp"

namespace qkpz {

enum class FuncBase { a, f, g, k, h };

// base^(order)(u), e.g. {a,1} is a'(u).
struct FuncSym {
    FuncBase base;
    int order = 0;
    auto operator<=>(const FuncSym&) const = default;
};

// Argument slots of the nonlinearities.
enum class Slot { U, Ux, Vc, Vcc, Vcx, Vx };

// Monomial over the generators {D, q, ux, u, base^(n), v_alpha}.  Normal form
// eliminates the product a'(u)*v_c via the relation q = 1 - a'(u) v_c, so q
// may carry any integer exponent while everything else is a polynomial
// exponent.  D is the central nilpotent grading symbol (D^2 = 0).
struct Mono {
    int D = 0;
    int qpow = 0;
    int ux = 0;
    int u = 0;
    std::map<FuncSym, int> funcs;
    std::map<ParamIndex, int> vvars;
    auto operator<=>(const Mono&) const = default;
};

class SymExpr {
  public:
    SymExpr() = default;
    SymExpr(int v) { if (v != 0) terms_[Mono{}] = v; }
    SymExpr(const Rat& v) { if (v != 0) terms_[Mono{}] = v; }

    static SymExpr monomial(Mono m, Rat coeff = 1);
    static SymExpr func(FuncBase b, int order = 0);
    static SymExpr vvar(const ParamIndex& idx);
    static SymExpr q(int power = 1);
    static SymExpr ux(int power = 1);
    static SymExpr u_sym();
    static SymExpr grading();  // the symbol D

    bool is_zero() const { return terms_.empty(); }
    const std::map<Mono, Rat>& terms() const { return terms_; }

    SymExpr operator+(const SymExpr& o) const;
    SymExpr operator-(const SymExpr& o) const;
    SymExpr operator*(const SymExpr& o) const;
    SymExpr operator-() const;
    SymExpr& operator+=(const SymExpr& o) { return *this = *this + o; }
    SymExpr& operator-=(const SymExpr& o) { return *this = *this - o; }
    SymExpr& operator*=(const SymExpr& o) { return *this = *this * o; }
    bool operator==(const SymExpr& o) const { return terms_ == o.terms_; }

    SymExpr pow(int n) const;
    SymExpr mul_qpow(int k) const;  // multiply by q^k (exact in the ring)

    // Split by the grading symbol: e = d0 + D*d1.
    SymExpr grade0() const;
    SymExpr grade1() const;  // the coefficient of D (with D removed)

    std::string str() const;
    nlohmann::json to_json() const;

    void add_term(Mono m, Rat coeff);  // normalizes the inserted monomial

  private:
    std::map<Mono, Rat> terms_;
};

inline SymExpr operator*(const Rat& c, const SymExpr& e) { return SymExpr(c) * e; }

// Non-commutative chain-rule derivative d/d v_alpha acting on expressions in
// the coherent variables.  Precondition: e carries no grading symbol.
SymExpr v_derivative(const ParamIndex& alpha, const SymExpr& e);

// Ordinary commutative partial derivative in one of the six argument slots.
SymExpr slot_partial(Slot slot, const SymExpr& e);

bool equal(const SymExpr& e1, const SymExpr& e2);

// The single explicit bridge between the two readings of the gradient slot:
// replaces every ux power by (v_x/q)^power.
SymExpr convert_ux(const SymExpr& e);

// Semilinear smoke-test substitution: a^(n) -> 0 for n >= 1 and q -> 1.
SymExpr collapse_a_constant(const SymExpr& e);

// Numeric evaluation with exact rationals (q evaluates via its definition).
// Throws if the expression contains the grading symbol.
Rat eval(const SymExpr& e, const std::function<Rat(const FuncSym&)>& func_val,
         const std::function<Rat(const ParamIndex&)>& v_val, const Rat& ux_val,
         const Rat& u_val);

// Exact division in the localized ring; nullopt if den does not divide num.
std::optional<SymExpr> try_divide(const SymExpr& num, const SymExpr& den);

// Derived abbreviation p_c = a'' v_c + (a')^2 v_cc (the v-derivative of -q
// times q); inferred, used by tests and reports.
SymExpr p_c();

std::string func_name(const FuncSym& f);
std::string vvar_name(const ParamIndex& idx);

}  // namespace qkpz

#endif
