#ifndef QKPZ_MULTIINDEX_HPP
#define QKPZ_MULTIINDEX_HPP

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace qkpz {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Space-time multi-index (t,x) with parabolic weight |m|_s = 2t + x.
struct MultiIndex {
    int t = 0;
    int x = 0;

    auto operator<=>(const MultiIndex&) const = default;

    bool is_zero() const { return t == 0 && x == 0; }
    int parabolic() const { return 2 * t + x; }

    MultiIndex operator+(const MultiIndex& o) const { return {t + o.t, x + o.x}; }
    // May produce negative components; callers use the standard convention
    // that anything with a negative component annihilates the term.
    MultiIndex operator-(const MultiIndex& o) const { return {t - o.t, x - o.x}; }
    bool nonnegative() const { return t >= 0 && x >= 0; }
};

// Edge decoration alpha = (h, st): parameter-derivative order h plus the
// space-time part.  Also reused as the index of the variables v_alpha.
struct ParamIndex {
    int h = 0;
    MultiIndex st{};

    auto operator<=>(const ParamIndex&) const = default;
    bool is_zero() const { return h == 0 && st.is_zero(); }

    ParamIndex operator+(const ParamIndex& o) const { return {h + o.h, st + o.st}; }
    bool nonnegative() const { return h >= 0 && st.nonnegative(); }
};

inline const ParamIndex kVC{1, {0, 0}};
inline const ParamIndex kVCC{2, {0, 0}};
inline const ParamIndex kVX{0, {0, 1}};
inline const ParamIndex kVCX{1, {0, 1}};
inline const ParamIndex kVT{0, {1, 0}};

inline Int factorial(int n) {
    if (n < 0) throw std::invalid_argument("factorial of negative integer");
    Int r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// Multi-index factorial k! = k_t! * k_x!.
inline Int factorial(const MultiIndex& k) { return factorial(k.t) * factorial(k.x); }

inline Int binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    Int r = 1;
    for (int i = 0; i < k; ++i) { r *= (n - i); r /= (i + 1); }
    return r;
}

// Componentwise multi-index binomial; zero when any component underflows.
inline Int binomial(const MultiIndex& n, const MultiIndex& k) {
    return binomial(n.t, k.t) * binomial(n.x, k.x);
}

}  // namespace qkpz

#endif
