#include "qkpz/symexpr.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qkpz {

namespace {

const FuncSym kAPrime{FuncBase::a, 1};

bool has_factor(const Mono& m, const FuncSym& f) {
    auto it = m.funcs.find(f);
    return it != m.funcs.end() && it->second > 0;
}

bool has_vvar(const Mono& m, const ParamIndex& v) {
    auto it = m.vvars.find(v);
    return it != m.vvars.end() && it->second > 0;
}

void erase_if_zero(std::map<FuncSym, int>& m, const FuncSym& k) {
    auto it = m.find(k);
    if (it != m.end() && it->second == 0) m.erase(it);
}

void erase_if_zero(std::map<ParamIndex, int>& m, const ParamIndex& k) {
    auto it = m.find(k);
    if (it != m.end() && it->second == 0) m.erase(it);
}

}  // namespace

void SymExpr::add_term(Mono m, Rat coeff) {
    if (coeff == 0) return;
    if (m.D >= 2) return;  // D^2 = 0
    // Rewrite a' v_c -> 1 - q until neither factor pair remains.
    if (has_factor(m, kAPrime) && has_vvar(m, kVC)) {
        m.funcs[kAPrime] -= 1;
        erase_if_zero(m.funcs, kAPrime);
        m.vvars[kVC] -= 1;
        erase_if_zero(m.vvars, kVC);
        add_term(m, coeff);
        Mono mq = m;
        mq.qpow += 1;
        add_term(mq, -coeff);
        return;
    }
    auto [it, inserted] = terms_.try_emplace(m, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second == 0) terms_.erase(it);
    }
}

SymExpr SymExpr::monomial(Mono m, Rat coeff) {
    SymExpr e;
    e.add_term(std::move(m), std::move(coeff));
    return e;
}

SymExpr SymExpr::func(FuncBase b, int order) {
    Mono m;
    m.funcs[{b, order}] = 1;
    return monomial(m);
}

SymExpr SymExpr::vvar(const ParamIndex& idx) {
    Mono m;
    m.vvars[idx] = 1;
    return monomial(m);
}

SymExpr SymExpr::q(int power) {
    Mono m;
    m.qpow = power;
    return monomial(m);
}

SymExpr SymExpr::ux(int power) {
    Mono m;
    m.ux = power;
    return monomial(m);
}

SymExpr SymExpr::u_sym() {
    Mono m;
    m.u = 1;
    return monomial(m);
}

SymExpr SymExpr::grading() {
    Mono m;
    m.D = 1;
    return monomial(m);
}

SymExpr SymExpr::operator+(const SymExpr& o) const {
    SymExpr r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

SymExpr SymExpr::operator-(const SymExpr& o) const {
    SymExpr r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
    return r;
}

SymExpr SymExpr::operator-() const {
    SymExpr r;
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
}

SymExpr SymExpr::operator*(const SymExpr& o) const {
    SymExpr r;
    for (const auto& [m1, c1] : terms_) {
        for (const auto& [m2, c2] : o.terms_) {
            Mono m = m1;
            m.D += m2.D;
            m.qpow += m2.qpow;
            m.ux += m2.ux;
            m.u += m2.u;
            for (const auto& [f, e] : m2.funcs) m.funcs[f] += e;
            for (const auto& [v, e] : m2.vvars) m.vvars[v] += e;
            r.add_term(std::move(m), c1 * c2);
        }
    }
    return r;
}

SymExpr SymExpr::pow(int n) const {
    if (n < 0) throw std::domain_error("SymExpr::pow: negative exponent");
    SymExpr r(1);
    for (int i = 0; i < n; ++i) r *= *this;
    return r;
}

SymExpr SymExpr::mul_qpow(int k) const {
    SymExpr r;
    for (const auto& [m, c] : terms_) {
        Mono mm = m;
        mm.qpow += k;
        r.terms_[mm] = c;
    }
    return r;
}

SymExpr SymExpr::grade0() const {
    SymExpr r;
    for (const auto& [m, c] : terms_)
        if (m.D == 0) r.terms_[m] = c;
    return r;
}

SymExpr SymExpr::grade1() const {
    SymExpr r;
    for (const auto& [m, c] : terms_)
        if (m.D == 1) {
            Mono mm = m;
            mm.D = 0;
            r.terms_[mm] = c;
        }
    return r;
}

std::string func_name(const FuncSym& f) {
    static const char* base[] = {"a", "f", "g", "k", "h"};
    std::string r = base[static_cast<int>(f.base)];
    if (f.order <= 3) {
        for (int i = 0; i < f.order; ++i) r += "'";
    } else {
        r += "^(" + std::to_string(f.order) + ")";
    }
    return r;
}

std::string vvar_name(const ParamIndex& idx) {
    std::string suffix;
    for (int i = 0; i < idx.h; ++i) suffix += "c";
    for (int i = 0; i < idx.st.t; ++i) suffix += "t";
    for (int i = 0; i < idx.st.x; ++i) suffix += "x";
    return suffix.empty() ? "v" : "v_" + suffix;
}

namespace {

std::string rat_str(const Rat& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

std::string mono_str(const Mono& m, const Rat& coeff) {
    std::vector<std::string> factors;
    Rat c = coeff < 0 ? -coeff : coeff;
    if (c != 1) factors.push_back(rat_str(c));
    if (m.D) factors.push_back("D");
    if (m.qpow == 1) factors.push_back("q");
    else if (m.qpow != 0) factors.push_back("q^" + std::to_string(m.qpow));
    for (const auto& [f, e] : m.funcs) {
        std::string s = func_name(f);
        if (e != 1) s += "^" + std::to_string(e);
        factors.push_back(s);
    }
    for (const auto& [v, e] : m.vvars) {
        std::string s = vvar_name(v);
        if (e != 1) s += "^" + std::to_string(e);
        factors.push_back(s);
    }
    if (m.ux) {
        std::string s = "ux";
        if (m.ux != 1) s += "^" + std::to_string(m.ux);
        factors.push_back(s);
    }
    if (m.u) {
        std::string s = "u";
        if (m.u != 1) s += "^" + std::to_string(m.u);
        factors.push_back(s);
    }
    if (factors.empty()) return "1";
    std::string r = factors[0];
    for (size_t i = 1; i < factors.size(); ++i) r += "*" + factors[i];
    return r;
}

}  // namespace

std::string SymExpr::str() const {
    if (terms_.empty()) return "0";
    std::string r;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (first) {
            if (c < 0) r += "-";
        } else {
            r += c < 0 ? " - " : " + ";
        }
        first = false;
        r += mono_str(m, c);
    }
    return r;
}

nlohmann::json SymExpr::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [m, c] : terms_) {
        nlohmann::json t;
        t["coefficient"] = rat_str(c);
        t["monomial"] = mono_str(m, 1);
        arr.push_back(t);
    }
    nlohmann::json j;
    j["terms"] = arr;
    j["text"] = str();
    return j;
}

bool equal(const SymExpr& e1, const SymExpr& e2) { return e1 == e2; }

SymExpr p_c() {
    return SymExpr::func(FuncBase::a, 2) * SymExpr::vvar(kVC) +
           SymExpr::func(FuncBase::a, 1).pow(2) * SymExpr::vvar(kVCC);
}

namespace {

// dq/dv_alpha as an expression (without the q^{p-1} part of the power rule).
SymExpr q_derivative(const ParamIndex& alpha) {
    SymExpr r;
    if (alpha == ParamIndex{0, {0, 0}}) r -= p_c().mul_qpow(-1);
    if (alpha == kVC) r -= SymExpr::func(FuncBase::a, 1);
    return r;
}

// Remove one power of each generator in turn and multiply by the generator's
// derivative; gen_deriv returns the derivative for each kind of factor.
struct GenDerivs {
    std::function<SymExpr(const FuncSym&)> func;
    std::function<SymExpr(const ParamIndex&)> vvar;
    SymExpr ux, u, qv;  // qv: dq (power rule adds p*q^{p-1})
};

SymExpr derive(const SymExpr& e, const GenDerivs& d) {
    SymExpr r;
    for (const auto& [m, c] : e.terms()) {
        if (m.D != 0)
            throw std::domain_error("derivative applied to graded expression");
        for (const auto& [f, exp] : m.funcs) {
            Mono mm = m;
            mm.funcs[f] -= 1;
            erase_if_zero(mm.funcs, f);
            r += SymExpr::monomial(mm, c * exp) * d.func(f);
        }
        for (const auto& [v, exp] : m.vvars) {
            Mono mm = m;
            mm.vvars[v] -= 1;
            erase_if_zero(mm.vvars, v);
            r += SymExpr::monomial(mm, c * exp) * d.vvar(v);
        }
        if (m.ux != 0) {
            Mono mm = m;
            mm.ux -= 1;
            r += SymExpr::monomial(mm, c * m.ux) * d.ux;
        }
        if (m.u != 0) {
            Mono mm = m;
            mm.u -= 1;
            r += SymExpr::monomial(mm, c * m.u) * d.u;
        }
        if (m.qpow != 0) {
            Mono mm = m;
            mm.qpow -= 1;
            r += SymExpr::monomial(mm, c * m.qpow) * d.qv;
        }
    }
    return r;
}

}  // namespace

SymExpr v_derivative(const ParamIndex& alpha, const SymExpr& e) {
    GenDerivs d;
    bool a0 = alpha == ParamIndex{0, {0, 0}};
    d.func = [a0](const FuncSym& f) {
        return a0 ? SymExpr::func(f.base, f.order + 1).mul_qpow(-1) : SymExpr();
    };
    d.vvar = [alpha, a0](const ParamIndex& beta) {
        SymExpr r;
        if (a0) {
            ParamIndex up{beta.h + 1, beta.st};
            r += (SymExpr::func(FuncBase::a, 1) * SymExpr::vvar(up)).mul_qpow(-1);
        }
        if (alpha == beta) r += SymExpr(1);
        return r;
    };
    d.ux = alpha == ParamIndex{0, {0, 1}} ? SymExpr::q(-1) : SymExpr();
    if (a0) {
        // The derivative in the base variable does not commute with the space
        // derivative: d_v (dx u) = dx (d_v u) = dx(1/q)
        //           = (a''(u) (dx u) v_c + a'(u) v_cx) / q^2.
        d.ux += (SymExpr::func(FuncBase::a, 2) * SymExpr::ux() * SymExpr::vvar(kVC) +
                 SymExpr::func(FuncBase::a, 1) * SymExpr::vvar(kVCX))
                    .mul_qpow(-2);
    }
    d.u = a0 ? SymExpr::q(-1) : SymExpr();
    d.qv = q_derivative(alpha);
    return derive(e, d);
}

SymExpr slot_partial(Slot slot, const SymExpr& e) {
    auto slot_index = [](Slot s) -> std::optional<ParamIndex> {
        switch (s) {
            case Slot::Vc: return kVC;
            case Slot::Vcc: return kVCC;
            case Slot::Vcx: return kVCX;
            case Slot::Vx: return kVX;
            default: return std::nullopt;
        }
    };
    GenDerivs d;
    d.func = [slot](const FuncSym& f) {
        return slot == Slot::U ? SymExpr::func(f.base, f.order + 1) : SymExpr();
    };
    d.vvar = [idx = slot_index(slot)](const ParamIndex& beta) {
        return idx && *idx == beta ? SymExpr(1) : SymExpr();
    };
    d.ux = slot == Slot::Ux ? SymExpr(1) : SymExpr();
    d.u = slot == Slot::U ? SymExpr(1) : SymExpr();
    // q = 1 - a' v_c depends on the U and Vc slots.
    if (slot == Slot::U)
        d.qv = -(SymExpr::func(FuncBase::a, 2) * SymExpr::vvar(kVC));
    else if (slot == Slot::Vc)
        d.qv = -SymExpr::func(FuncBase::a, 1);
    return derive(e, d);
}

SymExpr convert_ux(const SymExpr& e) {
    SymExpr r;
    for (const auto& [m, c] : e.terms()) {
        Mono mm = m;
        int k = mm.ux;
        mm.ux = 0;
        mm.qpow -= k;
        mm.vvars[kVX] += k;
        erase_if_zero(mm.vvars, kVX);
        r.add_term(std::move(mm), c);
    }
    return r;
}

SymExpr collapse_a_constant(const SymExpr& e) {
    SymExpr r;
    for (const auto& [m, c] : e.terms()) {
        bool drop = false;
        for (const auto& [f, exp] : m.funcs)
            if (f.base == FuncBase::a && f.order >= 1 && exp > 0) drop = true;
        if (drop) continue;
        Mono mm = m;
        mm.qpow = 0;  // q = 1 once a' = 0
        r.add_term(std::move(mm), c);
    }
    return r;
}

Rat eval(const SymExpr& e, const std::function<Rat(const FuncSym&)>& func_val,
         const std::function<Rat(const ParamIndex&)>& v_val, const Rat& ux_val,
         const Rat& u_val) {
    auto ipow = [](Rat b, int n) {
        bool inv = n < 0;
        if (inv) n = -n;
        Rat r = 1;
        for (int i = 0; i < n; ++i) r *= b;
        if (inv) {
            if (r == 0) throw std::domain_error("eval: q vanishes at this point");
            r = 1 / r;
        }
        return r;
    };
    Rat qval = 1 - func_val({FuncBase::a, 1}) * v_val(kVC);
    Rat total = 0;
    for (const auto& [m, c] : e.terms()) {
        if (m.D != 0) throw std::domain_error("eval: graded expression");
        Rat t = c * ipow(qval, m.qpow) * ipow(ux_val, m.ux) * ipow(u_val, m.u);
        for (const auto& [f, exp] : m.funcs) t *= ipow(func_val(f), exp);
        for (const auto& [v, exp] : m.vvars) t *= ipow(v_val(v), exp);
        total += t;
    }
    return total;
}

namespace {

// Dense exponent vectors for polynomial division.  q exponents are shifted so
// all entries are nonnegative; graded-lex gives a genuine monomial order.
struct VarTable {
    std::vector<FuncSym> funcs;
    std::vector<ParamIndex> vvars;
    int qshift = 0;

    void collect(const SymExpr& e) {
        for (const auto& [m, c] : e.terms()) {
            for (const auto& [f, exp] : m.funcs)
                if (std::find(funcs.begin(), funcs.end(), f) == funcs.end())
                    funcs.push_back(f);
            for (const auto& [v, exp] : m.vvars)
                if (std::find(vvars.begin(), vvars.end(), v) == vvars.end())
                    vvars.push_back(v);
            qshift = std::min(qshift, m.qpow);
        }
    }

    std::vector<int> vec(const Mono& m) const {
        std::vector<int> r;
        r.push_back(m.qpow - qshift);
        r.push_back(m.ux);
        r.push_back(m.u);
        for (const auto& f : funcs) {
            auto it = m.funcs.find(f);
            r.push_back(it == m.funcs.end() ? 0 : it->second);
        }
        for (const auto& v : vvars) {
            auto it = m.vvars.find(v);
            r.push_back(it == m.vvars.end() ? 0 : it->second);
        }
        return r;
    }
};

bool grlex_less(const std::vector<int>& a, const std::vector<int>& b) {
    long da = 0, db = 0;
    for (int x : a) da += x;
    for (int x : b) db += x;
    if (da != db) return da < db;
    return a < b;
}

}  // namespace

std::optional<SymExpr> try_divide(const SymExpr& num, const SymExpr& den) {
    if (den.is_zero()) return std::nullopt;
    if (num.is_zero()) return SymExpr();
    if (num.grade1() != SymExpr() || den.grade1() != SymExpr())
        return std::nullopt;  // division is defined on the ungraded part only

    VarTable vars;
    vars.collect(num);
    vars.collect(den);

    auto lead = [&vars](const SymExpr& e) {
        auto it = e.terms().begin();
        auto best = it;
        auto bv = vars.vec(it->first);
        for (++it; it != e.terms().end(); ++it) {
            auto v = vars.vec(it->first);
            if (grlex_less(bv, v)) {
                best = it;
                bv = std::move(v);
            }
        }
        return best;
    };

    auto den_lead = lead(den);
    SymExpr quot;
    SymExpr rem = num;
    std::vector<int> prev_lead;
    for (int steps = 0; !rem.is_zero(); ++steps) {
        if (steps > 100000) return std::nullopt;  // q-exponent descent guard
        auto rl = lead(rem);
        // The relation rewrite can resurrect the lead term after subtraction;
        // insist on strict decrease so the loop provably terminates.
        auto lv = vars.vec(rl->first);
        if (!prev_lead.empty() && !grlex_less(lv, prev_lead)) return std::nullopt;
        prev_lead = std::move(lv);
        // Lead-term divisibility: componentwise exponent domination.  q is
        // invertible, so its exponent never obstructs.
        Mono m;
        m.qpow = rl->first.qpow - den_lead->first.qpow;
        m.ux = rl->first.ux - den_lead->first.ux;
        m.u = rl->first.u - den_lead->first.u;
        if (m.ux < 0 || m.u < 0) return std::nullopt;
        bool ok = true;
        for (const auto& [f, exp] : den_lead->first.funcs) {
            auto it = rl->first.funcs.find(f);
            int have = it == rl->first.funcs.end() ? 0 : it->second;
            if (have < exp) { ok = false; break; }
        }
        if (ok)
            for (const auto& [v, exp] : den_lead->first.vvars) {
                auto it = rl->first.vvars.find(v);
                int have = it == rl->first.vvars.end() ? 0 : it->second;
                if (have < exp) { ok = false; break; }
            }
        if (!ok) return std::nullopt;
        m.funcs = rl->first.funcs;
        for (const auto& [f, exp] : den_lead->first.funcs) {
            m.funcs[f] -= exp;
            erase_if_zero(m.funcs, f);
        }
        m.vvars = rl->first.vvars;
        for (const auto& [v, exp] : den_lead->first.vvars) {
            m.vvars[v] -= exp;
            erase_if_zero(m.vvars, v);
        }
        SymExpr piece = SymExpr::monomial(m, rl->second / den_lead->second);
        quot += piece;
        rem -= piece * den;
    }
    return quot;
}

}  // namespace qkpz
