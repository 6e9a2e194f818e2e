// Dense univariate polynomials over Q with exact arithmetic.
#pragma once

#include "valfram/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace valfram {

// Coefficients in ascending degree; no trailing zeros; zero poly = empty list.
class Poly {
   public:
    Poly() = default;
    explicit Poly(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Poly zero() { return Poly(); }
    static Poly constant(const Rat& a) { return Poly({a}); }
    static Poly from_ints(const std::vector<long>& v) {
        std::vector<Rat> c;
        c.reserve(v.size());
        for (long x : v) c.emplace_back(x);
        return Poly(std::move(c));
    }
    // x - a
    static Poly linear_root(const Rat& a) { return Poly({-a, Rat(1)}); }
    static Poly x() { return Poly({Rat(0), Rat(1)}); }

    bool is_zero() const { return c_.empty(); }
    int degree() const {
        if (is_zero()) throw std::domain_error("degree of zero polynomial");
        return static_cast<int>(c_.size()) - 1;
    }
    // degree with deg(0) = -1, for loops that tolerate zero.
    int degree_or_neg() const { return static_cast<int>(c_.size()) - 1; }

    const Rat& operator[](std::size_t i) const {
        static const Rat kZero(0);
        return i < c_.size() ? c_[i] : kZero;
    }
    const std::vector<Rat>& coeffs() const { return c_; }

    const Rat& leading() const {
        if (is_zero()) throw std::domain_error("leading coefficient of zero");
        return c_.back();
    }
    bool is_monic() const { return !is_zero() && c_.back() == 1; }
    bool is_integral() const {
        for (const auto& a : c_)
            if (a.get_den() != 1) return false;
        return true;
    }

    friend bool operator==(const Poly& f, const Poly& g) { return f.c_ == g.c_; }
    friend bool operator!=(const Poly& f, const Poly& g) { return !(f == g); }

    friend Poly operator+(const Poly& f, const Poly& g) {
        std::vector<Rat> r(std::max(f.c_.size(), g.c_.size()), Rat(0));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = f[i] + g[i];
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly& f, const Poly& g) {
        std::vector<Rat> r(std::max(f.c_.size(), g.c_.size()), Rat(0));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = f[i] - g[i];
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly& f) {
        std::vector<Rat> r(f.c_);
        for (auto& a : r) a = -a;
        return Poly(std::move(r));
    }
    friend Poly operator*(const Poly& f, const Poly& g) {
        if (f.is_zero() || g.is_zero()) return Poly();
        std::vector<Rat> r(f.c_.size() + g.c_.size() - 1, Rat(0));
        for (std::size_t i = 0; i < f.c_.size(); ++i) {
            if (f.c_[i] == 0) continue;
            for (std::size_t j = 0; j < g.c_.size(); ++j) r[i + j] += f.c_[i] * g.c_[j];
        }
        return Poly(std::move(r));
    }
    friend Poly operator*(const Rat& a, const Poly& f) {
        if (a == 0) return Poly();
        std::vector<Rat> r(f.c_);
        for (auto& x : r) x *= a;
        return Poly(std::move(r));
    }

    Rat eval(const Rat& x) const {
        Rat r(0);
        for (std::size_t i = c_.size(); i-- > 0;) r = r * x + c_[i];
        return r;
    }

   private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<Rat> c_;
};

// Euclidean division: f = q*g + r with deg(r) < deg(g).
inline std::pair<Poly, Poly> div_rem(const Poly& f, const Poly& g) {
    if (g.is_zero()) throw std::domain_error("division by zero polynomial");
    if (f.is_zero() || f.degree() < g.degree()) return {Poly(), f};
    int dg = g.degree();
    std::vector<Rat> rem(f.coeffs());
    std::vector<Rat> quot(f.degree() - dg + 1, Rat(0));
    const Rat& lc = g.leading();
    for (int k = static_cast<int>(rem.size()) - 1; k >= dg; --k) {
        if (rem[k] == 0) continue;
        Rat q = rem[k] / lc;
        quot[k - dg] = q;
        for (int j = 0; j <= dg; ++j) rem[k - dg + j] -= q * g[j];
    }
    return {Poly(std::move(quot)), Poly(std::move(rem))};
}

inline Poly derivative(const Poly& f) {
    if (f.is_zero() || f.degree() == 0) return Poly();
    std::vector<Rat> r(f.degree(), Rat(0));
    for (int i = 1; i <= f.degree(); ++i) r[i - 1] = Rat(i) * f[i];
    return Poly(std::move(r));
}

inline Poly pow(const Poly& f, unsigned e) {
    Poly r = Poly::constant(Rat(1));
    Poly b = f;
    while (e) {
        if (e & 1u) r = r * b;
        b = b * b;
        e >>= 1u;
    }
    return r;
}

// Monic gcd.
inline Poly gcd(Poly f, Poly g) {
    while (!g.is_zero()) {
        Poly r = div_rem(f, g).second;
        f = std::move(g);
        g = std::move(r);
    }
    if (f.is_zero()) return f;
    return (Rat(1) / f.leading()) * f;
}

// phi-adic digits: f = sum a_s phi^s with deg(a_s) < deg(phi).
inline std::vector<Poly> phi_expansion(const Poly& f, const Poly& phi) {
    if (phi.is_zero() || !phi.is_monic() || phi.degree() < 1)
        throw std::invalid_argument("phi_expansion: phi must be monic of degree >= 1");
    std::vector<Poly> digits;
    Poly rest = f;
    if (rest.is_zero()) return {Poly()};
    while (!rest.is_zero() && rest.degree() >= phi.degree()) {
        auto [q, r] = div_rem(rest, phi);
        digits.push_back(std::move(r));
        rest = std::move(q);
    }
    digits.push_back(std::move(rest));
    return digits;
}

// Inverse of phi_expansion (Horner).
inline Poly phi_reconstruct(const std::vector<Poly>& digits, const Poly& phi) {
    Poly r;
    for (std::size_t i = digits.size(); i-- > 0;) r = r * phi + digits[i];
    return r;
}

// Coefficients c_i = f^(i)/i!, so f(x+y) = sum c_i(x) y^i.
inline std::vector<Poly> taylor_coeffs(const Poly& f) {
    std::vector<Poly> c;
    Poly d = f;
    Int factorial = 1;
    int k = 0;
    while (true) {
        c.push_back(Rat(Int(1), factorial) * d);
        if (d.is_zero() || d.degree() == 0) break;
        d = derivative(d);
        ++k;
        factorial *= k;
    }
    return c;
}

// f(x + a).
inline Poly shift(const Poly& f, const Rat& a) {
    if (f.is_zero()) return f;
    Poly r;
    Poly lin({a, Rat(1)});  // x + a
    for (int i = f.degree(); i >= 0; --i) r = r * lin + Poly::constant(f[i]);
    return r;
}

inline std::string poly_to_string(const Poly& f, const std::string& var = "x") {
    if (f.is_zero()) return "0";
    std::string out;
    for (int i = f.degree(); i >= 0; --i) {
        const Rat& a = f[i];
        if (a == 0) continue;
        bool neg = a < 0;
        Rat mag = neg ? Rat(-a) : a;
        if (out.empty()) {
            if (neg) out += "-";
        } else {
            out += neg ? "-" : "+";
        }
        bool unit_coeff = (mag == 1) && i > 0;
        if (!unit_coeff) out += rat_to_string(mag);
        if (i > 0) {
            if (!unit_coeff) out += "*";
            out += var;
            if (i > 1) out += "^" + std::to_string(i);
        }
    }
    return out;
}

}  // namespace valfram
