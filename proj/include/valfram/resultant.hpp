// Resultants over Q, computed exactly over Z after clearing denominators.
//
// Convention: Res(f,g) = lc(f)^deg(g) * prod_{f(a)=0} g(a).  Two independent
// routes are provided: a subresultant PRS (the default) and a fraction-free
// Bareiss elimination of the Sylvester matrix (used as a cross-check).
#pragma once

#include "valfram/poly.hpp"
#include "valfram/rational.hpp"

#include <stdexcept>
#include <vector>

namespace valfram {

namespace detail {

// Clear denominators: returns (F, d) with F = d*f integral, d > 0.
inline std::pair<std::vector<Int>, Int> clear_denominators(const Poly& f) {
    Int d = 1;
    for (const auto& a : f.coeffs()) d = lcm(d, a.get_den());
    std::vector<Int> F;
    F.reserve(f.coeffs().size());
    for (const auto& a : f.coeffs()) F.push_back(Int(a.get_num() * (d / a.get_den())));
    return {std::move(F), std::move(d)};
}

inline Int int_pow(const Int& b, unsigned e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
    return r;
}

inline Int exact_div(const Int& num, const Int& den) {
    Int q, r;
    mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    if (r != 0) throw std::logic_error("exact_div: inexact division");
    return q;
}

// Resultant of integral polynomials by the subresultant PRS
// (Cohen, Alg. 3.3.7).  Inputs nonzero.
inline Int resultant_prs_z(std::vector<Int> A, std::vector<Int> B) {
    auto deg = [](const std::vector<Int>& v) { return static_cast<int>(v.size()) - 1; };
    auto trim = [](std::vector<Int>& v) {
        while (!v.empty() && v.back() == 0) v.pop_back();
    };
    trim(A);
    trim(B);
    if (A.empty() || B.empty()) throw std::domain_error("resultant of zero polynomial");

    int sign = 1;
    if (deg(A) < deg(B)) {
        if ((deg(A) & 1) && (deg(B) & 1)) sign = -sign;
        std::swap(A, B);
    }

    // Pseudo-remainder: lc(b)^(deg a - deg b + 1) * a mod b.
    auto prem = [&](std::vector<Int> r, const std::vector<Int>& b) {
        const Int& lb = b.back();
        int db = deg(b);
        int e = deg(r) - db + 1;
        while (!r.empty() && deg(r) >= db) {
            Int lead = r.back();
            for (auto& x : r) x *= lb;
            int s = deg(r) - db;
            for (int j = 0; j <= db; ++j) r[s + j] -= lead * b[j];
            trim(r);
            --e;
        }
        if (e > 0) {
            Int m = int_pow(lb, static_cast<unsigned>(e));
            for (auto& x : r) x *= m;
        }
        return r;
    };

    Int g = 1, h = 1;
    while (deg(B) > 0) {
        int dA = deg(A), dB = deg(B);
        int delta = dA - dB;
        if ((dA & 1) && (dB & 1)) sign = -sign;
        std::vector<Int> R = prem(A, B);
        if (R.empty()) return 0;  // deg(B) >= 1 common factor
        A = std::move(B);
        B = std::move(R);
        Int divisor = g * int_pow(h, static_cast<unsigned>(delta));
        for (auto& x : B) x = exact_div(x, divisor);
        g = A.back();
        if (delta == 1)
            h = g;
        else if (delta > 1)
            h = exact_div(int_pow(g, static_cast<unsigned>(delta)),
                          int_pow(h, static_cast<unsigned>(delta - 1)));
    }
    // res = h^(1-deg A) * B0^(deg A)
    int dA = deg(A);
    if (dA == 0) return sign;  // both constants: empty Sylvester matrix
    Int num = int_pow(B[0], static_cast<unsigned>(dA));
    if (dA == 1) return sign * num;
    return sign * exact_div(num, int_pow(h, static_cast<unsigned>(dA - 1)));
}

// Fraction-free Gaussian elimination (Bareiss) determinant of an integer matrix.
inline Int bareiss_det(std::vector<std::vector<Int>> m) {
    const std::size_t n = m.size();
    if (n == 0) return 1;
    Int prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t piv = k + 1;
            while (piv < n && m[piv][k] == 0) ++piv;
            if (piv == n) return 0;
            std::swap(m[k], m[piv]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                Int num = m[i][j] * m[k][k] - m[i][k] * m[k][j];
                Int q, r;
                mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
                if (r != 0) throw std::logic_error("bareiss: inexact division");
                m[i][j] = q;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
        if (prev == 0) return 0;
    }
    return sign * m[n - 1][n - 1];
}

inline Int resultant_sylvester_z(const std::vector<Int>& A, const std::vector<Int>& B) {
    int dA = static_cast<int>(A.size()) - 1;
    int dB = static_cast<int>(B.size()) - 1;
    if (dA < 0 || dB < 0) throw std::domain_error("resultant of zero polynomial");
    if (dA == 0 && dB == 0) return 1;
    std::size_t n = static_cast<std::size_t>(dA + dB);
    std::vector<std::vector<Int>> m(n, std::vector<Int>(n, Int(0)));
    for (int i = 0; i < dB; ++i)
        for (int j = 0; j <= dA; ++j) m[i][i + j] = A[dA - j];
    for (int i = 0; i < dA; ++i)
        for (int j = 0; j <= dB; ++j) m[dB + i][i + j] = B[dB - j];
    return bareiss_det(std::move(m));
}

}  // namespace detail

enum class ResultantRoute { SubresultantPrs, SylvesterBareiss };

inline Rat resultant(const Poly& f, const Poly& g,
                     ResultantRoute route = ResultantRoute::SubresultantPrs) {
    if (f.is_zero() || g.is_zero()) throw std::domain_error("resultant of zero polynomial");
    auto [F, df] = detail::clear_denominators(f);
    auto [G, dg] = detail::clear_denominators(g);
    Int rz = route == ResultantRoute::SubresultantPrs
                 ? detail::resultant_prs_z(F, G)
                 : detail::resultant_sylvester_z(F, G);
    // Res(df*f, dg*g) = df^deg(g) dg^deg(f) Res(f,g)
    Int den = detail::int_pow(df, static_cast<unsigned>(g.degree())) *
              detail::int_pow(dg, static_cast<unsigned>(f.degree()));
    Rat r(rz, den);
    r.canonicalize();
    return r;
}

}  // namespace valfram
