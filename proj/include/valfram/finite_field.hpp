// Finite prime fields and explicit extensions, flattened to F_p[y]/(h),
// with univariate factorization (squarefree / distinct-degree / equal-degree).
#pragma once

#include "valfram/prime.hpp"
#include "valfram/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace valfram {

// Element of F_{p^d}: coefficient vector over F_p of length d (fixed length).
using FqElem = std::vector<std::uint64_t>;

struct FqCtx;
using FqCtxPtr = std::shared_ptr<const FqCtx>;

struct FqCtx {
    std::uint64_t p = 0;
    // Monic irreducible over F_p, ascending coefficients, size deg+1.
    // The prime field uses modulus y, so its elements are length-1 vectors.
    std::vector<std::uint64_t> modulus;

    int deg() const { return static_cast<int>(modulus.size()) - 1; }
    Int order() const {
        Int q;
        mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p),
                      static_cast<unsigned long>(deg()));
        return q;
    }
};

namespace zp {

// Dense F_p[x] arithmetic on raw coefficient vectors (trimmed form).

inline void trim(std::vector<std::uint64_t>& v) {
    while (!v.empty() && v.back() == 0) v.pop_back();
}

inline std::vector<std::uint64_t> add(const std::vector<std::uint64_t>& a,
                                      const std::vector<std::uint64_t>& b, std::uint64_t p) {
    std::vector<std::uint64_t> r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::uint64_t x = (i < a.size() ? a[i] : 0) + (i < b.size() ? b[i] : 0);
        r[i] = x >= p ? x - p : x;
    }
    trim(r);
    return r;
}

inline std::vector<std::uint64_t> sub(const std::vector<std::uint64_t>& a,
                                      const std::vector<std::uint64_t>& b, std::uint64_t p) {
    std::vector<std::uint64_t> r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::uint64_t x = (i < a.size() ? a[i] : 0) + p - (i < b.size() ? b[i] : 0);
        r[i] = x >= p ? x - p : x;
    }
    trim(r);
    return r;
}

inline std::vector<std::uint64_t> mul(const std::vector<std::uint64_t>& a,
                                      const std::vector<std::uint64_t>& b, std::uint64_t p) {
    if (a.empty() || b.empty()) return {};
    std::vector<std::uint64_t> r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] = (r[i + j] + a[i] * b[j]) % p;
    }
    trim(r);
    return r;
}

inline std::uint64_t inv_scalar(std::uint64_t a, std::uint64_t p) {
    long long t = 0, newt = 1;
    long long r = static_cast<long long>(p), newr = static_cast<long long>(a % p);
    while (newr != 0) {
        long long q = r / newr;
        t -= q * newt;
        std::swap(t, newt);
        r -= q * newr;
        std::swap(r, newr);
    }
    if (r != 1) throw std::domain_error("inv_scalar: not invertible");
    long long m = static_cast<long long>(p);
    return static_cast<std::uint64_t>(((t % m) + m) % m);
}

inline std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>> divrem(
    std::vector<std::uint64_t> a, const std::vector<std::uint64_t>& b, std::uint64_t p) {
    if (b.empty()) throw std::domain_error("zp::divrem by zero");
    if (a.size() < b.size()) return {{}, std::move(a)};
    std::uint64_t ilb = inv_scalar(b.back(), p);
    const std::size_t db = b.size() - 1;
    std::vector<std::uint64_t> q(a.size() - db, 0);
    for (std::size_t k = a.size(); k-- > db;) {
        if (a[k] == 0) continue;
        std::uint64_t c = (a[k] * ilb) % p;
        std::size_t s = k - db;
        q[s] = c;
        for (std::size_t j = 0; j <= db; ++j) {
            std::uint64_t x = a[s + j] + p - (c * b[j]) % p;
            a[s + j] = x >= p ? x - p : x;
        }
    }
    trim(a);
    trim(q);
    return {std::move(q), std::move(a)};
}

inline std::vector<std::uint64_t> rem(std::vector<std::uint64_t> a,
                                      const std::vector<std::uint64_t>& b, std::uint64_t p) {
    return divrem(std::move(a), b, p).second;
}

}  // namespace zp

// ---- field element operations ----

inline FqElem fq_zero(const FqCtx& k) { return FqElem(k.deg(), 0); }
inline FqElem fq_one(const FqCtx& k) {
    FqElem e(k.deg(), 0);
    e[0] = 1;
    return e;
}
inline FqElem fq_from_int(const FqCtx& k, const Int& n) {
    Int m = n % Int(static_cast<unsigned long>(k.p));
    if (m < 0) m += static_cast<unsigned long>(k.p);
    FqElem e(k.deg(), 0);
    e[0] = m.get_ui();
    return e;
}
inline bool fq_is_zero(const FqElem& a) {
    for (auto x : a)
        if (x) return false;
    return true;
}
inline bool fq_is_one(const FqElem& a) {
    if (a.empty() || a[0] != 1) return false;
    for (std::size_t i = 1; i < a.size(); ++i)
        if (a[i]) return false;
    return true;
}
inline FqElem fq_add(const FqCtx& k, const FqElem& a, const FqElem& b) {
    FqElem r(k.deg());
    for (int i = 0; i < k.deg(); ++i) {
        std::uint64_t x = a[i] + b[i];
        r[i] = x >= k.p ? x - k.p : x;
    }
    return r;
}
inline FqElem fq_sub(const FqCtx& k, const FqElem& a, const FqElem& b) {
    FqElem r(k.deg());
    for (int i = 0; i < k.deg(); ++i) {
        std::uint64_t x = a[i] + k.p - b[i];
        r[i] = x >= k.p ? x - k.p : x;
    }
    return r;
}
inline FqElem fq_neg(const FqCtx& k, const FqElem& a) { return fq_sub(k, fq_zero(k), a); }
inline FqElem fq_mul(const FqCtx& k, const FqElem& a, const FqElem& b) {
    auto red = zp::rem(zp::mul(a, b, k.p), k.modulus, k.p);
    red.resize(k.deg(), 0);
    return red;
}
inline FqElem fq_inv(const FqCtx& k, const FqElem& a) {
    // extended Euclid over F_p[x] on (a, modulus)
    std::vector<std::uint64_t> r0 = k.modulus, r1 = a;
    zp::trim(r1);
    if (r1.empty()) throw std::domain_error("fq_inv: zero");
    std::vector<std::uint64_t> s0, s1 = {1};
    while (!r1.empty()) {
        auto [q, r] = zp::divrem(r0, r1, k.p);
        r0 = std::move(r1);
        r1 = std::move(r);
        auto ns = zp::sub(s0, zp::mul(q, s1, k.p), k.p);
        s0 = std::move(s1);
        s1 = std::move(ns);
    }
    if (r0.size() != 1) throw std::domain_error("fq_inv: not invertible");
    std::uint64_t c = zp::inv_scalar(r0[0], k.p);
    FqElem res(k.deg(), 0);
    for (std::size_t i = 0; i < s0.size(); ++i) res[i] = (s0[i] * c) % k.p;
    return res;
}
inline FqElem fq_pow(const FqCtx& k, const FqElem& a, const Int& e) {
    if (e < 0) return fq_pow(k, fq_inv(k, a), Int(-e));
    FqElem r = fq_one(k);
    if (e == 0) return r;
    std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (std::size_t i = bits; i-- > 0;) {
        r = fq_mul(k, r, r);
        if (mpz_tstbit(e.get_mpz_t(), i)) r = fq_mul(k, r, a);
    }
    return r;
}

// ---- polynomials over F_q ----

struct FqPoly {
    FqCtxPtr ctx;
    std::vector<FqElem> c;  // ascending, trimmed

    bool is_zero() const { return c.empty(); }
    int degree() const {
        if (c.empty()) throw std::domain_error("degree of zero FqPoly");
        return static_cast<int>(c.size()) - 1;
    }
};

inline void ffp_trim(FqPoly& f) {
    while (!f.c.empty() && fq_is_zero(f.c.back())) f.c.pop_back();
}
inline FqPoly ffp_zero(FqCtxPtr k) { return FqPoly{std::move(k), {}}; }
inline FqPoly ffp_const(FqCtxPtr k, FqElem a) {
    FqPoly f{std::move(k), {std::move(a)}};
    ffp_trim(f);
    return f;
}
inline FqPoly ffp_one(FqCtxPtr k) {
    FqElem e = fq_one(*k);
    return FqPoly{std::move(k), {std::move(e)}};
}
inline FqPoly ffp_x(FqCtxPtr k) {
    FqPoly f{k, {fq_zero(*k), fq_one(*k)}};
    return f;
}
inline FqPoly ffp_from_ints(FqCtxPtr k, const std::vector<long>& v) {
    FqPoly f{k, {}};
    f.c.reserve(v.size());
    for (long x : v) f.c.push_back(fq_from_int(*k, Int(x)));
    ffp_trim(f);
    return f;
}
inline bool ffp_eq(const FqPoly& f, const FqPoly& g) { return f.c == g.c; }
inline bool ffp_is_one(const FqPoly& f) { return f.c.size() == 1 && fq_is_one(f.c[0]); }

inline FqPoly ffp_add(const FqPoly& f, const FqPoly& g) {
    const FqCtx& k = *f.ctx;
    FqPoly r{f.ctx, std::vector<FqElem>(std::max(f.c.size(), g.c.size()), fq_zero(k))};
    for (std::size_t i = 0; i < r.c.size(); ++i) {
        if (i < f.c.size()) r.c[i] = fq_add(k, r.c[i], f.c[i]);
        if (i < g.c.size()) r.c[i] = fq_add(k, r.c[i], g.c[i]);
    }
    ffp_trim(r);
    return r;
}
inline FqPoly ffp_sub(const FqPoly& f, const FqPoly& g) {
    const FqCtx& k = *f.ctx;
    FqPoly r{f.ctx, std::vector<FqElem>(std::max(f.c.size(), g.c.size()), fq_zero(k))};
    for (std::size_t i = 0; i < r.c.size(); ++i) {
        if (i < f.c.size()) r.c[i] = fq_add(k, r.c[i], f.c[i]);
        if (i < g.c.size()) r.c[i] = fq_sub(k, r.c[i], g.c[i]);
    }
    ffp_trim(r);
    return r;
}
inline FqPoly ffp_mul(const FqPoly& f, const FqPoly& g) {
    const FqCtx& k = *f.ctx;
    if (f.is_zero() || g.is_zero()) return ffp_zero(f.ctx);
    FqPoly r{f.ctx, std::vector<FqElem>(f.c.size() + g.c.size() - 1, fq_zero(k))};
    for (std::size_t i = 0; i < f.c.size(); ++i) {
        if (fq_is_zero(f.c[i])) continue;
        for (std::size_t j = 0; j < g.c.size(); ++j)
            r.c[i + j] = fq_add(k, r.c[i + j], fq_mul(k, f.c[i], g.c[j]));
    }
    ffp_trim(r);
    return r;
}
inline FqPoly ffp_scale(const FqPoly& f, const FqElem& a) {
    const FqCtx& k = *f.ctx;
    FqPoly r{f.ctx, f.c};
    for (auto& x : r.c) x = fq_mul(k, x, a);
    ffp_trim(r);
    return r;
}
inline std::pair<FqPoly, FqPoly> ffp_divrem(const FqPoly& f, const FqPoly& g) {
    if (g.is_zero()) throw std::domain_error("FqPoly division by zero");
    const FqCtx& k = *f.ctx;
    if (f.is_zero() || f.c.size() < g.c.size()) return {ffp_zero(f.ctx), f};
    FqElem ilc = fq_inv(k, g.c.back());
    std::vector<FqElem> rem = f.c;
    const std::size_t dg = g.c.size() - 1;
    std::vector<FqElem> quot(f.c.size() - dg, fq_zero(k));
    for (std::size_t kk = rem.size(); kk-- > dg;) {
        if (fq_is_zero(rem[kk])) continue;
        FqElem q = fq_mul(k, rem[kk], ilc);
        std::size_t s = kk - dg;
        quot[s] = q;
        for (std::size_t j = 0; j <= dg; ++j)
            rem[s + j] = fq_sub(k, rem[s + j], fq_mul(k, q, g.c[j]));
    }
    FqPoly R{f.ctx, std::move(rem)};
    ffp_trim(R);
    FqPoly Q{f.ctx, std::move(quot)};
    ffp_trim(Q);
    return {std::move(Q), std::move(R)};
}
inline FqPoly ffp_monic(const FqPoly& f) {
    if (f.is_zero() || fq_is_one(f.c.back())) return f;
    return ffp_scale(f, fq_inv(*f.ctx, f.c.back()));
}
inline FqPoly ffp_gcd(FqPoly f, FqPoly g) {
    while (!g.is_zero()) {
        FqPoly r = ffp_divrem(f, g).second;
        f = std::move(g);
        g = std::move(r);
    }
    return ffp_monic(f);
}
inline FqPoly ffp_powmod(const FqPoly& base, const Int& e, const FqPoly& mod) {
    FqPoly r = ffp_one(base.ctx);
    if (e == 0) return r;
    FqPoly b = ffp_divrem(base, mod).second;
    std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (std::size_t i = bits; i-- > 0;) {
        r = ffp_divrem(ffp_mul(r, r), mod).second;
        if (mpz_tstbit(e.get_mpz_t(), i)) r = ffp_divrem(ffp_mul(r, b), mod).second;
    }
    return r;
}
inline FqPoly ffp_derivative(const FqPoly& f) {
    const FqCtx& k = *f.ctx;
    if (f.is_zero() || f.degree() == 0) return ffp_zero(f.ctx);
    FqPoly r{f.ctx, std::vector<FqElem>(f.c.size() - 1, fq_zero(k))};
    for (std::size_t i = 1; i < f.c.size(); ++i)
        r.c[i - 1] = fq_mul(k, f.c[i], fq_from_int(k, Int(static_cast<long>(i))));
    ffp_trim(r);
    return r;
}
inline FqElem ffp_eval(const FqPoly& f, const FqElem& x) {
    const FqCtx& k = *f.ctx;
    FqElem r = fq_zero(k);
    for (std::size_t i = f.c.size(); i-- > 0;) r = fq_add(k, fq_mul(k, r, x), f.c[i]);
    return r;
}

// ---- factorization ----

namespace detail_ff {

// Frobenius inverse on elements: c -> c^(q/p).
inline FqElem fq_pth_root(const FqCtx& k, const FqElem& c) {
    if (k.deg() == 1) return c;
    Int e;
    mpz_ui_pow_ui(e.get_mpz_t(), static_cast<unsigned long>(k.p),
                  static_cast<unsigned long>(k.deg() - 1));
    return fq_pow(k, c, e);
}

// For f with f' = 0, f = u(x^p); return u.
inline FqPoly ffp_pth_root(const FqPoly& f) {
    const FqCtx& k = *f.ctx;
    FqPoly u{f.ctx, {}};
    for (std::size_t i = 0; i < f.c.size(); i += k.p)
        u.c.push_back(fq_pth_root(k, f.c[i]));
    ffp_trim(u);
    return u;
}

inline void squarefree_rec(const FqPoly& f, long mult,
                           std::vector<std::pair<FqPoly, long>>& out) {
    const FqCtx& k = *f.ctx;
    FqPoly d = ffp_derivative(f);
    if (d.is_zero()) {
        squarefree_rec(ffp_pth_root(f), mult * static_cast<long>(k.p), out);
        return;
    }
    FqPoly c = ffp_gcd(f, d);
    FqPoly w = ffp_divrem(f, c).first;
    long i = 1;
    while (w.c.size() > 1) {
        FqPoly y = ffp_gcd(w, c);
        FqPoly z = ffp_divrem(w, y).first;
        if (z.c.size() > 1) out.emplace_back(ffp_monic(z), mult * i);
        ++i;
        w = std::move(y);
        c = ffp_divrem(c, w).first;
    }
    if (c.c.size() > 1) squarefree_rec(c, mult, out);
}

}  // namespace detail_ff

// Monic squarefree decomposition: f = lc * prod g_i^m_i.
inline std::vector<std::pair<FqPoly, long>> ff_squarefree(const FqPoly& f) {
    if (f.is_zero()) throw std::domain_error("ff_squarefree: zero");
    std::vector<std::pair<FqPoly, long>> out;
    if (f.degree() == 0) return out;
    detail_ff::squarefree_rec(ffp_monic(f), 1, out);
    return out;
}

// Distinct-degree split of a monic squarefree f: list of (product, d).
inline std::vector<std::pair<FqPoly, int>> ff_distinct_degree(FqPoly f) {
    std::vector<std::pair<FqPoly, int>> out;
    const Int q = f.ctx->order();
    FqPoly h = ffp_x(f.ctx);
    int d = 0;
    while (f.c.size() > 1) {
        ++d;
        if (2 * d > f.degree()) {
            out.emplace_back(f, f.degree());
            break;
        }
        h = ffp_powmod(h, q, f);
        FqPoly g = ffp_gcd(ffp_sub(h, ffp_x(f.ctx)), f);
        if (g.c.size() > 1) {
            out.emplace_back(g, d);
            f = ffp_divrem(f, g).first;
            h = ffp_divrem(h, f).second;
        }
    }
    return out;
}

inline bool ff_is_irreducible(const FqPoly& f) {
    if (f.is_zero() || f.degree() < 1)
        throw std::domain_error("ff_is_irreducible: need degree >= 1");
    if (f.degree() == 1) return true;
    const int n = f.degree();
    const Int q = f.ctx->order();
    FqPoly fm = ffp_monic(f);
    FqPoly x = ffp_x(f.ctx);
    std::vector<int> primes;
    int m = n;
    for (int r = 2; r * r <= m; ++r)
        if (m % r == 0) {
            primes.push_back(r);
            while (m % r == 0) m /= r;
        }
    if (m > 1) primes.push_back(m);
    for (int r : primes) {
        Int e;
        mpz_pow_ui(e.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(n / r));
        FqPoly h = ffp_powmod(x, e, fm);
        FqPoly g = ffp_gcd(ffp_sub(h, x), fm);
        if (g.c.size() > 1) return false;
    }
    Int e;
    mpz_pow_ui(e.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(n));
    return ffp_eq(ffp_powmod(x, e, fm), x);
}

namespace detail_ff {

inline FqPoly random_poly_below(FqCtxPtr k, int deg_bound, std::mt19937_64& rng) {
    FqPoly f{k, {}};
    std::uniform_int_distribution<std::uint64_t> dist(0, k->p - 1);
    f.c.resize(deg_bound, fq_zero(*k));
    for (auto& e : f.c)
        for (auto& digit : e) digit = dist(rng);
    ffp_trim(f);
    return f;
}

// Equal-degree splitting (Cantor-Zassenhaus; trace construction in char 2).
inline void edf(const FqPoly& f, int d, std::mt19937_64& rng, std::vector<FqPoly>& out) {
    if (f.degree() == d) {
        out.push_back(ffp_monic(f));
        return;
    }
    const FqCtx& k = *f.ctx;
    const Int q = f.ctx->order();
    while (true) {
        FqPoly a = random_poly_below(f.ctx, f.degree(), rng);
        if (a.is_zero()) continue;
        FqPoly g;
        if (k.p == 2) {
            long steps = static_cast<long>(k.deg()) * d;
            FqPoly t = ffp_divrem(a, f).second;
            FqPoly acc = t;
            for (long i = 1; i < steps; ++i) {
                t = ffp_divrem(ffp_mul(t, t), f).second;
                acc = ffp_add(acc, t);
            }
            g = ffp_gcd(acc, f);
        } else {
            Int e;
            mpz_pow_ui(e.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(d));
            e = (e - 1) / 2;
            FqPoly b = ffp_powmod(a, e, f);
            g = ffp_gcd(ffp_sub(b, ffp_one(f.ctx)), f);
        }
        if (g.c.size() > 1 && g.degree() < f.degree()) {
            edf(g, d, rng, out);
            edf(ffp_divrem(f, g).first, d, rng, out);
            return;
        }
    }
}

}  // namespace detail_ff

struct FfFactor {
    FqPoly factor;  // monic irreducible
    long multiplicity;
};

// Canonical order: by degree, then lexicographic from the top coefficient.
inline bool ffp_less(const FqPoly& a, const FqPoly& b) {
    if (a.c.size() != b.c.size()) return a.c.size() < b.c.size();
    for (std::size_t i = a.c.size(); i-- > 0;)
        if (a.c[i] != b.c[i]) return a.c[i] < b.c[i];
    return false;
}

inline std::vector<FfFactor> ff_factor(const FqPoly& f, std::uint64_t seed = 0xC0FFEEull) {
    if (f.is_zero()) throw std::domain_error("ff_factor: zero polynomial");
    std::mt19937_64 rng(seed);
    std::vector<FfFactor> out;
    if (f.degree() == 0) return out;
    for (auto& [g, mult] : ff_squarefree(f)) {
        for (auto& [h, d] : ff_distinct_degree(g)) {
            std::vector<FqPoly> irr;
            detail_ff::edf(h, d, rng, irr);
            for (auto& u : irr) out.push_back({std::move(u), mult});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const FfFactor& a, const FfFactor& b) { return ffp_less(a.factor, b.factor); });
    return out;
}

// ---- contexts and extensions ----

inline FqCtxPtr fq_prime_field(std::uint64_t p) {
    static std::mutex mu;
    static std::map<std::uint64_t, FqCtxPtr> cache;
    if (!is_prime_u64(p)) throw std::invalid_argument("fq_prime_field: not prime");
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    auto ctx = std::make_shared<FqCtx>();
    ctx->p = p;
    ctx->modulus = {0, 1};
    cache.emplace(p, ctx);
    return ctx;
}

// Extension k' = k[Y]/(resfac), flattened over F_p, with the embedding of k,
// the image z of Y, and the decomposition of k'-elements in the basis
// { embed(zeta^i) z^t } (zeta = generator of k).
struct FqExt {
    FqCtxPtr base;
    FqPoly resfac;  // over base, monic irreducible, degree f >= 1
    FqCtxPtr ext;   // flattened field (== base when f == 1)
    FqElem z;       // root of resfac in ext
    std::vector<FqElem> base_pow;           // images of zeta^i, i < deg(base)
    std::vector<std::uint64_t> decomp_inv;  // row-major DxD inverse over F_p
};
using FqExtPtr = std::shared_ptr<const FqExt>;

inline FqElem fq_embed(const FqExt& E, const FqElem& a) {
    if (E.ext == E.base) return a;
    const FqCtx& k = *E.ext;
    FqElem r = fq_zero(k);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        FqElem term = E.base_pow[i];
        for (auto& x : term) x = (x * a[i]) % k.p;
        r = fq_add(k, r, term);
    }
    return r;
}

inline FqPoly ffp_embed(const FqExt& E, const FqPoly& f) {
    FqPoly r{E.ext, {}};
    r.c.reserve(f.c.size());
    for (const auto& a : f.c) r.c.push_back(fq_embed(E, a));
    ffp_trim(r);
    return r;
}

// Write w as sum_t c_t z^t with c_t in the base field.
inline std::vector<FqElem> fq_decompose(const FqExt& E, const FqElem& w) {
    if (E.ext == E.base) return {w};
    const int D = E.ext->deg();
    const int kdeg = E.base->deg();
    const int f = E.resfac.degree();
    const std::uint64_t p = E.ext->p;
    std::vector<std::uint64_t> coords(D, 0);
    for (int i = 0; i < D; ++i) {
        std::uint64_t acc = 0;
        for (int j = 0; j < D; ++j) acc = (acc + E.decomp_inv[i * D + j] * w[j]) % p;
        coords[i] = acc;
    }
    std::vector<FqElem> out(f, FqElem(kdeg, 0));
    for (int t = 0; t < f; ++t)
        for (int i = 0; i < kdeg; ++i) out[t][i] = coords[t * kdeg + i];
    return out;
}

namespace detail_ff {

// Invert a row-major DxD matrix over F_p (Gauss-Jordan); empty if singular.
inline std::vector<std::uint64_t> invert_matrix(const std::vector<std::uint64_t>& a,
                                                std::size_t D, std::uint64_t p) {
    std::vector<std::vector<std::uint64_t>> m(D, std::vector<std::uint64_t>(2 * D, 0));
    for (std::size_t i = 0; i < D; ++i) {
        for (std::size_t j = 0; j < D; ++j) m[i][j] = a[i * D + j];
        m[i][D + i] = 1;
    }
    for (std::size_t col = 0; col < D; ++col) {
        std::size_t piv = col;
        while (piv < D && m[piv][col] == 0) ++piv;
        if (piv == D) return {};
        std::swap(m[piv], m[col]);
        std::uint64_t inv = zp::inv_scalar(m[col][col], p);
        for (std::size_t j = 0; j < 2 * D; ++j) m[col][j] = (m[col][j] * inv) % p;
        for (std::size_t i = 0; i < D; ++i) {
            if (i == col || m[i][col] == 0) continue;
            std::uint64_t c = m[i][col];
            for (std::size_t j = 0; j < 2 * D; ++j) {
                std::uint64_t x = m[i][j] + p - (c * m[col][j]) % p;
                m[i][j] = x >= p ? x - p : x;
            }
        }
    }
    std::vector<std::uint64_t> out(D * D);
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j) out[i * D + j] = m[i][D + j];
    return out;
}

}  // namespace detail_ff

// Build the extension of `base` by a monic irreducible resfac.
// Tower elements are represented as FqPoly over base modulo resfac during the
// flattening; a primitive element theta = Y + c*zeta is searched by testing
// minimal polynomial degrees.
inline FqExtPtr ff_extend(FqCtxPtr base, const FqPoly& resfac) {
    if (resfac.is_zero() || resfac.degree() < 1 || !fq_is_one(resfac.c.back()))
        throw std::invalid_argument("ff_extend: modulus must be monic of degree >= 1");
    if (resfac.degree() > 1 && !ff_is_irreducible(resfac))
        throw std::invalid_argument("ff_extend: modulus reducible");

    struct Key {
        const FqCtx* base;
        std::vector<FqElem> coeffs;
        bool operator<(const Key& o) const {
            if (base != o.base) return base < o.base;
            return coeffs < o.coeffs;
        }
    };
    static std::mutex mu;
    static std::map<Key, FqExtPtr> cache;
    Key key{base.get(), resfac.c};
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }

    auto E = std::make_shared<FqExt>();
    E->base = base;
    E->resfac = resfac;

    const int f = resfac.degree();
    if (f == 1) {
        E->ext = base;
        E->z = fq_neg(*base, resfac.c[0]);
    } else {
        const int k = base->deg();
        const int D = k * f;
        const std::uint64_t p = base->p;

        auto tower_mul = [&](const FqPoly& a, const FqPoly& b) {
            return ffp_divrem(ffp_mul(a, b), resfac).second;
        };
        auto flatten = [&](const FqPoly& a) {
            std::vector<std::uint64_t> v(D, 0);
            for (std::size_t t = 0; t < a.c.size(); ++t)
                for (int i = 0; i < k; ++i) v[t * k + i] = a.c[t][i];
            return v;
        };

        // candidate generators theta = Y + c*zeta, then random elements
        std::mt19937_64 rng(0x5EEDull);
        FqPoly theta_found = ffp_zero(base);
        std::vector<std::vector<std::uint64_t>> pow_coords;  // flatten(theta^j)
        for (std::uint64_t attempt = 0;; ++attempt) {
            FqPoly theta{base, {}};
            if (attempt <= base->p) {
                FqElem zeta = fq_zero(*base);
                if (k > 1)
                    zeta[1] = 1;
                else
                    zeta[0] = 1;
                for (auto& x : zeta) x = (x * attempt) % p;
                theta = ffp_add(ffp_x(base), ffp_const(base, zeta));
            } else {
                theta = detail_ff::random_poly_below(base, f, rng);
                if (theta.is_zero()) continue;
            }
            // theta is primitive iff its D powers 1, theta, ..., theta^(D-1)
            // span the tower over F_p
            pow_coords.clear();
            FqPoly acc = ffp_one(base);
            for (int j = 0; j < D; ++j) {
                pow_coords.push_back(flatten(acc));
                acc = tower_mul(acc, theta);
            }
            std::vector<std::vector<std::uint64_t>> m = pow_coords;
            int rank = 0;
            for (int col = 0; col < D && rank < D; ++col) {
                int piv = -1;
                for (int i = rank; i < D; ++i)
                    if (m[i][col] != 0) {
                        piv = i;
                        break;
                    }
                if (piv < 0) continue;
                std::swap(m[piv], m[rank]);
                std::uint64_t inv = zp::inv_scalar(m[rank][col], p);
                for (int j2 = 0; j2 < D; ++j2) m[rank][j2] = (m[rank][j2] * inv) % p;
                for (int i = 0; i < D; ++i) {
                    if (i == rank || m[i][col] == 0) continue;
                    std::uint64_t c = m[i][col];
                    for (int j2 = 0; j2 < D; ++j2) {
                        std::uint64_t x = m[i][j2] + p - (c * m[rank][j2]) % p;
                        m[i][j2] = x >= p ? x - p : x;
                    }
                }
                ++rank;
            }
            if (rank == D) {
                theta_found = theta;
                break;
            }
        }

        // minimal polynomial: theta^D = sum c_j theta^j
        FqPoly thD = ffp_one(base);
        for (int j = 0; j < D; ++j) thD = tower_mul(thD, theta_found);
        // solve M^T ... build matrix with columns pow_coords[j]
        std::vector<std::uint64_t> M(D * D, 0);  // row-major, column j = pow_coords[j]
        for (int j = 0; j < D; ++j)
            for (int i = 0; i < D; ++i) M[i * D + j] = pow_coords[j][i];
        auto Minv = detail_ff::invert_matrix(M, D, p);
        if (Minv.empty()) throw std::logic_error("ff_extend: power basis not invertible");
        auto apply_inv = [&](const std::vector<std::uint64_t>& v) {
            std::vector<std::uint64_t> r(D, 0);
            for (int i = 0; i < D; ++i) {
                std::uint64_t acc = 0;
                for (int j = 0; j < D; ++j) acc = (acc + Minv[i * D + j] * v[j]) % p;
                r[i] = acc;
            }
            return r;
        };
        auto c = apply_inv(flatten(thD));
        auto ext = std::make_shared<FqCtx>();
        ext->p = p;
        ext->modulus.assign(D + 1, 0);
        for (int j = 0; j < D; ++j) ext->modulus[j] = (p - c[j]) % p;  // minpoly = Y^D - sum
        ext->modulus[D] = 1;
        E->ext = ext;

        // base embedding and z
        E->base_pow.resize(k);
        for (int i = 0; i < k; ++i) {
            FqElem zi = fq_zero(*base);
            zi[i] = 1;
            E->base_pow[i] = apply_inv(flatten(ffp_const(base, zi)));
        }
        E->z = apply_inv(flatten(ffp_x(base)));

        // decomposition basis { embed(zeta^i) z^t }
        std::vector<std::uint64_t> Dmat(D * D, 0);
        FqElem zt = fq_one(*ext);
        for (int t = 0; t < f; ++t) {
            for (int i = 0; i < k; ++i) {
                FqElem col = fq_mul(*ext, E->base_pow[i], zt);
                for (int r2 = 0; r2 < D; ++r2) Dmat[r2 * D + (t * k + i)] = col[r2];
            }
            zt = fq_mul(*ext, zt, E->z);
        }
        E->decomp_inv = detail_ff::invert_matrix(Dmat, D, p);
        if (E->decomp_inv.empty()) throw std::logic_error("ff_extend: decomposition basis singular");

        // sanity: z is a root of the embedded resfac
        FqPoly emb = ffp_embed(*E, resfac);
        if (!fq_is_zero(ffp_eval(emb, E->z)))
            throw std::logic_error("ff_extend: z is not a root of the modulus");
    }

    std::lock_guard<std::mutex> lock(mu);
    auto [it, inserted] = cache.emplace(std::move(key), E);
    return it->second;
}

}  // namespace valfram
