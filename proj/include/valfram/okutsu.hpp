// Okutsu frames and their equivalence with MLV chains, the ultrametric
// distance on irreducible polynomials, Okutsu equivalence, Krasner constants
// and the HOS key-polynomial predicate.
#pragma once

#include "valfram/chains.hpp"
#include "valfram/resultant.hpp"

#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace valfram {

struct NeedsMorePrecision : std::runtime_error {
    explicit NeedsMorePrecision(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidFrame : std::runtime_error {
    explicit InvalidFrame(const std::string& what) : std::runtime_error(what) {}
};

struct OkutsuFrame {
    struct FrameLevel {
        int degree;
        std::vector<Poly> phis;  // singleton over Q_p
        Rat gamma;               // v_F(phi) for the representative
    };
    Poly F;
    std::vector<FrameLevel> levels;
};

struct LevelWeights {
    std::vector<std::pair<int, Rat>> pairs;  // (m_{l+1}, w_{m_{l+1}}(F))
};

inline OkutsuFrame frame_from_chain(const MLVChain& c) {
    if (c.F.degree() < 2) throw std::domain_error("frame_from_chain: undefined for linear input");
    OkutsuFrame fr;
    fr.F = c.F;
    for (const auto& nd : chain_nodes(c)) {
        Val g = vF(c, nd.phi);
        if (!g.is_finite() || g.rat() != nd.gamma)
            throw std::logic_error("frame_from_chain: node value disagrees with v_F");
        fr.levels.push_back({nd.m, {nd.phi}, nd.gamma});
    }
    return fr;
}

inline void check_frame_shape(const OkutsuFrame& fr) {
    if (fr.levels.empty()) throw InvalidFrame("frame has no levels");
    if (fr.levels.front().degree != 1) throw InvalidFrame("first frame degree must be 1");
    for (std::size_t l = 0; l < fr.levels.size(); ++l) {
        const auto& lev = fr.levels[l];
        if (lev.phis.empty()) throw InvalidFrame("empty frame level");
        for (const auto& phi : lev.phis) {
            if (phi.is_zero() || !phi.is_monic() || phi.degree() != lev.degree)
                throw InvalidFrame("frame member degree/monicity mismatch");
        }
        if (l + 1 < fr.levels.size()) {
            const auto& nxt = fr.levels[l + 1];
            if (!(lev.degree < nxt.degree) || nxt.degree % lev.degree != 0)
                throw InvalidFrame("frame degrees must strictly increase and divide");
            if (!(lev.gamma / Rat(lev.degree) < nxt.gamma / Rat(nxt.degree)))
                throw InvalidFrame("weighted frame values must strictly increase");
        }
    }
    int n = fr.F.degree();
    if (n % fr.levels.back().degree != 0 || fr.levels.back().degree >= n)
        throw InvalidFrame("top frame degree must properly divide deg F");
}

// v_F(g) for deg(g) < deg(F) through the resultant: vp(Res(F,g)) / deg(F).
inline Val vF_resultant(const Poly& F, const Poly& g, const PBase& p) {
    if (g.is_zero()) return Val::plus_inf();
    Rat r = resultant(F, g);
    if (r == 0) return Val::plus_inf();
    return make_rat(1, F.degree()) * p.vp(r);
}

inline MLVChain chain_from_frame(const OkutsuFrame& fr, const PBase& p) {
    check_frame_shape(fr);
    const Poly& F = fr.F;
    try {
        const Poly& phi0 = fr.levels[0].phis.front();
        Rat a = -phi0[0];
        Val g0 = vF_resultant(F, phi0, p);
        if (!g0.is_finite()) throw InvalidFrame("frame member divides F");
        if (g0.rat() != fr.levels[0].gamma)
            throw InvalidFrame("stored gamma disagrees with the resultant oracle");
        InductiveVal node = depth_zero(a, g0, p);
        for (std::size_t l = 1; l < fr.levels.size(); ++l) {
            const Poly& phi = fr.levels[l].phis.front();
            Val g = vF_resultant(F, phi, p);
            if (!g.is_finite()) throw InvalidFrame("frame member divides F");
            if (g.rat() != fr.levels[l].gamma)
                throw InvalidFrame("stored gamma disagrees with the resultant oracle");
            node = augment(node, phi, g);
        }
        InductiveVal leaf = augment(node, F, Val::plus_inf());
        return MLVChain{p, F, std::move(leaf)};
    } catch (const std::invalid_argument& e) {
        throw InvalidFrame(std::string("frame does not assemble into a chain: ") + e.what());
    }
}

inline LevelWeights weights(const OkutsuFrame& fr) {
    LevelWeights w;
    for (std::size_t l = 0; l < fr.levels.size(); ++l) {
        int mnext = l + 1 < fr.levels.size() ? fr.levels[l + 1].degree : fr.F.degree();
        w.pairs.emplace_back(mnext, fr.levels[l].gamma / Rat(fr.levels[l].degree));
    }
    return w;
}

struct FrameCheckConfig {
    long grid_height = 8;
    int random_draws = 1000;
    long random_height = 100;
    std::uint64_t seed = 0x0DDBALL;
};

struct FrameCheckFailure {
    int level;
    Poly witness;
    Rat lhs;  // v_F(g)/deg(g)
    Rat rhs;  // gamma_l / m_l
};

struct FrameCheckReport {
    bool pass = true;
    std::vector<FrameCheckFailure> failures;
    long checked = 0;
};

// Fundamental property: for each level l and monic g with deg(g) < m_{l+1},
// v_F(g)/deg(g) <= gamma_l/m_l.  Exhaustive over a coefficient grid plus
// random draws; failures carry witnesses.  Also checks the additional frame
// properties and member irreducibility.
inline FrameCheckReport verify_frame(const OkutsuFrame& fr, const MLVChain& chain,
                                     const FrameCheckConfig& cfg = {}) {
    FrameCheckReport rep;
    if (!(chain.F == fr.F)) throw std::invalid_argument("verify_frame: chain/frame mismatch");
    const PBase& p = chain.prime;

    // structural properties (weighted growth across levels)
    for (std::size_t l = 0; l + 1 < fr.levels.size(); ++l) {
        if (!(fr.levels[l].gamma / Rat(fr.levels[l].degree) <
              fr.levels[l + 1].gamma / Rat(fr.levels[l + 1].degree))) {
            rep.pass = false;
            rep.failures.push_back({static_cast<int>(l), fr.levels[l + 1].phis.front(),
                                    fr.levels[l + 1].gamma / Rat(fr.levels[l + 1].degree),
                                    fr.levels[l].gamma / Rat(fr.levels[l].degree)});
        }
    }
    // member irreducibility via their own certified chains
    for (const auto& lev : fr.levels)
        for (const auto& phi : lev.phis) {
            if (phi.degree() == 1) continue;
            if (!certified_chain(phi, p)) {
                rep.pass = false;
                rep.failures.push_back({-1, phi, Rat(0), Rat(0)});
            }
        }

    auto check_g = [&](int l, const Rat& bound, const Poly& g) {
        ++rep.checked;
        Val v = vF(chain, g);
        if (v.is_plus_inf()) return;  // g a multiple of F cannot occur (deg < n)
        Rat lhs = v.rat() / Rat(g.degree());
        if (!(lhs <= bound)) {
            rep.pass = false;
            rep.failures.push_back({l, g, lhs, bound});
        }
    };

    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<long> rc(-cfg.random_height, cfg.random_height);
    for (std::size_t l = 0; l < fr.levels.size(); ++l) {
        int mnext = l + 1 < fr.levels.size() ? fr.levels[l + 1].degree : fr.F.degree();
        Rat bound = fr.levels[l].gamma / Rat(fr.levels[l].degree);
        // exhaustive grid: monic g of each degree below mnext
        for (int d = 1; d < mnext; ++d) {
            std::vector<long> coef(d, -cfg.grid_height);
            while (true) {
                std::vector<Rat> c(d + 1);
                for (int i = 0; i < d; ++i) c[i] = Rat(coef[i]);
                c[d] = 1;
                check_g(static_cast<int>(l), bound, Poly(std::move(c)));
                int i = 0;
                while (i < d && ++coef[i] > cfg.grid_height) coef[i++] = -cfg.grid_height;
                if (i == d) break;
            }
        }
        for (int it = 0; it < cfg.random_draws; ++it) {
            std::uniform_int_distribution<int> dd(1, mnext - 1);
            int d = dd(rng);
            std::vector<Rat> c(d + 1);
            for (int i = 0; i < d; ++i) c[i] = Rat(rc(rng));
            c[d] = 1;
            check_g(static_cast<int>(l), bound, Poly(std::move(c)));
        }
    }
    return rep;
}

// Ultrametric distance u(F,G) = vp(Res(F,G)) / (deg F * deg G); +inf iff F == G.
// No certification check; callers on untrusted input use `distance`.
inline Val distance_u(const Poly& F, const Poly& G, const PBase& p) {
    if (F == G) return Val::plus_inf();
    Rat r = resultant(F, G);
    if (r == 0) return Val::plus_inf();  // common factor; cannot happen for distinct irreducibles
    return make_rat(1, static_cast<long>(F.degree()) * G.degree()) * p.vp(r);
}

// Distance with certification and the chain cross-check.
inline Val distance(const Poly& F, const Poly& G, const PBase& p) {
    if (F == G) return Val::plus_inf();
    auto cF = certified_chain(F, p);
    auto cG = certified_chain(G, p);
    if (!cF || !cG)
        throw NeedsMorePrecision("distance: input not certified irreducible over Q_p");
    Val u = distance_u(F, G, p);
    Val viaF = make_rat(1, G.degree()) * vF(*cF, G);
    Val viaG = make_rat(1, F.degree()) * vF(*cG, F);
    if (u != viaF || u != viaG)
        throw std::logic_error("distance: resultant and chain routes disagree");
    return u;
}

// Greatest common lower node of the two leaves.
inline InductiveVal meet(const MLVChain& cF, const MLVChain& cG) {
    if (cF.F == cG.F) throw std::invalid_argument("meet: undefined for equal inputs");
    const PBase& p = cF.prime;
    Val uv = distance_u(cF.F, cG.F, p);
    if (!uv.is_finite()) throw std::logic_error("meet: inputs share a factor");
    const Rat u = uv.rat();

    const auto& levels = cF.leaf.levels();
    InductiveVal result = [&]() {
        if (levels.empty() || u < levels.front().gamma / Rat(levels.front().m())) {
            // below the first node: a ball around the center of phi_0
            Rat a = levels.empty() ? Rat(-cF.F[0]) : Rat(-levels.front().phi[0]);
            return depth_zero(a, Val(u), p);
        }
        std::size_t i = 0;
        while (i + 1 < levels.size() &&
               levels[i + 1].gamma / Rat(levels[i + 1].m()) <= u)
            ++i;
        std::vector<Level> pre(levels.begin(), levels.begin() + i + 1);
        InductiveVal node(p, std::move(pre));
        Rat wt_i = levels[i].gamma / Rat(levels[i].m());
        if (wt_i == u) return node;
        const Poly& next = i + 1 < levels.size() ? levels[i + 1].phi : cF.F;
        return augment(node, next, Val(u * Rat(next.degree())));
    }();

    if (weight(result) != Val(u)) throw std::logic_error("meet: weight mismatch");
    // sampled lower-bound verification against both leaves
    std::mt19937_64 rng(0xABCD);
    std::uniform_int_distribution<long> rc(-50, 50);
    std::uniform_int_distribution<int> dd(0, 5);
    for (int it = 0; it < 64; ++it) {
        int d = dd(rng);
        std::vector<Rat> c(d + 1);
        for (int j = 0; j <= d; ++j) c[j] = Rat(rc(rng));
        Poly h(std::move(c));
        if (h.is_zero()) continue;
        Val vm = result.value(h);
        if (!(vm <= vF(cF, h) && vm <= vF(cG, h)))
            throw std::logic_error("meet: node exceeds a leaf on a sample");
    }
    return result;
}

// Okutsu equivalence via the distance criterion, cross-checked against the
// initial-term criterion at the previous primitive node.
inline bool okutsu_equivalent(const MLVChain& cF, const MLVChain& cG) {
    if (cF.F.degree() != cG.F.degree()) return false;
    if (cF.F.degree() == 1) return true;  // unique tangent direction at the root
    if (cF.F == cG.F) return true;
    Val u = distance_u(cF.F, cG.F, cF.prime);
    auto pp = previous_primitive(cF);
    bool crit2 = u > pp.wt;
    // criterion (3): F ~ G at rho_F
    Val vdiff = pp.node->value(cF.F - cG.F);
    Val vf = pp.node->value(cF.F);
    bool crit3 = vdiff > vf;
    if (crit2 != crit3)
        throw std::logic_error("okutsu_equivalent: distance and initial-term criteria disagree");
    return crit2;
}

inline bool okutsu_equivalent(const Poly& F, const Poly& G, const PBase& p) {
    if (F.degree() != G.degree()) return false;
    if (F.degree() == 1) return true;
    auto cF = certified_chain(F, p);
    auto cG = certified_chain(G, p);
    if (!cF || !cG)
        throw NeedsMorePrecision("okutsu_equivalent: input not certified irreducible over Q_p");
    return okutsu_equivalent(*cF, *cG);
}

// Largest valuation of a difference of distinct roots, from the polygon of
// the Taylor coefficients' v_F-values.
inline Val krasner_constant(const MLVChain& c) {
    const Poly& F = c.F;
    if (F.degree() < 2) throw std::domain_error("krasner_constant: undefined for linear input");
    if (gcd(F, derivative(F)).degree() != 0)
        throw std::domain_error("krasner_constant: inseparable input");
    auto coeffs = taylor_coeffs(F);
    std::vector<std::pair<long, Val>> pts;
    for (std::size_t i = 1; i < coeffs.size(); ++i)
        pts.emplace_back(static_cast<long>(i), vF(c, coeffs[i]));
    auto np = newton_polygon_from_points(std::move(pts));
    if (np.sides.empty()) return Val(Rat(0));  // single finite point: no root differences? degree>=2 always has sides
    return Val(-np.sides.front().slope);
}

// HOS key polynomials for v_F: either F itself, or a monic polynomial of a
// frame degree whose weighted value clears the previous level's weighted
// value and whose truncation passes a sampled multiplicativity check.
inline bool is_hos_key(const MLVChain& c, const Poly& g, int sample_pairs = 1000,
                       std::uint64_t seed = 0x420) {
    if (g.is_zero() || !g.is_monic()) return false;
    if (g == c.F) return true;
    const auto nodes = chain_nodes(c);
    const int dg = g.degree();
    // admissible degrees: the chain key degrees and deg F
    Rat threshold;
    bool thr_minus_inf = false;
    bool admissible = false;
    if (dg == c.F.degree() && c.F.degree() >= 1) {
        admissible = true;
        if (nodes.empty())
            thr_minus_inf = true;
        else
            threshold = nodes.back().gamma / Rat(nodes.back().m);
    } else {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].m == dg) {
                admissible = true;
                if (i == 0)
                    thr_minus_inf = true;
                else
                    threshold = nodes[i - 1].gamma / Rat(nodes[i - 1].m);
                break;
            }
        }
    }
    if (!admissible) return false;
    Val vg = vF(c, g);
    if (vg.is_plus_inf()) return false;  // proper multiples of F are not monic of deg F
    if (!thr_minus_inf && !(vg.rat() / Rat(dg) > threshold)) return false;

    // sampled multiplicativity of the truncation of v_F by g
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> rc(-100, 100);
    std::uniform_int_distribution<int> dd(0, std::max(1, c.F.degree() - 1));
    for (int it = 0; it < sample_pairs; ++it) {
        int d1 = dd(rng), d2 = dd(rng);
        std::vector<Rat> c1(d1 + 1), c2(d2 + 1);
        for (auto& x : c1) x = Rat(rc(rng));
        for (auto& x : c2) x = Rat(rc(rng));
        Poly f1(std::move(c1)), f2(std::move(c2));
        if (f1.is_zero() || f2.is_zero()) continue;
        Val lhs = truncation_value(c.leaf, g, f1 * f2);
        Val rhs = truncation_value(c.leaf, g, f1) + truncation_value(c.leaf, g, f2);
        if (lhs != rhs) return false;
    }
    return true;
}

}  // namespace valfram
