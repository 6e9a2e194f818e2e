// MacLane approximation over (Q, v_p): automatic construction of MLV chains
// for monic F, branch enumeration for the extensions of v_p to Q[x]/(F),
// evaluation of v_F and chain-level invariants.
#pragma once

#include "valfram/valuation.hpp"

#include <deque>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace valfram {

// A certified chain: inner nodes (the levels of `leaf`) followed by the
// final step (F, +inf).  F is irreducible over Q_p (certified by one-sided
// multiplicity-one residual data with full degree accounting).
struct MLVChain {
    PBase prime;
    Poly F;
    InductiveVal leaf;  // [mu_r; F, inf]

    int depth() const { return leaf.nlevels(); }
};

struct ChainNodeData {
    Poly phi;
    Rat gamma;
    int m;
    long e;  // lattice denominator of gamma over the group below
    long f;  // residual degree of the step leaving this node
};

inline std::vector<ChainNodeData> chain_nodes(const MLVChain& c) {
    const auto& levels = c.leaf.levels();
    std::vector<ChainNodeData> out;
    out.reserve(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        ChainNodeData d;
        d.phi = levels[i].phi;
        d.gamma = levels[i].gamma;
        d.m = levels[i].m();
        d.e = engine::lattice_den(levels[i].gamma,
                                  engine::group_den(levels, static_cast<int>(i)));
        int mnext = i + 1 < levels.size() ? levels[i + 1].m() : c.F.degree();
        d.f = mnext / (d.m * d.e);
        out.push_back(std::move(d));
    }
    return out;
}

// e = [value group : Z], f = residue degree; e*f = deg(F) for certified chains.
inline std::pair<long, long> ramification_invariants(const MLVChain& c) {
    long e = 1, f = 1;
    for (const auto& nd : chain_nodes(c)) {
        e *= nd.e;
        f *= nd.f;
    }
    return {e, f};
}

inline Val vF(const MLVChain& c, const Poly& g) { return c.leaf.value(g); }

inline int depth(const MLVChain& c) { return c.depth(); }

struct PrevPrimitive {
    bool is_root;                       // degree-1 input: the root node sentinel
    std::optional<InductiveVal> node;   // the last inner node otherwise
    Val wt;                             // -inf for the root sentinel
};

inline PrevPrimitive previous_primitive(const MLVChain& c) {
    if (c.F.degree() == 1) return {true, std::nullopt, Val::minus_inf()};
    InductiveVal node(c.prime, c.leaf.levels());
    Val w = weight(node);
    return {false, std::move(node), w};
}

// delta_0(F) = rho_F(F) = deg(F) * wt(rho_F)
inline Val okutsu_bound(const MLVChain& c) {
    if (c.F.degree() < 2) throw std::domain_error("okutsu_bound: undefined for linear input");
    auto pp = previous_primitive(c);
    Val v = pp.node->value(c.F);
    if (v != Val(Rat(c.F.degree()) * pp.wt.rat()))
        throw std::logic_error("okutsu_bound: value disagrees with deg * wt");
    return v;
}

// One extension of v_p to Q[x]/(F): either a certified chain of the exact
// irreducible factor, or a truncated approximant node.
struct Branch {
    bool exact = false;
    std::optional<MLVChain> chain;       // set when exact
    std::optional<InductiveVal> approx;  // set otherwise
    int local_degree = 0;                // multiplicity * factor degree
    long multiplicity = 1;
};

struct ExtensionsReport {
    PBase prime;
    Poly input;
    std::vector<Branch> branches;

    bool all_exact() const {
        for (const auto& b : branches)
            if (!b.exact) return false;
        return true;
    }
    // The input itself is certified irreducible over Q_p.
    const MLVChain* single_certified() const {
        if (branches.size() != 1) return nullptr;
        const Branch& b = branches.front();
        if (!b.exact || b.multiplicity != 1) return nullptr;
        if (!(b.chain->F == input)) return nullptr;
        return &*b.chain;
    }
};

namespace detail_chains {

struct SearchState {
    std::vector<Level> prefix;
    Poly cand;
    FqExtPtr cand_ext;
    std::optional<Rat> v0;  // nullopt = -inf (initial)
    int budget;             // degree content of this subtree
};

}  // namespace detail_chains

inline ExtensionsReport build_chains(const Poly& F, const PBase& p,
                                     const Rat& sv_bound = Rat(20)) {
    if (F.is_zero() || !F.is_monic() || F.degree() < 1)
        throw std::invalid_argument("build_chains: need a monic polynomial of degree >= 1");

    ExtensionsReport report{p, F, {}};
    const int n = F.degree();

    if (n == 1) {
        Rat a = -F[0];
        MLVChain c{p, F, depth_zero(a, Val::plus_inf(), p)};
        report.branches.push_back(Branch{true, std::move(c), std::nullopt, 1, 1});
        return report;
    }

    std::deque<detail_chains::SearchState> work;
    work.push_back({{}, Poly::x(), engine::trivial_ext(p.p()), std::nullopt, n});

    long guard = 0;
    while (!work.empty()) {
        if (++guard > 100000) throw std::logic_error("build_chains: iteration guard tripped");
        auto st = std::move(work.front());
        work.pop_front();
        const int nprefix = static_cast<int>(st.prefix.size());
        const int mcand = st.cand.degree();

        auto digits = phi_expansion(F, st.cand);
        long ord = 0;
        while (ord < static_cast<long>(digits.size()) && digits[ord].is_zero()) ++ord;

        int accounted = 0;
        if (ord > 0) {
            // exact factor: cand^ord divides F
            MLVChain c{p, st.cand, InductiveVal(p, st.prefix, st.cand)};
            report.branches.push_back(
                Branch{true, std::move(c), std::nullopt, static_cast<int>(ord) * mcand, ord});
            accounted += static_cast<int>(ord) * mcand;
        }

        // polygon over the remaining abscissas
        std::vector<std::pair<long, Val>> pts;
        for (long s = ord; s < static_cast<long>(digits.size()); ++s)
            pts.emplace_back(s, digits[s].is_zero()
                                    ? Val::plus_inf()
                                    : engine::eval_value(p, st.prefix, nprefix, digits[s]));
        auto np = newton_polygon_from_points(std::move(pts));

        for (const auto& side : np.sides) {
            Rat lambda = -side.slope;
            if (st.v0 && !(lambda > *st.v0)) continue;
            auto sd = engine::side_from_polygon(st.prefix, nprefix, side);
            FqPoly R = engine::side_residual(p, st.prefix, nprefix, F, st.cand, sd, *st.cand_ext);
            auto factors = ff_factor(R);
            for (const auto& [psi, mult] : factors) {
                const long e = sd.e;
                const long f = psi.degree();
                const int sub_budget = static_cast<int>(mult * e * f) * mcand;
                accounted += sub_budget;

                if (mult == 1 && e * f * mcand == n) {
                    // the input is irreducible: full chain certified
                    std::vector<Level> levels = st.prefix;
                    levels.push_back(Level{st.cand, lambda, st.cand_ext});
                    MLVChain c{p, F, InductiveVal(p, std::move(levels), F)};
                    report.branches.push_back(Branch{true, std::move(c), std::nullopt, n, 1});
                    continue;
                }
                if (lambda >= sv_bound) {
                    std::vector<Level> levels = st.prefix;
                    levels.push_back(Level{st.cand, lambda, st.cand_ext});
                    report.branches.push_back(Branch{false, std::nullopt,
                                                     InductiveVal(p, std::move(levels)),
                                                     sub_budget, mult});
                    continue;
                }
                if (e * f == 1) {
                    // same-degree refinement
                    Poly cand2 = engine::key_lift(p, st.prefix, nprefix, st.cand, sd, psi,
                                                  *st.cand_ext);
                    work.push_back({st.prefix, std::move(cand2), st.cand_ext, lambda, sub_budget});
                } else {
                    // augmentation to a key of degree e*f*mcand
                    Poly cand2 = engine::key_lift(p, st.prefix, nprefix, st.cand, sd, psi,
                                                  *st.cand_ext);
                    FqExtPtr ext2 = ff_extend(st.cand_ext->ext, psi);
                    std::vector<Level> prefix2 = st.prefix;
                    prefix2.push_back(Level{st.cand, lambda, st.cand_ext});
                    work.push_back({std::move(prefix2), std::move(cand2), std::move(ext2),
                                    Rat(e * f) * lambda, sub_budget});
                }
            }
        }
        if (accounted != st.budget)
            throw std::logic_error("build_chains: degree accounting mismatch");
    }
    return report;
}

// Convenience: certified chain of an irreducible input, or nullopt.
inline std::optional<MLVChain> certified_chain(const Poly& F, const PBase& p,
                                               const Rat& sv_bound = Rat(20)) {
    auto rep = build_chains(F, p, sv_bound);
    const MLVChain* c = rep.single_certified();
    if (!c) return std::nullopt;
    return *c;
}

// Structural chain invariants: strictly increasing degrees with divisibility,
// strictly increasing weights, e*f accounting.
inline bool chain_invariants_ok(const MLVChain& c) {
    const auto nodes = chain_nodes(c);
    if (c.F.degree() == 1) return nodes.empty();
    if (nodes.empty() || nodes.front().m != 1) return false;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (!(nodes[i].m < nodes[i + 1].m)) return false;
        if (nodes[i + 1].m % nodes[i].m != 0) return false;
        if (!(nodes[i].gamma / Rat(nodes[i].m) < nodes[i + 1].gamma / Rat(nodes[i + 1].m)))
            return false;
    }
    if (c.F.degree() % nodes.back().m != 0) return false;
    auto [e, f] = ramification_invariants(c);
    return e * f == c.F.degree();
}

}  // namespace valfram
