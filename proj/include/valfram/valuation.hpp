// Inductive valuations on Q[x]: depth-zero valuations plus chains of
// augmentation steps, with evaluation, key-polynomial predicates, residual
// polynomials and lifts of residual factors to key polynomials.
//
// Residual normalization.  Reductions are taken against canonical monomials
// p^c * prod_j phi_j^{d_j}: for a target value beta the exponent d_j at each
// level is the least nonnegative one putting the remainder into the value
// group of the levels below (so 0 <= d_j < e_j).  A coefficient whose own
// expansion support starts at a lattice offset above the canonical exponent
// is renormalized by the matching power of the level generator z_j (the class
// of phi_j^{e_j} over the canonical monomial of value e_j*gamma_j).  This
// fixes one consistent unit choice; lifts invert it exactly.
#pragma once

#include "valfram/finite_field.hpp"
#include "valfram/newton.hpp"
#include "valfram/poly.hpp"
#include "valfram/prime.hpp"
#include "valfram/rational.hpp"
#include "valfram/value.hpp"

#include <cassert>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace valfram {

// One augmentation level of an inductive valuation.  Level 0 is the
// depth-zero valuation with key x - a.  `ext` carries the residual field
// data created together with this level's key: ext->base is the previous
// level's residue field, ext->ext this level's, and ext->z the class of the
// previous level's residual variable.  Level 0 uses the trivial extension
// of F_p.
struct Level {
    Poly phi;
    Rat gamma;
    FqExtPtr ext;

    int m() const { return phi.degree(); }
};

// Side of a polygon in valuation terms: lambda = -slope, left endpoint
// (s0, w0), lattice step e relative to the coefficient value group, lattice
// length len (the residual degree).
struct SideData {
    Rat lambda;
    long s0 = 0;
    Rat w0;
    long e = 1;
    long len = 0;
};

namespace engine {

inline FqExtPtr trivial_ext(std::uint64_t p) {
    auto Fp = fq_prime_field(p);
    return ff_extend(Fp, ffp_x(Fp));  // modulus y, root 0; base == ext
}

// Denominator D of the value group <Z, gamma_0..gamma_{nlev-1}> = (1/D)Z.
inline Int group_den(const std::vector<Level>& levels, int nlev) {
    Int d = 1;
    for (int i = 0; i < nlev; ++i) d = lcm(d, levels[i].gamma.get_den());
    return d;
}

// Least e >= 1 with e*lambda in (1/D)Z.
inline long lattice_den(const Rat& lambda, const Int& D) {
    Rat scaled = lambda * Rat(D);
    return scaled.get_den().get_si();
}

// Least d >= 0 with beta - d*gamma_tl in the group of the levels below tl.
inline long dstar(const std::vector<Level>& levels, int tl, const Rat& beta) {
    Int D = group_den(levels, tl);
    long e = lattice_den(levels[tl].gamma, D);
    for (long d = 0; d < e; ++d) {
        Rat rem = (beta - Rat(d) * levels[tl].gamma) * Rat(D);
        if (rem.get_den() == 1) return d;
    }
    throw std::logic_error("dstar: no canonical exponent (value not in group)");
}

// Value of f under the inductive valuation with levels[0..nlev).
// nlev == 0 evaluates constants by vp.
inline Val eval_value(const PBase& p, const std::vector<Level>& levels, int nlev,
                      const Poly& f) {
    if (f.is_zero()) return Val::plus_inf();
    if (nlev == 0) {
        if (f.degree() != 0) throw std::logic_error("eval_value: nonconstant at level -1");
        return p.vp(f[0]);
    }
    const Level& L = levels[nlev - 1];
    if (f.degree() < L.m()) return eval_value(p, levels, nlev - 1, f);
    auto digits = phi_expansion(f, L.phi);
    Val best = Val::plus_inf();
    for (std::size_t t = 0; t < digits.size(); ++t) {
        if (digits[t].is_zero()) continue;
        Val v = eval_value(p, levels, nlev - 1, digits[t]) + Val(Rat(t) * L.gamma);
        if (v < best) best = v;
    }
    return best;
}

// Residue of q / p^beta in F_p (beta integral, vp(q) == beta).
inline std::uint64_t red_base(const PBase& p, const Rat& q, const Rat& beta) {
    if (beta.get_den() != 1) throw std::logic_error("red_base: non-integral target");
    Int pw;
    long b = beta.get_num().get_si();
    mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(p.p()),
                  static_cast<unsigned long>(b >= 0 ? b : -b));
    Rat u = b >= 0 ? Rat(q / Rat(pw)) : Rat(q * Rat(pw));
    Int pz = p.pz();
    Int num = u.get_num() % pz;
    if (num < 0) num += pz;
    Int den = u.get_den() % pz;
    std::uint64_t dinv = zp::inv_scalar(den.get_ui(), p.p());
    return (num.get_ui() * dinv) % p.p();
}

// Reduce b (a polynomial over levels[0..tl+1)) at target value beta into
// E->ext, where E->base is the residue field of level tl (F_p for tl < 0).
// Returns zero when the value of b exceeds beta.
inline FqElem cred(const PBase& p, const std::vector<Level>& levels, int tl, const Poly& b,
                   const Rat& beta, const FqExt& E) {
    if (b.is_zero()) return fq_zero(*E.ext);
    Val v = eval_value(p, levels, tl + 1, b);
    if (v > Val(beta)) return fq_zero(*E.ext);
    if (v < Val(beta)) throw std::logic_error("cred: value below target");
    if (tl < 0) {
        FqElem r{red_base(p, b[0], beta)};
        return fq_embed(E, r);
    }
    const Level& L = levels[tl];
    auto digits = phi_expansion(b, L.phi);
    Int D = group_den(levels, tl);
    long e = lattice_den(L.gamma, D);
    long ds = dstar(levels, tl, beta);
    long smin = -1;
    for (std::size_t t = 0; t < digits.size(); ++t) {
        if (digits[t].is_zero()) continue;
        Val vt = eval_value(p, levels, tl, digits[t]) + Val(Rat(t) * L.gamma);
        if (vt == Val(beta)) {
            smin = static_cast<long>(t);
            break;
        }
    }
    if (smin < 0 || (smin - ds) % e != 0)
        throw std::logic_error("cred: support does not match canonical lattice");
    FqElem acc = fq_zero(*E.ext);
    FqElem zpow = fq_one(*E.ext);
    for (long t = smin; t < static_cast<long>(digits.size()); t += e) {
        Rat target = beta - Rat(t) * L.gamma;
        FqElem ck = cred(p, levels, tl - 1, digits[t], target, *L.ext);
        acc = fq_add(*E.ext, acc, fq_mul(*E.ext, fq_embed(E, ck), zpow));
        zpow = fq_mul(*E.ext, zpow, E.z);
    }
    long twist = (smin - ds) / e;
    FqElem ztw = fq_pow(*E.ext, E.z, Int(twist));
    return fq_mul(*E.ext, acc, ztw);
}

// Residual polynomial of f on the given side of its carrier-polygon, with
// coefficient values taken at levels[0..nprefix).  E is the residual
// structure attached to the carrier.
inline FqPoly side_residual(const PBase& p, const std::vector<Level>& levels, int nprefix,
                            const Poly& f, const Poly& carrier, const SideData& sd,
                            const FqExt& E) {
    auto digits = phi_expansion(f, carrier);
    FqPoly R{E.ext, {}};
    R.c.reserve(sd.len + 1);
    for (long k = 0; k <= sd.len; ++k) {
        long t = sd.s0 + k * sd.e;
        Rat target = sd.w0 - Rat(k * sd.e) * sd.lambda;
        if (t >= static_cast<long>(digits.size()) || digits[t].is_zero())
            R.c.push_back(fq_zero(*E.ext));
        else
            R.c.push_back(cred(p, levels, nprefix - 1, digits[t], target, E));
    }
    ffp_trim(R);
    return R;
}

// Inverse of cred: a polynomial b with value beta and cred(b) == d.
inline Poly lift_coeff(const PBase& p, const std::vector<Level>& levels, int tl,
                       const FqElem& d, const Rat& beta, const FqExt& E) {
    if (fq_is_zero(d)) return Poly();
    if (tl < 0) {
        // constant: canonical lift times p^beta
        std::vector<FqElem> parts = fq_decompose(E, d);
        // d lies in the prime field here
        for (std::size_t t = 1; t < parts.size(); ++t)
            if (!fq_is_zero(parts[t])) throw std::logic_error("lift_coeff: constant not in F_p");
        std::uint64_t c = parts[0][0];
        if (beta.get_den() != 1) throw std::logic_error("lift_coeff: non-integral target");
        long b = beta.get_num().get_si();
        Int pw;
        mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(p.p()),
                      static_cast<unsigned long>(b >= 0 ? b : -b));
        Rat val = Rat(static_cast<unsigned long>(c));
        val = b >= 0 ? Rat(val * Rat(pw)) : Rat(val / Rat(pw));
        return Poly::constant(val);
    }
    const Level& L = levels[tl];
    std::vector<FqElem> parts = fq_decompose(E, d);
    Int D = group_den(levels, tl);
    long e = lattice_den(L.gamma, D);
    long ds = dstar(levels, tl, beta);
    Poly b;
    Poly phipow = pow(L.phi, static_cast<unsigned>(ds));
    Poly phie = pow(L.phi, static_cast<unsigned>(e));
    for (std::size_t t = 0; t < parts.size(); ++t) {
        if (!fq_is_zero(parts[t])) {
            Rat target = beta - Rat(ds + static_cast<long>(t) * e) * L.gamma;
            Poly piece = lift_coeff(p, levels, tl - 1, parts[t], target, *L.ext);
            b = b + piece * phipow;
        }
        phipow = phipow * phie;
    }
    return b;
}

// Lift a monic irreducible residual factor psi on a side of the carrier
// polygon to a monic polynomial of degree deg(carrier)*e*deg(psi): the key
// polynomial of the augmented valuation in the psi-direction.
inline Poly key_lift(const PBase& p, const std::vector<Level>& levels, int nprefix,
                     const Poly& carrier, const SideData& sd, const FqPoly& psi,
                     const FqExt& E) {
    const long e = sd.e;
    const long f = psi.degree();
    Poly out = pow(carrier, static_cast<unsigned>(e * f));
    Poly phie = pow(carrier, static_cast<unsigned>(e));
    Poly phipow = Poly::constant(Rat(1));
    for (long k = 0; k < f; ++k) {
        const FqElem& dk = psi.c[k];
        if (!fq_is_zero(dk)) {
            Rat beta = Rat(f - k) * Rat(e) * sd.lambda;
            Poly piece = lift_coeff(p, levels, nprefix - 1, dk, beta, E);
            out = out + piece * phipow;
        }
        phipow = phipow * phie;
    }
    return out;
}

// Support side of f with respect to the carrier at slope lambda: the segment
// of the min in the expansion values.  Returns nullopt when f == 0.
inline std::optional<SideData> support_side(const PBase& p, const std::vector<Level>& levels,
                                            int nprefix, const Poly& f, const Poly& carrier,
                                            const Rat& lambda) {
    if (f.is_zero()) return std::nullopt;
    auto digits = phi_expansion(f, carrier);
    Val best = Val::plus_inf();
    long smin = -1, smax = -1;
    for (std::size_t t = 0; t < digits.size(); ++t) {
        if (digits[t].is_zero()) continue;
        Val vt = eval_value(p, levels, nprefix, digits[t]) + Val(Rat(t) * lambda);
        if (vt < best) {
            best = vt;
            smin = smax = static_cast<long>(t);
        } else if (vt == best) {
            smax = static_cast<long>(t);
        }
    }
    SideData sd;
    sd.lambda = lambda;
    sd.s0 = smin;
    sd.w0 = best.rat() - Rat(smin) * lambda;
    sd.e = lattice_den(lambda, group_den(levels, nprefix));
    if ((smax - smin) % sd.e != 0)
        throw std::logic_error("support_side: endpoints off the lattice");
    sd.len = (smax - smin) / sd.e;
    return sd;
}

inline SideData side_from_polygon(const std::vector<Level>& levels, int nprefix,
                                  const NewtonPolygon::Side& s) {
    SideData sd;
    sd.lambda = -s.slope;
    sd.s0 = s.s0;
    sd.w0 = s.v0;
    sd.e = lattice_den(sd.lambda, group_den(levels, nprefix));
    if ((s.s1 - s.s0) % sd.e != 0)
        throw std::logic_error("side_from_polygon: endpoints off the lattice");
    sd.len = (s.s1 - s.s0) / sd.e;
    return sd;
}

// Polygon of f with respect to a carrier whose coefficients are valued at
// levels[0..nprefix).
inline NewtonPolygon polygon(const PBase& p, const std::vector<Level>& levels, int nprefix,
                             const Poly& f, const Poly& carrier) {
    auto digits = phi_expansion(f, carrier);
    std::vector<std::pair<long, Val>> pts;
    pts.reserve(digits.size());
    for (std::size_t t = 0; t < digits.size(); ++t)
        pts.emplace_back(static_cast<long>(t),
                         digits[t].is_zero() ? Val::plus_inf()
                                             : eval_value(p, levels, nprefix, digits[t]));
    return newton_polygon_from_points(std::move(pts));
}

}  // namespace engine

// An inductive valuation: a depth-zero valuation plus ordinary augmentation
// steps with strictly increasing key degrees.  A node with a final step of
// value +inf is a finite leaf; the leaf key generates its support.
class InductiveVal {
   public:
    InductiveVal(PBase p, std::vector<Level> levels, std::optional<Poly> leaf_key = {})
        : p_(p), levels_(std::move(levels)), leaf_key_(std::move(leaf_key)) {
        if (levels_.empty() && !leaf_key_)
            throw std::invalid_argument("InductiveVal: empty node");
    }

    const PBase& prime() const { return p_; }
    const std::vector<Level>& levels() const { return levels_; }
    bool is_leaf() const { return leaf_key_.has_value(); }
    const Poly& leaf_key() const {
        if (!leaf_key_) throw std::domain_error("leaf_key on inner node");
        return *leaf_key_;
    }
    const Level& top() const {
        if (levels_.empty()) throw std::domain_error("top of depth-zero leaf");
        return levels_.back();
    }
    int nlevels() const { return static_cast<int>(levels_.size()); }

    // residue field kappa(mu) (for a leaf, of the last inner node)
    FqCtxPtr residue_field() const {
        if (levels_.empty()) return fq_prime_field(p_.p());
        return levels_.back().ext->ext;
    }

    Val value(const Poly& f) const {
        if (f.is_zero()) return Val::plus_inf();
        if (!leaf_key_) return engine::eval_value(p_, levels_, nlevels(), f);
        Poly r = div_rem(f, *leaf_key_).second;
        if (r.is_zero()) return Val::plus_inf();
        if (levels_.empty()) {
            // omega_{a, inf}: value of f is vp(f(a))
            Rat a = -(*leaf_key_)[0];
            return p_.vp(f.eval(a));
        }
        return engine::eval_value(p_, levels_, nlevels(), r);
    }

    friend bool operator==(const InductiveVal& a, const InductiveVal& b) {
        if (a.p_.p() != b.p_.p() || a.levels_.size() != b.levels_.size()) return false;
        if (a.leaf_key_.has_value() != b.leaf_key_.has_value()) return false;
        if (a.leaf_key_ && !(*a.leaf_key_ == *b.leaf_key_)) return false;
        for (std::size_t i = 0; i < a.levels_.size(); ++i)
            if (!(a.levels_[i].phi == b.levels_[i].phi) ||
                a.levels_[i].gamma != b.levels_[i].gamma)
                return false;
        return true;
    }

   private:
    PBase p_;
    std::vector<Level> levels_;
    std::optional<Poly> leaf_key_;
};

// omega_{a, delta}; delta == +inf gives the finite leaf with support (x-a).
inline InductiveVal depth_zero(const Rat& a, const Val& delta, const PBase& p) {
    if (delta.is_minus_inf()) throw std::invalid_argument("depth_zero: -inf weight is a sentinel");
    if (delta.is_plus_inf()) return InductiveVal(p, {}, Poly::linear_root(a));
    Level l0{Poly::linear_root(a), delta.rat(), engine::trivial_ext(p.p())};
    return InductiveVal(p, {std::move(l0)});
}

inline Val value(const InductiveVal& mu, const Poly& f) { return mu.value(f); }

struct NodeInvariants {
    int deg;
    Val sv;
    Val wt;
};

inline NodeInvariants node_invariants(const InductiveVal& mu) {
    if (mu.is_leaf()) throw std::domain_error("node_invariants: leaf node");
    const Level& t = mu.top();
    return {t.m(), Val(t.gamma), Val(t.gamma / Rat(t.m()))};
}

inline Val weight(const InductiveVal& mu) {
    if (mu.is_leaf()) return Val::plus_inf();
    return node_invariants(mu).wt;
}

// value(mu, g) / deg(g) == wt(mu)
inline bool is_minimal(const InductiveVal& mu, const Poly& g) {
    if (mu.is_leaf()) throw std::domain_error("is_minimal: leaf node");
    if (g.is_zero() || g.degree() < 1 || !g.is_monic())
        throw std::invalid_argument("is_minimal: need monic nonconstant g");
    Val v = mu.value(g);
    if (!v.is_finite()) return false;
    return v.rat() / Rat(g.degree()) == node_invariants(mu).wt.rat();
}

inline bool in_equiv(const InductiveVal& mu, const Poly& f, const Poly& g) {
    if (f.is_zero() || g.is_zero()) throw std::invalid_argument("in_equiv: zero input");
    if (f == g) return true;
    Val vf = mu.value(f), vg = mu.value(g);
    if (vf != vg) return false;
    if (vf.is_plus_inf()) return true;
    return mu.value(f - g) > vf;
}

inline NewtonPolygon newton_polygon(const InductiveVal& mu, const Poly& phi, const Poly& f) {
    if (phi.is_zero() || !phi.is_monic() || phi.degree() < 1)
        throw std::invalid_argument("newton_polygon: carrier must be monic nonconstant");
    int nprefix = mu.nlevels();
    if (!mu.levels().empty() && phi == mu.top().phi) nprefix -= 1;
    return engine::polygon(mu.prime(), mu.levels(), nprefix, f, phi);
}

// Support residual of a candidate key phi at mu's own slope; the factor that
// phi lifts.  Internal helper for is_key / augment / residual_polynomial.
namespace engine {

struct SupportResidual {
    long s_min;        // left end of the support (ord of the top key direction)
    FqPoly residual;   // over the residue field of mu
    SideData sd;
};

inline SupportResidual support_residual(const InductiveVal& mu, const Poly& g) {
    if (mu.is_leaf()) throw std::domain_error("support_residual: leaf node");
    const auto& levels = mu.levels();
    const Level& L = levels.back();
    int nprefix = mu.nlevels() - 1;
    auto sd = support_side(mu.prime(), levels, nprefix, g, L.phi, L.gamma);
    if (!sd) throw std::invalid_argument("support_residual: zero input");
    FqPoly R = side_residual(mu.prime(), levels, nprefix, g, L.phi, *sd, *L.ext);
    return {sd->s0, std::move(R), *sd};
}

}  // namespace engine

inline bool is_key(const InductiveVal& mu, const Poly& phi) {
    if (mu.is_leaf()) throw std::domain_error("is_key: leaf node");
    if (phi.is_zero() || !phi.is_monic() || phi.degree() < 1) return false;
    if (!is_minimal(mu, phi)) return false;
    auto sr = engine::support_residual(mu, phi);
    if (sr.s_min == 0) {
        if (sr.residual.is_zero() || sr.residual.degree() < 1) return false;
        return ff_is_irreducible(sr.residual);
    }
    // associate of the distinguished key: unit * phi_top
    return sr.s_min == 1 && sr.residual.degree() == 0 && phi.degree() == mu.top().m();
}

// Residual polynomial of f on a polygon side, over kappa(mu) when phi is
// mu's own key, or over the extension by phi's residual factor when phi is a
// strictly larger key of mu.
inline FqPoly residual_polynomial(const InductiveVal& mu, const Poly& phi,
                                  const NewtonPolygon::Side& side, const Poly& f) {
    if (mu.is_leaf()) throw std::domain_error("residual_polynomial: leaf node");
    const auto& levels = mu.levels();
    const PBase& p = mu.prime();
    if (phi == mu.top().phi) {
        int nprefix = mu.nlevels() - 1;
        auto sd = engine::side_from_polygon(levels, nprefix, side);
        return engine::side_residual(p, levels, nprefix, f, phi, sd, *mu.top().ext);
    }
    if (!is_key(mu, phi))
        throw std::invalid_argument("residual_polynomial: phi is not a key of mu");
    auto sr = engine::support_residual(mu, phi);
    FqExtPtr E = ff_extend(mu.residue_field(), sr.residual);
    int nprefix = mu.nlevels();
    auto sd = engine::side_from_polygon(levels, nprefix, side);
    return engine::side_residual(p, levels, nprefix, f, phi, sd, *E);
}

// Lift an irreducible residual factor on a side of the phi-polygon to a key
// polynomial of the augmented node.
inline Poly key_lifts(const InductiveVal& mu, const Poly& phi, const NewtonPolygon::Side& side,
                      const FqPoly& residual_factor) {
    if (mu.is_leaf()) throw std::domain_error("key_lifts: leaf node");
    const auto& levels = mu.levels();
    const PBase& p = mu.prime();
    if (residual_factor.is_zero() || !ff_is_irreducible(residual_factor))
        throw std::invalid_argument("key_lifts: factor must be irreducible");
    if (phi == mu.top().phi) {
        int nprefix = mu.nlevels() - 1;
        auto sd = engine::side_from_polygon(levels, nprefix, side);
        return engine::key_lift(p, levels, nprefix, phi, sd, residual_factor, *mu.top().ext);
    }
    if (!is_key(mu, phi)) throw std::invalid_argument("key_lifts: phi is not a key of mu");
    auto sr = engine::support_residual(mu, phi);
    FqExtPtr E = ff_extend(mu.residue_field(), sr.residual);
    int nprefix = mu.nlevels();
    auto sd = engine::side_from_polygon(levels, nprefix, side);
    return engine::key_lift(p, levels, nprefix, phi, sd, residual_factor, *E);
}

// [mu; phi, gamma].  Appends a step for deg(phi) > deg(mu); replaces the top
// step for deg(phi) == deg(mu) (same-degree refinement).  gamma == +inf
// produces the finite leaf with support phi.
inline InductiveVal augment(const InductiveVal& mu, const Poly& phi, const Val& gamma) {
    if (mu.is_leaf()) throw std::domain_error("augment: leaf node");
    if (!is_key(mu, phi)) throw std::invalid_argument("augment: phi is not a key polynomial");
    Val cur = mu.value(phi);
    if (!(gamma > cur)) throw std::invalid_argument("augment: gamma must exceed mu(phi)");
    if (gamma.is_plus_inf()) return InductiveVal(mu.prime(), mu.levels(), phi);

    std::vector<Level> levels = mu.levels();
    if (phi.degree() == mu.top().m()) {
        // refinement: same residual structure, new key and value
        Level repl{phi, gamma.rat(), levels.back().ext};
        levels.back() = std::move(repl);
        return InductiveVal(mu.prime(), std::move(levels));
    }
    auto sr = engine::support_residual(mu, phi);
    FqExtPtr E = ff_extend(mu.residue_field(), sr.residual);
    levels.push_back(Level{phi, gamma.rat(), std::move(E)});
    return InductiveVal(mu.prime(), std::move(levels));
}

// min over the g-expansion of value(mu, a_s g^s); equals value(mu, .) exactly
// when g is mu-minimal.
inline Val truncation_value(const InductiveVal& mu, const Poly& g, const Poly& f) {
    if (g.is_zero() || g.degree() < 1 || !g.is_monic())
        throw std::invalid_argument("truncation_value: need monic nonconstant g");
    if (f.is_zero()) return Val::plus_inf();
    auto digits = phi_expansion(f, g);
    Val vg = mu.value(g);
    Val best = Val::plus_inf();
    for (std::size_t s = 0; s < digits.size(); ++s) {
        if (digits[s].is_zero()) continue;
        Val term = mu.value(digits[s]);
        if (vg.is_plus_inf()) {
            if (s > 0) continue;  // a_s g^s has value +inf for s >= 1
        } else {
            term = term + Val(Rat(s) * vg.rat());
        }
        if (term < best) best = term;
    }
    return best;
}

}  // namespace valfram
