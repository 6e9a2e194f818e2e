#include <catch2/catch_amalgamated.hpp>

#include "valfram/chains.hpp"
#include "valfram/resultant.hpp"

#include <random>

using namespace valfram;

namespace {
const PBase P2(2);
const PBase P3(3);
const PBase P5(5);
const Poly kQuartic = Poly::from_ints({-1, 2, 3, 2, 1});  // (x^2+x+1)^2 - 2

Poly random_poly_below(std::mt19937_64& rng, int deg_bound, long height) {
    std::uniform_int_distribution<int> dd(0, deg_bound - 1);
    std::uniform_int_distribution<long> dc(-height, height);
    int d = dd(rng);
    std::vector<Rat> c(d + 1);
    for (auto& x : c) x = Rat(dc(rng));
    if (c[d] == 0) c[d] = 1;
    return Poly(std::move(c));
}
}  // namespace

TEST_CASE("x^2 - 2 at p = 2") {
    auto rep = build_chains(Poly::from_ints({-2, 0, 1}), P2);
    REQUIRE(rep.branches.size() == 1);
    const MLVChain* c = rep.single_certified();
    REQUIRE(c != nullptr);
    CHECK(depth(*c) == 1);
    auto nodes = chain_nodes(*c);
    REQUIRE(nodes.size() == 1);
    CHECK(nodes[0].phi == Poly::x());
    CHECK(nodes[0].gamma == make_rat(1, 2));
    CHECK(nodes[0].e == 2);
    CHECK(nodes[0].f == 1);
    auto [e, f] = ramification_invariants(*c);
    CHECK(e == 2);
    CHECK(f == 1);
    CHECK(vF(*c, Poly::x()) == Val(make_rat(1, 2)));
    CHECK(vF(*c, c->F).is_plus_inf());
    CHECK(okutsu_bound(*c) == Val(Rat(1)));
    auto pp = previous_primitive(*c);
    CHECK_FALSE(pp.is_root);
    CHECK(pp.wt == Val(make_rat(1, 2)));
    CHECK(chain_invariants_ok(*c));
}

TEST_CASE("x^2 + 7 at p = 2 splits into two approximant branches") {
    auto rep = build_chains(Poly::from_ints({7, 0, 1}), P2);
    REQUIRE(rep.branches.size() == 2);
    int total = 0;
    for (const auto& b : rep.branches) {
        CHECK_FALSE(b.exact);
        CHECK(b.local_degree == 1);
        total += b.local_degree;
        REQUIRE(b.approx.has_value());
        // approximants are depth-zero nodes with sv >= the default bound
        CHECK(b.approx->nlevels() == 1);
        CHECK(b.approx->top().gamma >= Rat(20));
    }
    CHECK(total == 2);
    CHECK(rep.single_certified() == nullptr);
}

TEST_CASE("depth-2 quartic at p = 2") {
    auto rep = build_chains(kQuartic, P2);
    const MLVChain* c = rep.single_certified();
    REQUIRE(c != nullptr);
    CHECK(depth(*c) == 2);
    auto nodes = chain_nodes(*c);
    REQUIRE(nodes.size() == 2);
    CHECK(nodes[0].phi == Poly::x());
    CHECK(nodes[0].gamma == Rat(0));
    CHECK(nodes[1].phi == Poly::from_ints({1, 1, 1}));
    CHECK(nodes[1].gamma == make_rat(1, 2));
    auto [e, f] = ramification_invariants(*c);
    CHECK(e == 2);
    CHECK(f == 2);
    CHECK(vF(*c, Poly::from_ints({1, 1, 1})) == Val(make_rat(1, 2)));
    CHECK(vF(*c, Poly::x()) == Val(Rat(0)));
    CHECK(okutsu_bound(*c) == Val(Rat(1)));
    auto pp = previous_primitive(*c);
    CHECK(pp.wt == Val(make_rat(1, 4)));
    CHECK(chain_invariants_ok(*c));
}

TEST_CASE("unramified quadratic and Eisenstein cubics") {
    auto c1 = certified_chain(Poly::from_ints({1, 1, 1}), P2);
    REQUIRE(c1);
    auto ef1 = ramification_invariants(*c1);
    CHECK(ef1.first == 1);
    CHECK(ef1.second == 2);
    CHECK(depth(*c1) == 1);

    auto c2 = certified_chain(Poly::from_ints({-2, 0, 0, 1}), P2);  // x^3 - 2
    REQUIRE(c2);
    auto ef2 = ramification_invariants(*c2);
    CHECK(ef2.first == 3);
    CHECK(ef2.second == 1);
    CHECK(chain_nodes(*c2)[0].gamma == make_rat(1, 3));

    auto c3 = certified_chain(Poly::from_ints({3, 3, 0, 1}), P3);  // x^3 + 3x + 3
    REQUIRE(c3);
    auto ef3 = ramification_invariants(*c3);
    CHECK(ef3.first == 3);
    CHECK(ef3.second == 1);
}

TEST_CASE("degree-1 input") {
    auto rep = build_chains(Poly::from_ints({-1, 1}), P2);
    const MLVChain* c = rep.single_certified();
    REQUIRE(c != nullptr);
    CHECK(depth(*c) == 0);
    auto pp = previous_primitive(*c);
    CHECK(pp.is_root);
    CHECK(pp.wt.is_minus_inf());
    CHECK_THROWS(okutsu_bound(*c));
    CHECK(vF(*c, Poly::from_ints({3})) == Val(Rat(0)));
    CHECK(vF(*c, Poly::from_ints({-2, 2})).is_plus_inf());  // 2(x-1)
    CHECK(vF(*c, Poly::from_ints({1, 1})) == Val(Rat(1)));  // x+1 at x=1 -> 2
}

TEST_CASE("exact rational factors are split off") {
    // x * (x^2+x+1) over p=2
    Poly F = Poly::x() * Poly::from_ints({1, 1, 1});
    auto rep = build_chains(F, P2);
    REQUIRE(rep.branches.size() == 2);
    int exact_count = 0, total = 0;
    for (const auto& b : rep.branches) {
        total += b.local_degree;
        if (b.exact) ++exact_count;
    }
    CHECK(total == 3);
    CHECK(exact_count == 2);
}

TEST_CASE("repeated factors carry multiplicity") {
    Poly F = Poly::from_ints({1, 1, 1});
    auto rep = build_chains(F * F, P2);
    REQUIRE(rep.branches.size() == 1);
    CHECK(rep.branches[0].local_degree == 4);
}

TEST_CASE("resultant oracle on certified chains") {
    std::mt19937_64 rng(31337);
    std::vector<std::pair<const PBase*, Poly>> fixtures = {
        {&P2, Poly::from_ints({-2, 0, 1})},
        {&P2, Poly::from_ints({-6, 0, 1})},
        {&P2, Poly::from_ints({1, 1, 1})},
        {&P2, kQuartic},
        {&P2, Poly::from_ints({3, 2, 3, 2, 1})},  // (x^2+x+1)^2 + 2
        {&P2, Poly::from_ints({-2, 0, 0, 1})},
        {&P3, Poly::from_ints({-3, 0, 1})},
        {&P3, Poly::from_ints({1, 0, 1})},
        {&P5, Poly::from_ints({-5, 0, 0, 0, 1})},
        {&P5, Poly::from_ints({2, 0, 1})},
    };
    for (const auto& [p, F] : fixtures) {
        auto c = certified_chain(F, *p);
        REQUIRE(c);
        CHECK(chain_invariants_ok(*c));
        for (int it = 0; it < 400; ++it) {
            Poly g = random_poly_below(rng, F.degree(), 100);
            if (g.is_zero()) continue;
            Val lhs = Rat(F.degree()) * vF(*c, g);
            Val rhs = p->vp(resultant(F, g));
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("multi-branch oracle") {
    std::mt19937_64 rng(999);
    std::vector<std::pair<const PBase*, Poly>> fixtures = {
        {&P2, Poly::from_ints({7, 0, 1})},
        {&P2, Poly::from_ints({-2, 0, 1}) * Poly::from_ints({-6, 0, 1})},
        {&P3, Poly::from_ints({-1, 0, 1})},
        {&P5, Poly::from_ints({-6, 0, 1})},
    };
    for (const auto& [p, F] : fixtures) {
        auto rep = build_chains(F, *p, Rat(40));
        int total = 0;
        for (const auto& b : rep.branches) total += b.local_degree;
        REQUIRE(total == F.degree());
        for (int it = 0; it < 120; ++it) {
            Poly g = random_poly_below(rng, F.degree(), 50);
            if (g.is_zero()) continue;
            Rat res = resultant(F, g);
            if (res == 0) continue;
            Val sum(Rat(0));
            bool usable = true;
            for (const auto& b : rep.branches) {
                const InductiveVal* node = b.exact ? &b.chain->leaf : &*b.approx;
                Val v = node->value(g);
                if (v.is_plus_inf()) {
                    usable = false;
                    break;
                }
                sum = sum + Rat(b.local_degree) * v;
            }
            if (!usable) continue;
            CHECK(sum == p->vp(res));
        }
    }
}

TEST_CASE("fundamental shape along certified chains") {
    std::vector<std::pair<const PBase*, Poly>> fixtures = {
        {&P2, kQuartic},
        {&P2, Poly::from_ints({-2, 0, 1})},
        {&P2, Poly::from_ints({1, 1, 1})},
        {&P3, Poly::from_ints({3, 3, 0, 1})},
    };
    for (const auto& [p, F] : fixtures) {
        auto c = certified_chain(F, *p);
        REQUIRE(c);
        const auto& levels = c->leaf.levels();
        for (std::size_t i = 0; i < levels.size(); ++i) {
            std::vector<Level> pre(levels.begin(), levels.begin() + i + 1);
            InductiveVal node(*p, pre);
            Poly next = i + 1 < levels.size() ? levels[i + 1].phi : c->F;
            CHECK(node.value(next) < vF(*c, next));
            auto np = newton_polygon(node, levels[i].phi, F);
            CHECK(one_sided(np, levels[i].gamma));
            unsigned ell = static_cast<unsigned>(F.degree() / next.degree());
            CHECK(in_equiv(node, F, pow(next, ell)));
            CHECK(is_minimal(node, F));
        }
    }
}

TEST_CASE("value of chain nodes bounded by vF on samples") {
    std::mt19937_64 rng(2718);
    auto c = certified_chain(kQuartic, P2);
    REQUIRE(c);
    const auto& levels = c->leaf.levels();
    for (std::size_t i = 0; i < levels.size(); ++i) {
        std::vector<Level> pre(levels.begin(), levels.begin() + i + 1);
        InductiveVal node(P2, pre);
        for (int it = 0; it < 300; ++it) {
            Poly g = random_poly_below(rng, 6, 60);
            if (g.is_zero()) continue;
            CHECK(node.value(g) <= vF(*c, g));
        }
    }
}

TEST_CASE("chains of the keys evaluate like the full chain below their degree") {
    std::mt19937_64 rng(1618);
    auto c = certified_chain(kQuartic, P2);
    REQUIRE(c);
    for (const auto& nd : chain_nodes(*c)) {
        if (nd.m < 2) continue;
        auto ck = certified_chain(nd.phi, P2);
        REQUIRE(ck);
        for (int it = 0; it < 300; ++it) {
            Poly g = random_poly_below(rng, nd.m, 60);
            if (g.is_zero()) continue;
            CHECK(vF(*ck, g) == vF(*c, g));
        }
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS(build_chains(Poly(), P2));
    CHECK_THROWS(build_chains(Poly::from_ints({1, 2}), P2));  // non-monic
    CHECK_THROWS(build_chains(Poly::from_ints({5}), P2));     // constant
}
