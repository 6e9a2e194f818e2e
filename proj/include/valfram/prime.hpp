// Base prime and the p-adic valuation on Q.
#pragma once

#include "valfram/rational.hpp"
#include "valfram/value.hpp"

#include <cstdint>
#include <stdexcept>

namespace valfram {

inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

class PBase {
   public:
    explicit PBase(std::uint64_t p) : p_(p) {
        if (!is_prime_u64(p)) throw std::invalid_argument("PBase: not a prime");
    }

    std::uint64_t p() const { return p_; }
    Int pz() const { return Int(static_cast<unsigned long>(p_)); }

    // vp of a nonzero integer.
    long vp_int(const Int& n) const {
        if (n == 0) throw std::domain_error("vp_int: zero");
        Int q;
        return static_cast<long>(
            mpz_remove(q.get_mpz_t(), n.get_mpz_t(), pz().get_mpz_t()));
    }

    // p-adic valuation on Q; vp(0) = +inf.
    Val vp(const Rat& q) const {
        if (q == 0) return Val::plus_inf();
        long v = vp_int(q.get_num()) - vp_int(q.get_den());
        return Val(Rat(v));
    }

    friend bool operator==(const PBase& a, const PBase& b) { return a.p_ == b.p_; }

   private:
    std::uint64_t p_;
};

}  // namespace valfram
