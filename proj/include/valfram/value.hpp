// The extended value group: rationals together with +inf and a -inf sentinel.
//
// -inf exists only as the reported weight of the root node for degree-1
// inputs.  It takes part in comparisons; arithmetic on it is an error.
#pragma once

#include "valfram/rational.hpp"

#include <compare>
#include <stdexcept>
#include <string>

namespace valfram {

class Val {
   public:
    enum class Kind { MinusInf, Finite, PlusInf };

    Val() : kind_(Kind::Finite), q_(0) {}
    Val(const Rat& q) : kind_(Kind::Finite), q_(q) {}
    Val(long n) : kind_(Kind::Finite), q_(n) {}

    static Val plus_inf() { return Val(Kind::PlusInf); }
    static Val minus_inf() { return Val(Kind::MinusInf); }

    bool is_finite() const { return kind_ == Kind::Finite; }
    bool is_plus_inf() const { return kind_ == Kind::PlusInf; }
    bool is_minus_inf() const { return kind_ == Kind::MinusInf; }

    // Finite payload; throws on infinities.
    const Rat& rat() const {
        if (!is_finite()) throw std::domain_error("Val: infinite value has no rational part");
        return q_;
    }

    friend bool operator==(const Val& a, const Val& b) {
        if (a.kind_ != b.kind_) return false;
        return a.kind_ != Kind::Finite || a.q_ == b.q_;
    }
    friend bool operator!=(const Val& a, const Val& b) { return !(a == b); }
    friend bool operator<(const Val& a, const Val& b) {
        if (a.kind_ == b.kind_) return a.kind_ == Kind::Finite && a.q_ < b.q_;
        if (a.kind_ == Kind::MinusInf) return true;
        if (b.kind_ == Kind::MinusInf) return false;
        return b.kind_ == Kind::PlusInf;
    }
    friend bool operator<=(const Val& a, const Val& b) { return a < b || a == b; }
    friend bool operator>(const Val& a, const Val& b) { return b < a; }
    friend bool operator>=(const Val& a, const Val& b) { return b <= a; }

    // Plus-infinity absorbs; minus-infinity never enters arithmetic.
    friend Val operator+(const Val& a, const Val& b) {
        a.require_arith();
        b.require_arith();
        if (a.is_plus_inf() || b.is_plus_inf()) return plus_inf();
        return Val(a.q_ + b.q_);
    }
    friend Val operator-(const Val& a, const Val& b) {
        a.require_arith();
        b.require_arith();
        if (b.is_plus_inf()) throw std::domain_error("Val: cannot subtract +inf");
        if (a.is_plus_inf()) return plus_inf();
        return Val(a.q_ - b.q_);
    }
    // Scale by a rational; c * +inf stays +inf for c > 0 and is an error otherwise.
    friend Val operator*(const Rat& c, const Val& a) {
        a.require_arith();
        if (a.is_plus_inf()) {
            if (c <= 0) throw std::domain_error("Val: nonpositive scaling of +inf");
            return plus_inf();
        }
        return Val(c * a.q_);
    }

    friend const Val& min(const Val& a, const Val& b) { return b < a ? b : a; }
    friend const Val& max(const Val& a, const Val& b) { return a < b ? b : a; }

    std::string str() const {
        switch (kind_) {
            case Kind::PlusInf: return "inf";
            case Kind::MinusInf: return "-inf";
            default: return rat_to_string(q_);
        }
    }

   private:
    explicit Val(Kind k) : kind_(k), q_(0) {}
    void require_arith() const {
        if (kind_ == Kind::MinusInf)
            throw std::domain_error("Val: arithmetic on -inf");
    }

    Kind kind_;
    Rat q_;
};

}  // namespace valfram
