#pragma once

#include "symdyn/rational.hpp"

#include <utility>
#include <vector>

namespace symdyn {

// Exact element (a + b*sqrt(D)) / q of a real quadratic field.  D is carried
// per value and normalized so that a perfect-square D folds into the rational
// part; after normalization b != 0 implies the value is irrational, which
// makes floor() terminate.
class QuadReal {
  public:
    QuadReal() : a_(0), b_(0), q_(1), d_(0) {}
    QuadReal(Int a, Int b, Int q, Int D) : a_(std::move(a)), b_(std::move(b)), q_(std::move(q)), d_(std::move(D)) {
        if (q_ == 0) throw DomainError("QuadReal: zero denominator");
        if (d_ < 0) throw DomainError("QuadReal: negative radicand");
        normalize();
    }
    static QuadReal rational(const Rat& r) {
        return QuadReal(rat_num(r), 0, rat_den(r), 0);
    }
    static QuadReal golden_ratio() { return QuadReal(1, 1, 2, 5); }

    const Int& radicand() const { return d_; }
    bool is_rational() const { return b_ == 0; }
    Rat as_rational() const {
        if (!is_rational()) throw DomainError("QuadReal: irrational value");
        return Rat(a_, q_);
    }

    QuadReal operator+(const QuadReal& o) const {
        auto [x, y] = aligned(o);
        return QuadReal(x.a_ * y.q_ + y.a_ * x.q_, x.b_ * y.q_ + y.b_ * x.q_,
                        x.q_ * y.q_, x.d_);
    }
    QuadReal operator-(const QuadReal& o) const {
        auto [x, y] = aligned(o);
        return QuadReal(x.a_ * y.q_ - y.a_ * x.q_, x.b_ * y.q_ - y.b_ * x.q_,
                        x.q_ * y.q_, x.d_);
    }
    QuadReal operator*(const QuadReal& o) const {
        auto [x, y] = aligned(o);
        return QuadReal(x.a_ * y.a_ + x.b_ * y.b_ * x.d_, x.a_ * y.b_ + x.b_ * y.a_,
                        x.q_ * y.q_, x.d_);
    }
    QuadReal operator-() const { return QuadReal(-a_, -b_, q_, d_); }

    int sign() const {
        if (b_ == 0) return a_ == 0 ? 0 : (a_ > 0 ? 1 : -1);
        if (a_ == 0) return b_ > 0 ? 1 : -1;
        if (a_ > 0 && b_ > 0) return 1;
        if (a_ < 0 && b_ < 0) return -1;
        // mixed signs: compare a^2 with b^2 D
        Int lhs = a_ * a_, rhs = b_ * b_ * d_;
        if (a_ > 0) return lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
        return lhs < rhs ? 1 : (lhs > rhs ? -1 : 0);
    }
    bool operator<(const QuadReal& o) const { return (*this - o).sign() < 0; }
    bool operator==(const QuadReal& o) const { return (*this - o).sign() == 0; }
    bool operator<=(const QuadReal& o) const { return (*this - o).sign() <= 0; }

    int compare(const Rat& r) const { return (*this - rational(r)).sign(); }

    Int floor() const {
        if (b_ == 0) return floor_div(a_, q_);
        // bracket via integer sqrt bounds, then verify exactly
        Int s = isqrt_floor(d_);
        // sqrt(D) in [s, s+1); refine with scaled sqrt for a close guess
        const unsigned bits = 64;
        Int scaled = isqrt_floor(d_ << (2 * bits));  // floor(sqrt(D)*2^bits)
        Rat lo(a_ * (Int(1) << bits) + b_ * (b_ > 0 ? scaled : scaled + 1),
               q_ * (Int(1) << bits));
        Int cand = floor_rat(lo);
        for (Int n = cand - 1; n <= cand + 1; ++n) {
            // n <= x < n+1 ?
            if (compare(Rat(n)) >= 0 && compare(Rat(n + 1)) < 0) return n;
        }
        throw InvariantError("QuadReal::floor: bracketing failed");
        (void)s;
    }

    RatIv approx(unsigned bits) const {
        if (b_ == 0) return RatIv(Rat(a_, q_));
        Int scaled = isqrt_floor(d_ << (2 * bits));
        Rat s_lo(scaled, Int(1) << bits), s_hi(scaled + 1, Int(1) << bits);
        Rat v1 = (Rat(a_) + Rat(b_) * s_lo) / Rat(q_);
        Rat v2 = (Rat(a_) + Rat(b_) * s_hi) / Rat(q_);
        return v1 <= v2 ? RatIv(v1, v2) : RatIv(v2, v1);
    }

  private:
    Int a_, b_, q_, d_;

    void normalize() {
        if (d_ != 0) {
            Int s = isqrt_floor(d_);
            if (s * s == d_) {  // fold perfect square
                a_ += b_ * s;
                b_ = 0;
                d_ = 0;
            }
        }
        if (b_ == 0) d_ = 0;
        if (q_ < 0) {
            q_ = -q_;
            a_ = -a_;
            b_ = -b_;
        }
        Int g = boost::multiprecision::gcd(boost::multiprecision::gcd(a_ < 0 ? -a_ : a_, b_ < 0 ? -b_ : b_), q_);
        if (g > 1) {
            a_ /= g;
            b_ /= g;
            q_ /= g;
        }
    }

    std::pair<QuadReal, QuadReal> aligned(const QuadReal& o) const {
        if (d_ == o.d_ || b_ == 0 || o.b_ == 0) {
            QuadReal x = *this, y = o;
            Int d = d_ != 0 ? d_ : o.d_;
            x.d_ = y.d_ = d;
            return {x, y};
        }
        throw DomainError("QuadReal: mixed radicands");
    }
};

// Real algebraic number given by an integer polynomial and a certified
// isolating bracket (lo, hi] with a sign change.  Used for beta parameters
// reconstructed from periodic expansions of 1.
class PolyRoot {
  public:
    PolyRoot(std::vector<Int> coeffs, Rat lo, Rat hi)
        : c_(std::move(coeffs)), lo_(std::move(lo)), hi_(std::move(hi)) {
        if (eval(lo_) >= 0 || eval(hi_) <= 0)
            throw DomainError("PolyRoot: bracket does not isolate an increasing crossing");
    }

    // coefficients c[0] + c[1] x + ... + c[k] x^k
    Rat eval(const Rat& x) const {
        Rat v = 0;
        for (std::size_t i = c_.size(); i-- > 0;) v = v * x + Rat(c_[i]);
        return v;
    }

    RatIv approx(unsigned bits) const {
        Rat lo = lo_, hi = hi_;
        Rat target = pow_rat(Rat(1, 2), static_cast<long>(bits));
        while (hi - lo > target) {
            Rat mid = (lo + hi) / 2;
            if (eval(mid) > 0)
                hi = mid;
            else
                lo = mid;
        }
        return RatIv(lo, hi);
    }

  private:
    std::vector<Int> c_;
    Rat lo_, hi_;
};

}  // namespace symdyn
