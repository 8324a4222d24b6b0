#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace symdyn {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Error taxonomy shared across the library.  The CLI maps these to exit codes.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PrecisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline Int pow_int(Int base, unsigned long e) {
    Int r = 1;
    while (e) {
        if (e & 1) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

inline Rat pow_rat(const Rat& b, long e) {
    if (e >= 0) return Rat(pow_int(rat_num(b), static_cast<unsigned long>(e)),
                           pow_int(rat_den(b), static_cast<unsigned long>(e)));
    if (b == 0) throw DomainError("pow_rat: zero base with negative exponent");
    return Rat(pow_int(rat_den(b), static_cast<unsigned long>(-e)),
               pow_int(rat_num(b), static_cast<unsigned long>(-e)));
}

// Floor/ceil division valid for any sign of a, b > 0.
inline Int floor_div(const Int& a, const Int& b) {
    Int q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}
inline Int ceil_div(const Int& a, const Int& b) { return -floor_div(-a, b); }

inline Int floor_rat(const Rat& r) { return floor_div(rat_num(r), rat_den(r)); }
inline Int ceil_rat(const Rat& r) { return ceil_div(rat_num(r), rat_den(r)); }

inline Int isqrt_floor(const Int& n) {
    if (n < 0) throw DomainError("isqrt of negative");
    return boost::multiprecision::sqrt(n);
}
inline Int isqrt_ceil(const Int& n) {
    Int f = isqrt_floor(n);
    return f * f == n ? f : f + 1;
}

// Parses "p/q", plain integers and decimal literals ("0.25", "-3.5e2" is not
// supported; exponents never appear in our configs).
inline Rat parse_rat(const std::string& s) {
    if (s.empty()) throw DomainError("parse_rat: empty string");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Int num(s.substr(0, slash));
        Int den(s.substr(slash + 1));
        if (den == 0) throw DomainError("parse_rat: zero denominator");
        return Rat(num, den);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rat(Int(s));
    std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
    bool neg = !ip.empty() && ip[0] == '-';
    if (ip == "-" || ip.empty()) ip = neg ? "-0" : "0";
    for (char c : fp)
        if (c < '0' || c > '9') throw DomainError("parse_rat: bad fraction digits");
    Int scale = pow_int(10, static_cast<unsigned long>(fp.size()));
    Int whole(ip);
    Int frac = fp.empty() ? Int(0) : Int(fp);
    Int num = whole * scale + (neg ? -frac : frac);
    return Rat(num, scale);
}

inline std::string rat_str(const Rat& r) {
    std::string s = rat_num(r).str();
    if (rat_den(r) != 1) s += "/" + rat_den(r).str();
    return s;
}

inline double rat_double(const Rat& r) { return static_cast<double>(r); }

enum class Cert { True, False, Unknown };

// Closed rational interval; the basic carrier for certified numerics.
struct RatIv {
    Rat lo, hi;
    RatIv() : lo(0), hi(0) {}
    RatIv(Rat v) : lo(v), hi(std::move(v)) {}
    RatIv(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo > hi) throw DomainError("RatIv: inverted interval");
    }
    RatIv& operator+=(const RatIv& o) {
        lo += o.lo;
        hi += o.hi;
        return *this;
    }
    friend RatIv operator+(RatIv a, const RatIv& b) { return a += b; }
    RatIv scaled(const Rat& c) const {
        return c >= 0 ? RatIv(lo * c, hi * c) : RatIv(hi * c, lo * c);
    }
    Rat width() const { return hi - lo; }
    Cert less_than(const Rat& t) const {
        if (hi < t) return Cert::True;
        if (lo >= t) return Cert::False;
        return Cert::Unknown;
    }
    Cert at_least(const Rat& t) const {
        switch (less_than(t)) {
            case Cert::True: return Cert::False;
            case Cert::False: return Cert::True;
            default: return Cert::Unknown;
        }
    }
};

// ln 2 to 18 decimal digits, outward-rounded.
inline const RatIv& ln2_iv() {
    static const RatIv iv{Rat(Int("693147180559945309"), pow_int(10, 18)),
                          Rat(Int("693147180559945310"), pow_int(10, 18))};
    return iv;
}

namespace detail {
// ln m for m in [1,2) via artanh series with explicit remainder.
inline RatIv ln_reduced(const Rat& m, int terms) {
    Rat y = (m - 1) / (m + 1);  // in [0, 1/3]
    Rat y2 = y * y, p = y, s = 0;
    for (int j = 0; j < terms; ++j) {
        s += p / (2 * j + 1);
        p *= y2;
    }
    // remainder of 2*sum_{j>=terms} y^{2j+1}/(2j+1) <= 2*p*y/( (2t+1)(1-y^2) )
    Rat rem = y == 0 ? Rat(0) : 2 * p * y / ((2 * terms + 1) * (1 - y2));
    // p currently equals y^{2*terms+1}/y * y^... : p = y^{2*terms+1}? After the
    // loop p = y^(2*terms+1). The first dropped term is p/(2*terms+1).
    rem = p / (2 * terms + 1) / (1 - y2) * 2;
    return RatIv(2 * s, 2 * s + rem);
}
}  // namespace detail

// Certified bounds on ln(x), x > 0 rational.
inline RatIv ln_iv(const Rat& x, int terms = 20) {
    if (x <= 0) throw DomainError("ln_iv: nonpositive argument");
    // Normalize x = m * 2^k with m in [1,2).
    long k = 0;
    Rat m = x;
    long bn = static_cast<long>(boost::multiprecision::msb(rat_num(m) < 0 ? -rat_num(m) : rat_num(m)));
    long bd = static_cast<long>(boost::multiprecision::msb(rat_den(m)));
    k = bn - bd;
    if (k > 0)
        m = x / Rat(pow_int(2, static_cast<unsigned long>(k)));
    else if (k < 0)
        m = x * Rat(pow_int(2, static_cast<unsigned long>(-k)));
    while (m >= 2) {
        m /= 2;
        ++k;
    }
    while (m < 1) {
        m *= 2;
        --k;
    }
    RatIv lm = detail::ln_reduced(m, terms);
    const RatIv& l2 = ln2_iv();
    if (k >= 0) return RatIv(lm.lo + k * l2.lo, lm.hi + k * l2.hi);
    return RatIv(lm.lo + k * l2.hi, lm.hi + k * l2.lo);
}

// Certified bounds on e (Euler's number) from the factorial series.
inline RatIv e_iv(int terms = 22) {
    Rat s = 0, f = 1;
    for (int j = 0; j < terms; ++j) {
        s += f;
        f /= (j + 1);
    }
    // remainder sum_{j>=terms} 1/j! <= 2/terms!
    return RatIv(s, s + 2 * f);
}

// Smallest integer k >= 0 with e^k >= m (i.e. ceil(ln m) for m >= 1).
inline Int ceil_ln(const Int& m) {
    if (m <= 1) return 0;
    for (int terms = 22;; terms *= 2) {
        RatIv e = e_iv(terms);
        RatIv p(Rat(1), Rat(1));
        Int k = 0;
        bool stuck = false;
        while (true) {
            p = RatIv(p.lo * e.lo, p.hi * e.hi);
            ++k;
            if (p.lo >= m) return k;
            if (p.hi >= m) {
                stuck = true;  // undecided at this precision
                break;
            }
        }
        if (!stuck) return k;
        if (terms > 2000) throw PrecisionError("ceil_ln: cannot settle comparison");
    }
}

// Sum_{j=a}^{b} 1/j as a certified interval.  Exact-width accumulation for
// short ranges, integral bounds through ln for long ones.
inline RatIv harmonic_range(const Int& a, const Int& b, const Int& exact_limit = 1 << 16) {
    if (a > b) return RatIv(Rat(0));
    if (a < 1) throw DomainError("harmonic_range: a < 1");
    if (b - a <= exact_limit) {
        // Dyadic accumulation at 2^-128 resolution per term.
        const unsigned shift = 128;
        Int scale = Int(1) << shift;
        Int lo = 0, hi = 0;
        for (Int j = a; j <= b; ++j) {
            lo += scale / j;
            hi += scale / j + 1;
        }
        return RatIv(Rat(lo, scale), Rat(hi, scale));
    }
    if (a == 1) {
        RatIv rest = harmonic_range(2, b, exact_limit);
        return RatIv(rest.lo + 1, rest.hi + 1);
    }
    RatIv lo_b = ln_iv(Rat(b + 1, a));
    RatIv hi_b = ln_iv(Rat(b, a - 1));
    return RatIv(lo_b.lo, hi_b.hi);
}

// Certified accumulator: keeps 2^-kShift-resolution bounds on a sum of
// nonnegative rationals so that comparisons against thresholds can be decided
// exactly or reported Unknown, never silently wrong.
class DyadicAcc {
  public:
    static constexpr unsigned kShift = 192;

    void add(const Rat& v) {
        Int n = rat_num(v) << kShift;
        const Int& d = rat_den(v);
        lo_ += floor_div(n, d);
        hi_ += ceil_div(n, d);
    }
    void add_iv(const RatIv& iv) {
        Int nl = rat_num(iv.lo) << kShift;
        Int nh = rat_num(iv.hi) << kShift;
        lo_ += floor_div(nl, rat_den(iv.lo));
        hi_ += ceil_div(nh, rat_den(iv.hi));
    }
    void add_scaled(const Rat& v, const Int& times) {
        if (times == 0) return;
        if (times < 0) throw DomainError("DyadicAcc: negative multiplicity");
        Int n = rat_num(v) << kShift;
        const Int& d = rat_den(v);
        lo_ += floor_div(n, d) * times;
        hi_ += ceil_div(n, d) * times;
    }
    void add_iv_scaled(const RatIv& iv, const Int& times) {
        if (times == 0) return;
        Int nl = rat_num(iv.lo) << kShift;
        Int nh = rat_num(iv.hi) << kShift;
        lo_ += floor_div(nl, rat_den(iv.lo)) * times;
        hi_ += ceil_div(nh, rat_den(iv.hi)) * times;
    }
    void add_acc(const DyadicAcc& o, const Int& times = 1) {
        lo_ += o.lo_ * times;
        hi_ += o.hi_ * times;
    }

    Cert less_than(const Rat& t) const {
        Int tn = rat_num(t) << kShift;
        const Int& td = rat_den(t);
        if (hi_ * td < tn) return Cert::True;
        if (lo_ * td >= tn) return Cert::False;
        return Cert::Unknown;
    }
    RatIv to_iv() const {
        Int scale = Int(1) << kShift;
        return RatIv(Rat(lo_, scale), Rat(hi_, scale));
    }

  private:
    Int lo_ = 0, hi_ = 0;
};

}  // namespace symdyn
