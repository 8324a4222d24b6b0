#pragma once

#include "symdyn/rational.hpp"
#include "symdyn/stream.hpp"

namespace symdyn {

// The two metrics the shifts carry: d(w,g) = n^-min{k: w_k != g_k} on
// one-sided (or two-sided, same formula with k in N+) spaces, and the
// polynomial d1(w,g) = max{1/(|m|+1) : w_m != g_m} on two-sided binary
// streams.
struct ShiftMetric {
    enum class Kind { Geometric, Polynomial } kind = Kind::Geometric;
    int base = 2;  // n = #A, geometric kind only

    static ShiftMetric geometric(int n) {
        if (n < 2) throw DomainError("geometric metric needs n >= 2");
        return ShiftMetric{Kind::Geometric, n};
    }
    static ShiftMetric polynomial() { return ShiftMetric{Kind::Polynomial, 2}; }
};

struct DistanceResult {
    Rat value;      // exact value, or an upper bound when !certain
    bool certain;   // true iff the defining extremum was witnessed in-guard
};

// Distance with a realization guard.  Geometric: scans indices 1..guard for
// the first disagreement.  Polynomial: scans offsets |m| <= guard around 0
// for the nearest disagreement (which carries the max weight).
inline DistanceResult distance(const SymbolStream& x, const SymbolStream& y,
                               const ShiftMetric& m, long guard) {
    if (guard < 1) throw DomainError("distance: guard must be >= 1");
    if (x.side() != y.side())
        throw DomainError("distance: mismatched sidedness");
    if (m.kind == ShiftMetric::Kind::Geometric) {
        for (long k = 1; k <= guard; ++k) {
            if (x.at(k) != y.at(k))
                return {pow_rat(Rat(1, m.base), k), true};
        }
        return {pow_rat(Rat(1, m.base), guard), false};
    }
    if (x.side() != Side::TwoSided)
        throw DomainError("polynomial metric is defined on two-sided streams");
    if (x.at(0) != y.at(0)) return {Rat(1), true};
    for (long a = 1; a <= guard; ++a) {
        if (x.at(a) != y.at(a) || x.at(-a) != y.at(-a))
            return {Rat(1, a + 1), true};
    }
    return {Rat(1, guard + 1), false};
}

// Largest m with n^-m >= eps; equivalently d < eps iff the first m
// coordinates agree.  eps > 1 yields 0 (no coordinate forced).
inline long m_epsilon(const ShiftMetric& m, const Rat& eps) {
    if (m.kind != ShiftMetric::Kind::Geometric)
        throw DomainError("m_epsilon: geometric metric only");
    if (eps <= 0) throw DomainError("m_epsilon: eps must be positive");
    if (eps > 1) return 0;
    long k = 0;
    Rat v = 1;
    while (true) {
        Rat next = v / m.base;
        if (next >= eps) {
            v = next;
            ++k;
            if (k > (1L << 24)) throw BudgetError("m_epsilon: eps too small");
        } else {
            return k;  // v = n^-k >= eps > n^-(k+1)
        }
    }
}

}  // namespace symdyn
