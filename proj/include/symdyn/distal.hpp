#pragma once

#include "symdyn/measure.hpp"
#include "symdyn/metric.hpp"
#include "symdyn/model.hpp"
#include "symdyn/stream.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace symdyn {

namespace detail {

// Cyclic rotation of a word by k places.
inline Word rotate(const Word& w, long k) {
    long n = static_cast<long>(w.size());
    Word r;
    for (long i = 0; i < n; ++i) r.push(w[static_cast<std::size_t>((i + k) % n)]);
    return r;
}

// min over i of d(sigma^i w^inf, sigma^i (sigma^k w)^inf), exact; 0 when the
// rotation fixes the orbit point.
inline Rat rotation_separation(const Word& w, long k, int base) {
    long n = static_cast<long>(w.size());
    Rat zeta = 1;
    bool any = false;
    for (long i = 0; i < n; ++i) {
        long first = 0;
        for (long t = 1; t <= n; ++t) {
            if (w[static_cast<std::size_t>((i + t - 1) % n)] !=
                w[static_cast<std::size_t>((i + k + t - 1) % n)]) {
                first = t;
                break;
            }
        }
        if (first == 0) return Rat(0);  // streams coincide
        Rat d = pow_rat(Rat(1, base), first);
        if (!any || d < zeta) zeta = d;
        any = true;
    }
    return zeta;
}

}  // namespace detail

// A distal generic pair for a periodic-orbit measure: the point and a
// rotation of it, with the separation computed exactly over one period.
struct DistalPair {
    Word cycle;
    long shift = 1;
    Rat zeta;  // inf_i d(sigma^i p, sigma^i q) > 0

    SymbolStream p(const Alphabet& a) const { return SymbolStream::periodic(a, cycle); }
    SymbolStream q(const Alphabet& a) const {
        return SymbolStream::periodic(a, detail::rotate(cycle, shift));
    }
};

// Chooses the rotation maximizing the separation; DomainError when no
// rotation separates (single-symbol cycles: the fixed-point case).
inline DistalPair best_distal_pair(const ShiftModel& model, const Word& cycle) {
    if (!model.admissible(cycle + cycle))
        throw DomainError("distal pair: cycle word is not cyclically admissible");
    int base = model.alphabet().size;
    DistalPair best{cycle, 0, Rat(0)};
    for (long k = 1; k < static_cast<long>(cycle.size()); ++k) {
        Rat z = detail::rotation_separation(cycle, k, base);
        if (z > best.zeta) {
            best.shift = k;
            best.zeta = z;
        }
    }
    if (best.zeta == 0)
        throw DomainError(
            "separation budget exhausted: the orbit admits no distal rotation "
            "(fixed-point measure)");
    return best;
}

// The two periodic measures, their distal generic pairs, and the mixing
// weight.  zeta = min of the two separations.
struct DistalSeed {
    FiniteMeasure mu1, mu2;
    DistalPair pair1, pair2;
    Rat theta;
    Rat zeta;

    FiniteMeasure mixture() const {
        if (theta == 1) return mu1;
        if (theta == 0) return mu2;
        return FiniteMeasure::convex({{theta, mu1}, {1 - theta, mu2}});
    }
};

inline DistalSeed make_distal_seed(const ShiftModel& model, const Word& w1, const Word& w2,
                                   const Rat& theta) {
    if (theta < 0 || theta > 1) throw DomainError("distal seed: theta outside [0,1]");
    DistalPair p1 = best_distal_pair(model, w1);
    DistalPair p2 = best_distal_pair(model, w2);
    Rat zeta = std::min(p1.zeta, p2.zeta);
    return DistalSeed{FiniteMeasure::periodic_orbit(model.alphabet(), w1),
                      FiniteMeasure::periodic_orbit(model.alphabet(), w2),
                      std::move(p1), std::move(p2), theta, zeta};
}

// ---------------------------------------------------------------------------
// Certified periodic patterns
// ---------------------------------------------------------------------------

// Truncation depth with tail 2^-K at most tol/4.
inline int truncation_for(const Rat& tol, int floor_terms = 20) {
    int K = floor_terms;
    Rat tail = pow_rat(Rat(1, 2), K);
    while (tail * 4 > tol) {
        ++K;
        tail /= 2;
        if (K > 4096) throw BudgetError("truncation_for: tolerance too small");
    }
    return K;
}

// Exact a-priori bound on d(per(W), theta*mu1+(1-theta)*mu2) for a two-block
// pattern with bridges of length B and total length T: per observable of
// depth L at most 4L + 2B + l1 + l2 windows are misclassified against the
// time-split average, and the split deviates from theta by split_error.
inline Rat combo_pattern_bound(const Alphabet& a, int K, long B, long l1, long l2,
                               const Rat& split_error, const Rat& endpoint_distance,
                               const Int& T) {
    Rat boundary = 0, wgt = Rat(1, 2);
    for (int k = 1; k <= K; ++k) {
        long L = static_cast<long>(lengthlex_word(a, k).size());
        boundary += wgt * Rat(4 * L + 2 * B + l1 + l2);
        wgt /= 2;
    }
    return boundary / Rat(T) + split_error * (endpoint_distance + Rat(2 * B, T)) +
           Rat(2 * B, T) + pow_rat(Rat(1, 2), K);
}

// Periodic generic point for a convex combination of two periodic-orbit
// measures, with a certified weak*-accuracy and the explicit empirical
// threshold 2|W|/n.
struct GenericPattern {
    std::shared_ptr<const Word> pattern;
    Rat accuracy;  // certified d(per(W), target) bound, truncation included
    Int length() const { return Int(static_cast<long>(pattern->size())); }
    SymbolStream stream(const Alphabet& a) const {
        RunSeq q;
        q.tail = Run{1, 0, pattern, 0};
        return SymbolStream::from_runs(a, Side::OneSided, std::move(q));
    }
    // N such that d(E_n(W^inf), target) <= accuracy + eps_emp for n >= N
    Int threshold(const Rat& eps_emp) const {
        return ceil_rat(Rat(2 * length()) / eps_emp);
    }
};

namespace detail {

struct TwoBlockPlan {
    Int t1, t2, T;
    Rat split_error;
};

inline TwoBlockPlan two_block_plan(const Rat& theta, long l1, long l2, long B,
                                   const Int& scale) {
    TwoBlockPlan plan;
    plan.t1 = std::max(Int(l1), (floor_rat(theta * Rat(scale)) / l1) * l1);
    plan.t2 = std::max(Int(l2), (floor_rat((1 - theta) * Rat(scale)) / l2) * l2);
    plan.T = plan.t1 + plan.t2 + 2 * B;
    Rat e1 = Rat(plan.t1, plan.T) - theta;
    if (e1 < 0) e1 = -e1;
    Rat e2 = Rat(plan.t2, plan.T) - (1 - theta);
    if (e2 < 0) e2 = -e2;
    plan.split_error = std::max(e1, e2);
    return plan;
}

inline Word assemble_two_block(const ShiftModel& model, const Word& b1, const Word& b2,
                               const Int& t1, const Int& t2, long B) {
    Word W;
    long l1 = static_cast<long>(b1.size()), l2 = static_cast<long>(b2.size());
    for (Int r = 0; r < t1 / l1; ++r)
        W.syms.insert(W.syms.end(), b1.begin(), b1.end());
    auto br1 = model.bridge(b1, b2, B);
    if (!br1) throw InvariantError("two-block pattern: bridge failed");
    W.syms.insert(W.syms.end(), br1->begin(), br1->end());
    for (Int r = 0; r < t2 / l2; ++r)
        W.syms.insert(W.syms.end(), b2.begin(), b2.end());
    auto br2 = model.bridge(b2, b1, B);
    if (!br2) throw InvariantError("two-block pattern: bridge failed");
    W.syms.insert(W.syms.end(), br2->begin(), br2->end());
    if (!model.admissible(W + W))
        throw InvariantError("two-block pattern: not cyclically admissible");
    return W;
}

}  // namespace detail

// Builds W = w1-block + bridge + w2-block + bridge with block lengths chosen
// so the certified bound meets `tol`.  theta in {0,1} degenerates to the pure
// cycle (accuracy 0, since per(w^r) = per(w) exactly).
inline GenericPattern combo_pattern(const ShiftModel& model, const Word& w1, const Word& w2,
                                    const Rat& theta, const Rat& tol, int K) {
    const Alphabet& a = model.alphabet();
    if (theta == 1 || theta == 0) {
        const Word& w = theta == 1 ? w1 : w2;
        return GenericPattern{std::make_shared<const Word>(w), Rat(0)};
    }
    if (pow_rat(Rat(1, 2), K) * 2 > tol)
        throw DomainError("combo_pattern: truncation K too shallow for tol");
    long B = model.bridging_constant();
    long l1 = static_cast<long>(w1.size()), l2 = static_cast<long>(w2.size());
    Rat d12 = weak_star_distance(FiniteMeasure::periodic_orbit(a, w1),
                                 FiniteMeasure::periodic_orbit(a, w2), K)
                  .value +
              pow_rat(Rat(1, 2), K);
    for (Int scale = Int(std::max({4 * l1, 4 * l2, 8 * B, 16L}));; scale *= 2) {
        if (scale > (Int(1) << 40)) throw BudgetError("combo_pattern: scale blew the budget");
        auto plan = detail::two_block_plan(theta, l1, l2, B, scale);
        Rat bound = combo_pattern_bound(a, K, B, l1, l2, plan.split_error, d12, plan.T);
        if (bound > tol) continue;
        Word W = detail::assemble_two_block(model, w1, w2, plan.t1, plan.t2, B);
        return GenericPattern{std::make_shared<const Word>(std::move(W)), bound};
    }
}

// ---------------------------------------------------------------------------
// Distal block pair
// ---------------------------------------------------------------------------

// The two streams of the distal-block construction, realized as aligned
// periodic patterns: x1 interleaves p1/p2 blocks in time proportion
// theta:(1-theta), x2 runs the same block schedule on q1/q2.  For every
// n > threshold:
//   (a) the empirical measures of both streams sit within eps + delta of the
//       mixture (certified: accuracy_i + 2T/n);
//   (b) at most a delta fraction of times i < n has
//       d(sigma^i x1, sigma^i x2) < zeta - eps (only censored positions can).
struct DistalBlocks {
    std::shared_ptr<const Word> pat1, pat2;  // equal length T
    Rat eps, delta;
    Rat zeta;
    Int threshold;
    Int censored;              // per-period positions without a separation witness
    Rat accuracy1, accuracy2;  // certified d(per(pat_i), mixture) bounds

    SymbolStream x1(const Alphabet& a) const {
        RunSeq q;
        q.tail = Run{1, 0, pat1, 0};
        return SymbolStream::from_runs(a, Side::OneSided, std::move(q));
    }
    SymbolStream x2(const Alphabet& a) const {
        RunSeq q;
        q.tail = Run{1, 0, pat2, 0};
        return SymbolStream::from_runs(a, Side::OneSided, std::move(q));
    }
    Int length() const { return Int(static_cast<long>(pat1->size())); }
};

inline DistalBlocks distal_blocks(const ShiftModel& model, const DistalSeed& seed,
                                  const Rat& eps, const Rat& delta, int K) {
    if (eps >= seed.zeta)
        throw DomainError("separation budget exhausted: eps must stay below zeta");
    if (eps <= 0 || delta <= 0) throw DomainError("distal_blocks: eps, delta > 0");
    const Alphabet& a = model.alphabet();
    const Word& w1 = seed.pair1.cycle;
    const Word& w2 = seed.pair2.cycle;
    Word q1 = detail::rotate(w1, seed.pair1.shift);
    Word q2 = detail::rotate(w2, seed.pair2.shift);
    long l1 = static_cast<long>(w1.size()), l2 = static_cast<long>(w2.size());
    const Rat& theta = seed.theta;

    DistalBlocks out;
    out.eps = eps;
    out.delta = delta;
    out.zeta = seed.zeta;

    if (theta == 1 || theta == 0) {
        // pure seed: the streams are the distal pair itself; separation holds
        // at every time, the empirical measure is within 2l/n of the target
        const Word& w = theta == 1 ? w1 : w2;
        const Word& q = theta == 1 ? q1 : q2;
        out.pat1 = std::make_shared<const Word>(w);
        out.pat2 = std::make_shared<const Word>(q);
        out.censored = 0;
        out.accuracy1 = out.accuracy2 = 0;
        out.threshold = ceil_rat(Rat(2 * static_cast<long>(w.size())) / eps);
        return out;
    }

    if (pow_rat(Rat(1, 2), K) * 4 > eps)
        throw DomainError("distal_blocks: truncation K too shallow for eps");
    long B = model.bridging_constant();
    Rat d12 = weak_star_distance(seed.mu1, seed.mu2, K).value + pow_rat(Rat(1, 2), K);
    Int censored = Int(2 * B + l1 + l2);

    for (Int scale = Int(std::max({4 * l1, 4 * l2, 8 * B, 16L}));; scale *= 2) {
        if (scale > (Int(1) << 40)) throw BudgetError("distal_blocks: scale blew the budget");
        auto plan = detail::two_block_plan(theta, l1, l2, B, scale);
        if (Rat(censored) > delta / 2 * Rat(plan.T)) continue;
        Rat bound =
            combo_pattern_bound(a, K, B, l1, l2, plan.split_error, d12, plan.T);
        if (bound > eps / 2) continue;

        Word W1 = detail::assemble_two_block(model, w1, w2, plan.t1, plan.t2, B);
        Word W2 = detail::assemble_two_block(model, q1, q2, plan.t1, plan.t2, B);
        if (W1.size() != W2.size())
            throw InvariantError("distal_blocks: pattern lengths diverged");
        out.pat1 = std::make_shared<const Word>(std::move(W1));
        out.pat2 = std::make_shared<const Word>(std::move(W2));
        out.censored = censored;
        out.accuracy1 = out.accuracy2 = bound;
        Int n_a = ceil_rat(Rat(4 * plan.T) / eps);
        Int n_b = ceil_rat(Rat(4 * plan.T) / delta);
        out.threshold = std::max(std::max(n_a, n_b), plan.T);
        return out;
    }
}

}  // namespace symdyn
