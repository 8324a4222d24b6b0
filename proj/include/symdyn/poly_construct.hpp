#pragma once

#include "symdyn/alpha.hpp"
#include "symdyn/analysis.hpp"
#include "symdyn/stream.hpp"

#include <map>
#include <string>
#include <vector>

namespace symdyn {

// Scrambled-family construction on the two-sided binary shift with the
// polynomial metric d1.  Stage k lays a zero run [d_{k-1}+1, c_k] followed by
// xi_l-blocks on the d-intervals; the defining inequalities are
//   D + sum_{j<=i-D} 1/(j+1) <= f_k alpha(i+1)   for a_k <= i <= b_k
//   a_k / b_k < 2^-k,   c_k > 2 b_k,   c_k / d_k^1 < 2^-k,
//   d_k^{l-1} / d_k^l < 2^-k
// with f_1 = 1 and f_k = 2^-k beyond; the ratio denominators carry the
// larger endpoint so the closeness fractions at the b_k checkpoints actually
// approach one.
struct PolyStage {
    Int a, b, c;
    std::vector<Int> d;  // d^1..d^k
};

struct PolyConstruction {
    AlphaFunction alpha;
    std::vector<PolyStage> stages;  // realized within the horizon
    Int horizon;
    std::map<std::string, SymbolStream> members;

    int realized() const { return static_cast<int>(stages.size()); }
    static Rat factor(int k) { return k == 1 ? Rat(1) : pow_rat(Rat(1, 2), k); }
    // stage-adapted closeness threshold (any fixed t eventually dominates it)
    static Rat stage_threshold(int k) { return Rat(4) * pow_rat(Rat(1, 2), k); }

    const SymbolStream& member(const std::string& xi) const {
        auto it = members.find(xi);
        if (it == members.end()) throw DomainError("unknown member " + xi);
        return it->second;
    }

    // Re-check the defining inequalities via the certified sufficient form.
    void verify() const {
        Int D = 0;
        for (int k = 1; k <= realized(); ++k) {
            const PolyStage& st = stages[static_cast<std::size_t>(k - 1)];
            Rat f = factor(k);
            RatIv lhs = harmonic_range(1, st.b - D + 1);
            if (!(Rat(D) + lhs.hi <= f * alpha(st.a + 1)))
                throw InvariantError("poly schedule: harmonic inequality fails");
            Rat ratio = pow_rat(Rat(1, 2), k);
            if (!(Rat(st.a) < ratio * Rat(st.b)))
                throw InvariantError("poly schedule: a/b ratio fails");
            if (!(st.c - st.b > st.b)) throw InvariantError("poly schedule: c <= 2b");
            Int prev = st.c;
            for (const Int& dl : st.d) {
                if (!(Rat(prev) < ratio * Rat(dl)))
                    throw InvariantError("poly schedule: d ratio fails");
                prev = dl;
            }
            D = st.d.back();
        }
    }
};

// Builds the schedule greedily (each value minimal under the certified
// sufficient inequality) and realizes members for the requested prefixes.
// alpha must pass the finite liminf alpha / ln n = +inf proxy.
inline PolyConstruction polynomial_construction(const AlphaFunction& alpha,
                                                const std::vector<std::string>& prefixes,
                                                const Int& horizon, int max_stages = 64) {
    std::vector<Int> proxy_grid{Int(1000), Int(10000), Int(100000)};
    if (!alpha.liminf_over_log_proxy(proxy_grid, Rat(2)))
        throw DomainError(
            "polynomial_construction: alpha fails the liminf alpha/ln n proxy on the grid "
            "n in {1e3, 1e4, 1e5}");

    PolyConstruction out{alpha, {}, horizon, {}};
    Int D = 0;
    for (int k = 1; k <= max_stages; ++k) {
        Rat f = PolyConstruction::factor(k);
        Int twok = Int(1) << static_cast<unsigned>(k);
        // sufficient check: D + H(b - D + 1) <= f alpha(a+1) with b = a 2^k + 1
        auto ok = [&](const Int& a) {
            Int b = a * twok + 1;
            RatIv lhs = harmonic_range(1, b - D + 1);
            return Rat(D) + lhs.hi <= f * alpha(a + 1);
        };
        Int a = D + 1;
        while (!ok(a)) {
            a *= 2;
            if (a > horizon * 4 + 16) break;
        }
        if (!ok(a)) break;  // stage does not fit
        Int lo = std::max(Int(D + 1), Int(a / 2)), hi = a;
        while (lo < hi) {
            Int mid = (lo + hi) / 2;
            if (ok(mid))
                hi = mid;
            else
                lo = mid + 1;
        }
        a = lo;
        PolyStage st;
        st.a = a;
        st.b = a * twok + 1;
        st.c = 2 * st.b + 1;
        Int prev = st.c;
        for (int l = 1; l <= k; ++l) {
            prev = prev * twok + 1;
            st.d.push_back(prev);
        }
        if (st.d.back() > horizon) break;
        out.stages.push_back(std::move(st));
        D = out.stages.back().d.back();
    }
    if (out.stages.empty())
        throw DomainError("polynomial_construction: horizon too small for one stage");
    out.verify();

    const Alphabet a2(2);
    auto zeros = std::make_shared<const Word>(word_of({0}));
    auto ones = std::make_shared<const Word>(word_of({1}));
    for (const std::string& xi : prefixes) {
        if (static_cast<int>(xi.size()) < out.realized())
            throw DomainError("prefix shorter than the realized stage count");
        RunSeq seq;
        seq.head = Run{0, 0, zeros, 0};
        Int pos = 0;
        auto push = [&](const Int& upto, bool one) {  // covers [pos, upto]
            if (upto < pos) return;
            seq.runs.push_back(Run{pos, upto - pos + 1, one ? ones : zeros, 0});
            pos = upto + 1;
        };
        for (int k = 1; k <= out.realized(); ++k) {
            const PolyStage& st = out.stages[static_cast<std::size_t>(k - 1)];
            push(st.c, false);  // zeros through c_k
            Int prev = st.c;
            for (int l = 1; l <= k; ++l) {
                bool one = xi[static_cast<std::size_t>(l - 1)] == '2';
                push(st.d[static_cast<std::size_t>(l - 1)], one);
                prev = st.d[static_cast<std::size_t>(l - 1)];
            }
            (void)prev;
        }
        seq.tail = Run{pos, 0, zeros, 0};
        out.members.emplace(xi, SymbolStream::from_runs(a2, Side::TwoSided, std::move(seq)));
    }
    return out;
}

// Certified weighted-closeness fraction of a member pair at the stage-k
// checkpoint b_k, with the stage-adapted threshold.
inline Rat poly_checkpoint_fraction(const PolyConstruction& pc, const std::string& xi,
                                    const std::string& eta, int k,
                                    std::optional<Rat> t = std::nullopt) {
    const PolyStage& st = pc.stages.at(static_cast<std::size_t>(k - 1));
    Rat thr = t ? *t : PolyConstruction::stage_threshold(k);
    auto cert = alpha_closeness_certified(pc.member(xi), pc.member(eta), thr, pc.alpha,
                                          st.b, ShiftMetric::polynomial());
    return cert.fraction_lower();
}

}  // namespace symdyn
