#pragma once

#include "symdyn/construct.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace symdyn {

// Pool of primitive cyclically admissible cycle words up to a length cap,
// deduplicated by rotation.
inline std::vector<Word> periodic_cycle_pool(const ShiftModel& model, int max_len) {
    std::vector<Word> pool;
    std::set<std::vector<Sym>> seen;
    for (int len = 1; len <= max_len; ++len) {
        for (const Word& w : all_words(model.alphabet(), static_cast<std::size_t>(len))) {
            if (!model.admissible(w + w)) continue;
            // primitive: not a proper power
            bool primitive = true;
            for (int p = 1; p < len; ++p) {
                if (len % p != 0) continue;
                bool rep = true;
                for (int i = 0; i < len && rep; ++i)
                    rep = w[static_cast<std::size_t>(i)] ==
                          w[static_cast<std::size_t>(i % p)];
                if (rep) primitive = false;
            }
            if (!primitive) continue;
            // canonical rotation
            Word best = w;
            for (int k = 1; k < len; ++k) {
                Word r = detail::rotate(w, k);
                if (r < best) best = r;
            }
            if (seen.insert(best.syms).second) pool.push_back(best);
        }
    }
    return pool;
}

struct LevelSetResult {
    ScrambleFamily family;
    FiniteMeasure mu1, mu2;  // periodic selections with <phi,mu1> < a <= b < <phi,mu2>
    FiniteMeasure nu1, nu2;  // segment endpoints with <phi,nu1> = a, <phi,nu2> = b
    Rat a, b;
    Rat theta1, theta2;
    Observable phi;
};

// Selects periodic measures straddling [a, b], forms the segment
// K = conv{nu1, nu2} with <phi, nu_i> hitting a and b exactly, and delegates
// to the inductive construction with nu1 as the seed mixture.
inline LevelSetResult level_set_family(const ShiftModel& model, const Observable& phi,
                                       const Rat& a, const Rat& b, int stages,
                                       const std::vector<std::string>& prefixes,
                                       int pool_max_len = 6,
                                       std::optional<Rat> eps_opt = std::nullopt,
                                       Rat delta1 = Rat(1, 2),
                                       std::optional<Word> target = std::nullopt,
                                       std::uint64_t rng_seed = 0) {
    if (!(a <= b)) throw DomainError("level_set_family: need a <= b");
    auto pool = periodic_cycle_pool(model, pool_max_len);
    if (pool.empty()) throw CapabilityError("level_set_family: empty periodic pool");
    const Alphabet& alpha_bet = model.alphabet();

    Rat pool_inf, pool_sup;
    bool first = true;
    for (const Word& w : pool) {
        Rat v = FiniteMeasure::periodic_orbit(alpha_bet, w).pair(phi);
        if (first) {
            pool_inf = pool_sup = v;
            first = false;
        }
        if (v < pool_inf) pool_inf = v;
        if (v > pool_sup) pool_sup = v;
    }
    if (!(pool_inf < a && b < pool_sup))
        throw DomainError("level_set_family: [a,b] outside the achievable interval of the pool");

    // selection: shortest usable cycle strictly below a / above b; cycles must
    // admit a distal rotation, which rules out fixed points
    auto usable = [&](const Word& w) {
        if (w.size() < 2) return false;
        try {
            best_distal_pair(model, w);
            return true;
        } catch (const DomainError&) {
            return false;
        }
    };
    std::optional<Word> w1, w2;
    Rat v1, v2;
    for (const Word& w : pool) {
        if (!usable(w)) continue;
        Rat v = FiniteMeasure::periodic_orbit(alpha_bet, w).pair(phi);
        if (v < a && (!w1 || w.size() < w1->size() || (w.size() == w1->size() && v > v1))) {
            w1 = w;
            v1 = v;
        }
        if (v > b && (!w2 || w.size() < w2->size() || (w.size() == w2->size() && v < v2))) {
            w2 = w;
            v2 = v;
        }
    }
    if (!w1 || !w2)
        throw DomainError("level_set_family: no distal-capable periodic measures straddle [a,b]");

    // theta with <phi, theta mu1 + (1-theta) mu2> = target
    auto theta_for = [&](const Rat& target_value) {
        return (v2 - target_value) / (v2 - v1);
    };
    Rat theta1 = theta_for(a), theta2 = theta_for(b);

    DistalSeed seed = make_distal_seed(model, *w1, *w2, theta1);
    Rat eps = eps_opt ? *eps_opt : Rat(1, 8);
    while (!(seed.zeta - 5 * eps / 2 > 0)) eps /= 2;

    Word tgt = target ? *target : model.least_point(Word{}).window(1, 1);
    BuildInputs in{model,  seed,  KSegment{*w1, *w2, theta1, theta2},
                   theta1, std::nullopt, tgt, eps, delta1, stages, rng_seed};
    auto sched = std::make_shared<TraceSchedule>(build_schedule(in));
    LevelSetResult out{construct_family(sched, prefixes),
                       FiniteMeasure::periodic_orbit(alpha_bet, *w1),
                       FiniteMeasure::periodic_orbit(alpha_bet, *w2),
                       in.K.measure_at(alpha_bet, theta1),
                       in.K.measure_at(alpha_bet, theta2),
                       a,
                       b,
                       theta1,
                       theta2,
                       phi};
    return out;
}

// ---------------------------------------------------------------------------
// Backward tracing onto the local unstable set of z
// ---------------------------------------------------------------------------

struct BackwardTraceResult {
    std::map<std::string, SymbolStream> members;  // two-sided
    Rat achieved_bound;   // certified sum_{i>=0} d(sigma^-i x, sigma^-i z)
    bool feasible;        // achieved_bound <= requested eps
    Rat minimal_feasible_eps;
};

// Plants z's coordinates on (-inf, 0] under every member, repairing the
// junction with a short bridge when the one-step transition is inadmissible;
// the geometric tail estimate certifies the unstable-set bound.
inline BackwardTraceResult backward_trace(const ShiftModel& model, const SymbolStream& z,
                                          const ScrambleFamily& family, const Rat& eps) {
    if (z.side() != Side::TwoSided)
        throw DomainError("backward_trace: z must be two-sided");
    if (model.kind() == ShiftModel::Kind::Sofic)
        throw CapabilityError("backward_trace requires symbol-local bridging");
    const RunSeq* zr = z.runs();
    if (!zr) throw CapabilityError("backward_trace: z must be run-backed");
    int n = model.alphabet().size;
    long B = model.bridging_constant();

    BackwardTraceResult out;
    out.achieved_bound = 0;
    Sym z0 = z.at(0);
    for (const auto& [xi, x] : family.members) {
        const RunSeq* xr = x.runs();
        if (!xr) throw CapabilityError("backward_trace: members must be run-backed");
        RunSeq seq;
        // z's content on (-inf, 0]
        seq.head = zr->head;
        for (const Run& r : zr->runs) {
            if (r.start > 0) break;
            Run c = r;
            if (c.end() > 0) c.len = Int(0) - c.start + 1;
            seq.runs.push_back(std::move(c));
        }
        if (zr->tail && zr->tail->start <= 0) {
            Run c = *zr->tail;
            c.len = Int(0) - c.start + 1;
            seq.runs.push_back(std::move(c));
        }
        if (!seq.head && seq.runs.empty())
            throw DomainError("backward_trace: z has no content at indices <= 0");
        // junction
        long overwritten = 0;
        bool need_bridge = false;
        if (model.kind() == ShiftModel::Kind::SFT)
            need_bridge = !model.transition_system().edge(static_cast<int>(z0),
                                                          static_cast<int>(x.at(1)));
        if (need_bridge) {
            Sym next = x.at(B + 1);
            auto w = model.bridge(Word({z0}), Word({next}), B);
            if (!w)
                throw InvariantError("backward_trace: junction bridge failed");
            seq.runs.push_back(Run{1, B, *w, 0});
            overwritten = B;
        }
        // member positives from overwritten+1 on
        auto segs = segments_covering(*xr, overwritten + 1, x.realized_end());
        for (Run r : segs) seq.runs.push_back(std::move(r));
        seq.tail = xr->tail;
        auto traced = SymbolStream::from_runs(model.alphabet(), Side::TwoSided, std::move(seq));
        // agreement depth J with z on positive indices
        long J = 0;
        while (J < 1024 && traced.at(J + 1) == z.at(J + 1)) ++J;
        Rat bound = pow_rat(Rat(1, n), J) * Rat(1, n - 1);
        if (bound > out.achieved_bound) out.achieved_bound = bound;
        out.members.emplace(xi, std::move(traced));
    }
    out.minimal_feasible_eps = out.achieved_bound;
    out.feasible = out.achieved_bound <= eps;
    return out;
}

}  // namespace symdyn
