#pragma once

#include "symdyn/alpha.hpp"
#include "symdyn/distal.hpp"
#include "symdyn/measure_chain.hpp"
#include "symdyn/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace symdyn {

// K as a segment of convex combinations theta*per(u) + (1-theta)*per(v),
// between two theta-parameters.  theta_from == theta_to describes a point.
struct KSegment {
    Word base_u, base_v;
    Rat theta_from, theta_to;

    Rat theta_at(const Rat& t) const {  // t in [0,1] along the segment
        return theta_from + (theta_to - theta_from) * t;
    }
    FiniteMeasure measure_at(const Alphabet& a, const Rat& theta) const {
        if (theta == 1) return FiniteMeasure::periodic_orbit(a, base_u);
        if (theta == 0) return FiniteMeasure::periodic_orbit(a, base_v);
        return FiniteMeasure::convex({{theta, FiniteMeasure::periodic_orbit(a, base_u)},
                                      {1 - theta, FiniteMeasure::periodic_orbit(a, base_v)}});
    }
};

struct Slot {
    enum class Kind { Target, Dense, Chain, Distal };
    Kind kind = Kind::Dense;
    int stage = 1;        // k
    int chain_index = 0;  // i (1-based; 0 for dense/target)
    int pos_in_chain = 0; // s in [1, 2 m_{i,k}]
    Int a, b;             // trace interval
    Int threshold;        // N^{i,k}_s; 0 for dense/target slots
    long source = -1;     // index into the matching source table
    Rat theta;            // scheduled measure parameter (chain/distal slots)
};

struct StageParams {
    Rat eps_k, delta_k, eta_k;
    long ext = 0;   // mEps(eta_k): coordinates written beyond b
    long K_k = 0;   // segment gap
    long t_k = 0;   // dense word count
    long dense_len = 0;  // mEps(eps_k)
};

struct StageCheckpoints {
    Int closeness_n;                       // b^{1,k}_{m_{1,k}}
    std::optional<Int> alpha_d;            // d^{1,k}
    std::vector<std::size_t> separation;   // distal slot indices, i = 1..k
    std::vector<std::size_t> empirical;    // alpha_i arrival slots, i = 1..k
};

// The complete segment/gap plan of the inductive construction, every
// inequality of which is re-checkable exactly.
struct TraceSchedule {
    ShiftModel model;
    DistalSeed seed;
    KSegment K;
    Rat seed_param;  // t with K.theta_at(t) = seed theta-parameter... stored as theta
    std::optional<AlphaFunction> alpha;
    Word target_word;
    Rat eps, delta1, zeta;
    int stages = 0;

    std::vector<StageParams> stage;          // [0] = stage 1, ..., [m] = stage m+1 lookahead
    std::vector<Slot> slots;
    std::vector<SymbolStream> dense_sources;
    std::vector<GenericPattern> chain_sources;
    std::vector<DistalBlocks> distal_sources;  // [k-1] for stage k
    SymbolStream target_source;
    std::vector<std::vector<long>> stage_dense;  // per stage: dense source ids
    std::vector<StageCheckpoints> checkpoints;   // per stage 1..m
    Int lookahead_first_threshold;  // N^{1,m+1}_1
    Int horizon_end;                // last written coordinate

    const StageParams& params(int k) const { return stage[static_cast<std::size_t>(k - 1)]; }

    Rat diameter_bound() const { return model.diameter_bound(); }

    // Re-verifies every schedule inequality from the stored data; throws
    // InvariantError on the first violation.
    void verify() const;
};

namespace detail {

inline Int min_length_for_ratio(const Int& numerator, const Rat& delta) {
    // smallest L with numerator / L < delta  <=>  L > numerator/delta
    return floor_rat(Rat(numerator) / delta) + 1;
}

}  // namespace detail

inline void TraceSchedule::verify() const {
    const int m = stages;
    // gap and ratio inequalities, slot by slot
    for (std::size_t idx = 0; idx < slots.size(); ++idx) {
        const Slot& sl = slots[idx];
        const StageParams& sp = params(sl.stage);
        if (sl.kind == Slot::Kind::Target) {
            if (sl.a != 0 || sl.b != 0) throw InvariantError("target slot must be [0,0]");
            continue;
        }
        if (sl.kind == Slot::Kind::Dense) {
            if (idx > 0) {
                const Slot& prev = slots[idx - 1];
                Int gap = sl.a - prev.b;
                if (gap != sp.K_k) throw InvariantError("dense slot gap != K_k");
            }
            if (sl.a != sl.b) throw InvariantError("dense slot must be a singleton");
            continue;
        }
        // chain/distal slot
        const Slot& prev = slots[idx - 1];
        if (sl.a != prev.b + sp.K_k) throw InvariantError("segment gap != K_k");
        if (!(sl.b - sl.a > sl.threshold))
            throw InvariantError("slot shorter than its empirical threshold");
        // ratio inequality
        Int numerator;
        bool stage_end = sl.pos_in_chain == 0 ? false : false;
        const Slot* next = idx + 1 < slots.size() ? &slots[idx + 1] : nullptr;
        bool is_last_of_stage_chain =
            sl.chain_index == sl.stage &&
            sl.kind == Slot::Kind::Distal;  // i == k, s == 2m
        if (is_last_of_stage_chain) {
            const StageParams& nx = stage[static_cast<std::size_t>(sl.stage)];
            Int n_next = sl.stage == m ? lookahead_first_threshold
                                       : Int(0);  // filled below for k < m
            if (sl.stage < m) {
                // first chain slot of stage k+1
                for (std::size_t j = idx + 1; j < slots.size(); ++j)
                    if (slots[j].kind == Slot::Kind::Chain) {
                        n_next = slots[j].threshold;
                        break;
                    }
            }
            numerator = sl.a + Int(nx.t_k + 1) * nx.K_k + n_next;
        } else {
            if (!next) throw InvariantError("non-final slot without successor");
            // the next threshold-carrying slot
            Int n_next = next->threshold;
            numerator = sl.a + Int(sp.K_k) + n_next;
        }
        if (!(Rat(numerator) < sp.delta_k * Rat(sl.b - sl.a)))
            throw InvariantError("stage ratio inequality violated");
        (void)stage_end;
    }
    // alpha checkpoints
    if (alpha) {
        for (int k = 1; k <= m; ++k) {
            const auto& cp = checkpoints[static_cast<std::size_t>(k - 1)];
            if (!cp.alpha_d) throw InvariantError("missing alpha checkpoint");
            const StageParams& sp = params(k);
            // find the closeness slot (i=1, s=m_{1,k})
            const Slot* mid = nullptr;
            for (const Slot& sl : slots)
                if (sl.stage == k && sl.chain_index == 1 && sl.kind == Slot::Kind::Chain &&
                    sl.b == cp.closeness_n)
                    mid = &sl;
            if (!mid) throw InvariantError("missing closeness slot");
            // 4 alpha(d) eps_k > a * diam + 2 eps_k
            Rat lhs = 4 * (*alpha)(*cp.alpha_d) * sp.eps_k;
            if (!(lhs > Rat(mid->a) * diameter_bound() + 2 * sp.eps_k))
                throw InvariantError("alpha checkpoint d too small");
            if (!(Rat(*cp.alpha_d) < sp.delta_k * Rat(mid->b)))
                throw InvariantError("alpha checkpoint ratio d/b >= delta_k");
        }
    }
    // eta budget: eta_k * 4/(1 - 1/n) <= eps_k with lambda = ln n
    Rat n = Rat(model.alphabet().size);
    for (int k = 1; k <= m; ++k) {
        const StageParams& sp = params(k);
        if (!(sp.eta_k * 4 / (1 - 1 / n) <= sp.eps_k))
            throw InvariantError("eta budget violated");
    }
}

}  // namespace symdyn
