#pragma once

#include "symdyn/schedule.hpp"
#include "symdyn/stream_kernels.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace symdyn {

struct BuildInputs {
    ShiftModel model;
    DistalSeed seed;
    KSegment K;
    Rat seed_theta;  // theta-parameter of the seed mixture inside K
    std::optional<AlphaFunction> alpha;
    Word target_word;
    Rat eps{1, 8};
    Rat delta1{1, 2};
    int stages = 1;
    std::uint64_t rng_seed = 0;  // dense enumeration order only
};

namespace detail {

// parameter t in [0,1] of theta within [from,to]
inline Rat segment_position(const KSegment& K, const Rat& theta) {
    if (K.theta_from == K.theta_to) {
        if (theta != K.theta_from)
            throw DomainError("seed theta lies outside the K segment");
        return 0;
    }
    Rat t = (theta - K.theta_from) / (K.theta_to - K.theta_from);
    if (t < 0 || t > 1) throw DomainError("seed theta lies outside the K segment");
    return t;
}

}  // namespace detail

// Builds the full segment/gap plan for the inductive construction: dense
// payload slots, measure chains toward the dense sequence on K, distal slots,
// and the greedy minimal b's satisfying the stage inequalities.
inline TraceSchedule build_schedule(const BuildInputs& in) {
    if (in.stages < 1) throw DomainError("build_schedule: stages must be >= 1");
    if (in.model.kind() == ShiftModel::Kind::Sofic)
        throw CapabilityError(
            "family construction requires symbol-local bridging (SFT or beta model)");
    const ShiftModel& model = in.model;
    const Alphabet& a = model.alphabet();
    const int m = in.stages;
    long B = model.bridging_constant();  // throws CapabilityError when not mixing

    TraceSchedule s{model,       in.seed, in.K, in.seed_theta, in.alpha,
                    in.target_word, in.eps,  in.delta1, in.seed.zeta};
    s.stages = m;
    s.target_source = model.least_point(in.target_word);

    if (!(s.zeta - 5 * in.eps / 2 > 0))
        throw DomainError("build_schedule: need zeta - 5 eps_1 > 0 (shrink eps)");
    if (in.alpha) {
        std::vector<Int> grid{Int(1) << 10, Int(1) << 16, Int(1) << 24};
        auto cert = in.alpha->certify(grid, Rat(4), Rat(1));
        if (!cert.nondecreasing || !cert.diverges || !cert.sublinear)
            throw DomainError("build_schedule: alpha failed family-A certification");
    }

    // stage parameters, incl. the stage-(m+1) lookahead
    Rat lambda_factor = Rat(a.size - 1, 4 * a.size);  // (1 - e^-ln n)/4
    for (int k = 1; k <= m + 1; ++k) {
        StageParams sp;
        sp.eps_k = in.eps * pow_rat(Rat(1, 2), k);
        sp.delta_k = in.delta1 * pow_rat(Rat(1, 2), k - 1);
        sp.eta_k = sp.eps_k * lambda_factor;
        sp.ext = m_epsilon(model.metric(), sp.eta_k);
        sp.K_k = sp.ext + B;
        sp.dense_len = m_epsilon(model.metric(), sp.eps_k);
        s.stage.push_back(sp);
    }
    if (static_cast<long>(in.target_word.size()) > s.stage[0].ext)
        throw DomainError("build_schedule: target word deeper than the stage-1 window");

    // dense payloads
    s.stage_dense.assign(static_cast<std::size_t>(m + 1), {});
    for (int k = 1; k <= m + 1; ++k) {
        StageParams& sp = s.stage[static_cast<std::size_t>(k - 1)];
        std::vector<Word> words;
        for (const Word& w : all_words(a, static_cast<std::size_t>(sp.dense_len)))
            if (model.admissible(w)) words.push_back(w);
        sp.t_k = static_cast<long>(words.size());
        if (k == m + 1) continue;  // count only
        if (in.rng_seed != 0) {
            std::mt19937_64 rng(in.rng_seed + static_cast<std::uint64_t>(k));
            std::shuffle(words.begin(), words.end(), rng);
        }
        for (const Word& w : words) {
            s.stage_dense[static_cast<std::size_t>(k - 1)].push_back(
                static_cast<long>(s.dense_sources.size()));
            s.dense_sources.push_back(model.least_point(w));
        }
    }

    // dense sequence over K (theta parameters via dyadic sweeps)
    DenseSequence kseq(in.K.theta_from == in.K.theta_to
                           ? std::vector<FiniteMeasure>{in.K.measure_at(a, in.K.theta_from)}
                           : std::vector<FiniteMeasure>{in.K.measure_at(a, in.K.theta_from),
                                                        in.K.measure_at(a, in.K.theta_to)});
    auto alpha_theta = [&](int i) {
        return in.K.theta_at(kseq.param_at(i));
    };
    Rat endpoint_dist =
        weak_star_distance(in.K.measure_at(a, Rat(0)), in.K.measure_at(a, Rat(1)), 20).value +
        pow_rat(Rat(1, 2), 20);

    // chain data per stage k <= m, chain i <= k: theta grid from the seed to
    // alpha_i, stepping below eps_k; mirrored slots share patterns.
    struct ChainData {
        std::vector<long> pattern_ids;  // s = 1..m_{i,k}
        long m_count = 1;
    };
    std::map<std::pair<int, int>, ChainData> chains;
    std::map<std::pair<Rat, int>, long> pattern_cache;  // (theta, stage) -> id
    auto get_pattern = [&](const Rat& theta, int k) -> long {
        auto key = std::make_pair(theta, k);
        auto it = pattern_cache.find(key);
        if (it != pattern_cache.end()) return it->second;
        const StageParams& sp = s.stage[static_cast<std::size_t>(k - 1)];
        int K_tr = truncation_for(sp.eps_k);
        GenericPattern g =
            combo_pattern(model, in.K.base_u, in.K.base_v, theta, sp.eps_k, K_tr);
        long id = static_cast<long>(s.chain_sources.size());
        s.chain_sources.push_back(std::move(g));
        pattern_cache[key] = id;
        return id;
    };
    for (int k = 1; k <= m; ++k) {
        const StageParams& sp = s.stage[static_cast<std::size_t>(k - 1)];
        for (int i = 1; i <= k; ++i) {
            ChainData cd;
            Rat th_to = alpha_theta(i);
            Rat span = th_to - in.seed_theta;
            if (span < 0) span = -span;
            Rat dist = endpoint_dist;
            if (in.K.theta_from != in.K.theta_to)
                dist = endpoint_dist * span;  // linearity along the segment
            else
                dist = 0;
            Int steps = dist == 0 ? Int(0) : ceil_rat(dist / sp.eps_k);
            cd.m_count = static_cast<long>(steps) + 1;
            for (long st = 0; st < cd.m_count; ++st) {
                Rat th = cd.m_count == 1
                             ? in.seed_theta
                             : in.seed_theta +
                                   (th_to - in.seed_theta) * Rat(st, cd.m_count - 1);
                cd.pattern_ids.push_back(get_pattern(th, k));
            }
            chains[{k, i}] = std::move(cd);
        }
    }
    // lookahead: N^{1,m+1}_1 = threshold of the seed pattern at stage m+1
    {
        const StageParams& sp = s.stage[static_cast<std::size_t>(m)];
        int K_tr = truncation_for(sp.eps_k);
        GenericPattern g =
            combo_pattern(model, in.K.base_u, in.K.base_v, in.seed_theta, sp.eps_k, K_tr);
        s.lookahead_first_threshold = g.threshold(sp.eps_k);
    }

    // distal blocks per stage
    for (int k = 1; k <= m; ++k) {
        const StageParams& sp = s.stage[static_cast<std::size_t>(k - 1)];
        int K_tr = truncation_for(std::min(sp.eps_k, sp.delta_k));
        s.distal_sources.push_back(distal_blocks(model, in.seed, sp.eps_k, sp.delta_k, K_tr));
    }

    // ---- time assembly ----
    s.checkpoints.assign(static_cast<std::size_t>(m), {});
    Int cursor = 0;  // b of the previous slot
    s.slots.push_back(Slot{Slot::Kind::Target, 1, 0, 0, Int(0), Int(0), Int(0), -1, Rat(0)});
    auto delta_len = [&](const Int& numerator, const Rat& delta) {
        return floor_rat(Rat(numerator) / delta) + 1;
    };
    for (int k = 1; k <= m; ++k) {
        const StageParams& sp = s.stage[static_cast<std::size_t>(k - 1)];
        // dense singletons: c^k_s = prev_end + s K_k
        for (long d = 0; d < sp.t_k; ++d) {
            Int c = cursor + sp.K_k;
            s.slots.push_back(Slot{Slot::Kind::Dense, k, 0, 0, c, c, Int(0),
                                   s.stage_dense[static_cast<std::size_t>(k - 1)]
                                                [static_cast<std::size_t>(d)],
                                   Rat(0)});
            cursor = c;
        }
        for (int i = 1; i <= k; ++i) {
            const ChainData& cd = chains[{k, i}];
            long m_i = cd.m_count;
            for (long ss = 1; ss <= 2 * m_i; ++ss) {
                bool is_distal = ss == 2 * m_i;
                long mirrored = ss <= m_i ? ss : 2 * m_i - ss;  // in [0, m_i]
                Int a_pos = cursor + sp.K_k;
                Int own_threshold;
                Rat theta_here;
                long source_id = -1;
                if (is_distal) {
                    own_threshold = s.distal_sources[static_cast<std::size_t>(k - 1)].threshold;
                    theta_here = in.seed_theta;
                } else {
                    source_id = cd.pattern_ids[static_cast<std::size_t>(mirrored - 1)];
                    own_threshold =
                        s.chain_sources[static_cast<std::size_t>(source_id)].threshold(sp.eps_k);
                    theta_here = cd.m_count == 1
                                     ? in.seed_theta
                                     : in.seed_theta + (alpha_theta(i) - in.seed_theta) *
                                                           Rat(mirrored - 1, cd.m_count - 1);
                }
                // next threshold for the ratio inequality
                Int next_threshold;
                bool stage_final = is_distal && i == k;
                if (!stage_final) {
                    if (!is_distal && ss + 1 <= 2 * m_i) {
                        long nxt = ss + 1 == 2 * m_i
                                       ? -1
                                       : (ss + 1 <= m_i ? ss + 1 : 2 * m_i - (ss + 1));
                        if (nxt < 0)
                            next_threshold =
                                s.distal_sources[static_cast<std::size_t>(k - 1)].threshold;
                        else
                            next_threshold =
                                s.chain_sources[static_cast<std::size_t>(
                                                    cd.pattern_ids[static_cast<std::size_t>(
                                                        nxt - 1)])]
                                    .threshold(sp.eps_k);
                    } else {
                        // distal of chain i < k: next is chain (i+1, 1)
                        const ChainData& nx = chains.at({k, i + 1});
                        next_threshold =
                            s.chain_sources[static_cast<std::size_t>(nx.pattern_ids[0])]
                                .threshold(sp.eps_k);
                    }
                }
                Int b_pos;
                if (stage_final) {
                    const StageParams& np = s.stage[static_cast<std::size_t>(k)];
                    Int n_next = k == m ? s.lookahead_first_threshold : Int(0);
                    if (k < m) {
                        const ChainData& nx = chains.at({k + 1, 1});
                        n_next = s.chain_sources[static_cast<std::size_t>(nx.pattern_ids[0])]
                                     .threshold(s.stage[static_cast<std::size_t>(k)].eps_k);
                    }
                    Int numerator = a_pos + Int(np.t_k + 1) * np.K_k + n_next;
                    b_pos = a_pos + std::max(Int(own_threshold + 1),
                                             delta_len(numerator, sp.delta_k));
                } else {
                    Int numerator = a_pos + Int(sp.K_k) + next_threshold;
                    b_pos = a_pos + std::max(Int(own_threshold + 1),
                                             delta_len(numerator, sp.delta_k));
                }
                // alpha checkpoint at (i = 1, s = m_{1,k})
                if (in.alpha && i == 1 && ss == m_i) {
                    // smallest d with 4 alpha(d) eps_k > a diam + 2 eps_k
                    Rat want = (Rat(a_pos) * model.diameter_bound() + 2 * sp.eps_k) /
                               (4 * sp.eps_k);
                    Int d = in.alpha->first_exceeding(want);
                    s.checkpoints[static_cast<std::size_t>(k - 1)].alpha_d = d;
                    b_pos = std::max(b_pos, a_pos + Int(1));
                    Int b_alpha = delta_len(d, sp.delta_k);  // b > d/delta_k
                    if (b_pos < b_alpha) b_pos = b_alpha;
                }
                Slot sl{is_distal ? Slot::Kind::Distal : Slot::Kind::Chain,
                        k,
                        i,
                        static_cast<int>(ss),
                        a_pos,
                        b_pos,
                        own_threshold,
                        source_id,
                        theta_here};
                s.slots.push_back(sl);
                std::size_t slot_idx = s.slots.size() - 1;
                auto& cp = s.checkpoints[static_cast<std::size_t>(k - 1)];
                if (i == 1 && ss == m_i) cp.closeness_n = b_pos;
                if (ss == m_i) cp.empirical.push_back(slot_idx);
                if (is_distal) cp.separation.push_back(slot_idx);
                cursor = b_pos;
            }
        }
    }
    s.horizon_end = cursor + s.stage[static_cast<std::size_t>(m - 1)].ext;
    s.verify();
    return s;
}

// ---------------------------------------------------------------------------
// Family construction
// ---------------------------------------------------------------------------

struct ScrambleFamily {
    std::shared_ptr<const TraceSchedule> schedule;
    std::map<std::string, SymbolStream> members;
    Rat zeta;
    Word target_word;

    const SymbolStream& member(const std::string& xi) const {
        auto it = members.find(xi);
        if (it == members.end()) throw DomainError("unknown family member: " + xi);
        return it->second;
    }
};

namespace detail {

class MemberBuilder {
  public:
    MemberBuilder(const TraceSchedule& s) : s_(s), model_(s.model) {}

    SymbolStream build(const std::string& xi) {
        if (static_cast<int>(xi.size()) < s_.stages)
            throw DomainError("prefix shorter than the stage count");
        RunSeq seq;
        Int cur_end = 0;
        for (const Slot& sl : s_.slots) {
            const StageParams& sp = s_.params(sl.stage);
            SymbolStream src = source_of(sl, xi);
            Int copy_len = sl.b - sl.a + sp.ext;
            if (sl.kind == Slot::Kind::Target) copy_len = sp.ext;
            // gap [cur_end+1, a]
            if (sl.a > cur_end) {
                Int g = sl.a - cur_end;
                if (cur_end == 0 && sl.kind == Slot::Kind::Target) {
                    // nothing before the initial slot
                } else {
                    append_bridge(seq, cur_end, g, src.at(1));
                }
            }
            append_prefix(seq, src, sl.a + 1, copy_len);
            cur_end = sl.a + copy_len;
        }
        // periodic continuation
        Word tail = tail_word(seq.runs.back().at(cur_end));
        seq.tail = Run{cur_end + 1, 0, std::make_shared<const Word>(std::move(tail)), 0};
        return SymbolStream::from_runs(model_.alphabet(), Side::OneSided, std::move(seq));
    }

  private:
    const TraceSchedule& s_;
    const ShiftModel& model_;
    std::map<std::tuple<int, int, long>, std::shared_ptr<const Word>> bridge_cache_;

    SymbolStream source_of(const Slot& sl, const std::string& xi) const {
        switch (sl.kind) {
            case Slot::Kind::Target:
                return s_.target_source;
            case Slot::Kind::Dense:
                return s_.dense_sources[static_cast<std::size_t>(sl.source)];
            case Slot::Kind::Chain:
                return s_.chain_sources[static_cast<std::size_t>(sl.source)].stream(
                    model_.alphabet());
            case Slot::Kind::Distal: {
                const DistalBlocks& db =
                    s_.distal_sources[static_cast<std::size_t>(sl.stage - 1)];
                char pick = xi[static_cast<std::size_t>(sl.chain_index - 1)];
                if (pick != '1' && pick != '2')
                    throw DomainError("family prefix symbols must be 1 or 2");
                return pick == '1' ? db.x1(model_.alphabet()) : db.x2(model_.alphabet());
            }
        }
        throw InvariantError("unreachable slot kind");
    }

    void append_bridge(RunSeq& seq, const Int& cur_end, const Int& g, Sym next_sym) {
        Sym last = seq.runs.back().at(cur_end);
        long gl = static_cast<long>(g);
        std::shared_ptr<const Word> w;
        auto key = std::make_tuple(static_cast<int>(last), static_cast<int>(next_sym), gl);
        auto it = bridge_cache_.find(key);
        if (it != bridge_cache_.end()) {
            w = it->second;
        } else {
            std::optional<Word> bw;
            if (model_.kind() == ShiftModel::Kind::Beta) {
                Word zeros;
                zeros.syms.assign(static_cast<std::size_t>(gl), 0);
                bw = std::move(zeros);
            } else {
                bw = model_.bridge(Word({last}), Word({next_sym}), gl);
            }
            if (!bw) throw InvariantError("member bridge failed (model not mixing?)");
            w = std::make_shared<const Word>(std::move(*bw));
            bridge_cache_[key] = w;
        }
        seq.runs.push_back(Run{cur_end + 1, g, w, 0});
    }

    void append_prefix(RunSeq& seq, const SymbolStream& src, const Int& at, const Int& len) {
        const RunSeq* rs = src.runs();
        if (!rs) throw CapabilityError("construction sources must be run-backed");
        auto segs = segments_covering(*rs, 1, len);
        for (Run r : segs) {
            r.start += at - 1;
            seq.runs.push_back(std::move(r));
        }
    }

    Word tail_word(Sym last) const {
        if (model_.kind() == ShiftModel::Kind::Beta) return Word({0});
        const TransitionSystem& ts = model_.transition_system();
        return ts.least_cycle(static_cast<int>(last));
    }
};

}  // namespace detail

// Realizes the family members for every requested prefix in {1,2}^stages.
// Members sharing a prefix of stages agree exactly on the realized window of
// those stages.
inline ScrambleFamily construct_family(std::shared_ptr<const TraceSchedule> schedule,
                                       const std::vector<std::string>& prefixes,
                                       std::optional<Int> horizon = std::nullopt) {
    if (horizon && *horizon < schedule->horizon_end)
        throw DomainError("construct_family: horizon below the schedule end");
    ScrambleFamily fam;
    fam.schedule = schedule;
    fam.zeta = schedule->zeta;
    fam.target_word = schedule->target_word;
    detail::MemberBuilder builder(*schedule);
    for (const std::string& xi : prefixes) fam.members.emplace(xi, builder.build(xi));
    return fam;
}

}  // namespace symdyn
