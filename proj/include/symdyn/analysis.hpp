#pragma once

#include "symdyn/alpha.hpp"
#include "symdyn/measure.hpp"
#include "symdyn/metric.hpp"
#include "symdyn/observable.hpp"
#include "symdyn/stream_kernels.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace symdyn {

// ---------------------------------------------------------------------------
// Phi statistics
// ---------------------------------------------------------------------------

// Coordinate window forced by "d < t": agreement of the first w coordinates
// (geometric) or a clear two-sided window of radius r0-1 (polynomial).
inline long closeness_window(const ShiftMetric& m, const Rat& t) {
    if (t > 1) return 0;
    if (t <= 0) throw DomainError("closeness threshold must be positive");
    if (m.kind == ShiftMetric::Kind::Geometric) return m_epsilon(m, t);
    // d1 < t iff nearest disagreement distance >= r0 = floor(1/t - 1) + 1
    Int r0 = floor_rat(Rat(1) / t - 1) + 1;
    return 2 * static_cast<long>(r0) - 1;
}

// (1/n) #{0 <= i < n : d(sigma^i x, sigma^i y) < t}, exact.  Uses the run
// structure when available, otherwise a pointwise scan with a certainty
// guard (raising PrecisionError if a distance straddles t at max guard).
inline Rat phi_prefix(const SymbolStream& x, const SymbolStream& y, const Rat& t,
                      const Int& n, const ShiftMetric& metric, long guard = 64) {
    if (n < 1) throw DomainError("phi_prefix: n >= 1");
    if (t > 1) return Rat(1);
    long w = closeness_window(metric, t);
    if (w == 0) return Rat(1);
    bool structured = x.runs() && y.runs();
    if (structured) {
        if (metric.kind == ShiftMetric::Kind::Geometric) {
            auto st = disagreement_structure(x, y, 1, n + w);
            auto walk = gap_walk(st);
            Int good = clear_window_count(walk, 1, n, w);
            return Rat(good, n);
        }
        // polynomial: window [i - (r0-1), i + (r0-1)] must be clear
        long r = (w - 1) / 2;
        auto st = disagreement_structure(x, y, -Int(r), n - 1 + r);
        auto walk = gap_walk(st);
        Int good = clear_window_count(walk, -Int(r), n - 1 - Int(r) + 0, w);
        // j = i - r runs over [-r, n-1-r]
        return Rat(good, n);
    }
    if (n > Int(1) << 22) throw BudgetError("phi_prefix: rule-backed streams too long");
    Int count = 0;
    long g = guard;
    for (Int i = 0; i < n; ++i) {
        while (true) {
            auto d = distance(shift(x, i), shift(y, i), metric, g);
            if (d.certain || d.value < t) {
                if (d.value < t) ++count;
                break;
            }
            if (g > (1L << 20))
                throw PrecisionError("phi_prefix: distance straddles t at max guard");
            g *= 2;
        }
    }
    return Rat(count, n);
}

// (1/n) #{1 <= j <= n : sum_{i<j} d(sigma^i x, sigma^i y) < alpha(j) t},
// exact rational cumulative sums; small-scale route.
inline Rat phi_alpha_prefix(const SymbolStream& x, const SymbolStream& y, const Rat& t,
                            const AlphaFunction& alpha, const Int& n,
                            const ShiftMetric& metric, long guard = 64) {
    if (n < 1) throw DomainError("phi_alpha_prefix: n >= 1");
    if (n > Int(1) << 18)
        throw BudgetError("phi_alpha_prefix: use the certified checkpoint route at scale");
    long nn = static_cast<long>(n);
    Rat cum_lo = 0, cum_hi = 0;  // interval when some distances stay unresolved
    Int count = 0;
    for (long j = 1; j <= nn; ++j) {
        auto d = distance(shift(x, j - 1), shift(y, j - 1), metric, guard);
        if (d.certain) {
            cum_lo += d.value;
            cum_hi += d.value;
        } else {
            cum_hi += d.value;  // true distance in [0, bound]
        }
        Rat thr = alpha(j) * t;
        if (cum_hi < thr)
            ++count;
        else if (cum_lo < thr)
            throw PrecisionError("phi_alpha_prefix: cumulative sum straddles the threshold");
    }
    return Rat(count, n);
}

// Certified lower bound on #{1 <= j <= n : S_j < alpha(j) t} from the
// monotone bound S_j <= S_n: every j past the first index where
// alpha(j) t exceeds a certified upper bound on S_n qualifies.
struct AlphaCloseness {
    Int certified;  // lower bound on the count
    Int n;
    RatIv cum_at_n;
    Rat fraction_lower() const { return Rat(certified, n); }
};

inline AlphaCloseness alpha_closeness_certified(const SymbolStream& x, const SymbolStream& y,
                                                const Rat& t, const AlphaFunction& alpha,
                                                const Int& n, const ShiftMetric& metric) {
    if (!(x.runs() && y.runs()))
        throw CapabilityError("alpha_closeness_certified needs run-backed streams");
    AlphaCloseness out;
    out.n = n;
    if (metric.kind == ShiftMetric::Kind::Geometric) {
        auto st = disagreement_structure(x, y, 1, n + 8);
        auto walk = gap_walk(st);
        out.cum_at_n = cum_geometric(walk, n, metric.base);
    } else {
        // the polynomial sum needs every disagreement of the pair in view
        auto [lo, hi] = pair_support_window(x, y);
        auto st = disagreement_structure(x, y, std::min(lo, Int(-1)), std::max(hi, Int(n + 1)));
        auto walk = gap_walk(st);
        out.cum_at_n = cum_polynomial(walk, n);
    }
    Int j_star = alpha.first_exceeding(out.cum_at_n.hi / t);
    out.certified = j_star > n ? Int(0) : n - j_star + 1;
    return out;
}

// Finite alpha => plain implication (Markov route): the number of i < n with
// d_i >= t is at most S_n / t, so the plain closeness fraction at t is at
// least 1 - S_n/(t n).  Returns the certified lower bound.
inline Rat plain_closeness_from_cum(const RatIv& cum_at_n, const Rat& t, const Int& n) {
    Rat bad_upper = cum_at_n.hi / t;
    Rat frac = 1 - bad_upper / Rat(n);
    return frac < 0 ? Rat(0) : frac;
}

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

struct DensityProfile {
    Int N;
    long window_floor = 16;
    Rat prefix_upper, prefix_lower;       // exact extrema over prefixes
    Rat banach_upper_lo, banach_upper_hi; // certified bracket of B*
    Rat banach_lower_lo, banach_lower_hi; // certified bracket of B_*
    bool banach_exact = false;
};

// Exact profile of a materialized visit set S subset [1, N].
inline DensityProfile densities(const std::vector<long>& visits, long N, long w0 = 16) {
    if (N < 1) throw DomainError("densities: N >= 1");
    if (w0 < 1) throw DomainError("densities: window floor >= 1");
    if (N > (1L << 22)) throw BudgetError("densities: materialized N too large");
    std::vector<long> pre(static_cast<std::size_t>(N) + 1, 0);
    {
        std::size_t vi = 0;
        for (long p = 1; p <= N; ++p) {
            pre[static_cast<std::size_t>(p)] = pre[static_cast<std::size_t>(p - 1)];
            if (vi < visits.size() && visits[vi] == p) {
                ++pre[static_cast<std::size_t>(p)];
                ++vi;
            } else if (vi < visits.size() && visits[vi] < p) {
                throw DomainError("densities: visits must be sorted and in [1,N]");
            }
        }
        if (vi != visits.size()) throw DomainError("densities: visit outside [1,N]");
    }
    DensityProfile out;
    out.N = N;
    out.window_floor = w0;
    out.banach_exact = true;
    // prefix extrema over n >= w0 (length-1 prefixes trivialize the
    // asymptotic estimates, the same finite-size artifact as for Banach)
    if (N < w0) throw DomainError("densities: N below the window floor");
    long bu_n = w0, bu_c = pre[static_cast<std::size_t>(w0)];
    long bl_n = w0, bl_c = pre[static_cast<std::size_t>(w0)];
    for (long p = w0; p <= N; ++p) {
        long c = pre[static_cast<std::size_t>(p)];
        if (Int(c) * bu_n > Int(bu_c) * p) {
            bu_c = c;
            bu_n = p;
        }
        if (Int(c) * bl_n < Int(bl_c) * p) {
            bl_c = c;
            bl_n = p;
        }
    }
    out.prefix_upper = Rat(bu_c, bu_n);
    out.prefix_lower = Rat(bl_c, bl_n);
    // Banach extrema over windows of length >= w0 (exact, prefix sums)
    long up_c = 0, up_l = 1, lo_c = 1, lo_l = 1;
    bool first = true;
    for (long i = 1; i + w0 - 1 <= N; ++i) {
        for (long j = i + w0 - 1; j <= N; ++j) {
            long c = pre[static_cast<std::size_t>(j)] - pre[static_cast<std::size_t>(i - 1)];
            long len = j - i + 1;
            if (first) {
                up_c = lo_c = c;
                up_l = lo_l = len;
                first = false;
                continue;
            }
            if (Int(c) * up_l > Int(up_c) * len) {
                up_c = c;
                up_l = len;
            }
            if (Int(c) * lo_l < Int(lo_c) * len) {
                lo_c = c;
                lo_l = len;
            }
        }
    }
    if (first) throw DomainError("densities: N below the window floor");
    out.banach_upper_lo = out.banach_upper_hi = Rat(up_c, up_l);
    out.banach_lower_lo = out.banach_lower_hi = Rat(lo_c, lo_l);
    return out;
}

namespace detail {

// count of marked positions in [piece-relative] prefix ending at `last`
inline Int structure_count_upto(const DisStructure& st, const Int& last) {
    if (st.empty()) return 0;
    return disagreement_count(st, st.front().start, last);
}

}  // namespace detail

// Certified profile over a periodic-piece visit structure covering [1, N]:
// prefix extrema are exact (candidate positions at piece/period boundaries),
// Banach densities come as brackets from window candidates plus per-piece
// upper bounds.
inline DensityProfile densities_structured(const DisStructure& st, const Int& N,
                                           long w0 = 16) {
    DensityProfile out;
    out.N = N;
    out.window_floor = w0;
    out.banach_exact = false;
    if (st.empty() || st.front().start != 1)
        throw DomainError("densities_structured: structure must start at 1");
    // --- prefix extrema over n in [w0, N]: evaluate count(n)/n at
    // candidate n's ---
    if (N < w0) throw DomainError("densities_structured: N below the window floor");
    std::vector<Int> candidates{Int(w0), N};
    for (const DisPiece& p : st) {
        if (p.start > N) break;
        candidates.push_back(std::min(N, p.start));
        candidates.push_back(std::min(N, p.end));
        Int vstart = p.start - Int(p.align);
        // interval boundaries in the periods at the piece edges and at the
        // window-floor clamp, where the ratio extrema can sit
        Int first_per = ceil_div(p.start - vstart, p.period);
        Int last_per = floor_div(p.end + 1 - vstart, p.period) - 1;
        Int floor_per = floor_div(Int(w0) - vstart, p.period);
        for (Int per : std::vector<Int>{first_per, Int(first_per + 1), last_per,
                                        Int(last_per - 1), floor_per, Int(floor_per + 1)}) {
            if (per < 0) continue;
            Int base = vstart + per * p.period;
            for (auto& [ia, ib] : p.intervals) {
                for (Int cand : std::vector<Int>{Int(base + ia - 1), Int(base + ib),
                                                 Int(base + ia), Int(base + ib + 1)}) {
                    if (cand >= 1 && cand <= N && cand >= p.start - 1 && cand <= p.end + 1)
                        candidates.push_back(cand);
                }
            }
        }
    }
    bool first = true;
    for (const Int& n : candidates) {
        if (n < w0 || n > N) continue;
        Int c = detail::structure_count_upto(st, n);
        Rat dens(c, n);
        if (first) {
            out.prefix_upper = out.prefix_lower = dens;
            first = false;
        } else {
            if (dens > out.prefix_upper) out.prefix_upper = dens;
            if (dens < out.prefix_lower) out.prefix_lower = dens;
        }
    }
    // --- Banach brackets: certified one-sided bounds from window candidates
    // (exhibited windows bound B* from below and B_* from above; the trivial
    // sides stay at 0 and 1).  Floor-length windows are anchored at mark-run
    // boundaries, where the sliding-density extrema sit. ---
    Rat best_up(0), best_lo(1);
    bool any_window = false;
    auto probe = [&](const Int& s) {
        if (s < 1 || s + w0 - 1 > N) return;
        Int c = disagreement_count(st, s, s + w0 - 1);
        Rat dens(c, w0);
        if (dens > best_up) best_up = dens;
        if (dens < best_lo) best_lo = dens;
        any_window = true;
    };
    for (const DisPiece& p : st) {
        if (p.start > N) break;
        Int pe = std::min(p.end, N);
        Int plen = pe - p.start + 1;
        if (plen < w0) continue;
        Int vstart = p.start - Int(p.align);
        Int mid_per = floor_div((p.start + pe) / 2 - vstart, p.period);
        probe(p.start);
        probe(pe - w0 + 1);
        for (auto& [ia, ib] : p.intervals) {
            Int base = vstart + mid_per * p.period;
            probe(base + ia);            // window opening on a mark run
            probe(base + ib + 1);        // window opening just past one
            probe(base + ia - w0 + ((ib - ia) + 1));  // closing alignment
        }
        // full-piece window
        Int c = disagreement_count(st, p.start, pe);
        Rat dens(c, plen);
        if (dens > best_up) best_up = dens;
        if (dens < best_lo) best_lo = dens;
    }
    if (!any_window) {
        // every piece shorter than the floor: probe window starts at piece
        // boundaries spanning pieces
        for (const DisPiece& p : st) probe(p.start);
        probe(Int(1));
    }
    if (!any_window) throw DomainError("densities_structured: N below the window floor");
    out.banach_upper_lo = best_up;
    out.banach_upper_hi = 1;
    out.banach_lower_lo = 0;
    out.banach_lower_hi = best_lo;
    return out;
}

// ---------------------------------------------------------------------------
// Birkhoff oscillation
// ---------------------------------------------------------------------------

struct BirkhoffResult {
    std::vector<std::pair<Int, Rat>> averages;  // (n, running average)
    Rat liminf_estimate, limsup_estimate;       // min/max over the tail half
    enum class Verdict { Regular, Irregular } verdict = Verdict::Regular;
};

// Exact running averages of a depth-m observable at the grid points; the
// tail half of the grid supplies the liminf/limsup estimates.
inline BirkhoffResult birkhoff_oscillation(const SymbolStream& x, const Observable& phi,
                                           const std::vector<Int>& n_grid,
                                           std::optional<std::pair<Rat, Rat>> target = {},
                                           Rat tol = Rat(1, 20)) {
    if (n_grid.empty()) throw DomainError("birkhoff_oscillation: empty grid");
    BirkhoffResult out;
    for (const Int& n : n_grid) {
        Rat avg = FiniteMeasure::empirical(x, n, static_cast<int>(phi.depth())).pair(phi);
        out.averages.push_back({n, avg});
    }
    std::size_t tail_from = out.averages.size() / 2;
    out.liminf_estimate = out.averages[tail_from].second;
    out.limsup_estimate = out.averages[tail_from].second;
    for (std::size_t i = tail_from; i < out.averages.size(); ++i) {
        const Rat& v = out.averages[i].second;
        if (v < out.liminf_estimate) out.liminf_estimate = v;
        if (v > out.limsup_estimate) out.limsup_estimate = v;
    }
    if (target) {
        Rat da = out.liminf_estimate - target->first;
        if (da < 0) da = -da;
        Rat db = out.limsup_estimate - target->second;
        if (db < 0) db = -db;
        if (da <= tol && db <= tol && target->first < target->second)
            out.verdict = BirkhoffResult::Verdict::Irregular;
        else
            out.verdict = (out.limsup_estimate - out.liminf_estimate > 2 * tol)
                              ? BirkhoffResult::Verdict::Irregular
                              : BirkhoffResult::Verdict::Regular;
    } else {
        out.verdict = (out.limsup_estimate - out.liminf_estimate > 2 * tol)
                          ? BirkhoffResult::Verdict::Irregular
                          : BirkhoffResult::Verdict::Regular;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Recurrence profiles
// ---------------------------------------------------------------------------

struct RecurrenceEvidence {
    Rat eps;
    long depth;  // mEps(eps): the cylinder depth of B(x, eps)
    Int visit_count;
    DensityProfile profile;
    std::vector<std::pair<Int, Rat>> prefix_density_at;  // (n, density)
};

struct RecurrenceProfileResult {
    std::vector<RecurrenceEvidence> evidence;
    std::vector<Word> cx_shadow;     // union of checkpoint empirical supports
    std::vector<Word> omega_shadow;  // words of the tail window
    bool cx_subset_omega = false;
};

inline RecurrenceProfileResult recurrence_profile(const SymbolStream& x,
                                                  const std::vector<Rat>& eps_grid,
                                                  const Int& horizon, int depth,
                                                  const std::vector<Int>& checkpoints,
                                                  long w0 = 16) {
    RecurrenceProfileResult out;
    ShiftMetric metric = ShiftMetric::geometric(x.alphabet().size);
    for (const Rat& eps : eps_grid) {
        RecurrenceEvidence ev;
        ev.eps = eps;
        ev.depth = m_epsilon(metric, eps);
        if (ev.depth == 0) throw DomainError("recurrence_profile: eps too large");
        Word ball = x.window(1, static_cast<std::size_t>(ev.depth));
        auto st = match_structure(x, ball, 1, horizon);
        ev.visit_count = disagreement_count(st, 1, horizon);
        ev.profile = densities_structured(st, horizon, w0);
        for (const Int& n : checkpoints)
            if (n <= horizon)
                ev.prefix_density_at.push_back({n, Rat(disagreement_count(st, 1, n), n)});
        out.evidence.push_back(std::move(ev));
    }
    // measure-center shadow: union of supports of checkpoint empirical measures
    std::set<std::vector<Sym>> cx;
    for (const Int& n : checkpoints) {
        if (n > horizon) continue;
        for (const Word& w : FiniteMeasure::empirical(x, n, depth).support(depth))
            cx.insert(w.syms);
    }
    for (auto& s : cx) out.cx_shadow.push_back(Word(s));
    // omega shadow: words of the tail half window
    Int tail_from = horizon / 2 + 1;
    for (const Word& w : occurring_words(x, tail_from, horizon - tail_from + 1, depth))
        out.omega_shadow.push_back(w);
    std::set<std::vector<Sym>> om;
    for (const Word& w : out.omega_shadow) om.insert(w.syms);
    out.cx_subset_omega = true;
    for (const Word& w : out.cx_shadow)
        if (!om.count(w.syms)) out.cx_subset_omega = false;
    return out;
}

// ---------------------------------------------------------------------------
// DC1 verdicts
// ---------------------------------------------------------------------------

struct CheckpointClaim {
    Int n;
    int stage = 0;
    Rat bound;  // separation: fraction <= bound; closeness: fraction >= 1 - bound
    Rat eps_k;  // stage tolerance, for eligibility filtering
};

struct ChaosReport {
    std::string pair_id;
    Rat t0;
    std::vector<Rat> t_grid;
    // per t: phi-prefix curve at the checkpoint times
    std::vector<std::pair<Rat, std::vector<std::pair<Int, Rat>>>> curves;
    Rat separation_liminf_estimate{1};
    Rat closeness_limsup_estimate{0};
    std::vector<Int> witness_times;  // times with d >= t0 inside separation slots
    enum class Verdict { Witnessed, RefutedAtHorizon, Inconclusive };
    Verdict verdict = Verdict::Inconclusive;
    bool alpha_witnessed = false;
    bool alpha_implies_plain_checked = false;
    std::string notes;
};

struct VerdictInputs {
    SymbolStream x, y;
    ShiftMetric metric;
    Rat t0;
    std::vector<Rat> t_grid;
    std::vector<CheckpointClaim> separation;  // phi(t0) at n <= bound
    std::vector<CheckpointClaim> closeness;   // phi(t) at n >= 1 - bound for eligible t
    Int horizon;
    std::optional<AlphaFunction> alpha;
};

inline ChaosReport dc1_verdict(const VerdictInputs& in) {
    ChaosReport rep;
    rep.t0 = in.t0;
    rep.t_grid = in.t_grid;
    bool witnessed = !in.separation.empty() && !in.closeness.empty();

    // Phi curves per t at all checkpoint times
    std::vector<Int> times;
    for (const auto& c : in.separation) times.push_back(c.n);
    for (const auto& c : in.closeness) times.push_back(c.n);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    for (const Rat& t : in.t_grid) {
        std::vector<std::pair<Int, Rat>> curve;
        for (const Int& n : times) curve.push_back({n, phi_prefix(in.x, in.y, t, n, in.metric)});
        rep.curves.push_back({t, std::move(curve)});
    }

    // separation claims at t0
    for (const auto& c : in.separation) {
        Rat frac = phi_prefix(in.x, in.y, in.t0, c.n, in.metric);
        if (frac < rep.separation_liminf_estimate) rep.separation_liminf_estimate = frac;
        if (frac > c.bound) witnessed = false;
    }
    // closeness claims for eligible grid t (4 eps_k < t)
    for (const Rat& t : in.t_grid) {
        bool any = false;
        for (const auto& c : in.closeness) {
            if (!(4 * c.eps_k < t)) continue;
            any = true;
            Rat frac;
            if (in.alpha) {
                auto cert = alpha_closeness_certified(in.x, in.y, t, *in.alpha, c.n, in.metric);
                frac = cert.fraction_lower();
                // finite alpha => plain: the same checkpoint carries a plain
                // witness at fraction >= 1 - bound as well (Markov route)
                Rat plain = plain_closeness_from_cum(cert.cum_at_n, t, c.n);
                rep.alpha_implies_plain_checked = true;
                if (plain < 1 - 2 * c.bound) witnessed = false;
            } else {
                frac = phi_prefix(in.x, in.y, t, c.n, in.metric);
            }
            if (frac > rep.closeness_limsup_estimate) rep.closeness_limsup_estimate = frac;
            if (frac < 1 - c.bound) witnessed = false;
        }
        if (!any) witnessed = false;
    }
    if (in.alpha) rep.alpha_witnessed = witnessed;

    // witness times: a time with d >= t0 just past each separation checkpoint start
    for (const auto& c : in.separation) {
        long w = closeness_window(in.metric, in.t0);
        for (Int i = c.n - 1; i >= 0 && i >= c.n - 64; --i) {
            bool clear = true;
            for (long o = 1; o <= w && clear; ++o)
                clear = in.x.at(i + o) == in.y.at(i + o);
            if (!clear) {
                rep.witness_times.push_back(i);
                break;
            }
        }
    }

    if (witnessed) {
        rep.verdict = ChaosReport::Verdict::Witnessed;
        return rep;
    }

    // refutation: closeness fraction >= 0.99 at the horizon for every grid t
    // and for t0 itself (no separation possible at this horizon)
    bool refuted = true;
    for (const Rat& t : in.t_grid) {
        Rat frac = phi_prefix(in.x, in.y, t, in.horizon, in.metric);
        if (frac < Rat(99, 100)) refuted = false;
    }
    if (phi_prefix(in.x, in.y, in.t0, in.horizon, in.metric) < Rat(99, 100)) refuted = false;
    rep.verdict = refuted ? ChaosReport::Verdict::RefutedAtHorizon
                          : ChaosReport::Verdict::Inconclusive;
    return rep;
}

}  // namespace symdyn
