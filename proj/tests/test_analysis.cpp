#include <catch2/catch_amalgamated.hpp>

#include "symdyn/analysis.hpp"
#include "symdyn/construct.hpp"

#include <random>

using namespace symdyn;

namespace {

const Alphabet A2(2);

SymbolStream rand_stream(std::mt19937& rng, int len, int tail = 2) {
    Word w;
    for (int i = 0; i < len; ++i) w.push(static_cast<Sym>(rng() % 2));
    Word t;
    for (int i = 0; i < tail; ++i) t.push(static_cast<Sym>(rng() % 2));
    return SymbolStream::from_word(A2, w, t);
}

Rat naive_phi(const SymbolStream& x, const SymbolStream& y, const Rat& t, long n,
              const ShiftMetric& m, long guard) {
    long c = 0;
    for (long i = 0; i < n; ++i) {
        auto d = distance(shift(x, i), shift(y, i), m, guard);
        REQUIRE((d.certain || d.value < t));
        if (d.value < t) ++c;
    }
    return Rat(c, n);
}

Rat naive_phi_alpha(const SymbolStream& x, const SymbolStream& y, const Rat& t,
                    const AlphaFunction& a, long n, const ShiftMetric& m, long guard) {
    Rat cum = 0;
    long c = 0;
    for (long j = 1; j <= n; ++j) {
        auto d = distance(shift(x, j - 1), shift(y, j - 1), m, guard);
        REQUIRE(d.certain);
        cum += d.value;
        if (cum < a(j) * t) ++c;
    }
    return Rat(c, n);
}

}  // namespace

TEST_CASE("phi_prefix: spec examples") {
    auto m = ShiftMetric::geometric(2);
    auto zeros = SymbolStream::periodic(A2, word_of({0}));
    auto ones = SymbolStream::periodic(A2, word_of({1}));
    auto z01 = SymbolStream::periodic(A2, word_of({0, 1}));
    auto z10 = SymbolStream::periodic(A2, word_of({1, 0}));

    CHECK(phi_prefix(zeros, zeros, Rat(1, 4), 50, m) == 1);
    // d(sigma^i 0^inf, sigma^i 1^inf) = 1/2 always
    CHECK(phi_prefix(zeros, ones, Rat(1, 2), 64, m) == 0);
    CHECK(phi_prefix(zeros, ones, Rat(1), 64, m) == 1);
    CHECK(phi_prefix(z01, z10, Rat(1, 2), 64, m) == 0);
    // monotone in t
    std::mt19937 rng(2);
    for (int tr = 0; tr < 20; ++tr) {
        auto x = rand_stream(rng, 40), y = rand_stream(rng, 40);
        Rat prev = -1;
        for (int k = 8; k >= 0; --k) {
            Rat t = pow_rat(Rat(1, 2), k);
            Rat v = phi_prefix(x, y, t, 30, m);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("phi_prefix matches a brute-force scan (structured and pointwise)") {
    auto m = ShiftMetric::geometric(2);
    std::mt19937 rng(5);
    for (int tr = 0; tr < 40; ++tr) {
        auto x = rand_stream(rng, 60), y = rand_stream(rng, 60);
        long n = 1 + static_cast<long>(rng() % 500);
        Rat t = pow_rat(Rat(1, 2), static_cast<long>(rng() % 8)) * Rat(2, 3);
        Rat fast = phi_prefix(x, y, t, n, m);
        CHECK(fast == naive_phi(x, y, t, n, m, 700));
    }
    // polynomial metric, two-sided
    auto pm = ShiftMetric::polynomial();
    for (int tr = 0; tr < 20; ++tr) {
        Word w;
        for (int i = 0; i < 30; ++i) w.push(static_cast<Sym>(rng() % 2));
        RunSeq qx;
        qx.runs.push_back(Run{-10, 30, w, 0});
        qx.tail = Run{20, 0, word_of({0}), 0};
        qx.head = Run{-10, 0, word_of({0}), 0};
        auto x = SymbolStream::from_runs(A2, Side::TwoSided, std::move(qx));
        Word w2 = w;
        for (int f = 0; f < 3; ++f) w2.syms[rng() % w2.size()] ^= 1;
        RunSeq qy;
        qy.runs.push_back(Run{-10, 30, w2, 0});
        qy.tail = Run{20, 0, word_of({0}), 0};
        qy.head = Run{-10, 0, word_of({0}), 0};
        auto y = SymbolStream::from_runs(A2, Side::TwoSided, std::move(qy));
        long n = 1 + static_cast<long>(rng() % 60);
        Rat t = Rat(1, 1 + static_cast<long>(rng() % 6));
        CHECK(phi_prefix(x, y, t, n, pm) == naive_phi(x, y, t, n, pm, 256));
    }
}

TEST_CASE("phi_alpha_prefix: examples and brute force") {
    auto m = ShiftMetric::geometric(2);
    auto alpha = AlphaFunction::sqrt();
    auto z01 = SymbolStream::periodic(A2, word_of({0, 1}));
    CHECK(phi_alpha_prefix(z01, z01, Rat(1, 8), alpha, 100, m) == 1);

    std::mt19937 rng(11);
    for (int tr = 0; tr < 25; ++tr) {
        Word wx, wy;
        for (int i = 0; i < 50; ++i) wx.push(static_cast<Sym>(rng() % 2));
        for (int i = 0; i < 50; ++i) wy.push(static_cast<Sym>(rng() % 2));
        auto x = SymbolStream::from_word(A2, wx, word_of({0, 1}));
        auto y = SymbolStream::from_word(A2, wy, word_of({1, 0}));
        long n = 1 + static_cast<long>(rng() % 300);
        Rat t = Rat(1, 1 + static_cast<long>(rng() % 8));
        Rat fast = phi_alpha_prefix(x, y, t, alpha, n, m, 512);
        CHECK(fast == naive_phi_alpha(x, y, t, alpha, n, m, 512));
    }
}

TEST_CASE("alpha closeness certificate is a valid lower bound") {
    auto m = ShiftMetric::geometric(2);
    auto alpha = AlphaFunction::sqrt();
    std::mt19937 rng(13);
    for (int tr = 0; tr < 20; ++tr) {
        Word wx, wy;
        for (int i = 0; i < 30; ++i) wx.push(static_cast<Sym>(rng() % 2));
        for (int i = 0; i < 30; ++i) wy.push(static_cast<Sym>(rng() % 2));
        auto x = SymbolStream::from_word(A2, wx, word_of({0, 1}));
        auto y = SymbolStream::from_word(A2, wy, word_of({1, 0}));
        long n = 50 + static_cast<long>(rng() % 200);
        Rat t(1, 2);
        auto cert = alpha_closeness_certified(x, y, t, alpha, n, m);
        Rat exact = naive_phi_alpha(x, y, t, alpha, n, m, 512);
        CHECK(Rat(cert.certified, n) <= exact);
        // Markov: plain closeness at t at least 1 - S_n/(t n)
        Rat plain_lb = plain_closeness_from_cum(cert.cum_at_n, t, n);
        Rat plain = naive_phi(x, y, t, n, m, 512);
        CHECK(plain >= plain_lb);
    }
}

TEST_CASE("densities: spec examples") {
    // all of [1, N]
    std::vector<long> all;
    for (long p = 1; p <= 64; ++p) all.push_back(p);
    auto pa = densities(all, 64, 4);
    CHECK(pa.prefix_upper == 1);
    CHECK(pa.prefix_lower == 1);
    CHECK(pa.banach_upper_lo == 1);
    CHECK(pa.banach_lower_hi == 1);

    // evens
    std::vector<long> evens;
    for (long p = 2; p <= 64; p += 2) evens.push_back(p);
    auto pe = densities(evens, 64, 2);
    CHECK(pe.prefix_upper == Rat(1, 2));  // exact 1/2 at even N
    CHECK(pe.banach_upper_lo >= Rat(1, 2));
    CHECK(pe.banach_upper_lo <= Rat(2, 3));  // shrink-wrapped length-3 window
    CHECK(pe.banach_lower_hi <= Rat(1, 2));

    // dyadic blocks: S = union of [2^2k, 2^(2k+1)) at N = 2^12
    std::vector<long> blocks;
    long N = 1 << 12;
    for (long p = 1; p <= N; ++p) {
        long k = 0;
        while ((1L << (k + 1)) <= p) ++k;
        if (k % 2 == 0) blocks.push_back(p);
    }
    auto pb = densities(blocks, N, 16);
    CHECK(pb.prefix_upper > Rat(3, 5));
    CHECK(pb.prefix_upper < Rat(7, 10));  // ~ 2/3
    CHECK(pb.prefix_lower > Rat(3, 10));
    CHECK(pb.prefix_lower < Rat(2, 5));  // ~ 1/3
    CHECK(pb.banach_upper_lo == 1);      // long solid runs
    CHECK(pb.banach_lower_hi == 0);      // long gaps
}

TEST_CASE("density chain holds exactly on random sets") {
    std::mt19937 rng(17);
    for (int tr = 0; tr < 40; ++tr) {
        long N = 32 + static_cast<long>(rng() % 200);
        std::vector<long> s;
        for (long p = 1; p <= N; ++p)
            if (rng() % 3 == 0) s.push_back(p);
        if (s.empty()) continue;
        auto d = densities(s, N, 8);
        CHECK(d.banach_lower_hi <= d.prefix_lower);
        CHECK(d.prefix_lower <= d.prefix_upper);
        CHECK(d.prefix_upper <= d.banach_upper_lo);
    }
}

TEST_CASE("densities_structured agrees with the exact profile on smalls") {
    std::mt19937 rng(23);
    for (int tr = 0; tr < 30; ++tr) {
        // periodic visit pattern via match_structure on a random stream
        auto x = rand_stream(rng, 24, 3);
        Word u;
        u.push(static_cast<Sym>(rng() % 2));
        if (rng() % 2) u.push(static_cast<Sym>(rng() % 2));
        long N = 200 + static_cast<long>(rng() % 300);
        auto st = match_structure(x, u, 1, N);
        std::vector<long> visits;
        for (long p = 1; p <= N; ++p) {
            bool ok = true;
            for (std::size_t j = 0; j < u.size() && ok; ++j)
                ok = x.at(p + static_cast<long>(j)) == u[j];
            if (ok) visits.push_back(p);
        }
        CHECK(disagreement_count(st, 1, N) == Int(static_cast<long>(visits.size())));
        if (visits.empty()) continue;
        auto exact = densities(visits, N, 16);
        auto fast = densities_structured(st, N, 16);
        CHECK(fast.prefix_upper == exact.prefix_upper);
        CHECK(fast.prefix_lower == exact.prefix_lower);
        CHECK(fast.banach_upper_lo <= exact.banach_upper_lo);
        CHECK(fast.banach_lower_hi >= exact.banach_lower_hi);
    }
}

TEST_CASE("harmonic calibration on the grid") {
    for (long n : {1000L, 10000L, 100000L, 1000000L}) {
        RatIv h = harmonic_range(1, n);
        RatIv l = ln_iv(Rat(n));
        Rat lo = h.lo / l.hi, hi = h.hi / l.lo;
        CHECK(lo >= parse_rat("0.95"));
        CHECK(hi <= parse_rat("1.1"));
    }
}

TEST_CASE("birkhoff oscillation: periodic and constant streams") {
    auto z01 = SymbolStream::periodic(A2, word_of({0, 1}));
    auto phi = Observable::cylinder(Word::parse("1", A2));
    std::vector<Int> grid{10, 20, 40, 80, 160};
    auto r = birkhoff_oscillation(z01, phi, grid);
    CHECK(r.liminf_estimate == Rat(1, 2));
    CHECK(r.limsup_estimate == Rat(1, 2));
    CHECK(r.verdict == BirkhoffResult::Verdict::Regular);

    auto zeros = SymbolStream::periodic(A2, word_of({0}));
    auto rz = birkhoff_oscillation(zeros, phi, grid);
    CHECK(rz.liminf_estimate == 0);
    CHECK(rz.limsup_estimate == 0);
}

TEST_CASE("recurrence profile: periodic point") {
    auto z01 = SymbolStream::periodic(A2, word_of({0, 1}));
    std::vector<Int> cps{64, 128, 256};
    // eps above the orbit diameter: every time visits
    auto big = recurrence_profile(z01, {Rat(1, 2)}, 512, 2, cps);
    // B(x, 1/2) = cylinder of depth 1 = [0]: visits at odd indices; the
    // prefix-ratio max over n >= 16 sits at n = 17
    CHECK(big.evidence[0].profile.prefix_upper == Rat(9, 17));
    CHECK(big.evidence[0].profile.prefix_lower == Rat(1, 2));
    CHECK(big.cx_subset_omega);

    auto small = recurrence_profile(z01, {Rat(1, 8)}, 512, 2, cps);
    CHECK(small.evidence[0].depth == 3);
    CHECK(small.evidence[0].visit_count > 0);
    // periodic visits with spacing 2
    CHECK(small.evidence[0].profile.prefix_upper == Rat(9, 17));
    CHECK(small.evidence[0].profile.prefix_lower == Rat(1, 2));
}

TEST_CASE("dc1 verdict: refuted for pairs asymptotic to the fixed point") {
    auto m = ShiftMetric::geometric(2);
    std::mt19937 rng(31);
    for (int tr = 0; tr < 5; ++tr) {
        Word wx, wy;
        for (int i = 0; i < 20; ++i) wx.push(static_cast<Sym>(rng() % 2));
        for (int i = 0; i < 35; ++i) wy.push(static_cast<Sym>(rng() % 2));
        auto x = SymbolStream::from_word(A2, wx, word_of({0}));
        auto y = SymbolStream::from_word(A2, wy, word_of({0}));
        VerdictInputs in{x, y, m, Rat(3, 16), {Rat(3, 16), Rat(1, 4), Rat(1, 2)},
                         {}, {}, Int(10000), std::nullopt};
        auto rep = dc1_verdict(in);
        CHECK(rep.verdict == ChaosReport::Verdict::RefutedAtHorizon);
    }
    // x = y: trivially refuted (phi = 1 for all t)
    auto z = SymbolStream::periodic(A2, word_of({0, 1}));
    VerdictInputs in{z, z, m, Rat(1, 4), {Rat(1, 4)}, {}, {}, Int(1000), std::nullopt};
    CHECK(dc1_verdict(in).verdict == ChaosReport::Verdict::RefutedAtHorizon);
}

TEST_CASE("dc1 verdict: witnessed on a 2-stage family") {
    const Alphabet a2(2);
    auto model = ShiftModel::full_shift(2);
    auto seed = make_distal_seed(model, Word::parse("01", a2), Word::parse("01", a2), Rat(1));
    BuildInputs bi{model, seed,
                   KSegment{Word::parse("01", a2), Word::parse("01", a2), Rat(1), Rat(1)},
                   Rat(1), std::nullopt, Word::parse("0", a2), Rat(1, 8), Rat(1, 2), 2};
    auto sched = std::make_shared<TraceSchedule>(build_schedule(bi));
    auto fam = construct_family(sched, {"11", "21"});

    VerdictInputs in{fam.member("11"),
                     fam.member("21"),
                     model.metric(),
                     sched->zeta - 5 * sched->params(1).eps_k,
                     {sched->zeta - 5 * sched->params(1).eps_k, Rat(1, 4), Rat(1, 2)},
                     {},
                     {},
                     sched->horizon_end,
                     std::nullopt};
    for (int k = 1; k <= 2; ++k) {
        const auto& cp = sched->checkpoints[static_cast<std::size_t>(k - 1)];
        const auto& sp = sched->params(k);
        for (std::size_t idx : cp.separation) {
            const Slot& sl = sched->slots[idx];
            if (sl.chain_index != 1) continue;
            in.separation.push_back(CheckpointClaim{sl.b, k, 2 * sp.delta_k, sp.eps_k});
        }
        in.closeness.push_back(CheckpointClaim{cp.closeness_n, k, sp.delta_k, sp.eps_k});
    }
    auto rep = dc1_verdict(in);
    CHECK(rep.verdict == ChaosReport::Verdict::Witnessed);
    CHECK_FALSE(rep.witness_times.empty());
}
