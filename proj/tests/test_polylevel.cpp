#include <catch2/catch_amalgamated.hpp>

#include "symdyn/level_set.hpp"
#include "symdyn/poly_construct.hpp"

#include <random>

using namespace symdyn;

namespace {
const Alphabet A2(2);
}

TEST_CASE("polynomial construction: schedule, members, checkpoints") {
    auto alpha = AlphaFunction::sqrt();
    // the schedule grows doubly exponentially (alpha(a_k) must dominate
    // 2^k d_{k-1}); five stages need a huge horizon but tiny run tables
    Int horizon = pow_int(10, 200);
    auto pc = polynomial_construction(alpha, {"11111", "21111", "22111"}, horizon, 5);
    CHECK(pc.realized() == 5);
    CHECK_NOTHROW(pc.verify());

    const auto& x = pc.member("11111");
    const auto& y = pc.member("21111");
    // negatives are zero; first block differs
    CHECK(x.at(-5) == 0);
    CHECK(y.at(-5) == 0);
    const PolyStage& s1 = pc.stages[0];
    CHECK(x.at(s1.c + 1) == 0);  // xi_1 = '1' encodes symbol 0... block value
    CHECK(y.at(s1.c + 1) == 1);

    // weighted-closeness fraction >= 1 - 2^-k at the b_k checkpoints
    for (int k = 1; k <= pc.realized(); ++k) {
        Rat frac = poly_checkpoint_fraction(pc, "11111", "21111", k);
        CHECK(frac >= 1 - pow_rat(Rat(1, 2), k));
    }

    // brute-force cross-check of the certified fraction at stage 1
    {
        const PolyStage& st = pc.stages[0];
        long n = static_cast<long>(st.b);
        auto m = ShiftMetric::polynomial();
        Rat thr = PolyConstruction::stage_threshold(1);
        Rat cum = 0;
        long count = 0;
        // exact distances: disagreements only inside realized blocks
        std::vector<long> dis;
        for (long p = 0; p <= static_cast<long>(pc.stages[0].d.back()) + 2; ++p)
            if (x.at(p) != y.at(p)) dis.push_back(p);
        for (long j = 1; j <= n; ++j) {
            long i = j - 1;
            long best = -1;
            for (long p : dis) {
                long dd = p >= i ? p - i : i - p;
                if (best < 0 || dd < best) best = dd;
            }
            if (best >= 0) cum += Rat(1, best + 1);
            if (cum < alpha(j) * thr) ++count;
        }
        Rat exact(count, n);
        Rat certified = poly_checkpoint_fraction(pc, "11111", "21111", 1);
        CHECK(certified <= exact);
        (void)m;
    }

    // log-like alpha is rejected by the liminf proxy
    CHECK_THROWS_AS(polynomial_construction(AlphaFunction::log(), {"1"}, Int(100000)),
                    DomainError);
    // empty prefix set: schedule only
    auto none = polynomial_construction(alpha, {}, Int(100000));
    CHECK(none.members.empty());
}

TEST_CASE("polynomial negative side: bounded-index pairs keep the ratio large") {
    // pairs differing at a bounded index: cumulative d1 ~ harmonic, so the
    // ratio against ceil-log alpha stays bounded away from zero
    std::mt19937 rng(7);
    auto alpha = AlphaFunction::log();
    for (int tr = 0; tr < 5; ++tr) {
        long m0 = static_cast<long>(rng() % 8);
        RunSeq qx, qy;
        auto zeros = std::make_shared<const Word>(word_of({0}));
        qx.head = Run{0, 0, zeros, 0};
        qx.tail = Run{0, 0, zeros, 0};
        Word wy;
        for (long i = 0; i <= m0; ++i) wy.push(i == m0 ? 1 : 0);
        qy.head = Run{0, 0, zeros, 0};
        qy.runs.push_back(Run{0, m0 + 1, wy, 0});
        qy.tail = Run{m0 + 1, 0, zeros, 0};
        auto x = SymbolStream::from_runs(A2, Side::TwoSided, std::move(qx));
        auto y = SymbolStream::from_runs(A2, Side::TwoSided, std::move(qy));
        for (long n : {1000L, 10000L}) {
            auto st = disagreement_structure(x, y, -(n + 4), n + 4);
            auto walk = gap_walk(st);
            RatIv cum = cum_polynomial(walk, n);
            Rat ratio_lb = cum.lo / alpha(n);
            CHECK(ratio_lb >= Rat(1, 5));
        }
    }
}

TEST_CASE("level-set family targets the Birkhoff window") {
    auto model = ShiftModel::full_shift(2);
    auto phi = Observable::cylinder(Word::parse("1", A2));
    auto res = level_set_family(model, phi, Rat(1, 4), Rat(1, 2), 2, {"11", "21"});

    CHECK(res.mu1.pair(phi) < Rat(1, 4));
    CHECK(res.mu2.pair(phi) > Rat(1, 2));
    CHECK(res.nu1.pair(phi) == Rat(1, 4));
    CHECK(res.nu2.pair(phi) == Rat(1, 2));

    // checkpoint running averages sit within the stage tolerance of the
    // scheduled chain values
    const auto& sched = *res.family.schedule;
    const auto& x = res.family.member("11");
    for (int k = 1; k <= 2; ++k) {
        const auto& cp = sched.checkpoints[static_cast<std::size_t>(k - 1)];
        const auto& sp = sched.params(k);
        Rat lip = observable_lipschitz(A2, phi);
        for (std::size_t idx : cp.empirical) {
            const Slot& sl = sched.slots[idx];
            Rat sched_value = sched.K.measure_at(A2, sl.theta).pair(phi);
            Rat avg = FiniteMeasure::empirical(x, sl.b, 1).pair(phi);
            Rat diff = avg - sched_value;
            if (diff < 0) diff = -diff;
            CHECK(diff <= lip * (5 * sp.eps_k + 2 * sp.delta_k));
        }
    }

    // a below the achievable interval
    CHECK_THROWS_AS(level_set_family(model, phi, Rat(-1), Rat(1, 2), 1, {"1"}), DomainError);
}

TEST_CASE("level-set: a == b gives a single-point K") {
    auto model = ShiftModel::full_shift(2);
    auto phi = Observable::cylinder(Word::parse("1", A2));
    auto res = level_set_family(model, phi, Rat(1, 2), Rat(1, 2), 1, {"1", "2"});
    CHECK(res.theta1 == res.theta2);
    CHECK(res.nu1.pair(phi) == Rat(1, 2));
}

TEST_CASE("backward trace onto W^u(z)") {
    auto model = ShiftModel::golden_mean();
    auto seed = make_distal_seed(model, Word::parse("01", A2), Word::parse("01", A2), Rat(1));
    BuildInputs in{model, seed,
                   KSegment{Word::parse("01", A2), Word::parse("01", A2), Rat(1), Rat(1)},
                   Rat(1), std::nullopt, Word::parse("0", A2), Rat(1, 16), Rat(1, 2), 1};
    auto sched = std::make_shared<TraceSchedule>(build_schedule(in));
    auto fam = construct_family(sched, {"1", "2"});

    // z two-sided: ...10101|0... tail; z ends with 1 at index 0 so the
    // junction to a member starting with 0 is fine; try z ending in 0 as well
    auto z = SymbolStream::periodic(A2, word_of({1, 0}), Side::TwoSided);
    auto res = backward_trace(model, z, fam, Rat(1));
    CHECK(res.feasible);
    for (const auto& [xi, x] : res.members) {
        for (long i = 0; i >= -40; --i) CHECK(x.at(i) == z.at(i));
        CHECK(model.window_admissible(x, -20, 60));
    }
    // tail sum bound honored: sum_{i>=0} d(sigma^-i x, sigma^-i z) <= bound
    auto metric = model.metric();
    for (const auto& [xi, x] : res.members) {
        Rat sum = 0;
        for (long i = 0; i < 64; ++i) {
            auto d = distance(shift(x, -i), shift(z, -i), metric, 80);
            sum += d.value;  // upper estimate
        }
        CHECK(sum <= res.achieved_bound + Rat(1, 1000));
    }

    // infeasible eps reports the minimal feasible value instead
    auto strict = backward_trace(model, z, fam, Rat(1, 1024));
    CHECK_FALSE(strict.feasible);
    CHECK(strict.minimal_feasible_eps > Rat(1, 1024));
}
