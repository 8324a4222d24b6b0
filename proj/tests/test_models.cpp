#include <catch2/catch_amalgamated.hpp>

#include "symdyn/beta.hpp"
#include "symdyn/model.hpp"
#include "symdyn/sofic.hpp"
#include "symdyn/transition.hpp"

#include <random>
#include <set>

using namespace symdyn;

namespace {

// Oracle: gcd of simple-cycle lengths via DFS enumeration (n <= 8).
void cycles_from(const TransitionSystem& ts, int start, int cur, int len,
                 std::vector<char>& on_path, Int& g) {
    for (int next : ts.usable()) {
        if (!ts.edge(cur, next)) continue;
        if (next == start) g = boost::multiprecision::gcd(g, Int(len + 1));
        else if (!on_path[next]) {
            on_path[next] = 1;
            cycles_from(ts, start, next, len + 1, on_path, g);
            on_path[next] = 0;
        }
    }
}

int cycle_gcd_oracle(const TransitionSystem& ts) {
    Int g = 0;
    for (int start : ts.usable()) {
        std::vector<char> on_path(ts.alphabet().size, 0);
        on_path[start] = 1;
        cycles_from(ts, start, start, 0, on_path, g);
    }
    return g == 0 ? 0 : static_cast<int>(g);
}

// Oracle: bridge existence from boolean matrix power.
bool bridge_exists_oracle(const TransitionSystem& ts, const Word& u, const Word& v, long L) {
    auto pw = ts.bool_power(static_cast<int>(L) + 1);
    return pw[u[u.size() - 1]][v[0]] != 0;
}

TransitionSystem ring_with_chord() {
    // 6-symbol ring plus a chord keeping residues mod 3
    std::vector<std::vector<int>> m(6, std::vector<int>(6, 0));
    for (int i = 0; i < 6; ++i) m[i][(i + 1) % 6] = 1;
    m[0][4] = 1;
    return TransitionSystem(Alphabet(6), std::move(m));
}

}  // namespace

TEST_CASE("sft admissibility") {
    auto gm = TransitionSystem::golden_mean();
    CHECK_FALSE(gm.admissible(Word::parse("0110", Alphabet(2))));
    CHECK(gm.admissible(Word::parse("01010", Alphabet(2))));
    auto full = TransitionSystem::full(Alphabet(2));
    CHECK(full.admissible(Word::parse("0110", Alphabet(2))));

    // closed under subwords (random check)
    std::mt19937 rng(5);
    for (int t = 0; t < 200; ++t) {
        Word w;
        for (int i = 0; i < 10; ++i) w.push(static_cast<Sym>(rng() % 2));
        if (gm.admissible(w)) {
            std::size_t i = rng() % w.size();
            std::size_t len = 1 + rng() % (w.size() - i);
            CHECK(gm.admissible(w.sub(i, len)));
        }
    }
}

TEST_CASE("primitivity index") {
    CHECK(TransitionSystem::golden_mean().primitivity_index(16) == 2);
    CHECK(TransitionSystem::full(Alphabet(2)).primitivity_index(16) == 1);
    TransitionSystem two_cycle(Alphabet(2), {{0, 1}, {1, 0}});
    CHECK_FALSE(two_cycle.primitivity_index(16).has_value());
}

TEST_CASE("period and cyclic classes") {
    TransitionSystem two_cycle(Alphabet(2), {{0, 1}, {1, 0}});
    CHECK(two_cycle.period() == 2);
    CHECK(TransitionSystem::golden_mean().period() == 1);
    auto ring = ring_with_chord();
    CHECK(ring.period() == 3);
    CHECK(cycle_gcd_oracle(ring) == 3);
    CHECK(cycle_gcd_oracle(two_cycle) == 2);
    CHECK(cycle_gcd_oracle(TransitionSystem::golden_mean()) == 1);

    auto d2 = two_cycle.cyclic_classes();
    REQUIRE(d2.period == 2);
    CHECK(d2.classes[0] == std::vector<int>{0});
    CHECK(d2.classes[1] == std::vector<int>{1});

    auto dg = TransitionSystem::golden_mean().cyclic_classes();
    CHECK(dg.period == 1);
    CHECK(dg.classes[0].size() == 2);

    auto dr = ring.cyclic_classes();
    REQUIRE(dr.period == 3);
    for (auto& cls : dr.classes) CHECK(cls.size() == 2);
    // every edge advances the class index by one
    std::vector<int> class_of(6, -1);
    for (int c = 0; c < 3; ++c)
        for (int s : dr.classes[c]) class_of[s] = c;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            if (ring.edge(i, j)) CHECK(class_of[j] == (class_of[i] + 1) % 3);
    // p-th power restricted to each class is primitive
    for (auto& cls : dr.classes)
        CHECK(ring.power_on_class(3, cls).primitivity_index(64).has_value());

    TransitionSystem not_transitive(Alphabet(2), {{1, 1}, {0, 1}});
    CHECK_THROWS_AS(not_transitive.period(), DomainError);
}

TEST_CASE("bridge: examples, soundness, completeness") {
    Alphabet a2(2);
    auto gm = TransitionSystem::golden_mean();
    Word one = Word::parse("1", a2);

    auto b1 = gm.bridge(one, one, 1);
    REQUIRE(b1.has_value());
    CHECK(b1->str(a2) == "0");
    CHECK_FALSE(gm.bridge(one, one, 0).has_value());

    auto full = TransitionSystem::full(a2);
    auto b0 = full.bridge(Word::parse("01", a2), Word::parse("10", a2), 0);
    REQUIRE(b0.has_value());
    CHECK(b0->empty());

    // soundness + completeness vs matrix power, all u,v length <= 4, L <= 5
    std::vector<TransitionSystem> models;
    models.push_back(gm);
    models.push_back(full);
    models.push_back(TransitionSystem(Alphabet(3), {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
    for (const auto& ts : models) {
        Alphabet a = ts.alphabet();
        for (std::size_t lu = 1; lu <= 4; ++lu)
            for (std::size_t lv = 1; lv <= 4; ++lv)
                for (const Word& u : all_words(a, lu))
                    for (const Word& v : all_words(a, lv)) {
                        if (!ts.admissible(u) || !ts.admissible(v)) continue;
                        for (long L = 0; L <= 5; ++L) {
                            auto w = ts.bridge(u, v, L);
                            bool oracle = bridge_exists_oracle(ts, u, v, L);
                            CHECK(w.has_value() == oracle);
                            if (w) {
                                CHECK(w->size() == static_cast<std::size_t>(L));
                                CHECK(ts.admissible(u + *w + v));
                            }
                        }
                    }
    }
}

TEST_CASE("random strongly connected systems: decomposition invariants") {
    std::mt19937 rng(12);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 2 + static_cast<int>(rng() % 7);
        std::vector<std::vector<int>> m(n, std::vector<int>(n, 0));
        // spanning cycle guarantees strong connectivity
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int i = 0; i < n; ++i) m[perm[i]][perm[(i + 1) % n]] = 1;
        int extra = static_cast<int>(rng() % (n + 1));
        for (int e = 0; e < extra; ++e) m[rng() % n][rng() % n] = 1;
        TransitionSystem ts(Alphabet(n), m);
        REQUIRE(ts.transitive());
        int p = ts.period();
        CHECK(p == cycle_gcd_oracle(ts));
        auto d = ts.cyclic_classes();
        CHECK(d.period == p);
        CHECK(static_cast<int>(d.classes.size()) == p);
        std::vector<int> class_of(n, -1);
        std::size_t covered = 0;
        for (int c = 0; c < p; ++c)
            for (int s : d.classes[c]) {
                CHECK(class_of[s] == -1);
                class_of[s] = c;
                ++covered;
            }
        CHECK(covered == ts.usable().size());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (ts.edge(i, j) && class_of[i] >= 0 && class_of[j] >= 0)
                    CHECK(class_of[j] == (class_of[i] + 1) % p);
        for (auto& cls : d.classes)
            CHECK(ts.power_on_class(p, cls).primitivity_index(256).has_value());
    }
}

TEST_CASE("specification constants") {
    auto full2 = ShiftModel::full_shift(2);
    CHECK(full2.spec_constant(Rat(1, 8)) == 4);  // mEps 3 + index 1
    auto gm = ShiftModel::golden_mean();
    CHECK(gm.spec_constant(Rat(1, 4)) == 4);  // mEps 2 + index 2
    CHECK(full2.spec_constant(Rat(3, 2)) == 1);  // eps > 1: bridging alone

    TransitionSystem two_cycle(Alphabet(2), {{0, 1}, {1, 0}});
    CHECK_THROWS_AS(ShiftModel::sft(two_cycle).spec_constant(Rat(1, 4)), CapabilityError);
}

TEST_CASE("golden-ratio beta model agrees with the golden-mean SFT") {
    BetaModel bm(BetaValue(QuadReal::golden_ratio()));
    CHECK(bm.alphabet().size == 2);
    // greedy expansion of 1 is 11, quasi-greedy (10)^inf
    CHECK(bm.expansion_of_one().digit(1) == 1);
    CHECK(bm.expansion_of_one().digit(2) == 0);
    CHECK(bm.expansion_of_one().digit(3) == 1);

    Alphabet a2(2);
    CHECK_FALSE(bm.admissible(Word::parse("11", a2)));
    CHECK(bm.admissible(Word::parse("10101", a2)));

    auto gm = TransitionSystem::golden_mean();
    for (std::size_t len = 1; len <= 10; ++len)
        for (const Word& w : all_words(a2, len))
            CHECK(bm.admissible(w) == gm.admissible(w));

    // numeric cross-check of the greedy test at 64-digit precision; the
    // approximation must sit above beta or the second digit flips
    Rat approx = bm.beta_approx(220).hi;
    Rat x = 1;
    std::vector<int> digits;
    for (int i = 0; i < 12; ++i) {
        Rat bx = approx * x;
        Int d = floor_rat(bx);
        digits.push_back(static_cast<int>(d));
        x = bx - Rat(d);
    }
    CHECK(digits[0] == 1);
    CHECK(digits[1] == 1);  // greedy digits 1,1,0,0,...
    CHECK(digits[2] == 0);
}

TEST_CASE("beta expansion digits and reconstruction") {
    Alphabet a2(2);
    BetaModel b2{BetaValue(Rat(2))};
    CHECK(b2.expand(Rat(1, 2), 5).str(a2) == "10000");
    CHECK(b2.expand(Rat(1, 3), 6).str(a2) == "010101");

    BetaModel golden{BetaValue(QuadReal::golden_ratio())};
    QuadReal beta = QuadReal::golden_ratio();
    QuadReal x = beta - QuadReal::rational(Rat(1));  // beta - 1 = 1/beta
    // beta*x = beta^2 - beta = 1 exactly: boundary of J_1, resolved exactly
    Word d = golden.expand(x, 5);
    CHECK(d.str(a2) == "10000");
}

TEST_CASE("beta reconstruction bound on random rationals") {
    BetaModel golden{BetaValue(QuadReal::golden_ratio())};
    RatIv beta = golden.beta_approx(200);
    std::mt19937 rng(42);
    for (int t = 0; t < 50; ++t) {
        Int den = 1000 + rng() % 9000;
        Int num = Int(rng() % 1000) * den / 1000;
        Rat x(num, den);
        if (x >= 1) continue;
        Word d = golden.expand(x, 40);
        RatIv rec = golden.reconstruct(d);
        Rat err_hi = pow_rat(beta.lo, -40);
        CHECK(x - rec.lo <= err_hi);
        CHECK(rec.lo <= x + err_hi);
    }
}

TEST_CASE("nested beta family") {
    BetaModel b2{BetaValue(Rat(2))};
    auto fam2 = nested_beta_family(b2, 1);
    REQUIRE(fam2.size() == 1);
    CHECK(fam2[0].expansion_of_one().purely_periodic());
    // inclusion Sigma_beta1 subset Sigma_2 to depth 8 (depth 12 in acceptance)
    Alphabet a2(2);
    for (std::size_t len = 1; len <= 8; ++len)
        for (const Word& w : all_words(a2, len))
            if (fam2[0].admissible(w)) CHECK(b2.admissible(w));

    BetaModel golden{BetaValue(QuadReal::golden_ratio())};
    auto famg = nested_beta_family(golden, 1);
    REQUIRE(famg.size() == 1);
    for (std::size_t len = 1; len <= 8; ++len)
        for (const Word& w : all_words(a2, len))
            if (famg[0].admissible(w)) CHECK(golden.admissible(w));

    CHECK(nested_beta_family(b2, 0).empty());
}

TEST_CASE("beta bridging by zero fill") {
    BetaModel golden{BetaValue(QuadReal::golden_ratio())};
    Alphabet a2(2);
    Word u = Word::parse("10", a2), v = Word::parse("1", a2);
    auto w = golden.bridge(u, v, 1);
    REQUIRE(w.has_value());
    CHECK(golden.admissible(u + *w + v));
    // L=0: "101" admissible
    auto w0 = golden.bridge(u, v, 0);
    CHECK(w0.has_value());
    // "1" ++ "" ++ "1" = "11" inadmissible at L=0
    Word one = Word::parse("1", a2);
    CHECK_FALSE(golden.bridge(one, one, 0).has_value());
    // zero gap: expansion (10)^inf has runs of one zero -> bridging constant 2
    CHECK(golden.zero_gap() == 1);
}

TEST_CASE("sofic even shift") {
    // vertex 0 --0--> 0, 0 --1--> 1, 1 --1--> 0 : even runs of 1s
    SoficModel even(Alphabet(2), 2,
                    {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}});
    Alphabet a2(2);
    CHECK(even.admissible(Word::parse("0110", a2)));
    CHECK(even.admissible(Word::parse("11110", a2)));
    CHECK_FALSE(even.admissible(Word::parse("010", a2)));
    CHECK(even.admissible(Word::parse("1101", a2)));  // can sit inside 11|011|11...

    auto model = ShiftModel::sofic(even);
    CHECK(model.mixing());
    // bridge soundness on small words
    for (std::size_t lu = 1; lu <= 3; ++lu)
        for (const Word& u : all_words(a2, lu))
            for (const Word& v : all_words(a2, 2)) {
                if (!even.admissible(u) || !even.admissible(v)) continue;
                for (long L = 0; L <= 4; ++L) {
                    auto w = even.bridge(u, v, L);
                    if (w) CHECK(even.admissible(u + *w + v));
                }
            }
    auto pt = model.least_point(Word::parse("11", a2));
    CHECK(model.window_admissible(pt, 1, 12));
}

TEST_CASE("model facade: least points and windows") {
    auto gm = ShiftModel::golden_mean();
    Alphabet a2(2);
    auto x = gm.least_point(Word::parse("10", a2));
    CHECK(x.window(1, 2).str(a2) == "10");
    CHECK(gm.window_admissible(x, 1, 30));

    auto bmodel = ShiftModel::beta(BetaModel{BetaValue(QuadReal::golden_ratio())});
    auto y = bmodel.least_point(Word::parse("101", a2));
    CHECK(y.window(1, 3).str(a2) == "101");
    CHECK(bmodel.window_admissible(y, 1, 30));
    CHECK(bmodel.spec_constant(Rat(1, 4)) == 4);  // mEps 2 + zero-gap 1 + 1
}
