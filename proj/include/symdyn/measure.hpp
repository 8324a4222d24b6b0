#pragma once

#include "symdyn/observable.hpp"
#include "symdyn/rational.hpp"
#include "symdyn/stream.hpp"
#include "symdyn/stream_kernels.hpp"
#include "symdyn/word.hpp"

#include <memory>
#include <set>
#include <utility>
#include <variant>
#include <vector>

namespace symdyn {

// Invariant (or empirical) probability measure with a finite description.
// Pairings <phi, mu> against cylinder observables are exact rationals.
class FiniteMeasure {
  public:
    struct Periodic {
        Word cycle;
    };
    struct Convex {
        std::vector<std::pair<Rat, FiniteMeasure>> parts;
    };
    struct Empirical {
        SymbolStream x;
        Int horizon;  // n in E_n(x)
        int depth;    // cylinder depth the measure is meant to be read at
    };

    static FiniteMeasure periodic_orbit(Alphabet a, Word cycle) {
        if (cycle.empty() || !cycle.valid_over(a))
            throw DomainError("periodic_orbit: bad cycle word");
        return FiniteMeasure(a, Periodic{std::move(cycle)});
    }
    static FiniteMeasure convex(std::vector<std::pair<Rat, FiniteMeasure>> parts) {
        if (parts.empty()) throw DomainError("convex: empty combination");
        Rat total = 0;
        for (auto& [w, m] : parts) {
            if (w < 0) throw DomainError("convex: negative weight");
            total += w;
        }
        if (total != 1) throw DomainError("convex: weights must sum to 1");
        Alphabet a = parts.front().second.alphabet();
        for (auto& [w, m] : parts)
            if (!(m.alphabet() == a)) throw DomainError("convex: mixed alphabets");
        return FiniteMeasure(a, Convex{std::move(parts)});
    }
    static FiniteMeasure empirical(const SymbolStream& x, Int n, int depth) {
        if (n < 1) throw DomainError("empirical: n must be >= 1");
        return FiniteMeasure(x.alphabet(), Empirical{x, std::move(n), depth});
    }

    const Alphabet& alphabet() const { return alpha_; }
    bool is_periodic() const { return std::holds_alternative<Periodic>(*rep_); }
    const Word& cycle() const { return std::get<Periodic>(*rep_).cycle; }
    bool is_convex() const { return std::holds_alternative<Convex>(*rep_); }
    const Convex& convex_parts() const { return std::get<Convex>(*rep_); }
    bool is_empirical() const { return std::holds_alternative<Empirical>(*rep_); }
    const Empirical& empirical_data() const { return std::get<Empirical>(*rep_); }

    // <cyl(u at offset), mu>.  Shift-invariant kinds ignore the offset.
    Rat pair_cylinder(const CylinderObservable& cyl) const {
        if (const auto* p = std::get_if<Periodic>(rep_.get())) {
            const Word& w = p->cycle;
            long per = static_cast<long>(w.size());
            long hits = 0;
            for (long o = 0; o < per; ++o) {
                bool ok = true;
                for (std::size_t j = 0; j < cyl.word.size() && ok; ++j)
                    ok = w[static_cast<std::size_t>((o + static_cast<long>(j)) % per)] ==
                         cyl.word[j];
                if (ok) ++hits;
            }
            return Rat(hits, per);
        }
        if (const auto* c = std::get_if<Convex>(rep_.get())) {
            Rat v = 0;
            for (const auto& [wt, m] : c->parts) v += wt * m.pair_cylinder(cyl);
            return v;
        }
        const auto& e = std::get<Empirical>(*rep_);
        Int hits = count_matches(e.x, cyl.word, cyl.offset, e.horizon);
        return Rat(hits, e.horizon);
    }

    Rat pair(const Observable& phi) const {
        Rat v = 0;
        for (const auto& [coef, cyl] : phi.terms) v += coef * pair_cylinder(cyl);
        return v;
    }

    // Finite-depth shadow of the support: all words of the given depth with
    // positive mass.
    std::vector<Word> support(int depth) const {
        if (depth < 1) throw DomainError("support: depth >= 1");
        std::set<Word> words;
        collect_support(depth, words);
        return std::vector<Word>(words.begin(), words.end());
    }

  private:
    FiniteMeasure(Alphabet a, auto rep)
        : alpha_(a),
          rep_(std::make_shared<std::variant<Periodic, Convex, Empirical>>(std::move(rep))) {}

    void collect_support(int depth, std::set<Word>& out) const {
        if (const auto* p = std::get_if<Periodic>(rep_.get())) {
            const Word& w = p->cycle;
            long per = static_cast<long>(w.size());
            for (long o = 0; o < per; ++o) {
                Word win;
                for (int j = 0; j < depth; ++j)
                    win.push(w[static_cast<std::size_t>((o + j) % per)]);
                out.insert(std::move(win));
            }
            return;
        }
        if (const auto* c = std::get_if<Convex>(rep_.get())) {
            for (const auto& [wt, m] : c->parts)
                if (wt > 0) m.collect_support(depth, out);
            return;
        }
        const auto& e = std::get<Empirical>(*rep_);
        for (const Word& w : occurring_words(e.x, 1, e.horizon, depth)) out.insert(w);
    }

    Alphabet alpha_;
    std::shared_ptr<const std::variant<Periodic, Convex, Empirical>> rep_;
};

struct WeakStarDistance {
    Rat value;  // truncated series
    Rat error;  // 2^-K tail bound; true distance lies in [value, value+error]
    RatIv to_iv() const { return RatIv(value, value + error); }
};

// d(mu, nu) = sum_k 2^-k |<phi_k,mu> - <phi_k,nu>| truncated at K terms, with
// phi_k the pinned length-lex cylinder family.
inline WeakStarDistance weak_star_distance(const FiniteMeasure& mu, const FiniteMeasure& nu,
                                           int K) {
    if (K < 1) throw DomainError("weak_star_distance: K >= 1");
    if (!(mu.alphabet() == nu.alphabet()))
        throw DomainError("weak_star_distance: mixed alphabets");
    Rat v = 0, w = Rat(1, 2);
    for (int k = 1; k <= K; ++k) {
        CylinderObservable phi = separating_member(mu.alphabet(), k);
        Rat diff = mu.pair_cylinder(phi) - nu.pair_cylinder(phi);
        if (diff < 0) diff = -diff;
        v += w * diff;
        w /= 2;
    }
    return {v, pow_rat(Rat(1, 2), K)};
}

// E_n(x) evaluated on cylinders, exactly the paper's empirical measure.
inline FiniteMeasure empirical_measure(const SymbolStream& x, const Int& n, int depth) {
    return FiniteMeasure::empirical(x, n, depth);
}

struct ConvergenceBound {
    Word cycle;
    // d(E_n(w^inf), per(w)) <= bound_scale / n for every n and truncation
    Int bound_scale;  // = 2|w|
    Int threshold(const Rat& eps) const {  // N with bound <= eps for n >= N
        if (eps <= 0) throw DomainError("threshold: eps > 0");
        return ceil_rat(Rat(bound_scale) / eps);
    }
};

// The explicit empirical-convergence certificate of a periodic point.
inline ConvergenceBound periodic_measure_convergence(const Word& w) {
    if (w.empty()) throw DomainError("periodic_measure_convergence: empty word");
    return ConvergenceBound{w, Int(2 * static_cast<long>(w.size()))};
}

}  // namespace symdyn
