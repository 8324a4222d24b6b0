#pragma once

#include "symdyn/rational.hpp"
#include "symdyn/stream.hpp"
#include "symdyn/word.hpp"

#include <utility>
#include <vector>

namespace symdyn {

// Indicator of "the stream matches `word` starting at `offset`" (offset is a
// stream index, 1 for the canonical family).
struct CylinderObservable {
    Word word;
    Int offset{1};

    // Window anchored at stream index `at`: reads positions
    // at+offset-1 .. at+offset-2+|word|.  phi(sigma^i x) is matches(x, i+1).
    bool matches(const SymbolStream& x, const Int& at) const {
        Int base = at + offset - 1;
        for (std::size_t j = 0; j < word.size(); ++j)
            if (x.at(base + Int(static_cast<long>(j))) != word[j]) return false;
        return true;
    }
};

// Finite linear combination of cylinder indicators; depth = the largest
// window any term reads.
struct Observable {
    std::vector<std::pair<Rat, CylinderObservable>> terms;

    static Observable cylinder(Word w, Int offset = 1) {
        Observable o;
        o.terms.push_back({Rat(1), CylinderObservable{std::move(w), std::move(offset)}});
        return o;
    }
    Observable& add(Rat coeff, Word w, Int offset = 1) {
        terms.push_back({std::move(coeff), CylinderObservable{std::move(w), std::move(offset)}});
        return *this;
    }
    std::size_t depth() const {
        std::size_t d = 0;
        for (const auto& [c, cyl] : terms) {
            // window relative to offset 1
            Int reach = cyl.offset - 1 + Int(static_cast<long>(cyl.word.size()));
            if (reach > Int(1 << 20)) throw BudgetError("observable window too deep");
            auto r = static_cast<std::size_t>(static_cast<long>(reach));
            d = std::max(d, r);
        }
        return d;
    }
};

// Value of phi with its window anchored at stream index `at`.
inline Rat evaluate_observable(const Observable& phi, const SymbolStream& x, const Int& at) {
    Rat v = 0;
    for (const auto& [c, cyl] : phi.terms)
        if (cyl.matches(x, at)) v += c;
    return v;
}

inline Rat evaluate_observable(const CylinderObservable& cyl, const SymbolStream& x,
                               const Int& at) {
    return cyl.matches(x, at) ? Rat(1) : Rat(0);
}

// phi(sigma^i x) for orbit power i >= 0 (one-sided indexing from 1).
inline Rat evaluate_at_orbit(const Observable& phi, const SymbolStream& x, const Int& i) {
    return evaluate_observable(phi, x, i + 1);
}

// The pinned separating family: phi_k = indicator of the k-th nonempty word
// in length-lexicographic order, at offset 1, entering the weak* metric with
// weight 2^-k.
inline CylinderObservable separating_member(const Alphabet& a, const Int& k) {
    return CylinderObservable{lengthlex_word(a, k), 1};
}

// Sum |c_u| * 2^(lengthlex index of u): |<phi, mu> - <phi, nu>| is bounded by
// this constant times the pinned weak* distance.
inline Rat observable_lipschitz(const Alphabet& a, const Observable& phi) {
    Rat bound = 0;
    for (const auto& [c, cyl] : phi.terms) {
        if (cyl.offset != 1)
            throw DomainError("lipschitz bound requires offset-1 cylinders");
        Int k = lengthlex_index(a, cyl.word);
        if (k > 64) throw BudgetError("lipschitz bound: cylinder too deep");
        Rat w = pow_rat(Rat(2), static_cast<long>(k));
        bound += (c < 0 ? -c : c) * w;
    }
    return bound;
}

}  // namespace symdyn
