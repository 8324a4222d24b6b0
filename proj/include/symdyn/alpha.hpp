#pragma once

#include "symdyn/rational.hpp"

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace symdyn {

// Member of the family A: nondecreasing alpha: N -> [0, inf) with
// alpha(n) -> inf and alpha(n)/n -> 0.  Finite certification happens on a
// grid; the named rules are exact integer-valued maps on big integers.
class AlphaFunction {
  public:
    static AlphaFunction sqrt() {
        return AlphaFunction("ceil-sqrt",
                             [](const Int& n) { return Rat(isqrt_ceil(n)); }, true);
    }
    static AlphaFunction log() {
        return AlphaFunction("ceil-log",
                             [](const Int& n) { return Rat(ceil_ln(n + 1)); }, true);
    }
    static AlphaFunction table(std::vector<Rat> values) {
        auto vals = std::make_shared<std::vector<Rat>>(std::move(values));
        if (vals->empty()) throw DomainError("alpha table: empty");
        return AlphaFunction(
            "table",
            [vals](const Int& n) -> Rat {
                if (n < 1) return (*vals)[0];
                if (n > Int(static_cast<long>(vals->size())))
                    throw BudgetError("alpha table exhausted");
                return (*vals)[static_cast<std::size_t>(static_cast<long>(n)) - 1];
            },
            false);
    }

    const std::string& name() const { return name_; }
    bool unbounded_rule() const { return unbounded_; }

    Rat operator()(const Int& n) const { return fn_(n); }

    struct Certification {
        bool nondecreasing = false;
        bool diverges = false;   // alpha(grid.back()) above the divergence floor
        bool sublinear = false;  // alpha(n)/n within the envelope on the grid
    };

    // Spot-check the family-A requirements on a grid.
    Certification certify(const std::vector<Int>& grid, const Rat& divergence_floor,
                          const Rat& sublinear_envelope) const {
        Certification c;
        c.nondecreasing = !grid.empty();
        c.sublinear = !grid.empty();
        Rat prev = -1;
        for (const Int& n : grid) {
            Rat v = fn_(n);
            if (v < prev) c.nondecreasing = false;
            prev = v;
            if (v / Rat(n) > sublinear_envelope) c.sublinear = false;
        }
        c.diverges = !grid.empty() && fn_(grid.back()) >= divergence_floor;
        return c;
    }

    // Smallest n >= 1 with alpha(n) > v (strict), by doubling + binary
    // search; throws BudgetError when the rule cannot reach v.  The cap is
    // generous: checkpoint positions square per stage under sqrt-like rules.
    Int first_exceeding(const Rat& v, const Int& cap = Int(1) << 16384) const {
        Int hi = 1;
        while (fn_(hi) <= v) {
            hi <<= 1;
            if (hi > cap) throw BudgetError("alpha never exceeds the requested value");
        }
        Int lo = hi == 1 ? Int(1) : hi / 2;
        while (lo < hi) {
            Int mid = (lo + hi) / 2;
            if (fn_(mid) > v)
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

    // Finite proxy for liminf alpha(n)/ln(n) = +inf: the ratio clears a
    // threshold on every grid point and grows from the first to the last.
    bool liminf_over_log_proxy(const std::vector<Int>& grid, const Rat& threshold) const {
        if (grid.empty()) return false;
        std::vector<Rat> ratios;
        for (const Int& n : grid) {
            RatIv ln_n = ln_iv(Rat(n));
            if (ln_n.lo <= 0) return false;
            ratios.push_back(fn_(n) / ln_n.hi);  // certified lower bound on the ratio
            if (ratios.back() < threshold) return false;
        }
        return ratios.back() >= 2 * ratios.front();
    }

  private:
    AlphaFunction(std::string name, std::function<Rat(const Int&)> fn, bool unbounded)
        : name_(std::move(name)), fn_(std::move(fn)), unbounded_(unbounded) {}

    std::string name_;
    std::function<Rat(const Int&)> fn_;
    bool unbounded_;
};

}  // namespace symdyn
