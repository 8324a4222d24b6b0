#pragma once

#include "symdyn/algebraic.hpp"
#include "symdyn/rational.hpp"
#include "symdyn/word.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

namespace symdyn {

using BetaValue = std::variant<Rat, QuadReal, PolyRoot>;

namespace detail {

inline RatIv beta_approx(const BetaValue& b, unsigned bits) {
    if (std::holds_alternative<Rat>(b)) return RatIv(std::get<Rat>(b));
    if (std::holds_alternative<QuadReal>(b)) return std::get<QuadReal>(b).approx(bits);
    return std::get<PolyRoot>(b).approx(bits);
}

}  // namespace detail

// Digits of the quasi-greedy expansion of 1, realized lazily.  Backed either
// by an explicitly periodic digit word (the Parry-sequence route used by
// nestedBetaFamily) or by the exact greedy orbit of 1.  If the greedy
// expansion terminates (x_N = 0) the standard substitution
// d_1..d_{N-1}(d_N - 1) repeated forever is applied.
class QuasiGreedy {
  public:
    static std::shared_ptr<QuasiGreedy> make_periodic(Word digits) {
        auto q = std::shared_ptr<QuasiGreedy>(new QuasiGreedy());
        if (digits.empty()) throw DomainError("QuasiGreedy: empty period");
        bool nonzero = false;
        for (Sym s : digits) nonzero |= (s != 0);
        if (!nonzero) throw DomainError("QuasiGreedy: zero expansion");
        q->periodic_ = std::move(digits);
        return q;
    }

    static std::shared_ptr<QuasiGreedy> make_from_beta(const BetaValue& b,
                                                       unsigned precision_bits) {
        auto q = std::shared_ptr<QuasiGreedy>(new QuasiGreedy());
        if (std::holds_alternative<Rat>(b)) {
            const Rat& r = std::get<Rat>(b);
            if (r <= 1) throw DomainError("beta must exceed 1");
            if (rat_den(r) == 1) {  // integer beta: quasi-greedy (b-1)^inf
                Int digit = rat_num(r) - 1;
                if (digit > 254) throw DomainError("beta too large");
                q->periodic_ = Word({static_cast<Sym>(static_cast<unsigned>(digit))});
                return q;
            }
            q->orbit_rat_ = r;
            q->x_rat_ = 1;
            return q;
        }
        if (std::holds_alternative<QuadReal>(b)) {
            const QuadReal& v = std::get<QuadReal>(b);
            if (v.compare(Rat(1)) <= 0) throw DomainError("beta must exceed 1");
            q->orbit_quad_ = v;
            q->x_quad_ = QuadReal::rational(Rat(1));
            return q;
        }
        q->orbit_root_ = std::get<PolyRoot>(b);
        q->precision_ = precision_bits;
        return q;
    }

    // 1-based digit access; lazy extension is mutex-guarded so concurrent
    // readers see idempotent writes.
    Sym digit(long k) const {
        if (k < 1) throw DomainError("QuasiGreedy: digit index >= 1");
        std::lock_guard<std::mutex> g(mu_);
        if (periodic_)
            return (*periodic_)[static_cast<std::size_t>(
                (k - 1) % static_cast<long>(periodic_->size()))];
        extend(static_cast<std::size_t>(k));
        if (periodic_)
            return (*periodic_)[static_cast<std::size_t>(
                (k - 1) % static_cast<long>(periodic_->size()))];
        return greedy_[static_cast<std::size_t>(k - 1)];
    }

    bool purely_periodic() const {
        std::lock_guard<std::mutex> g(mu_);
        return static_cast<bool>(periodic_) && greedy_.empty();
    }
    std::optional<Word> period_word() const {
        std::lock_guard<std::mutex> g(mu_);
        return periodic_;
    }

    // Largest run of zero digits among the first `depth` digits.
    long max_zero_run(long depth) const {
        long best = 0, cur = 0;
        for (long k = 1; k <= depth; ++k) {
            if (digit(k) == 0)
                best = std::max(best, ++cur);
            else
                cur = 0;
        }
        return best;
    }

    // Lexicographic comparison of this expansion against another, decided on
    // the first `depth` digits; 0 means undistinguished within depth.
    int compare_prefix(const QuasiGreedy& o, long depth) const {
        for (long k = 1; k <= depth; ++k) {
            Sym a = digit(k), b = o.digit(k);
            if (a != b) return a < b ? -1 : 1;
        }
        return 0;
    }

  private:
    QuasiGreedy() = default;

    mutable std::mutex mu_;
    mutable std::optional<Word> periodic_;
    mutable std::vector<Sym> greedy_;  // greedy digits computed so far

    std::optional<Rat> orbit_rat_;
    mutable Rat x_rat_;
    std::optional<QuadReal> orbit_quad_;
    mutable QuadReal x_quad_;
    std::optional<PolyRoot> orbit_root_;
    mutable std::vector<RatIv> root_orbit_iv_;
    unsigned precision_ = 128;

    void extend(std::size_t upto) const {
        while (greedy_.size() < upto && !periodic_) {
            if (orbit_rat_) {
                step_exact(*orbit_rat_, x_rat_);
            } else if (orbit_quad_) {
                step_exact(*orbit_quad_, x_quad_);
            } else {
                step_interval();
            }
        }
    }

    template <typename Num>
    static std::pair<Int, bool> floor_and_zero(const Num& v);

    // One greedy step with exact arithmetic: d = floor(beta * x),
    // x <- beta*x - d; termination when x becomes 0.
    void step_exact(const Rat& beta, Rat& x) const {
        Rat bx = greedy_.empty() ? beta : beta * x;
        Int d = floor_rat(bx);
        Rat rem = bx - Rat(d);
        push_digit(d, rem == 0);
        x = rem;
    }
    void step_exact(const QuadReal& beta, QuadReal& x) const {
        QuadReal bx = greedy_.empty() ? beta : beta * x;
        Int d = bx.floor();
        QuadReal rem = bx - QuadReal::rational(Rat(d));
        push_digit(d, rem.sign() == 0);
        x = rem;
    }

    // Interval route for polynomial roots: refine until the floor is
    // unambiguous; a persistent boundary hit raises PrecisionError.
    void step_interval() const {
        for (unsigned bits = precision_;; bits *= 2) {
            if (bits > 16 * precision_ + 4096)
                throw PrecisionError("quasi-greedy digit undecidable at precision");
            RatIv b = orbit_root_->approx(bits);
            RatIv x = greedy_.empty() ? RatIv(Rat(1)) : root_orbit_iv_.back();
            // recompute the whole orbit at this precision to keep widths tight
            std::vector<RatIv> orbit;
            RatIv cur(Rat(1));
            bool ok = true;
            for (std::size_t i = 0; i <= greedy_.size(); ++i) {
                RatIv prod(cur.lo * b.lo, cur.hi * b.hi);  // cur >= 0, b > 1
                Int d;
                if (i < greedy_.size()) {
                    d = Int(static_cast<long>(greedy_[i]));
                } else {
                    Int flo = floor_rat(prod.lo), fhi = floor_rat(prod.hi);
                    if (flo != fhi) {
                        ok = false;
                        break;
                    }
                    d = flo;
                    if (d < 0 || d > 254) throw DomainError("beta digit out of range");
                    push_digit(d, false);
                }
                cur = RatIv(prod.lo - Rat(d), prod.hi - Rat(d));
                if (cur.lo < 0) cur.lo = 0;
                orbit.push_back(cur);
            }
            if (ok) {
                root_orbit_iv_ = std::move(orbit);
                return;
            }
            (void)x;
        }
    }

    void push_digit(const Int& d, bool terminated) const {
        if (d < 0 || d > 254) throw DomainError("beta digit out of range");
        greedy_.push_back(static_cast<Sym>(static_cast<unsigned>(static_cast<long>(d))));
        if (terminated) {
            // greedy expansion of 1 is finite: substitute the quasi-greedy
            // period d_1..d_{m-1}(d_m - 1)
            Word per;
            for (std::size_t i = 0; i + 1 < greedy_.size(); ++i) per.push(greedy_[i]);
            Sym last = greedy_.back();
            if (last == 0) throw InvariantError("greedy expansion ended in 0");
            per.push(static_cast<Sym>(last - 1));
            // drop a trailing zero-only period like "0": cannot happen since
            // digits not all zero for beta > 1 (d_1 >= 1)
            greedy_.clear();
            periodic_ = std::move(per);
        }
    }
};

// beta-shift via the Parry criterion: w in Sigma_beta iff every suffix is
// lexicographically <= the quasi-greedy expansion of 1.
class BetaModel {
  public:
    explicit BetaModel(BetaValue beta, unsigned precision_bits = 128)
        : beta_(std::move(beta)), precision_(precision_bits) {
        qg_ = QuasiGreedy::make_from_beta(beta_, precision_bits);
        init_alphabet();
    }

    // Model defined directly by a purely periodic quasi-greedy expansion;
    // beta is recovered as the root of the associated Parry polynomial.
    static BetaModel from_periodic_expansion(const Word& period, unsigned precision_bits = 128) {
        // self-admissibility: every shift of the periodic sequence <= itself
        std::size_t p = period.size();
        for (std::size_t k = 1; k < p; ++k) {
            for (std::size_t j = 0; j < 2 * p; ++j) {
                Sym a = period[(k + j) % p], b = period[j % p];
                if (a != b) {
                    if (a > b) throw DomainError("expansion period is not self-dominated");
                    break;
                }
            }
        }
        // x^p - d1 x^{p-1} - ... - d_{p-1} x - (d_p + 1) = 0
        std::vector<Int> c(p + 1, 0);
        c[p] = 1;
        for (std::size_t j = 1; j <= p; ++j)
            c[p - j] = -(Int(static_cast<long>(period[j - 1])) + (j == p ? 1 : 0));
        // poly is increasing past its dominant root; bracket (1, d1+2)
        Rat hi = Rat(Int(static_cast<long>(period[0])) + 2);
        PolyRoot root(std::move(c), Rat(1), hi);
        BetaModel m;
        m.beta_ = BetaValue(std::move(root));
        m.precision_ = precision_bits;
        m.qg_ = QuasiGreedy::make_periodic(period);
        m.init_alphabet();
        return m;
    }

    const Alphabet& alphabet() const { return alpha_; }
    const QuasiGreedy& expansion_of_one() const { return *qg_; }
    const BetaValue& beta() const { return beta_; }
    RatIv beta_approx(unsigned bits) const { return detail::beta_approx(beta_, bits); }
    unsigned precision() const { return precision_; }

    bool admissible(const Word& w) const {
        for (Sym s : w)
            if (s >= alpha_.size) return false;
        for (std::size_t j = 0; j < w.size(); ++j) {
            for (std::size_t i = 0; j + i < w.size(); ++i) {
                Sym ours = w[j + i];
                Sym theirs = qg_->digit(static_cast<long>(i) + 1);
                if (ours != theirs) {
                    if (ours > theirs) return false;
                    break;  // strictly below: suffix fine
                }
            }
        }
        return true;
    }

    // Gap filler: the zero word is lexicographically minimal among gap
    // contents, so if u 0^L v is inadmissible no length-L filler exists.
    std::optional<Word> bridge(const Word& u, const Word& v, long L) const {
        Word w;
        w.syms.assign(static_cast<std::size_t>(L), 0);
        if (admissible(u + w + v)) return w;
        return std::nullopt;
    }

    // Largest run of zeros in the expansion of 1 within `depth` digits; the
    // bridging constant of the model when the expansion has bounded gaps.
    long zero_gap(long depth = 256) const { return qg_->max_zero_run(depth); }

    // Greedy beta-expansion with exact arithmetic in the quadratic field;
    // valid for rational and quadratic beta.
    Word expand(const QuadReal& x0, long depth) const {
        if (std::holds_alternative<PolyRoot>(beta_))
            throw CapabilityError("expand: quadratic points need a quadratic/rational beta");
        QuadReal b = std::holds_alternative<QuadReal>(beta_)
                         ? std::get<QuadReal>(beta_)
                         : QuadReal::rational(std::get<Rat>(beta_));
        if (x0.sign() < 0 || x0.compare(Rat(1)) >= 0)
            throw DomainError("betaExpand: x must lie in [0,1)");
        Word out;
        QuadReal cur = x0;
        for (long i = 0; i < depth; ++i) {
            QuadReal bx = b * cur;
            Int d = bx.floor();
            out.push(check_digit(d));
            cur = bx - QuadReal::rational(Rat(d));
        }
        return out;
    }

    // Greedy beta-expansion digits of x in [0,1): i_n = j when
    // f_beta^{n-1}(x) lands in J_j = [j/beta, (j+1)/beta).
    Word expand(const Rat& x, long depth) const {
        if (x < 0 || x >= 1) throw DomainError("betaExpand: x must lie in [0,1)");
        Word out;
        if (std::holds_alternative<Rat>(beta_)) {
            const Rat& b = std::get<Rat>(beta_);
            Rat cur = x;
            for (long i = 0; i < depth; ++i) {
                Rat bx = b * cur;
                Int d = floor_rat(bx);
                out.push(check_digit(d));
                cur = bx - Rat(d);
            }
            return out;
        }
        if (std::holds_alternative<QuadReal>(beta_)) {
            const QuadReal& b = std::get<QuadReal>(beta_);
            QuadReal cur = QuadReal::rational(x);
            for (long i = 0; i < depth; ++i) {
                QuadReal bx = b * cur;
                Int d = bx.floor();
                out.push(check_digit(d));
                cur = bx - QuadReal::rational(Rat(d));
            }
            return out;
        }
        // interval orbit for polynomial roots
        const PolyRoot& root = std::get<PolyRoot>(beta_);
        for (unsigned bits = precision_;; bits *= 2) {
            if (bits > 16 * precision_ + 4096)
                throw PrecisionError("betaExpand: orbit point cannot be placed in a unique J_j");
            RatIv b = root.approx(bits);
            RatIv cur(x);
            out.syms.clear();
            bool ok = true;
            for (long i = 0; i < depth; ++i) {
                RatIv bx(cur.lo * b.lo, cur.hi * b.hi);
                Int flo = floor_rat(bx.lo), fhi = floor_rat(bx.hi);
                if (flo != fhi) {
                    ok = false;
                    break;
                }
                out.push(check_digit(flo));
                cur = RatIv(bx.lo - Rat(flo), bx.hi - Rat(flo));
                if (cur.lo < 0) cur.lo = 0;
            }
            if (ok) return out;
        }
    }

    // Reconstruction sum_{n<=depth} i_n beta^{-n} as a certified interval.
    RatIv reconstruct(const Word& digits, unsigned bits = 160) const {
        RatIv b = beta_approx(bits);
        RatIv inv_lo(Rat(1) / b.hi, Rat(1) / b.lo);
        RatIv acc{Rat(0)};
        RatIv p = inv_lo;
        for (Sym d : digits) {
            acc += p.scaled(Rat(static_cast<long>(d)));
            p = RatIv(p.lo * inv_lo.lo, p.hi * inv_lo.hi);
        }
        return acc;
    }

  private:
    BetaModel() : beta_(Rat(2)) {}

    BetaValue beta_;
    unsigned precision_ = 128;
    std::shared_ptr<QuasiGreedy> qg_;
    Alphabet alpha_{2};

    void init_alphabet() {
        // digits lie in {0..b} with b = floor(beta) (beta not integer) or
        // beta-1 (integer); both equal the first quasi-greedy digit... except
        // non-integer beta where d_1 = floor(beta).  Use d_1 which the
        // expansion already knows.
        Sym d1 = qg_->digit(1);
        alpha_ = Alphabet(static_cast<int>(d1) + 1);
    }

    Sym check_digit(const Int& d) const {
        if (d < 0 || d >= alpha_.size)
            throw InvariantError("betaExpand: digit out of range");
        return static_cast<Sym>(static_cast<unsigned>(static_cast<long>(d)));
    }
};

// An increasing family beta_1 < ... < beta_count < beta of parameters with
// purely periodic expansions of 1 (hence Bowen specification with bounded
// zero gaps), selected by truncating the expansion of beta and decrementing
// the last nonzero digit.
inline std::vector<BetaModel> nested_beta_family(const BetaModel& outer, int count,
                                                 int max_period = 12) {
    std::vector<BetaModel> out;
    if (count == 0) return out;
    if (count < 0) throw DomainError("nested_beta_family: count must be >= 0");
    const QuasiGreedy& qg = outer.expansion_of_one();
    std::vector<std::pair<Word, BetaModel>> candidates;
    for (int p = 1; p <= max_period; ++p) {
        Word pref;
        for (long k = 1; k <= p; ++k) pref.push(qg.digit(k));
        // decrement the last nonzero digit of the prefix
        int j = p - 1;
        while (j >= 0 && pref.syms[j] == 0) --j;
        if (j < 0) continue;
        Word cand = pref;
        cand.syms[j] = static_cast<Sym>(cand.syms[j] - 1);
        cand.syms.resize(static_cast<std::size_t>(j) + 1);
        bool zero = true;
        for (Sym s : cand) zero &= (s == 0);
        if (zero) continue;
        try {
            BetaModel m = BetaModel::from_periodic_expansion(cand, outer.precision());
            // strictly below the outer expansion?
            if (m.expansion_of_one().compare_prefix(qg, 4 * max_period + 16) < 0)
                candidates.push_back({cand, std::move(m)});
        } catch (const DomainError&) {
            continue;  // not self-dominated
        }
    }
    // order by expansion (equivalently by beta), increasing; dedupe
    std::sort(candidates.begin(), candidates.end(),
              [&](const auto& x, const auto& y) {
                  return x.second.expansion_of_one().compare_prefix(
                             y.second.expansion_of_one(), 256) < 0;
              });
    candidates.erase(std::unique(candidates.begin(), candidates.end(),
                                 [](const auto& x, const auto& y) {
                                     return x.second.expansion_of_one().compare_prefix(
                                                y.second.expansion_of_one(), 256) == 0;
                                 }),
                     candidates.end());
    if (static_cast<int>(candidates.size()) < count)
        throw BudgetError("nested_beta_family: not enough parameters within search budget");
    for (int i = count; i >= 1; --i)
        out.push_back(candidates[candidates.size() - static_cast<std::size_t>(i)].second);
    return out;
}

}  // namespace symdyn
