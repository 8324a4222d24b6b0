#pragma once

#include "symdyn/rational.hpp"
#include "symdyn/word.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

namespace symdyn {

enum class Side { OneSided, TwoSided };

// A maximal periodic piece of a stream.  Covers indices [start, start+len-1];
// symbol(pos) = pat[(phase + (pos - start)) mod |pat|].  Patterns are shared:
// construction output reuses source patterns across slots and members.
struct Run {
    Int start;
    Int len;
    std::shared_ptr<const Word> pat;
    long phase = 0;

    Run() = default;
    Run(Int s, Int l, std::shared_ptr<const Word> p, long ph = 0)
        : start(std::move(s)), len(std::move(l)), pat(std::move(p)), phase(ph) {}
    Run(Int s, Int l, Word w, long ph = 0)
        : start(std::move(s)),
          len(std::move(l)),
          pat(std::make_shared<const Word>(std::move(w))),
          phase(ph) {}

    long period() const { return static_cast<long>(pat->size()); }
    Int end() const { return start + len - 1; }
    Sym at(const Int& pos) const {
        Int per = period();
        Int off = (Int(phase) + (pos - start)) % per;
        if (off < 0) off += per;
        return (*pat)[static_cast<std::size_t>(static_cast<long>(off))];
    }
};

// Piecewise-periodic content: finite runs, plus optional periodic
// continuations to +inf (tail) and, for two-sided streams, to -inf (head).
// The head run's (start, phase) anchor the leftward extension; its len is
// ignored.
struct RunSeq {
    std::vector<Run> runs;    // sorted, contiguous
    std::optional<Run> tail;  // covers [tail->start, +inf)
    std::optional<Run> head;  // covers (-inf, runs/tail start - 1]

    Int first_index() const {
        if (!runs.empty()) return runs.front().start;
        if (tail) return tail->start;
        throw DomainError("RunSeq: empty");
    }
    Int realized_end() const {
        if (!runs.empty()) return runs.back().end();
        if (tail) return tail->start - 1;
        return 0;
    }
    Sym at(const Int& pos) const {
        if (head && (!runs.empty() ? pos < runs.front().start
                                   : (!tail || pos < tail->start)))
            return head->at(pos);
        if (!runs.empty() && pos >= runs.front().start && pos <= runs.back().end()) {
            std::size_t lo = 0, hi = runs.size();
            while (hi - lo > 1) {
                std::size_t mid = (lo + hi) / 2;
                if (runs[mid].start <= pos)
                    lo = mid;
                else
                    hi = mid;
            }
            return runs[lo].at(pos);
        }
        if (tail && pos >= tail->start) return tail->at(pos);
        throw DomainError("RunSeq: index outside covered range");
    }
    void check_contiguous() const {
        for (std::size_t i = 0; i + 1 < runs.size(); ++i)
            if (runs[i + 1].start != runs[i].start + runs[i].len)
                throw InvariantError("RunSeq: runs not contiguous");
        if (tail && !runs.empty() && tail->start != runs.back().end() + 1)
            throw InvariantError("RunSeq: tail not contiguous");
    }
};

namespace detail {

struct StreamImpl {
    Alphabet alpha;
    Side side;
    explicit StreamImpl(Alphabet a, Side s) : alpha(a), side(s) {}
    virtual ~StreamImpl() = default;
    virtual Sym at(const Int& pos) const = 0;
    virtual const RunSeq* runs() const { return nullptr; }
    virtual Int realized_end() const = 0;
};

struct RunStreamImpl final : StreamImpl {
    RunSeq seq;
    RunStreamImpl(Alphabet a, Side s, RunSeq q) : StreamImpl(a, s), seq(std::move(q)) {
        seq.check_contiguous();
    }
    Sym at(const Int& pos) const override {
        if (side == Side::OneSided && pos < 1)
            throw DomainError("stream: one-sided index must be >= 1");
        return seq.at(pos);
    }
    const RunSeq* runs() const override { return &seq; }
    Int realized_end() const override { return seq.realized_end(); }
};

struct FuncStreamImpl final : StreamImpl {
    std::function<Sym(const Int&)> fn;
    mutable std::map<Int, Sym> memo;
    mutable std::mutex mu;
    mutable Int high_water{0};

    FuncStreamImpl(Alphabet a, Side s, std::function<Sym(const Int&)> f)
        : StreamImpl(a, s), fn(std::move(f)) {}

    Sym at(const Int& pos) const override {
        if (side == Side::OneSided && pos < 1)
            throw DomainError("stream: one-sided index must be >= 1");
        {
            std::lock_guard<std::mutex> g(mu);
            auto it = memo.find(pos);
            if (it != memo.end()) return it->second;
        }
        Sym v = fn(pos);
        if (v >= alpha.size) throw InvariantError("stream rule produced bad symbol");
        std::lock_guard<std::mutex> g(mu);
        auto [it, fresh] = memo.emplace(pos, v);
        if (!fresh && it->second != v)
            throw InvariantError("stream rule is not deterministic");
        if (pos > high_water) high_water = pos;
        return v;
    }
    Int realized_end() const override {
        std::lock_guard<std::mutex> g(mu);
        return high_water;
    }
};

}  // namespace detail

// Value handle on an immutable (modulo memoization) symbolic point.
class SymbolStream {
  public:
    SymbolStream() = default;

    static SymbolStream from_runs(Alphabet a, Side s, RunSeq seq) {
        return SymbolStream(std::make_shared<detail::RunStreamImpl>(a, s, std::move(seq)));
    }

    // w repeated forever from index 1 (one-sided) or over all of Z (two-sided,
    // with phase 0 at index 1).
    static SymbolStream periodic(Alphabet a, const Word& w, Side s = Side::OneSided) {
        if (w.empty() || !w.valid_over(a)) throw DomainError("periodic: bad word");
        RunSeq q;
        q.tail = Run{1, 0, w, 0};
        if (s == Side::TwoSided) q.head = Run{1, 0, w, 0};
        return from_runs(a, s, std::move(q));
    }

    // Explicit prefix starting at index 1 followed by a periodic tail.
    static SymbolStream from_word(Alphabet a, const Word& prefix, const Word& tail_pat,
                                  Side s = Side::OneSided) {
        RunSeq q;
        if (!prefix.empty())
            q.runs.push_back(Run{1, static_cast<long>(prefix.size()), prefix, 0});
        Int ts = 1 + Int(static_cast<long>(prefix.size()));
        q.tail = Run{ts, 0, tail_pat, 0};
        if (s == Side::TwoSided) q.head = Run{1, 0, tail_pat, 0};
        return from_runs(a, s, std::move(q));
    }

    static SymbolStream from_function(Alphabet a, Side s, std::function<Sym(const Int&)> f) {
        return SymbolStream(std::make_shared<detail::FuncStreamImpl>(a, s, std::move(f)));
    }

    bool valid() const { return static_cast<bool>(p_); }
    Side side() const { return impl().side; }
    const Alphabet& alphabet() const { return impl().alpha; }

    // The realize rule: symbol at index pos (>= 1 one-sided, any integer
    // two-sided).
    Sym at(const Int& pos) const { return impl().at(pos); }

    Int realized_end() const { return impl().realized_end(); }
    const RunSeq* runs() const { return impl().runs(); }

    // sigma^k as an index translation: result.at(i) == this->at(i + k).
    SymbolStream shifted(const Int& k) const {
        if (k == 0) return *this;
        if (side() == Side::OneSided && k < 0)
            throw DomainError("shift: negative power on a one-sided stream");
        if (const RunSeq* rs = runs()) {
            RunSeq out = *rs;
            for (Run& r : out.runs) r.start -= k;
            if (out.tail) out.tail->start -= k;
            if (out.head) out.head->start -= k;
            if (side() == Side::OneSided) {
                // drop content that slid below index 1
                RunSeq clip;
                clip.tail = out.tail;
                for (Run& r : out.runs) {
                    if (r.end() < 1) continue;
                    if (r.start < 1) {
                        Int cut = 1 - r.start;
                        r.phase = static_cast<long>((Int(r.phase) + cut) %
                                                    Int(r.period()));
                        r.len -= cut;
                        r.start = 1;
                    }
                    clip.runs.push_back(std::move(r));
                }
                if (clip.runs.empty() && clip.tail && clip.tail->start < 1) {
                    Int cut = 1 - clip.tail->start;
                    clip.tail->phase = static_cast<long>(
                        (Int(clip.tail->phase) + cut) %
                        Int(clip.tail->period()));
                    clip.tail->start = 1;
                }
                return from_runs(alphabet(), side(), std::move(clip));
            }
            return from_runs(alphabet(), side(), std::move(out));
        }
        auto base = p_;
        return from_function(alphabet(), side(),
                             [base, k](const Int& i) { return base->at(i + k); });
    }

    Word window(const Int& from, std::size_t len) const {
        Word w;
        w.syms.reserve(len);
        for (std::size_t j = 0; j < len; ++j) w.push(at(from + Int(static_cast<long>(j))));
        return w;
    }

    bool same_impl(const SymbolStream& o) const { return p_ == o.p_; }

  private:
    explicit SymbolStream(std::shared_ptr<const detail::StreamImpl> p) : p_(std::move(p)) {}
    const detail::StreamImpl& impl() const {
        if (!p_) throw DomainError("SymbolStream: empty handle");
        return *p_;
    }
    std::shared_ptr<const detail::StreamImpl> p_;
};

// sigma^k, realized lazily by index translation.
inline SymbolStream shift(const SymbolStream& x, const Int& k) { return x.shifted(k); }

}  // namespace symdyn
