#pragma once

#include "symdyn/rational.hpp"
#include "symdyn/word.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <queue>
#include <vector>

namespace symdyn {

// Ordered partition of the usable symbols into cyclically permuted classes.
struct PeriodicDecomposition {
    std::vector<std::vector<int>> classes;  // D_0 .. D_{p-1}
    int period = 1;
};

// One-step SFT on symbols: matrix[i][j] == 1 iff j may follow i.
class TransitionSystem {
  public:
    TransitionSystem(Alphabet a, std::vector<std::vector<int>> matrix)
        : alpha_(a), adj_(std::move(matrix)) {
        int n = alpha_.size;
        if (static_cast<int>(adj_.size()) != n)
            throw DomainError("TransitionSystem: matrix size mismatch");
        for (auto& row : adj_) {
            if (static_cast<int>(row.size()) != n)
                throw DomainError("TransitionSystem: matrix row size mismatch");
            for (int& v : row) v = v ? 1 : 0;
        }
        compute_usable();
    }

    static TransitionSystem full(Alphabet a) {
        std::vector<std::vector<int>> m(a.size, std::vector<int>(a.size, 1));
        return TransitionSystem(a, std::move(m));
    }
    static TransitionSystem golden_mean() {
        return TransitionSystem(Alphabet(2), {{1, 1}, {1, 0}});
    }

    const Alphabet& alphabet() const { return alpha_; }
    bool edge(int i, int j) const { return adj_[i][j] != 0; }
    const std::vector<int>& usable() const { return usable_; }
    bool symbol_usable(int s) const { return usable_mask_[s]; }

    bool admissible(const Word& w) const {
        for (Sym s : w)
            if (s >= alpha_.size || !usable_mask_[s]) return false;
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            if (!edge(w[i], w[i + 1])) return false;
        return true;
    }

    // Strong connectivity on the usable symbols.
    bool transitive() const {
        if (usable_.empty()) return false;
        return reach_all(usable_.front(), false) && reach_all(usable_.front(), true);
    }

    // Smallest N <= cap with strictly positive N-th boolean power restricted
    // to usable symbols; nullopt when not primitive within cap.
    std::optional<int> primitivity_index(int cap) const {
        if (cap < 1) throw DomainError("primitivity_index: cap must be >= 1");
        if (usable_.empty()) return std::nullopt;
        auto pw = restricted();
        auto cur = pw;
        for (int N = 1; N <= cap; ++N) {
            if (N > 1) cur = bool_mul(cur, pw);
            if (all_positive(cur)) return N;
        }
        return std::nullopt;
    }

    // gcd of the lengths of all cycles through a reference usable symbol;
    // computed from BFS level differences across edges.
    int period() const {
        require_transitive();
        int ref = usable_.front();
        std::vector<Int> depth(alpha_.size, -1);
        std::queue<int> q;
        depth[ref] = 0;
        q.push(ref);
        Int g = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : usable_) {
                if (!edge(u, v)) continue;
                if (depth[v] < 0) {
                    depth[v] = depth[u] + 1;
                    q.push(v);
                } else {
                    Int diff = depth[u] + 1 - depth[v];
                    g = boost::multiprecision::gcd(g, diff < 0 ? -diff : diff);
                }
            }
        }
        return g == 0 ? 0 : static_cast<int>(g);
    }

    // Residue classes of BFS depth mod period; every edge advances the class
    // index by one.
    PeriodicDecomposition cyclic_classes() const {
        require_transitive();
        int p = period();
        if (p == 0) throw DomainError("cyclic_classes: aperiodic trivial system");
        int ref = usable_.front();
        std::vector<int> depth(alpha_.size, -1);
        std::queue<int> q;
        depth[ref] = 0;
        q.push(ref);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : usable_)
                if (edge(u, v) && depth[v] < 0) {
                    depth[v] = depth[u] + 1;
                    q.push(v);
                }
        }
        PeriodicDecomposition d;
        d.period = p;
        d.classes.assign(p, {});
        for (int s : usable_) d.classes[depth[s] % p].push_back(s);
        for (int c = 0; c < p; ++c)
            if (d.classes[c].empty())
                throw InvariantError("cyclic_classes: empty class");
        return d;
    }

    // Word w of length L with u+w+v admissible, or nullopt.  Exact-length
    // path search via backward reachability layers; greedy smallest symbol.
    std::optional<Word> bridge(const Word& u, const Word& v, long L) const {
        if (L < 0) throw DomainError("bridge: negative gap");
        if (!admissible(u) || !admissible(v))
            throw DomainError("bridge: endpoints must be admissible");
        if (u.empty() || v.empty()) {
            // free end: any admissible path of length L extends
            Word w = extend_least_path(u.empty() ? -1 : u[u.size() - 1], L);
            if (w.size() != static_cast<std::size_t>(L)) return std::nullopt;
            if (!v.empty() && L == 0 && !u.empty() && !edge(u[u.size() - 1], v[0]))
                return std::nullopt;
            return w;
        }
        int a = u[u.size() - 1], b = v[0];
        // reach[j] = set of symbols with a path of exactly j edges to b
        std::vector<std::vector<char>> reach(static_cast<std::size_t>(L) + 2,
                                             std::vector<char>(alpha_.size, 0));
        reach[0][b] = 1;
        for (long j = 1; j <= L + 1; ++j)
            for (int s : usable_)
                for (int t : usable_)
                    if (edge(s, t) && reach[j - 1][t]) reach[j][s] = 1;
        if (!reach[L + 1][a]) return std::nullopt;
        Word w;
        int cur = a;
        for (long pos = 0; pos < L; ++pos) {
            long remaining = L - pos;  // edges still needed after choosing next = remaining
            bool placed = false;
            for (int s : usable_) {
                if (edge(cur, s) && reach[remaining][s]) {
                    w.push(static_cast<Sym>(s));
                    cur = s;
                    placed = true;
                    break;
                }
            }
            if (!placed) throw InvariantError("bridge: layer table inconsistent");
        }
        return w;
    }

    // Admissible continuation of length len from symbol `from` (or from the
    // least usable symbol when from < 0), greedily smallest.
    Word extend_least_path(int from, long len) const {
        Word w;
        int cur = from;
        for (long i = 0; i < len; ++i) {
            int next = -1;
            if (cur < 0) {
                next = usable_.empty() ? -1 : usable_.front();
            } else {
                for (int s : usable_)
                    if (edge(cur, s)) {
                        next = s;
                        break;
                    }
            }
            if (next < 0) break;
            w.push(static_cast<Sym>(next));
            cur = next;
        }
        return w;
    }

    // A short cycle word through `from`, used for periodic continuations.
    Word least_cycle(int from) const {
        require_transitive();
        // BFS back to `from`
        std::vector<int> prev(alpha_.size, -2);
        std::queue<int> q;
        for (int s : usable_)
            if (edge(from, s) && prev[s] == -2) {
                prev[s] = -1;
                q.push(s);
            }
        while (!q.empty()) {
            int cur = q.front();
            q.pop();
            if (cur == from) break;
            for (int s : usable_)
                if (edge(cur, s) && prev[s] == -2) {
                    prev[s] = cur;
                    q.push(s);
                }
        }
        if (prev[from] == -2) throw InvariantError("least_cycle: no cycle");
        std::vector<int> rev;
        for (int s = from; s != -1; s = prev[s]) rev.push_back(s);
        Word w;
        for (auto it = rev.rbegin(); it != rev.rend(); ++it)
            w.push(static_cast<Sym>(*it));
        return w;  // starts after `from`, ends at `from`
    }

    std::vector<std::vector<int>> bool_power(int e) const {
        auto base = restricted();
        std::vector<std::vector<int>> acc;
        bool started = false;
        while (e > 0) {
            if (e & 1) {
                acc = started ? bool_mul(acc, base) : base;
                started = true;
            }
            base = bool_mul(base, base);
            e >>= 1;
        }
        if (!started) {
            acc.assign(alpha_.size, std::vector<int>(alpha_.size, 0));
            for (int s : usable_) acc[s][s] = 1;
        }
        return acc;
    }

    // Submatrix power restricted to a class, as its own transition system.
    TransitionSystem power_on_class(int e, const std::vector<int>& cls) const {
        auto pw = bool_power(e);
        Alphabet sub(static_cast<int>(cls.size()));
        std::vector<std::vector<int>> m(cls.size(), std::vector<int>(cls.size(), 0));
        for (std::size_t i = 0; i < cls.size(); ++i)
            for (std::size_t j = 0; j < cls.size(); ++j)
                m[i][j] = pw[cls[i]][cls[j]];
        return TransitionSystem(sub, std::move(m));
    }

  private:
    Alphabet alpha_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> usable_;
    std::vector<char> usable_mask_;

    // Symbols on bi-infinite paths: iteratively remove symbols without a
    // successor or predecessor among the survivors.
    void compute_usable() {
        int n = alpha_.size;
        std::vector<char> alive(n, 1);
        bool changed = true;
        while (changed) {
            changed = false;
            for (int s = 0; s < n; ++s) {
                if (!alive[s]) continue;
                bool succ = false, pred = false;
                for (int t = 0; t < n; ++t) {
                    if (alive[t] && adj_[s][t]) succ = true;
                    if (alive[t] && adj_[t][s]) pred = true;
                }
                if (!succ || !pred) {
                    alive[s] = 0;
                    changed = true;
                }
            }
        }
        usable_mask_.assign(n, 0);
        for (int s = 0; s < n; ++s)
            if (alive[s]) {
                usable_.push_back(s);
                usable_mask_[s] = 1;
            }
    }

    void require_transitive() const {
        if (!transitive())
            throw DomainError("transition system is not transitive on usable symbols");
    }

    bool reach_all(int from, bool reverse) const {
        std::vector<char> seen(alpha_.size, 0);
        std::queue<int> q;
        seen[from] = 1;
        q.push(from);
        int count = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            ++count;
            for (int v : usable_) {
                bool e = reverse ? edge(v, u) : edge(u, v);
                if (e && !seen[v]) {
                    seen[v] = 1;
                    q.push(v);
                }
            }
        }
        return count == static_cast<int>(usable_.size());
    }

    std::vector<std::vector<int>> restricted() const {
        std::vector<std::vector<int>> m(alpha_.size, std::vector<int>(alpha_.size, 0));
        for (int s : usable_)
            for (int t : usable_)
                if (adj_[s][t]) m[s][t] = 1;
        return m;
    }
    std::vector<std::vector<int>> bool_mul(const std::vector<std::vector<int>>& A,
                                           const std::vector<std::vector<int>>& B) const {
        std::size_t n = A.size();
        std::vector<std::vector<int>> C(n, std::vector<int>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                if (A[i][k])
                    for (std::size_t j = 0; j < n; ++j)
                        if (B[k][j]) C[i][j] = 1;
        return C;
    }
    bool all_positive(const std::vector<std::vector<int>>& M) const {
        for (int s : usable_)
            for (int t : usable_)
                if (!M[s][t]) return false;
        return true;
    }
};

}  // namespace symdyn
