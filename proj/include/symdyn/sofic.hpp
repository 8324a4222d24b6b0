#pragma once

#include "symdyn/rational.hpp"
#include "symdyn/transition.hpp"
#include "symdyn/word.hpp"

#include <optional>
#include <set>
#include <vector>

namespace symdyn {

// Sofic shift presented by a labeled graph: admissible words are exactly the
// label sequences of paths.
class SoficModel {
  public:
    struct Edge {
        int from, to;
        Sym label;
    };

    SoficModel(Alphabet a, int vertex_count, std::vector<Edge> edges)
        : alpha_(a), nv_(vertex_count), edges_(std::move(edges)) {
        if (nv_ < 1) throw DomainError("SoficModel: need at least one vertex");
        for (const Edge& e : edges_) {
            if (e.from < 0 || e.from >= nv_ || e.to < 0 || e.to >= nv_)
                throw DomainError("SoficModel: edge endpoint out of range");
            if (e.label >= alpha_.size) throw DomainError("SoficModel: bad label");
        }
        adj_.assign(nv_, std::vector<int>(nv_, 0));
        out_.assign(nv_, {});
        for (const Edge& e : edges_) {
            adj_[e.from][e.to] = 1;
            out_[e.from].push_back(e);
        }
        vertex_graph_ = std::make_unique<TransitionSystem>(Alphabet(std::max(nv_, 1)), adj_);
    }
    SoficModel(const SoficModel& o)
        : alpha_(o.alpha_), nv_(o.nv_), edges_(o.edges_), adj_(o.adj_), out_(o.out_) {
        vertex_graph_ = std::make_unique<TransitionSystem>(Alphabet(std::max(nv_, 1)), adj_);
    }
    SoficModel& operator=(const SoficModel&) = delete;

    const Alphabet& alphabet() const { return alpha_; }
    const TransitionSystem& vertex_graph() const { return *vertex_graph_; }

    bool admissible(const Word& w) const {
        std::set<int> cur = all_vertices();
        for (Sym s : w) {
            cur = step(cur, s);
            if (cur.empty()) return false;
        }
        return true;
    }

    // End vertices of paths labeled w (from anywhere); empty iff inadmissible.
    std::set<int> end_vertices(const Word& w) const {
        std::set<int> cur = all_vertices();
        for (Sym s : w) cur = step(cur, s);
        return cur;
    }

    // Vertices from which w is readable.
    std::set<int> start_vertices(const Word& w) const {
        std::set<int> cur = all_vertices();
        for (std::size_t i = w.size(); i-- > 0;) cur = step_back(cur, w[i]);
        return cur;
    }

    // Label word of a length-L vertex path connecting some end vertex of u to
    // some start vertex of v; greedy smallest labels through reachability
    // layers on the vertex graph.
    std::optional<Word> bridge(const Word& u, const Word& v, long L) const {
        if (!admissible(u) || !admissible(v))
            throw DomainError("bridge: endpoints must be admissible");
        std::set<int> from = u.empty() ? all_vertices() : end_vertices(u);
        std::set<int> to = v.empty() ? all_vertices() : start_vertices(v);
        // reach[j][x]: can x reach `to` in exactly j edges
        std::vector<std::vector<char>> reach(static_cast<std::size_t>(L) + 1,
                                             std::vector<char>(nv_, 0));
        for (int t : to) reach[0][t] = 1;
        for (long j = 1; j <= L; ++j)
            for (int x = 0; x < nv_; ++x)
                for (int y = 0; y < nv_; ++y)
                    if (adj_[x][y] && reach[j - 1][y]) reach[j][x] = 1;
        int cur = -1;
        for (int x : from)
            if (reach[L][x]) {
                cur = x;
                break;
            }
        if (cur < 0) return std::nullopt;
        Word w;
        for (long pos = 0; pos < L; ++pos) {
            long remaining = L - pos - 1;
            const Edge* best = nullptr;
            for (const Edge& e : out_[cur])
                if (reach[remaining][e.to] && (!best || e.label < best->label))
                    best = &e;
            if (!best) throw InvariantError("sofic bridge: layer table inconsistent");
            w.push(best->label);
            cur = best->to;
        }
        return w;
    }

    // Admissible right-infinite continuation: follow smallest-label edges
    // from a fixed vertex until the vertex repeats, yielding prefix + cycle.
    std::pair<Word, Word> least_continuation(const Word& from) const {
        std::set<int> ends = from.empty() ? all_vertices() : end_vertices(from);
        if (ends.empty()) throw DomainError("least_continuation: word inadmissible");
        int cur = *ends.begin();
        std::vector<int> seen_at(nv_, -1);
        Word path;
        std::vector<int> verts;
        while (seen_at[cur] < 0) {
            seen_at[cur] = static_cast<int>(path.size());
            verts.push_back(cur);
            if (out_[cur].empty()) throw DomainError("least_continuation: dead end");
            const Edge* best = nullptr;
            for (const Edge& e : out_[cur])
                if (!best || e.label < best->label) best = &e;
            path.push(best->label);
            cur = best->to;
        }
        int cycle_start = seen_at[cur];
        Word prefix = path.sub(0, static_cast<std::size_t>(cycle_start));
        Word cycle = path.sub(static_cast<std::size_t>(cycle_start),
                              path.size() - static_cast<std::size_t>(cycle_start));
        return {prefix, cycle};
    }

  private:
    Alphabet alpha_;
    int nv_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
    std::vector<std::vector<Edge>> out_;
    std::unique_ptr<TransitionSystem> vertex_graph_;

    std::set<int> all_vertices() const {
        std::set<int> s;
        for (int v = 0; v < nv_; ++v) s.insert(v);
        return s;
    }
    std::set<int> step(const std::set<int>& cur, Sym s) const {
        std::set<int> next;
        for (int x : cur)
            for (const Edge& e : out_[x])
                if (e.label == s) next.insert(e.to);
        return next;
    }
    std::set<int> step_back(const std::set<int>& cur, Sym s) const {
        std::set<int> prev;
        for (const Edge& e : edges_)
            if (e.label == s && cur.count(e.to)) prev.insert(e.from);
        return prev;
    }
};

}  // namespace symdyn
