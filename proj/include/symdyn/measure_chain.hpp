#pragma once

#include "symdyn/measure.hpp"
#include "symdyn/rational.hpp"

#include <utility>
#include <vector>

namespace symdyn {

// Convex segment conv{rho0, rho1} of finitely described measures; the home
// of every chain and dense-sequence construction.
struct MeasureSegment {
    FiniteMeasure rho0, rho1;

    FiniteMeasure at(const Rat& theta) const {
        if (theta < 0 || theta > 1) throw DomainError("segment parameter outside [0,1]");
        if (theta == 0) return rho0;
        if (theta == 1) return rho1;
        return FiniteMeasure::convex({{1 - theta, rho0}, {theta, rho1}});
    }
    // Under the pinned family the weak* distance is linear along a segment:
    // d(at(s), at(t)) = |s-t| * d(rho0, rho1) at every truncation.
    WeakStarDistance endpoint_distance(int K) const {
        return weak_star_distance(rho0, rho1, K);
    }
};

struct MeasureChain {
    std::vector<FiniteMeasure> points;
    std::vector<Rat> params;  // segment parameters of the points
    Rat step_bound;           // declared eps

    // consecutive truncated distances must not exceed the declared bound
    void verify(int K) const {
        for (std::size_t s = 0; s + 1 < points.size(); ++s) {
            WeakStarDistance d = weak_star_distance(points[s], points[s + 1], K);
            if (d.value > step_bound)
                throw InvariantError("MeasureChain: step exceeds bound");
        }
    }
};

// Chain from seg.at(a) to seg.at(b) in equal parameter steps, with step count
// ceil(d(mu,nu)/eps) so consecutive truncated distances stay within eps.
inline MeasureChain chain_between(const MeasureSegment& seg, const Rat& a, const Rat& b,
                                  const Rat& eps, int K) {
    if (eps <= 0) throw DomainError("chain_between: eps > 0");
    MeasureChain chain;
    chain.step_bound = eps;
    Rat span = b - a;
    if (span < 0) span = -span;
    Rat dist = seg.endpoint_distance(K).value * span;
    if (span == 0 || dist == 0) {
        chain.points = {seg.at(a)};
        chain.params = {a};
        return chain;
    }
    Int steps = ceil_rat(dist / eps);
    if (steps < 1) steps = 1;
    for (Int s = 0; s <= steps; ++s) {
        Rat t = a + (b - a) * Rat(s, steps);
        chain.params.push_back(t);
        chain.points.push_back(seg.at(t));
    }
    return chain;
}

// Pfister-Sullivan style dense sequence on a polyline of convex segments:
// successively refined dyadic parameter sweeps, alternating direction, so
// every tail is dense and consecutive gaps shrink under a computable
// envelope.
class DenseSequence {
  public:
    explicit DenseSequence(std::vector<FiniteMeasure> vertices, int K = 20)
        : verts_(std::move(vertices)), trunc_(K) {
        if (verts_.empty()) throw DomainError("DenseSequence: no vertices");
        length_ = 0;
        for (std::size_t v = 0; v + 1 < verts_.size(); ++v)
            length_ += weak_star_distance(verts_[v], verts_[v + 1], K).value;
    }

    // 1-based index; pass 1 emits parameters 0, 1/2, 1 and pass P >= 2 emits
    // 2^P entries sweeping back across the refined grid.
    Rat param_at(const Int& j) const {
        if (j < 1) throw DomainError("DenseSequence: index >= 1");
        if (verts_.size() == 1) return 0;
        auto [pass, pos] = locate(j);
        Int denom = Int(1) << static_cast<unsigned>(pass);
        bool ascending = (pass % 2) == 1;
        Int step_index = pass == 1 ? pos : pos + 1;  // passes >= 2 drop the first grid point
        Int num = ascending ? step_index : denom - step_index;
        return Rat(num, denom);
    }

    FiniteMeasure at(const Int& j) const { return eval(param_at(j)); }

    // declared gap envelope: distance between consecutive entries at index j
    // is at most length * 2^-pass(j)
    Rat gap_envelope(const Int& j) const {
        auto [pass, pos] = locate(j);
        return length_ * pow_rat(Rat(1, 2), pass);
    }

    // polyline evaluation: t in [0,1] mapped across segments uniformly
    FiniteMeasure eval(const Rat& t) const {
        if (verts_.size() == 1) return verts_[0];
        std::size_t nseg = verts_.size() - 1;
        Rat scaled = t * Rat(static_cast<long>(nseg));
        Int seg = floor_rat(scaled);
        if (seg >= Int(static_cast<long>(nseg))) seg = static_cast<long>(nseg) - 1;
        Rat local = scaled - Rat(seg);
        MeasureSegment s{verts_[static_cast<std::size_t>(static_cast<long>(seg))],
                         verts_[static_cast<std::size_t>(static_cast<long>(seg)) + 1]};
        return s.at(local);
    }

    const std::vector<FiniteMeasure>& vertices() const { return verts_; }
    Rat polyline_length() const { return length_; }

  private:
    std::vector<FiniteMeasure> verts_;
    int trunc_;
    Rat length_;

    // j -> (pass, position within pass), both 0-based position
    std::pair<long, Int> locate(const Int& j) const {
        Int remaining = j - 1;
        long pass = 1;
        Int pass_size = 3;
        while (remaining >= pass_size) {
            remaining -= pass_size;
            ++pass;
            pass_size = Int(1) << static_cast<unsigned>(pass);
            if (pass > 512) throw BudgetError("DenseSequence: index too large");
        }
        return {pass, remaining};
    }
};

// The spec's denseSequenceOn: checks the caller's envelope dominates the
// construction's own on the requested range.
inline DenseSequence dense_sequence_on(std::vector<FiniteMeasure> vertices,
                                       const std::vector<Rat>& gap_envelope, int K = 20) {
    DenseSequence seq(std::move(vertices), K);
    for (std::size_t j = 0; j < gap_envelope.size(); ++j) {
        Int idx = static_cast<long>(j) + 1;
        if (seq.gap_envelope(idx) > gap_envelope[j])
            throw DomainError("dense_sequence_on: requested envelope too tight");
    }
    return seq;
}

}  // namespace symdyn
