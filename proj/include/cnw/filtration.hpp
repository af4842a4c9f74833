#pragma once

// Non-wandering level lambda(x) = L(x, x) and robustness level
//   beta(x) = min { L(x, y) : L(y, x) > L(x, y) }   (inf when no such y),
// defined only when lambda(x) <= tau.  On a finite sample set x is
// -eps-non-wandering exactly when eps < beta(x): a violation of the return
// condition at some eps' <= eps is witnessed at eps' = L(x, y) itself.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "cnw/cost_space.hpp"
#include "cnw/error.hpp"
#include "cnw/extended_level.hpp"
#include "cnw/link_engine.hpp"
#include "cnw/map_system.hpp"
#include "cnw/parallel.hpp"

namespace cnw {

/// Boundary convention for negative levels: strict eps < beta, or closed eps <= beta.
enum class NegBoundary { Strict, Closed };

struct LevelSummary {
    std::vector<double> lambda;
    std::vector<std::optional<double>> beta; // nullopt: undefined (lambda > tau)
    // For all y with L(x,y) <= tau: L(y,x) <= tau. Can hold off the zero set.
    std::vector<unsigned char> minus_zero_relation_holds;
    double zero_tol = 0.0;
    NegBoundary boundary = NegBoundary::Strict;

    std::size_t size() const noexcept { return lambda.size(); }
};

inline double nw_level(const LevelMatrix& m, std::size_t x) {
    if (!m.has_row(x)) throw SpecError("matrix row not computed");
    return m(x, x);
}

inline void require_complete(const LevelMatrix& m) {
    if (!m.complete()) throw SpecError("robustness levels need a complete level matrix");
}

/// beta(x), or nullopt when lambda(x) > tau.
inline std::optional<double> robustness_level(const LevelMatrix& m, std::size_t x, double tau) {
    require_complete(m);
    if (!(m(x, x) <= tau)) return std::nullopt;
    double beta = kInf;
    for (std::size_t y = 0; y < m.size(); ++y) {
        const double fwd = m(x, y);
        if (m(y, x) > fwd && fwd < beta) beta = fwd;
    }
    return beta;
}

inline bool minus_zero_relation(const LevelMatrix& m, std::size_t x, double tau) {
    for (std::size_t y = 0; y < m.size(); ++y)
        if (m(x, y) <= tau && !(m(y, x) <= tau)) return false;
    return true;
}

inline LevelSummary summarize(const LevelMatrix& m, double tau, NegBoundary boundary = NegBoundary::Strict,
                              unsigned threads = 1) {
    require_complete(m);
    if (!(tau >= 0.0)) throw SpecError("zero tolerance must be >= 0");
    const std::size_t n = m.size();
    LevelSummary s;
    s.zero_tol = tau;
    s.boundary = boundary;
    s.lambda.resize(n);
    s.beta.resize(n);
    s.minus_zero_relation_holds.resize(n);
    parallel_for(n, threads, [&](std::size_t x) {
        s.lambda[x] = m(x, x);
        s.beta[x] = robustness_level(m, x, tau);
        s.minus_zero_relation_holds[x] = minus_zero_relation(m, x, tau) ? 1 : 0;
    });
    return s;
}

namespace detail {

inline bool neg_member(const LevelSummary& s, std::size_t x, double magnitude) {
    if (!(s.lambda[x] <= s.zero_tol) || !s.beta[x]) return false;
    return s.boundary == NegBoundary::Strict ? magnitude < *s.beta[x] : magnitude <= *s.beta[x];
}

} // namespace detail

/// Membership of sample x in the slice at `level`.
///
/// Positive slices also contain the -0 slice. With tau = 0 this adds nothing;
/// with a grid tolerance it keeps points admitted through the tolerance gate
/// inside +0, so slices stay nested.
inline bool omega_membership(const LevelSummary& s, std::size_t x, const ExtendedLevel& level) {
    if (level.is_neg()) return detail::neg_member(s, x, level.magnitude);
    return s.lambda[x] <= level.magnitude || detail::neg_member(s, x, 0.0);
}

struct DiagramSlice {
    ExtendedLevel level;
    std::vector<std::size_t> members; // ascending sample index
};

inline std::vector<DiagramSlice> diagram(const LevelSummary& s, const std::vector<ExtendedLevel>& levels) {
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i - 1] < levels[i])) throw SpecError("diagram levels must be strictly ascending");
    std::vector<DiagramSlice> out;
    out.reserve(levels.size());
    for (const auto& l : levels) {
        DiagramSlice slice{l, {}};
        for (std::size_t x = 0; x < s.size(); ++x)
            if (omega_membership(s, x, l)) slice.members.push_back(x);
        out.push_back(std::move(slice));
    }
    return out;
}

/// Sorted distinct diagonal values and beta candidates; slices are constant between them.
inline std::vector<double> critical_levels(const LevelMatrix& m) {
    require_complete(m);
    std::vector<double> v;
    for (std::size_t x = 0; x < m.size(); ++x) {
        v.push_back(m(x, x));
        for (std::size_t y = 0; y < m.size(); ++y)
            if (m(y, x) > m(x, y)) v.push_back(m(x, y));
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

/// Members of a 1-D embedded space merged into coordinate intervals (runs of consecutive indices).
inline std::vector<Interval> member_intervals(const CostSpace& space, const std::vector<std::size_t>& members) {
    if (space.dim() != 1) throw SpecError("interval summaries need a 1-D embedding");
    std::vector<Interval> out;
    for (std::size_t i = 0; i < members.size();) {
        std::size_t j = i;
        while (j + 1 < members.size() && members[j + 1] == members[j] + 1) ++j;
        const double a = space.point(members[i])[0];
        const double b = space.point(members[j])[0];
        out.push_back({std::min(a, b), std::max(a, b)});
        i = j + 1;
    }
    return out;
}

} // namespace cnw
