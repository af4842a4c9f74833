#pragma once

// Wandering-domain evidence: a pair (x, z) with L(x, z) < L(z, x). z is reached
// from x at budget eps = L(x, z) but no budget eps' in (eps, L(z, x)) brings it
// back. Evidence at sampled resolution only.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cnw/error.hpp"
#include "cnw/extended_level.hpp"
#include "cnw/link_engine.hpp"
#include "cnw/parallel.hpp"

namespace cnw {

struct WanderingCertificate {
    std::size_t x = 0;
    std::size_t z = 0;
    double eps = 0.0; // L(x, z)
    double gap = 0.0; // L(z, x) - L(x, z)
    std::optional<LinkWitness> witness_forward;
};

/// All pairs with L(z, x) - L(x, z) >= min_gap, sorted by gap descending, then x, then z.
inline std::vector<WanderingCertificate> find_wandering_certificates(const LevelMatrix& m, double min_gap,
                                                                     unsigned threads = 1) {
    if (!(min_gap > 0.0)) throw SpecError("min_gap must be positive");
    if (!m.complete()) throw SpecError("certificate search needs a complete level matrix");
    const std::size_t n = m.size();
    std::vector<std::vector<WanderingCertificate>> per_row(n);
    parallel_for(n, threads, [&](std::size_t x) {
        for (std::size_t z = 0; z < n; ++z) {
            const double fwd = m(x, z);
            const double back = m(z, x);
            // an infinite return level against a finite forward one counts as an infinite gap
            const double gap = back - fwd;
            if (fwd < back && gap >= min_gap) per_row[x].push_back({x, z, fwd, gap, std::nullopt});
        }
    });
    std::vector<WanderingCertificate> out;
    for (auto& r : per_row) out.insert(out.end(), r.begin(), r.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.gap != b.gap) return a.gap > b.gap;
        if (a.x != b.x) return a.x < b.x;
        return a.z < b.z;
    });
    return out;
}

/// Fills witness_forward by direct minimization over the link source.
template <LinkSource S>
void attach_witnesses(const S& sys, std::vector<WanderingCertificate>& certs, unsigned threads = 1) {
    parallel_for(certs.size(), threads, [&](std::size_t i) {
        certs[i].witness_forward = link_level(sys, certs[i].x, certs[i].z).second;
    });
}

struct PointCertification {
    bool certified = false;
    std::string explanation;
};

/// True iff L(z, x) > eps_prime, i.e. z cannot return to x within eps_prime.
///
/// `caveat` is appended to the explanation (horizon, grid spacing and so on).
inline PointCertification certify_point(const LevelMatrix& m, std::size_t x, std::size_t z, double eps_prime,
                                        const std::string& caveat = {}) {
    if (x >= m.size() || z >= m.size()) throw SpecError("sample index out of range");
    if (!m.has_row(x) || !m.has_row(z)) throw SpecError("matrix rows for x and z are required");
    const double fwd = m(x, z);
    const double back = m(z, x);
    if (!(eps_prime > fwd))
        throw SpecError("eps' = " + shortest_decimal(eps_prime) + " must exceed the forward level L(x,z) = " +
                        shortest_decimal(fwd));
    PointCertification r;
    r.certified = back > eps_prime;
    std::ostringstream os;
    os << "L(x,z) = " << shortest_decimal(fwd) << ", L(z,x) = " << shortest_decimal(back) << "; ";
    if (r.certified)
        os << "no " << shortest_decimal(eps_prime) << "-link returns from z to x";
    else
        os << "z returns to x within " << shortest_decimal(eps_prime);
    os << " (sampled resolution";
    if (!caveat.empty()) os << ", " << caveat;
    os << ")";
    r.explanation = os.str();
    return r;
}

} // namespace cnw
