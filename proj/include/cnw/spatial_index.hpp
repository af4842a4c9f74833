#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cnw/cost_space.hpp"

namespace cnw {

/// Uniform bucket grid over the sample coordinates of a Euclidean space.
class BucketIndex {
public:
    BucketIndex(const CostSpace& space, double cell) : space_(&space), cell_(cell) {
        if (!space.is_euclidean()) throw SpecError("bucket index needs a Euclidean embedding");
        if (!(cell > 0.0)) throw SpecError("bucket cell size must be positive");
        for (std::size_t i = 0; i < space.size(); ++i) buckets_[key_of(space.point(i))].push_back(i);
    }

    double cell() const noexcept { return cell_; }

    /// Samples with distance to `p` in (r_lo, r_hi], sorted by (distance, index).
    std::vector<std::pair<double, std::size_t>> shell(std::span<const double> p, double r_lo, double r_hi) const {
        const std::size_t dim = space_->dim();
        std::vector<std::int64_t> lo(dim), hi(dim), cur(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            lo[d] = cell_index(p[d] - r_hi);
            hi[d] = cell_index(p[d] + r_hi);
        }
        std::vector<std::pair<double, std::size_t>> out;
        cur = lo;
        while (true) {
            if (auto it = buckets_.find(cur); it != buckets_.end())
                for (std::size_t id : it->second) {
                    const double dist = space_->cost_from(p, id);
                    if (dist > r_lo && dist <= r_hi) out.emplace_back(dist, id);
                }
            std::size_t d = 0;
            for (; d < dim; ++d) {
                if (++cur[d] <= hi[d]) break;
                cur[d] = lo[d];
            }
            if (d == dim) break;
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::int64_t cell_index(double v) const {
        const double c = std::floor(v / cell_);
        return static_cast<std::int64_t>(std::clamp(c, -4.0e15, 4.0e15));
    }

    std::vector<std::int64_t> key_of(std::span<const double> p) const {
        std::vector<std::int64_t> k(p.size());
        for (std::size_t d = 0; d < p.size(); ++d) k[d] = cell_index(p[d]);
        return k;
    }

    const CostSpace* space_;
    double cell_;
    std::map<std::vector<std::int64_t>, std::vector<std::size_t>> buckets_;
};

} // namespace cnw
