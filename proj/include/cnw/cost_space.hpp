#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cnw/error.hpp"

namespace cnw {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept {
    if (a.size() == 1) return std::fabs(a[0] - b[0]);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct CostTriple {
    std::size_t a = 0, b = 0, c = 0;
};

struct CostValidation {
    bool non_degenerate = true;
    bool symmetric = true;
    bool triangle = true;
    std::optional<CostTriple> degenerate_witness; // (a, b, -)
    std::optional<CostTriple> asymmetry_witness;  // (a, b, -)
    std::optional<CostTriple> triangle_witness;   // c(a,c) > c(a,b) + c(b,c)

    bool metric() const noexcept { return non_degenerate && symmetric && triangle; }
};

/// Finite point set with a cost function into [0, inf].
///
/// Either Euclidean over an embedding or an explicit row-major matrix. An
/// explicit matrix may still carry coordinates (for export and plotting).
class CostSpace {
public:
    CostSpace() = default;

    static CostSpace euclidean(std::size_t dim, std::vector<double> coords) {
        if (dim == 0) throw SpecError("embedding dimension must be positive");
        if (coords.size() % dim != 0) throw SpecError("coordinate array size is not a multiple of the dimension");
        CostSpace s;
        s.dim_ = dim;
        s.size_ = coords.size() / dim;
        s.coords_ = std::move(coords);
        s.finish();
        return s;
    }

    static CostSpace explicit_costs(std::size_t n, std::vector<double> matrix,
                                    std::size_t dim = 0, std::vector<double> coords = {}) {
        if (matrix.size() != n * n) throw SpecError("cost matrix must be n x n");
        for (double v : matrix)
            if (std::isnan(v) || v < 0.0) throw SpecError("costs must lie in [0, inf]");
        for (std::size_t i = 0; i < n; ++i)
            if (matrix[i * n + i] != 0.0) throw SpecError("cost(x,x) must be 0");
        if (dim != 0 && coords.size() != n * dim) throw SpecError("coordinate array does not match point count");
        CostSpace s;
        s.size_ = n;
        s.dim_ = dim;
        s.coords_ = std::move(coords);
        s.matrix_ = std::move(matrix);
        s.finish();
        return s;
    }

    std::size_t size() const noexcept { return size_; }
    std::size_t dim() const noexcept { return dim_; }
    bool embedded() const noexcept { return dim_ != 0; }
    bool is_euclidean() const noexcept { return matrix_.empty() && dim_ != 0; }
    bool is_metric() const noexcept { return is_metric_; }
    bool is_non_degenerate() const noexcept { return is_non_degenerate_; }
    bool is_symmetric() const noexcept { return is_symmetric_; }

    std::span<const double> point(std::size_t i) const noexcept {
        return {coords_.data() + i * dim_, dim_};
    }
    const std::vector<double>& coords() const noexcept { return coords_; }
    const std::vector<double>& matrix() const noexcept { return matrix_; }

    double cost(std::size_t a, std::size_t b) const noexcept {
        if (!matrix_.empty()) return matrix_[a * size_ + b];
        return euclidean_distance(point(a), point(b));
    }

    /// Cost from a raw (off-sample) position to sample `b`; Euclidean spaces only.
    double cost_from(std::span<const double> p, std::size_t b) const noexcept {
        return euclidean_distance(p, point(b));
    }

    /// Index of the sample nearest to `p` (smallest index on ties).
    std::size_t nearest(std::span<const double> p) const {
        if (!embedded()) throw SpecError("nearest-sample lookup needs an embedded space");
        std::size_t best = 0;
        double bd = kInf;
        for (std::size_t i = 0; i < size_; ++i) {
            const double d = euclidean_distance(p, point(i));
            if (d < bd) { bd = d; best = i; }
        }
        return best;
    }

private:
    static constexpr std::size_t kMaxTriangleScan = 600;

    void finish();

    std::size_t size_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> coords_;
    std::vector<double> matrix_;
    bool is_metric_ = false;
    bool is_non_degenerate_ = false;
    bool is_symmetric_ = false;
};

/// Full scan of non-degeneracy, symmetry and the triangle inequality.
inline CostValidation validate_cost_space(const CostSpace& s) {
    CostValidation r;
    const std::size_t n = s.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const double ab = s.cost(a, b);
            if (r.non_degenerate && ab == 0.0) {
                r.non_degenerate = false;
                r.degenerate_witness = CostTriple{a, b, b};
            }
            if (r.symmetric && ab != s.cost(b, a)) {
                r.symmetric = false;
                r.asymmetry_witness = CostTriple{a, b, b};
            }
        }
    // Relative slack absorbs rounding in embedded Euclidean distances.
    for (std::size_t a = 0; a < n && r.triangle; ++a)
        for (std::size_t b = 0; b < n && r.triangle; ++b)
            for (std::size_t c = 0; c < n && r.triangle; ++c) {
                const double direct = s.cost(a, c);
                const double via = s.cost(a, b) + s.cost(b, c);
                if (direct > via * (1.0 + 1e-12) + 1e-300) {
                    r.triangle = false;
                    r.triangle_witness = CostTriple{a, b, c};
                }
            }
    return r;
}

inline void CostSpace::finish() {
    if (is_euclidean()) {
        // A Euclidean embedding is a metric unless two points coincide.
        std::vector<std::size_t> order(size_);
        for (std::size_t i = 0; i < size_; ++i) order[i] = i;
        auto less = [this](std::size_t a, std::size_t b) {
            auto pa = point(a), pb = point(b);
            return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
        };
        std::sort(order.begin(), order.end(), less);
        is_non_degenerate_ = true;
        for (std::size_t i = 0; i + 1 < size_; ++i)
            if (!less(order[i], order[i + 1])) { is_non_degenerate_ = false; break; }
        is_symmetric_ = true;
        is_metric_ = is_non_degenerate_;
        return;
    }
    if (size_ > kMaxTriangleScan) {
        // Cubic triangle scan skipped; the metric flag stays conservative.
        is_non_degenerate_ = true;
        is_symmetric_ = true;
        for (std::size_t a = 0; a < size_; ++a)
            for (std::size_t b = 0; b < size_; ++b) {
                if (a != b && cost(a, b) == 0.0) is_non_degenerate_ = false;
                if (cost(a, b) != cost(b, a)) is_symmetric_ = false;
            }
        is_metric_ = false;
        return;
    }
    const CostValidation v = validate_cost_space(*this);
    is_non_degenerate_ = v.non_degenerate;
    is_symmetric_ = v.symmetric;
    is_metric_ = v.metric();
}

} // namespace cnw
