#pragma once

// Minimal epsilon-link levels between samples.
//
//   L(x, y) = min over samples z and steps n in [first, last] of
//             max( c(x, z), c(f^n(z), y) ).
//
// On a finite sample set the infimum is attained, so the open and closed
// readings of every threshold relation coincide:
//   [x]_eps = [x]_{eps+} = { y : L(x, y) <= eps }.
// Results are only as good as the horizon and the sample density; both are
// carried alongside every matrix.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cnw/cost_space.hpp"
#include "cnw/error.hpp"
#include "cnw/map_system.hpp"
#include "cnw/parallel.hpp"
#include "cnw/spatial_index.hpp"

namespace cnw {

/// Anything that exposes entry costs, exit costs along stored orbits, and a step window.
template <class S>
concept LinkSource = requires(const S& s, std::size_t a, std::span<double> row) {
    { s.size() } -> std::convertible_to<std::size_t>;
    { s.first_step() } -> std::convertible_to<std::size_t>;
    { s.last_step() } -> std::convertible_to<std::size_t>;
    { s.entry_cost(a, a) } -> std::convertible_to<double>;
    { s.exit_cost(a, a, a) } -> std::convertible_to<double>;
    { s.exit_min_row(a, row) };
    { s.space() } -> std::convertible_to<const CostSpace&>;
};

struct LinkWitness {
    std::size_t start = 0; // perturbation point z
    std::size_t steps = 0; // n (maps) or time-grid index (flows)
    double start_cost = kInf;
    double end_cost = kInf;
    double level = kInf;
};

struct MatrixOptions {
    unsigned threads = 1;
    bool use_spatial_index = false;
    bool with_witnesses = false;
    /// Rows to compute; all rows when empty.
    std::optional<std::vector<std::size_t>> rows;
};

/// L(x, y) for requested rows x and all columns y.
class LevelMatrix {
public:
    LevelMatrix() = default;
    LevelMatrix(std::size_t n, std::size_t first_step, std::size_t last_step)
        : n_(n), first_(first_step), last_(last_step),
          levels_(n * n, std::numeric_limits<double>::quiet_NaN()), row_done_(n, 0) {}

    std::size_t size() const noexcept { return n_; }
    std::size_t first_step() const noexcept { return first_; }
    std::size_t last_step() const noexcept { return last_; }

    double operator()(std::size_t x, std::size_t y) const noexcept { return levels_[x * n_ + y]; }
    double& at(std::size_t x, std::size_t y) noexcept { return levels_[x * n_ + y]; }
    std::span<const double> row(std::size_t x) const noexcept { return {levels_.data() + x * n_, n_}; }
    std::span<double> row(std::size_t x) noexcept { return {levels_.data() + x * n_, n_}; }

    bool has_row(std::size_t x) const noexcept { return row_done_[x] != 0; }
    void mark_row(std::size_t x) noexcept { row_done_[x] = 1; }
    bool complete() const noexcept {
        return std::all_of(row_done_.begin(), row_done_.end(), [](unsigned char b) { return b != 0; });
    }

    bool has_witnesses() const noexcept { return !witnesses_.empty(); }
    const LinkWitness& witness(std::size_t x, std::size_t y) const noexcept { return witnesses_[x * n_ + y]; }
    std::vector<LinkWitness>& witnesses() noexcept { return witnesses_; }

    const std::vector<double>& data() const noexcept { return levels_; }

private:
    std::size_t n_ = 0;
    std::size_t first_ = 1;
    std::size_t last_ = 1;
    std::vector<double> levels_;
    std::vector<unsigned char> row_done_; // not vector<bool>: rows are marked concurrently
    std::vector<LinkWitness> witnesses_;
};

/// Direct minimization over every (z, n) with an achieving witness.
///
/// Ties break on smallest level, then smallest n, then smallest z.
template <LinkSource S>
std::pair<double, LinkWitness> link_level(const S& sys, std::size_t x, std::size_t y) {
    if (sys.size() == 0) throw SpecError("empty sample set");
    LinkWitness best;
    bool found = false;
    for (std::size_t n = sys.first_step(); n <= sys.last_step(); ++n)
        for (std::size_t z = 0; z < sys.size(); ++z) {
            const double a = sys.entry_cost(x, z);
            const double b = sys.exit_cost(z, n, y);
            const double level = std::max(a, b);
            if (!found || level < best.level) {
                best = LinkWitness{z, n, a, b, level};
                found = true;
            }
        }
    return {best.level, best};
}

namespace detail {

// best[y] = min over z of max(c(x,z), exit_min[z][y]); z visited in ascending
// entry cost. Column y is final once the entry cost reaches best[y], so only
// the still-open columns are touched.
struct RowReducer {
    std::span<double> best;
    std::vector<std::size_t> open;

    explicit RowReducer(std::span<double> b) : best(b), open(b.size()) {
        std::iota(open.begin(), open.end(), std::size_t{0});
    }

    void visit(double entry, std::span<const double> exit_row) {
        std::size_t keep = 0;
        for (std::size_t y : open) {
            const double v = std::max(entry, exit_row[y]);
            if (v < best[y]) best[y] = v;
            if (best[y] > entry) open[keep++] = y;
        }
        open.resize(keep);
    }
    // Entries arrive in ascending order, so a column with best <= entry never improves.
    bool done(double next_entry) {
        std::size_t keep = 0;
        for (std::size_t y : open)
            if (best[y] > next_entry) open[keep++] = y;
        open.resize(keep);
        return open.empty();
    }
    double bound() const {
        double worst = 0.0;
        for (std::size_t y : open) worst = std::max(worst, best[y]);
        return open.empty() ? 0.0 : worst;
    }
};

} // namespace detail

template <LinkSource S>
LevelMatrix level_matrix(const S& sys, const MatrixOptions& opt = {}) {
    const std::size_t n = sys.size();
    if (n == 0) throw SpecError("empty sample set");
    std::vector<std::size_t> rows;
    if (opt.rows) {
        rows = *opt.rows;
        if (rows.empty()) throw SpecError("empty target set");
        for (auto r : rows)
            if (r >= n) throw SpecError("target sample out of range");
    } else {
        rows.resize(n);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    }

    // exit_min[z][y] = min over n of c(f^n(z), y)
    std::vector<double> exit_min(n * n);
    parallel_for(n, opt.threads, [&](std::size_t z) {
        sys.exit_min_row(z, std::span<double>(exit_min.data() + z * n, n));
    });
    auto exit_row = [&](std::size_t z) { return std::span<const double>(exit_min.data() + z * n, n); };

    LevelMatrix m(n, sys.first_step(), sys.last_step());
    const bool use_index = opt.use_spatial_index && sys.space().is_euclidean();
    std::optional<BucketIndex> index;
    double diameter = 0.0;
    if (use_index) {
        double extent = 0.0;
        const auto& cs = sys.space();
        for (std::size_t d = 0; d < cs.dim(); ++d) {
            double lo = kInf, hi = -kInf;
            for (std::size_t i = 0; i < n; ++i) {
                lo = std::min(lo, cs.point(i)[d]);
                hi = std::max(hi, cs.point(i)[d]);
            }
            extent = std::max(extent, hi - lo);
        }
        const double cell = extent > 0.0 ? extent / std::max(1.0, std::sqrt(static_cast<double>(n))) : 1.0;
        diameter = extent * std::sqrt(static_cast<double>(cs.dim())) * (1.0 + 1e-9) + cell;
        index.emplace(cs, cell);
    }

    parallel_for(rows.size(), opt.threads, [&](std::size_t k) {
        const std::size_t x = rows[k];
        auto best = m.row(x);
        std::fill(best.begin(), best.end(), kInf);
        detail::RowReducer red(best);
        if (index) {
            // Expanding shells around x; each shell is sorted, so the visit order
            // matches the full sort below.
            const auto px = sys.space().point(x);
            double r_lo = -1.0, r_hi = index->cell();
            while (true) {
                bool stop = false;
                for (const auto& [dist, z] : index->shell(px, r_lo, r_hi)) {
                    if (red.done(dist)) { stop = true; break; }
                    red.visit(dist, exit_row(z));
                }
                // Everything within r_hi is visited; the rest lies strictly beyond it.
                if (stop || red.bound() <= r_hi || r_hi >= diameter) break;
                r_lo = r_hi;
                r_hi *= 2.0;
            }
        } else {
            std::vector<std::pair<double, std::size_t>> order(n);
            for (std::size_t z = 0; z < n; ++z) order[z] = {sys.entry_cost(x, z), z};
            std::sort(order.begin(), order.end());
            for (const auto& [entry, z] : order) {
                if (red.done(entry)) break;
                red.visit(entry, exit_row(z));
            }
        }
        m.mark_row(x);
    });

    if (opt.with_witnesses) {
        auto& w = m.witnesses();
        w.assign(n * n, LinkWitness{});
        parallel_for(rows.size(), opt.threads, [&](std::size_t k) {
            const std::size_t x = rows[k];
            for (std::size_t y = 0; y < n; ++y) w[x * n + y] = link_level(sys, x, y).second;
        });
    }
    return m;
}

/// { y : L(x, y) <= eps }, ascending.
inline std::vector<std::size_t> reachable_set(const LevelMatrix& m, std::size_t x, double eps) {
    if (!(eps >= 0.0)) throw SpecError("eps must be >= 0");
    if (!m.has_row(x)) throw SpecError("matrix row not computed");
    std::vector<std::size_t> out;
    for (std::size_t y = 0; y < m.size(); ++y)
        if (m(x, y) <= eps) out.push_back(y);
    return out;
}

struct HorizonStability {
    std::size_t full_horizon = 0;
    std::size_t half_horizon = 0;
    std::size_t changed_pairs = 0;
    std::vector<std::pair<std::size_t, std::size_t>> examples; // first few changed pairs
    bool stable() const noexcept { return changed_pairs == 0; }
};

/// Recomputes L with half the horizon and lists pairs whose level changed.
inline HorizonStability horizon_stability(const MapSystem& sys, const LevelMatrix& full,
                                          const MatrixOptions& opt = {}, std::size_t max_examples = 8) {
    HorizonStability r;
    r.full_horizon = sys.horizon();
    r.half_horizon = std::max<std::size_t>(1, sys.horizon() / 2);
    const LevelMatrix half = level_matrix(sys.with_horizon(r.half_horizon), opt);
    for (std::size_t x = 0; x < full.size(); ++x) {
        if (!full.has_row(x)) continue;
        for (std::size_t y = 0; y < full.size(); ++y)
            if (half(x, y) != full(x, y)) {
                ++r.changed_pairs;
                if (r.examples.size() < max_examples) r.examples.emplace_back(x, y);
            }
    }
    return r;
}

} // namespace cnw
