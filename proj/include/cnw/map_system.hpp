#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cnw/cost_space.hpp"
#include "cnw/error.hpp"

namespace cnw {

/// Applies a map (or vector field) to a coordinate vector.
using Evaluator = std::function<void(std::span<const double> in, std::span<double> out)>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline constexpr std::size_t kDefaultMaxSamples = 200'000;

struct GridSpec {
    std::vector<Interval> box;
    double spacing = 0.0;
    std::size_t max_samples = kDefaultMaxSamples;
};

namespace detail {

// Points along one axis: both endpoints included, ascending.
inline std::vector<double> axis_points(const Interval& iv, double h) {
    const double range = iv.hi - iv.lo;
    if (range == 0.0) return {iv.lo};
    const double steps = range / h;
    const auto whole = static_cast<std::size_t>(std::floor(steps + 1e-9));
    std::vector<double> pts;
    pts.reserve(whole + 2);
    if (std::fabs(steps - static_cast<double>(whole)) <= 1e-9 * std::max(1.0, steps)) {
        // Interpolating keeps endpoints and a symmetric box's midpoint exact.
        for (std::size_t k = 0; k <= whole; ++k)
            pts.push_back(k == whole ? iv.hi
                                     : iv.lo + range * static_cast<double>(k) / static_cast<double>(whole));
    } else {
        for (std::size_t k = 0; k <= whole; ++k) pts.push_back(iv.lo + h * static_cast<double>(k));
        pts.push_back(iv.hi);
    }
    return pts;
}

inline std::size_t axis_count(const Interval& iv, double h) {
    const double range = iv.hi - iv.lo;
    if (range == 0.0) return 1;
    const double steps = range / h;
    const double whole = std::floor(steps + 1e-9);
    const bool exact = std::fabs(steps - whole) <= 1e-9 * std::max(1.0, steps);
    return static_cast<std::size_t>(std::min(whole, 1e18)) + (exact ? 1 : 2);
}

} // namespace detail

inline std::size_t grid_sample_count(const GridSpec& g) {
    double total = 1.0;
    for (const auto& iv : g.box) total *= static_cast<double>(detail::axis_count(iv, g.spacing));
    return total > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(total);
}

/// Smallest spacing (to 3 significant digits, rounded up) that fits the cap.
inline double required_spacing(const GridSpec& g) {
    double h = g.spacing;
    GridSpec probe = g;
    for (int i = 0; i < 200; ++i) {
        probe.spacing = h;
        if (grid_sample_count(probe) <= g.max_samples) break;
        h *= 1.05;
    }
    const double scale = std::pow(10.0, std::floor(std::log10(h)) - 2);
    return std::ceil(h / scale) * scale;
}

/// Uniform grid coordinates in ascending lexicographic order (row-major, first axis slowest).
inline std::vector<double> make_grid(const GridSpec& g) {
    if (g.box.empty()) throw SpecError("grid box must have at least one axis");
    if (!(g.spacing > 0.0) || !std::isfinite(g.spacing)) throw SpecError("grid spacing must be positive");
    for (const auto& iv : g.box)
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.hi < iv.lo)
            throw SpecError("grid box must satisfy lo <= hi");
    const std::size_t count = grid_sample_count(g);
    if (count > g.max_samples)
        throw ResourceLimitError("grid has " + std::to_string(count) + " samples, cap is " +
                                 std::to_string(g.max_samples) + "; use spacing >= " +
                                 std::to_string(required_spacing(g)));
    const std::size_t dim = g.box.size();
    std::vector<std::vector<double>> axes;
    for (const auto& iv : g.box) axes.push_back(detail::axis_points(iv, g.spacing));
    std::vector<double> coords;
    coords.reserve(count * dim);
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t p = 0; p < count; ++p) {
        for (std::size_t d = 0; d < dim; ++d) coords.push_back(axes[d][idx[d]]);
        for (std::size_t d = dim; d-- > 0;) {
            if (++idx[d] < axes[d].size()) break;
            idx[d] = 0;
        }
    }
    return coords;
}

/// Forward orbit segments f^1(z) .. f^N(z) for every sample z.
///
/// Tabulated systems store point ids (exact); sampled systems store raw
/// coordinates, never snapped back to the grid.
class TrajectoryStore {
public:
    TrajectoryStore() = default;

    static TrajectoryStore from_table(std::span<const std::uint32_t> table, std::size_t horizon) {
        TrajectoryStore t;
        t.samples_ = table.size();
        t.length_ = horizon;
        t.ids_.resize(t.samples_ * horizon);
        for (std::size_t z = 0; z < t.samples_; ++z) {
            std::uint32_t cur = static_cast<std::uint32_t>(z);
            for (std::size_t n = 0; n < horizon; ++n) {
                cur = table[cur];
                t.ids_[z * horizon + n] = cur;
            }
        }
        return t;
    }

    static TrajectoryStore from_evaluator(const CostSpace& space, const Evaluator& step, std::size_t horizon) {
        TrajectoryStore t;
        t.samples_ = space.size();
        t.length_ = horizon;
        t.dim_ = space.dim();
        t.coords_.resize(t.samples_ * horizon * t.dim_);
        std::vector<double> cur(t.dim_), next(t.dim_);
        for (std::size_t z = 0; z < t.samples_; ++z) {
            auto p = space.point(z);
            std::copy(p.begin(), p.end(), cur.begin());
            for (std::size_t n = 0; n < horizon; ++n) {
                step(cur, next);
                std::copy(next.begin(), next.end(), t.coords_.begin() + static_cast<std::ptrdiff_t>((z * horizon + n) * t.dim_));
                std::swap(cur, next);
            }
        }
        return t;
    }

    bool holds_ids() const noexcept { return !ids_.empty(); }
    std::size_t samples() const noexcept { return samples_; }
    std::size_t length() const noexcept { return length_; }

    /// Point id of f^n(z), 1 <= n <= length.
    std::uint32_t id(std::size_t z, std::size_t n) const noexcept { return ids_[z * length_ + n - 1]; }

    /// Raw coordinates of f^n(z), 1 <= n <= length.
    std::span<const double> position(std::size_t z, std::size_t n) const noexcept {
        return {coords_.data() + (z * length_ + n - 1) * dim_, dim_};
    }

private:
    std::size_t samples_ = 0;
    std::size_t length_ = 0;
    std::size_t dim_ = 0;
    std::vector<std::uint32_t> ids_;
    std::vector<double> coords_;
};

/// A map on a finite sample set, with its trajectory store populated to the horizon.
class MapSystem {
public:
    static MapSystem tabulated(CostSpace space, std::vector<std::uint32_t> table, std::size_t horizon,
                               std::string name = "table") {
        if (horizon == 0) throw SpecError("horizon must be >= 1");
        if (space.size() == 0) throw SpecError("empty sample set");
        if (table.size() != space.size()) throw SpecError("map table must have one image per point");
        for (auto v : table)
            if (v >= space.size()) throw SpecError("map table entry out of range");
        MapSystem m;
        m.space_ = std::move(space);
        m.table_ = std::move(table);
        m.horizon_ = horizon;
        m.name_ = std::move(name);
        m.traj_ = TrajectoryStore::from_table(m.table_, horizon);
        return m;
    }

    static MapSystem sampled(CostSpace space, Evaluator step, std::size_t horizon, std::string name,
                             GridSpec grid = {}) {
        if (horizon == 0) throw SpecError("horizon must be >= 1");
        if (space.size() == 0) throw SpecError("empty sample set");
        if (!space.is_euclidean()) throw SpecError("sampled systems need a Euclidean embedding");
        MapSystem m;
        m.space_ = std::move(space);
        m.step_ = std::move(step);
        m.horizon_ = horizon;
        m.name_ = std::move(name);
        m.grid_ = std::move(grid);
        m.traj_ = TrajectoryStore::from_evaluator(m.space_, m.step_, horizon);
        return m;
    }

    const CostSpace& space() const noexcept { return space_; }
    std::size_t size() const noexcept { return space_.size(); }
    std::size_t horizon() const noexcept { return horizon_; }
    bool is_tabulated() const noexcept { return !table_.empty(); }
    const std::vector<std::uint32_t>& table() const noexcept { return table_; }
    const TrajectoryStore& trajectories() const noexcept { return traj_; }
    const std::string& name() const noexcept { return name_; }
    const GridSpec& grid() const noexcept { return grid_; }
    /// Grid spacing h, or 0 for tabulated systems.
    double spacing() const noexcept { return is_tabulated() ? 0.0 : grid_.spacing; }

    bool is_permutation() const {
        if (!is_tabulated()) return false;
        std::vector<bool> hit(table_.size(), false);
        for (auto v : table_) {
            if (hit[v]) return false;
            hit[v] = true;
        }
        return true;
    }

    /// Same system with a different horizon (trajectories recomputed).
    MapSystem with_horizon(std::size_t horizon) const {
        if (is_tabulated()) return tabulated(space_, table_, horizon, name_);
        return sampled(space_, step_, horizon, name_, grid_);
    }

    // Link-source interface used by the link engine.
    std::size_t first_step() const noexcept { return 1; }
    std::size_t last_step() const noexcept { return horizon_; }
    double entry_cost(std::size_t x, std::size_t z) const noexcept { return space_.cost(x, z); }
    double exit_cost(std::size_t z, std::size_t n, std::size_t y) const noexcept {
        if (is_tabulated()) return space_.cost(traj_.id(z, n), y);
        return space_.cost_from(traj_.position(z, n), y);
    }

    /// out[y] = min over n in [1, N] of exit_cost(z, n, y).
    void exit_min_row(std::size_t z, std::span<double> out) const {
        std::fill(out.begin(), out.end(), kInf);
        const std::size_t n_pts = size();
        if (is_tabulated()) {
            // Orbits are eventually periodic; visit each distinct id once.
            std::vector<std::uint32_t> ids;
            ids.reserve(horizon_);
            for (std::size_t n = 1; n <= horizon_; ++n) ids.push_back(traj_.id(z, n));
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
            for (auto id : ids)
                for (std::size_t y = 0; y < n_pts; ++y) out[y] = std::min(out[y], space_.cost(id, y));
            return;
        }
        for (std::size_t n = 1; n <= horizon_; ++n) {
            auto p = traj_.position(z, n);
            for (std::size_t y = 0; y < n_pts; ++y) out[y] = std::min(out[y], space_.cost_from(p, y));
        }
    }

private:
    CostSpace space_;
    std::vector<std::uint32_t> table_;
    Evaluator step_;
    std::size_t horizon_ = 0;
    std::string name_;
    GridSpec grid_;
    TrajectoryStore traj_;
};

/// Uniform grid over `grid.box` with Euclidean cost and `step` as the map.
inline MapSystem build_grid_system(const std::string& name, const Evaluator& step, const GridSpec& grid,
                                   std::size_t horizon) {
    const std::size_t dim = grid.box.size();
    return MapSystem::sampled(CostSpace::euclidean(dim, make_grid(grid)), step, horizon, name, grid);
}

} // namespace cnw
