#pragma once

// Registry of reference systems on the real line (plus one tabulated planar
// example), with closed-form levels where they are known.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cnw/cost_space.hpp"
#include "cnw/error.hpp"
#include "cnw/flow_engine.hpp"
#include "cnw/map_system.hpp"

namespace cnw {

enum class SystemKind { Map, Semiflow };

/// Closed-form beta: nullopt means undefined (x outside the zero set).
using AnalyticBeta = std::function<std::optional<double>(double)>;

struct BuiltinSystem {
    std::string name;
    SystemKind kind = SystemKind::Map;
    std::function<double(double)> evaluate; // map image or field value; empty for tabulated generators
    std::function<double(double)> analytic_lambda;
    AnalyticBeta analytic_beta;
    Interval default_box;
    std::string description;
    bool tabulated = false;

    Evaluator evaluator() const {
        if (!evaluate) throw SpecError("builtin '" + name + "' has no coordinate evaluator");
        auto f = evaluate;
        return [f](std::span<const double> in, std::span<double> out) { out[0] = f(in[0]); };
    }
};

namespace detail {

inline std::vector<BuiltinSystem> make_registry() {
    const Interval map_box{-5.0, 5.0};
    const Interval flow_box{-3.0, 3.0};
    auto undefined_off_zero = [](std::optional<double> at_zero) -> AnalyticBeta {
        return [at_zero](double x) -> std::optional<double> {
            if (x == 0.0) return at_zero;
            return std::nullopt;
        };
    };
    std::vector<BuiltinSystem> r;

    r.push_back({"f2", SystemKind::Map, [](double x) { return 2.0 * x; },
                 [](double x) { return std::fabs(x) / 3.0; }, undefined_off_zero(0.0), map_box,
                 "expanding linear map x -> 2x"});

    r.push_back({"f_half", SystemKind::Map, [](double x) { return x / 2.0; },
                 [](double x) { return std::fabs(x) / 3.0; }, undefined_off_zero(kInf), map_box,
                 "contracting linear map x -> x/2"});

    r.push_back({"f_rep", SystemKind::Map, [](double x) { return x <= 0.0 ? x : 2.0 * x; },
                 [](double x) { return x <= 0.0 ? 0.0 : x / 3.0; },
                 [](double x) -> std::optional<double> {
                     if (x > 0.0) return std::nullopt;
                     return -x;
                 },
                 map_box, "identity on x <= 0, doubling on x > 0"});

    r.push_back({"f_att", SystemKind::Map, [](double x) { return x <= 0.0 ? x : x / 2.0; },
                 [](double x) { return x <= 0.0 ? 0.0 : x / 3.0; },
                 [](double x) -> std::optional<double> {
                     if (x > 0.0) return std::nullopt;
                     return kInf;
                 },
                 map_box, "identity on x <= 0, halving on x > 0"});

    r.push_back({"identity", SystemKind::Map, [](double x) { return x; }, [](double) { return 0.0; },
                 [](double) -> std::optional<double> { return kInf; }, map_box, "identity map"});

    BuiltinSystem cex;
    cex.name = "counterexample_s8";
    cex.kind = SystemKind::Map;
    cex.tabulated = true;
    cex.description = "planar set A u B with a wandering point whose orbit is returned to at vanishing cost";
    r.push_back(cex);

    r.push_back({"flow_Z", SystemKind::Semiflow, [](double x) { return -x; },
                 [](double x) { return std::fabs(x); }, undefined_off_zero(kInf), flow_box,
                 "attracting linear field x' = -x"});

    // No closed form registered: the singular point 0 bounds lambda(x) by |x|.
    r.push_back({"flow_Y", SystemKind::Semiflow, [](double x) { return x; }, {}, {}, flow_box,
                 "repelling linear field x' = x"});

    r.push_back({"flow_rep", SystemKind::Semiflow, [](double x) { return x <= 0.0 ? 0.0 : x; },
                 [](double x) { return x <= 0.0 ? 0.0 : x; },
                 [](double x) -> std::optional<double> {
                     if (x > 0.0) return std::nullopt;
                     return -x;
                 },
                 flow_box, "field 0 on x <= 0, x on x > 0"});

    r.push_back({"flow_att", SystemKind::Semiflow, [](double x) { return x <= 0.0 ? 0.0 : -x; },
                 [](double x) { return x <= 0.0 ? 0.0 : x; },
                 [](double x) -> std::optional<double> {
                     if (x > 0.0) return std::nullopt;
                     return kInf;
                 },
                 flow_box, "field 0 on x <= 0, -x on x > 0"});

    r.push_back({"translation_flow", SystemKind::Semiflow, [](double) { return 1.0; }, {}, {}, flow_box,
                 "unit translation x' = 1"});
    return r;
}

} // namespace detail

inline const std::vector<BuiltinSystem>& builtin_registry() {
    static const std::vector<BuiltinSystem> reg = detail::make_registry();
    return reg;
}

inline const BuiltinSystem& builtin(const std::string& name) {
    for (const auto& b : builtin_registry())
        if (b.name == name) return b;
    throw SpecError("unknown builtin system '" + name + "'");
}

inline std::vector<std::string> builtin_names() {
    std::vector<std::string> names;
    for (const auto& b : builtin_registry()) names.push_back(b.name);
    return names;
}

/// Closed-form lambda(x).
inline double analytic_level(const std::string& name, double x) {
    const auto& b = builtin(name);
    if (!b.analytic_lambda) throw SpecError("no analytic level registered for '" + name + "'");
    return b.analytic_lambda(x);
}

/// Closed-form beta(x); nullopt when undefined.
inline std::optional<double> analytic_robustness(const std::string& name, double x) {
    const auto& b = builtin(name);
    if (!b.analytic_beta) throw SpecError("no analytic robustness level registered for '" + name + "'");
    return b.analytic_beta(x);
}

/// Horizon that covers every transient and period of the truncated example.
inline std::size_t counterexample_horizon(std::size_t n_max, std::size_t m_max) { return n_max + m_max + 2; }

/// Truncated planar example: A = {(1/n, 0)}, B = {(1/n, 1/m) : n >= 2}, n <= n_max, m <= m_max.
///
/// Point 0 is p = (1, 0). The last A point is fixed; B points at n = n_max only advance in m.
inline MapSystem counterexample_s8(std::size_t n_max, std::size_t m_max, std::size_t horizon = 0) {
    if (n_max < 2 || m_max < 1) throw SpecError("counterexample needs n_max >= 2 and m_max >= 1");
    const std::size_t count = n_max + (n_max - 1) * m_max;
    std::vector<double> coords;
    coords.reserve(2 * count);
    for (std::size_t n = 1; n <= n_max; ++n) {
        coords.push_back(1.0 / static_cast<double>(n));
        coords.push_back(0.0);
    }
    auto a_index = [](std::size_t n) { return static_cast<std::uint32_t>(n - 1); };
    auto b_index = [&](std::size_t n, std::size_t m) {
        return static_cast<std::uint32_t>(n_max + (n - 2) * m_max + (m - 1));
    };
    for (std::size_t n = 2; n <= n_max; ++n)
        for (std::size_t m = 1; m <= m_max; ++m) {
            coords.push_back(1.0 / static_cast<double>(n));
            coords.push_back(1.0 / static_cast<double>(m));
        }
    std::vector<std::uint32_t> table(count);
    for (std::size_t n = 1; n <= n_max; ++n) table[a_index(n)] = a_index(n < n_max ? n + 1 : n);
    for (std::size_t n = 2; n <= n_max; ++n)
        for (std::size_t m = 1; m <= m_max; ++m)
            table[b_index(n, m)] = m == 1 ? a_index(1) : b_index(n < n_max ? n + 1 : n, m - 1);
    if (horizon == 0) horizon = counterexample_horizon(n_max, m_max);
    return MapSystem::tabulated(CostSpace::euclidean(2, std::move(coords)), std::move(table), horizon,
                                "counterexample_s8");
}

/// Grid system for a registered 1-D map.
inline MapSystem build_grid_system(const std::string& builtin_name, const GridSpec& grid, std::size_t horizon) {
    const auto& b = builtin(builtin_name);
    if (b.kind != SystemKind::Map || b.tabulated)
        throw SpecError("builtin '" + builtin_name + "' is not a coordinate map");
    if (grid.box.size() != 1) throw SpecError("builtin maps act on 1-D boxes");
    return build_grid_system(b.name, b.evaluator(), grid, horizon);
}

/// Grid semiflow for a registered 1-D vector field.
inline SemiflowSystem build_flow_system(const std::string& builtin_name, const GridSpec& grid,
                                        const FlowTiming& timing, unsigned threads = 1) {
    const auto& b = builtin(builtin_name);
    if (b.kind != SystemKind::Semiflow) throw SpecError("builtin '" + builtin_name + "' is not a vector field");
    if (grid.box.size() != 1) throw SpecError("builtin fields act on 1-D boxes");
    return SemiflowSystem(b.name, CostSpace::euclidean(1, make_grid(grid)), b.evaluator(), timing, grid, threads);
}

} // namespace cnw
