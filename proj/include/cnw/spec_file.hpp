#pragma once

// System specification files (JSON) and their materialization.
//
//   {"kind": "map" | "semiflow",
//    "source": {"builtin": name, "params": {...}}
//            | {"table": {"points": [[...]], "cost": "euclidean" | [[...]], "map": [...]}},
//    "grid": {"box": [[lo, hi]], "h": h, "max_samples": n},
//    "horizon": {"n_max": n} | {"dt": dt, "t_min": T, "t_max": t},
//    "tolerance": {"tau": tau | "auto"}}

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cnw/builtins.hpp"
#include "cnw/cost_space.hpp"
#include "cnw/diagram_export.hpp"
#include "cnw/error.hpp"
#include "cnw/finite_oracle.hpp"
#include "cnw/flow_engine.hpp"
#include "cnw/map_system.hpp"

namespace cnw {

/// Dense level matrices above this many samples are refused.
inline constexpr std::size_t kMaxMatrixSamples = 10'000;
inline constexpr std::size_t kDefaultMapHorizon = 64;

struct SystemSpec {
    std::string kind = "map";
    std::optional<std::string> builtin;
    Json params = Json::object();
    // table source
    std::vector<std::vector<double>> points;
    bool euclidean_cost = true;
    std::vector<double> cost_matrix;
    std::vector<std::uint32_t> table;
    std::optional<GridSpec> grid;
    std::optional<std::size_t> n_max;
    FlowTiming timing;
    std::optional<double> tau; // nullopt: auto

    bool is_flow() const noexcept { return kind == "semiflow"; }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline void only_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw SpecError(where + " must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw SpecError("unknown key '" + k + "' in " + where);
}

inline double spec_number(const Json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && j.get<std::string>() == "inf") return kInf;
    throw SpecError(where + " must be a number");
}

inline double positive(const Json& j, const std::string& where) {
    const double v = spec_number(j, where);
    if (!(v > 0.0) || std::isinf(v)) throw SpecError(where + " must be a positive finite number");
    return v;
}

inline std::size_t positive_int(const Json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() < 1) throw SpecError(where + " must be a positive integer");
    return j.get<std::size_t>();
}

} // namespace detail

inline SystemSpec parse_system_spec(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw SpecError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                        e.what());
    }
    using detail::only_keys;
    only_keys(doc, "spec", {"kind", "source", "grid", "horizon", "tolerance"});
    SystemSpec s;
    try {
        if (doc.contains("kind")) s.kind = doc["kind"].get<std::string>();
        if (s.kind != "map" && s.kind != "semiflow") throw SpecError("kind must be \"map\" or \"semiflow\"");
        if (!doc.contains("source")) throw SpecError("missing source");
        const auto& src = doc["source"];
        only_keys(src, "source", {"builtin", "params", "table"});
        const bool has_builtin = src.contains("builtin"), has_table = src.contains("table");
        if (has_builtin == has_table) throw SpecError("source needs exactly one of builtin or table");
        if (has_builtin) {
            s.builtin = src["builtin"].get<std::string>();
            if (src.contains("params")) {
                if (!src["params"].is_object()) throw SpecError("source.params must be an object");
                s.params = src["params"];
            }
        } else {
            if (src.contains("params")) throw SpecError("params only apply to builtin sources");
            const auto& t = src["table"];
            only_keys(t, "source.table", {"points", "cost", "map"});
            if (t.contains("points"))
                for (const auto& p : t["points"]) {
                    std::vector<double> c;
                    for (const auto& v : p) c.push_back(detail::spec_number(v, "table point coordinate"));
                    s.points.push_back(std::move(c));
                }
            if (!t.contains("map")) throw SpecError("table source needs a map");
            for (const auto& v : t["map"]) {
                if (!v.is_number_integer() || v.get<long long>() < 0) throw SpecError("map entries must be indices");
                s.table.push_back(v.get<std::uint32_t>());
            }
            const Json cost = t.contains("cost") ? t["cost"] : Json("euclidean");
            if (cost.is_string()) {
                if (cost.get<std::string>() != "euclidean") throw SpecError("cost must be \"euclidean\" or a matrix");
                s.euclidean_cost = true;
                if (s.points.size() != s.table.size()) throw SpecError("euclidean tables need one point per map entry");
            } else {
                s.euclidean_cost = false;
                const std::size_t n = s.table.size();
                if (!cost.is_array() || cost.size() != n) throw SpecError("cost matrix must have one row per point");
                for (const auto& row : cost) {
                    if (!row.is_array() || row.size() != n) throw SpecError("cost matrix must be square");
                    for (const auto& v : row) s.cost_matrix.push_back(detail::spec_number(v, "cost entry"));
                }
                if (!s.points.empty() && s.points.size() != n) throw SpecError("points and map sizes differ");
            }
            if (s.is_flow()) throw SpecError("semiflows need a builtin vector field");
        }

        if (doc.contains("grid")) {
            const auto& g = doc["grid"];
            only_keys(g, "grid", {"box", "h", "max_samples"});
            GridSpec gs;
            if (!g.contains("h")) throw SpecError("grid.h is required");
            gs.spacing = detail::positive(g["h"], "grid.h");
            if (g.contains("box"))
                for (const auto& iv : g["box"]) {
                    if (!iv.is_array() || iv.size() != 2) throw SpecError("grid.box entries must be [lo, hi]");
                    gs.box.push_back({detail::spec_number(iv[0], "grid.box"), detail::spec_number(iv[1], "grid.box")});
                }
            if (g.contains("max_samples")) gs.max_samples = detail::positive_int(g["max_samples"], "grid.max_samples");
            s.grid = gs;
        }

        if (doc.contains("horizon")) {
            const auto& h = doc["horizon"];
            if (s.is_flow()) {
                only_keys(h, "horizon", {"dt", "t_min", "t_max"});
                if (h.contains("dt")) s.timing.dt = detail::positive(h["dt"], "horizon.dt");
                if (h.contains("t_min")) s.timing.t_min = detail::positive(h["t_min"], "horizon.t_min");
                if (h.contains("t_max")) s.timing.t_max = detail::positive(h["t_max"], "horizon.t_max");
                if (!(s.timing.dt <= s.timing.t_min && s.timing.t_min <= s.timing.t_max))
                    throw SpecError("horizon must satisfy dt <= t_min <= t_max");
            } else {
                only_keys(h, "horizon", {"n_max"});
                if (h.contains("n_max")) s.n_max = detail::positive_int(h["n_max"], "horizon.n_max");
            }
        }

        if (doc.contains("tolerance")) {
            const auto& t = doc["tolerance"];
            only_keys(t, "tolerance", {"tau"});
            if (t.contains("tau")) {
                const auto& v = t["tau"];
                if (v.is_string() && v.get<std::string>() == "auto") {
                    s.tau.reset();
                } else {
                    const double tau = detail::spec_number(v, "tolerance.tau");
                    if (!(tau >= 0.0) || std::isinf(tau)) throw SpecError("tolerance.tau must be >= 0 or \"auto\"");
                    s.tau = tau;
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("invalid spec: ") + e.what());
    }

    if (s.builtin) {
        const auto& b = builtin(*s.builtin);
        if ((b.kind == SystemKind::Semiflow) != s.is_flow())
            throw SpecError("builtin '" + b.name + "' is a " + (b.kind == SystemKind::Semiflow ? "semiflow" : "map") +
                            " but kind says " + s.kind);
        if (b.tabulated) {
            if (s.grid) throw SpecError("builtin '" + b.name + "' is tabulated; grid is not allowed");
        } else {
            if (!s.grid) throw SpecError("builtin '" + b.name + "' needs a grid");
            if (s.grid->box.empty()) s.grid->box = {b.default_box};
            if (!s.params.empty()) throw SpecError("builtin '" + b.name + "' takes no params");
        }
    } else if (s.grid) {
        throw SpecError("grid is not allowed for table sources");
    }
    return s;
}

/// A spec turned into a system ready for analysis.
struct LoadedSystem {
    SystemSpec spec;
    std::optional<MapSystem> map;
    std::optional<SemiflowSystem> flow;
    double tau = 0.0;

    bool is_flow() const noexcept { return flow.has_value(); }
    const CostSpace& space() const { return flow ? flow->space() : map->space(); }
    std::size_t size() const { return space().size(); }
    double spacing() const { return flow ? flow->spacing() : map->spacing(); }
    std::string name() const { return flow ? flow->name() : map->name(); }

    SystemMeta meta() const {
        SystemMeta m;
        m.name = name();
        m.kind = spec.kind;
        if (spec.grid) m.box = spec.grid->box;
        m.h = spacing();
        if (flow) {
            m.dt = flow->timing().dt;
            m.t_min = flow->timing().t_min;
            m.t_max = flow->timing().t_max;
        } else {
            m.n_max = map->horizon();
        }
        m.tau = tau;
        return m;
    }
};

inline LoadedSystem load_system(const SystemSpec& s, unsigned threads = 1) {
    LoadedSystem out;
    out.spec = s;
    if (s.grid && grid_sample_count(*s.grid) > kMaxMatrixSamples)
        throw ResourceLimitError("grid has " + std::to_string(grid_sample_count(*s.grid)) + " samples; level matrices are capped at " +
                                 std::to_string(kMaxMatrixSamples) + " samples, use spacing >= " +
                                 shortest_decimal(required_spacing(GridSpec{s.grid->box, s.grid->spacing, kMaxMatrixSamples})));
    if (s.builtin) {
        const auto& b = builtin(*s.builtin);
        if (b.tabulated) {
            auto get = [&](const char* k, std::size_t dflt) {
                if (!s.params.contains(k)) return dflt;
                return detail::positive_int(s.params[k], std::string("params.") + k);
            };
            for (const auto& [k, v] : s.params.items())
                if (k != "n_max" && k != "m_max") throw SpecError("unknown param '" + k + "'");
            const std::size_t n_max = get("n_max", 50), m_max = get("m_max", 50);
            if (n_max < 2) throw SpecError("params.n_max must be >= 2");
            const std::size_t count = n_max + (n_max - 1) * m_max;
            if (count > kMaxMatrixSamples) throw ResourceLimitError("counterexample truncation has too many points");
            out.map = counterexample_s8(n_max, m_max, s.n_max.value_or(0));
        } else if (b.kind == SystemKind::Semiflow) {
            out.flow = build_flow_system(b.name, *s.grid, s.timing, threads);
        } else {
            out.map = build_grid_system(b.name, *s.grid, s.n_max.value_or(kDefaultMapHorizon));
        }
    } else {
        const std::size_t n = s.table.size();
        if (n == 0) throw SpecError("empty table");
        if (n > kMaxMatrixSamples) throw ResourceLimitError("table too large for a dense level matrix");
        std::size_t dim = s.points.empty() ? 0 : s.points.front().size();
        std::vector<double> coords;
        for (const auto& p : s.points) {
            if (p.size() != dim) throw SpecError("table points must share one dimension");
            coords.insert(coords.end(), p.begin(), p.end());
        }
        CostSpace space = s.euclidean_cost ? CostSpace::euclidean(dim, std::move(coords))
                                           : CostSpace::explicit_costs(n, s.cost_matrix, dim, std::move(coords));
        out.map = MapSystem::tabulated(std::move(space), s.table, s.n_max.value_or(2 * n), "table");
    }
    const bool on_grid = s.grid.has_value();
    out.tau = s.tau.value_or(on_grid ? 2.0 * s.grid->spacing : 0.0);
    return out;
}

inline LoadedSystem load_system_text(const std::string& text, unsigned threads = 1) {
    return load_system(parse_system_spec(text), threads);
}

/// A finite instance as a table spec, for reproducing failures.
inline Json instance_to_spec_json(const FiniteInstance& in) {
    Json cost = Json::array();
    for (std::size_t a = 0; a < in.size; ++a) {
        Json row = Json::array();
        for (std::size_t b = 0; b < in.size; ++b) row.push_back(detail::number_or_inf(in.c(a, b)));
        cost.push_back(std::move(row));
    }
    Json doc;
    doc["kind"] = "map";
    doc["source"] = {{"table", {{"cost", cost}, {"map", in.map}}}};
    doc["horizon"] = {{"n_max", in.oracle_horizon()}};
    doc["tolerance"] = {{"tau", 0.0}};
    return doc;
}

} // namespace cnw
