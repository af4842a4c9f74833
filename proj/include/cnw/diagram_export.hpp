#pragma once

// CSV / JSON / SVG for level summaries and non-wandering diagrams.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cnw/cost_space.hpp"
#include "cnw/error.hpp"
#include "cnw/extended_level.hpp"
#include "cnw/filtration.hpp"
#include "cnw/map_system.hpp"

namespace cnw {

inline constexpr int kSchemaVersion = 1;

struct SystemMeta {
    std::string name;
    std::string kind = "map"; // "map" or "semiflow"
    std::vector<Interval> box;
    double h = 0.0;
    std::optional<std::size_t> n_max;
    std::optional<double> dt, t_min, t_max;
    double tau = 0.0;
    std::optional<bool> horizon_stable;
};

struct PointSummary {
    std::vector<double> coords;
    double lambda = 0.0;
    std::optional<double> beta; // nullopt: undefined
};

struct RenderHints {
    double eps_min = 0.0;
    double eps_max = 1.0;
    std::string x_label = "x";
    std::string eps_label = "eps";
};

struct DiagramDocument {
    SystemMeta system;
    std::vector<PointSummary> points;
    std::vector<DiagramSlice> slices;
    RenderHints render;
};

/// Per-point summaries from a level summary and the space carrying its coordinates.
inline std::vector<PointSummary> point_summaries(const LevelSummary& s, const CostSpace& space) {
    std::vector<PointSummary> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (space.embedded()) {
            auto p = space.point(i);
            out[i].coords.assign(p.begin(), p.end());
        }
        out[i].lambda = s.lambda[i];
        out[i].beta = s.beta[i];
    }
    return out;
}

// ---------------------------------------------------------------- CSV

namespace detail {

inline std::string fmt9(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace detail

/// `index,coord_0[,coord_1...],lambda,beta`; beta empty when undefined.
inline std::string export_levels_csv(const std::vector<PointSummary>& pts) {
    const std::size_t dim = pts.empty() ? 0 : pts.front().coords.size();
    std::string out = "index";
    for (std::size_t d = 0; d < dim; ++d) out += ",coord_" + std::to_string(d);
    out += ",lambda,beta\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out += std::to_string(i);
        for (double c : pts[i].coords) out += "," + detail::fmt9(c);
        out += "," + detail::fmt9(pts[i].lambda) + ",";
        if (pts[i].beta) out += detail::fmt9(*pts[i].beta);
        out += "\n";
    }
    return out;
}

inline std::string export_levels_csv(const LevelSummary& s, const CostSpace& space) {
    return export_levels_csv(point_summaries(s, space));
}

// ---------------------------------------------------------------- JSON

using Json = nlohmann::ordered_json;

namespace detail {

inline Json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double read_number(const Json& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw SpecError(std::string("expected a number or \"inf\" for ") + what);
}

/// Consecutive member indices merged into coordinate intervals (1-D only).
inline std::vector<Interval> run_intervals(const std::vector<PointSummary>& pts, const std::vector<std::size_t>& members) {
    std::vector<Interval> out;
    for (std::size_t i = 0; i < members.size();) {
        std::size_t j = i;
        while (j + 1 < members.size() && members[j + 1] == members[j] + 1) ++j;
        const double a = pts.at(members[i]).coords.at(0);
        const double b = pts.at(members[j]).coords.at(0);
        out.push_back({std::min(a, b), std::max(a, b)});
        i = j + 1;
    }
    return out;
}

inline bool one_dimensional(const DiagramDocument& d) {
    if (d.points.empty()) return d.system.box.size() == 1;
    return std::all_of(d.points.begin(), d.points.end(), [](const auto& p) { return p.coords.size() == 1; });
}

} // namespace detail

inline Json system_meta_json(const SystemMeta& m, std::size_t samples) {
    Json sys;
    sys["name"] = m.name;
    sys["kind"] = m.kind;
    Json box = Json::array();
    for (const auto& iv : m.box) box.push_back({iv.lo, iv.hi});
    sys["box"] = box;
    sys["h"] = m.h;
    if (m.n_max) sys["n_max"] = *m.n_max;
    if (m.dt) sys["dt"] = *m.dt;
    if (m.t_min) sys["t_min"] = *m.t_min;
    if (m.t_max) sys["t_max"] = *m.t_max;
    sys["tau"] = m.tau;
    if (m.horizon_stable) sys["horizon_stable"] = *m.horizon_stable;
    sys["samples"] = samples;
    return sys;
}

inline Json diagram_to_json(const DiagramDocument& d) {
    Json sys = system_meta_json(d.system, d.points.size());

    Json points = Json::array();
    for (const auto& p : d.points) {
        Json jp;
        jp["coords"] = p.coords;
        jp["lambda"] = detail::number_or_inf(p.lambda);
        jp["beta"] = p.beta ? detail::number_or_inf(*p.beta) : Json(nullptr);
        points.push_back(std::move(jp));
    }

    const bool one_d = detail::one_dimensional(d);
    Json slices = Json::array();
    for (const auto& s : d.slices) {
        Json js;
        js["level"] = level_token(s.level);
        js["members"] = s.members;
        if (one_d) {
            Json iv = Json::array();
            for (const auto& r : detail::run_intervals(d.points, s.members)) iv.push_back({r.lo, r.hi});
            js["intervals"] = iv;
        }
        slices.push_back(std::move(js));
    }

    Json render;
    render["eps_min"] = d.render.eps_min;
    render["eps_max"] = d.render.eps_max;
    render["x_label"] = d.render.x_label;
    render["eps_label"] = d.render.eps_label;

    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["system"] = std::move(sys);
    doc["points"] = std::move(points);
    doc["slices"] = std::move(slices);
    doc["render"] = std::move(render);
    return doc;
}

inline std::string export_diagram_json(const DiagramDocument& d) { return diagram_to_json(d).dump(2) + "\n"; }

inline DiagramDocument parse_diagram_json(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecError(std::string("diagram JSON: ") + e.what());
    }
    try {
        if (doc.at("schema_version").get<int>() != kSchemaVersion) throw SpecError("unsupported diagram schema_version");
        DiagramDocument d;
        const auto& sys = doc.at("system");
        d.system.name = sys.at("name").get<std::string>();
        d.system.kind = sys.at("kind").get<std::string>();
        for (const auto& iv : sys.at("box")) d.system.box.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
        d.system.h = sys.at("h").get<double>();
        if (sys.contains("n_max")) d.system.n_max = sys["n_max"].get<std::size_t>();
        if (sys.contains("dt")) d.system.dt = sys["dt"].get<double>();
        if (sys.contains("t_min")) d.system.t_min = sys["t_min"].get<double>();
        if (sys.contains("t_max")) d.system.t_max = sys["t_max"].get<double>();
        d.system.tau = sys.at("tau").get<double>();
        if (sys.contains("horizon_stable")) d.system.horizon_stable = sys["horizon_stable"].get<bool>();
        for (const auto& jp : doc.at("points")) {
            PointSummary p;
            p.coords = jp.at("coords").get<std::vector<double>>();
            p.lambda = detail::read_number(jp.at("lambda"), "lambda");
            if (!jp.at("beta").is_null()) p.beta = detail::read_number(jp["beta"], "beta");
            d.points.push_back(std::move(p));
        }
        for (const auto& js : doc.at("slices")) {
            DiagramSlice s{parse_level_token(js.at("level").get<std::string>()),
                           js.at("members").get<std::vector<std::size_t>>()};
            for (auto m : s.members)
                if (m >= d.points.size()) throw SpecError("slice member out of range");
            d.slices.push_back(std::move(s));
        }
        const auto& r = doc.at("render");
        d.render.eps_min = r.at("eps_min").get<double>();
        d.render.eps_max = r.at("eps_max").get<double>();
        d.render.x_label = r.at("x_label").get<std::string>();
        d.render.eps_label = r.at("eps_label").get<std::string>();
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("diagram JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------- SVG

/// True when every slice contains the previous one (each state column is monotone in eps).
inline bool slices_nested(const DiagramDocument& d) {
    for (std::size_t i = 1; i < d.slices.size(); ++i) {
        const auto& a = d.slices[i - 1].members;
        const auto& b = d.slices[i].members;
        if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) return false;
    }
    return true;
}

namespace detail {

inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace detail

/// Eps runs left to right with the origin split into -0 | +0 columns; state runs bottom to top.
inline std::string render_svg(const DiagramDocument& d, int width = 640, int height = 400) {
    if (!detail::one_dimensional(d))
        throw SpecError("SVG rendering needs a 1-D system; use the CSV export for higher dimensions");
    if (width < 120 || height < 80) throw SpecError("SVG canvas too small");
    for (std::size_t i = 1; i < d.slices.size(); ++i)
        if (!(d.slices[i - 1].level < d.slices[i].level)) throw SpecError("diagram slices must be ascending");
    if (!slices_nested(d)) throw SpecError("diagram slices are not nested; refusing to render");

    const double margin_l = 60, margin_r = 20, margin_t = 20, margin_b = 40;
    const double left = margin_l, right = width - margin_r, top = margin_t, bottom = height - margin_b;
    const double zero_col = 4.0; // width of the -0 and inf columns

    double neg_max = 0.0, pos_max = 0.0;
    bool has_inf = false;
    for (const auto& s : d.slices) {
        if (std::isinf(s.level.magnitude)) {
            has_inf |= !s.level.is_neg();
            continue;
        }
        (s.level.is_neg() ? neg_max : pos_max) = std::max(s.level.is_neg() ? neg_max : pos_max, s.level.magnitude);
    }
    neg_max = std::max(neg_max, -std::min(0.0, d.render.eps_min));
    pos_max = std::max(pos_max, std::max(0.0, d.render.eps_max));
    const double span = neg_max + pos_max;
    const double usable = (right - left) - 1.0 - zero_col - (has_inf ? zero_col + 2.0 : 0.0);
    const double neg_w = span > 0 ? usable * neg_max / span : 0.0;
    const double split = left + neg_w + zero_col + 0.5; // dashed rule; -0 ends 0.5 left, +0 starts 0.5 right
    const double pos_right = right - (has_inf ? zero_col + 2.0 : 0.0);
    auto x_neg = [&](double m) { return neg_max > 0 ? split - 0.5 - zero_col - m / neg_max * neg_w : split - 0.5 - zero_col; };
    auto x_pos = [&](double m) { return pos_max > 0 ? split + 0.5 + m / pos_max * (pos_right - split - 0.5) : split + 0.5; };

    double lo = 0.0, hi = 1.0;
    if (!d.system.box.empty()) {
        lo = d.system.box[0].lo;
        hi = d.system.box[0].hi;
    } else if (!d.points.empty()) {
        lo = hi = d.points[0].coords[0];
        for (const auto& p : d.points) {
            lo = std::min(lo, p.coords[0]);
            hi = std::max(hi, p.coords[0]);
        }
    }
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    auto y_of = [&](double s) { return top + (hi - s) / (hi - lo) * (bottom - top); };
    const double half = 0.5 * d.system.h;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<title>" << detail::xml_escape(d.system.name) << " non-wandering diagram</title>\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    os << "<g fill=\"#3b6ea8\" stroke=\"none\">\n";
    for (std::size_t i = 0; i < d.slices.size(); ++i) {
        const auto& s = d.slices[i];
        double x0, x1;
        if (s.level.is_neg()) {
            if (std::isinf(s.level.magnitude)) continue;
            if (s.level.magnitude == 0.0) {
                x0 = split - 0.5 - zero_col;
                x1 = split - 0.5;
            } else {
                x0 = x_neg(s.level.magnitude);
                const bool next_neg = i + 1 < d.slices.size() && d.slices[i + 1].level.is_neg();
                x1 = next_neg ? x_neg(d.slices[i + 1].level.magnitude) : split - 0.5 - zero_col;
            }
        } else if (std::isinf(s.level.magnitude)) {
            x0 = right - zero_col;
            x1 = right;
        } else {
            x0 = x_pos(s.level.magnitude);
            const bool next_finite = i + 1 < d.slices.size() && !std::isinf(d.slices[i + 1].level.magnitude);
            x1 = next_finite ? x_pos(d.slices[i + 1].level.magnitude) : pos_right;
        }
        if (x1 <= x0) continue;
        for (const auto& r : detail::run_intervals(d.points, s.members)) {
            const double y0 = y_of(std::min(hi, r.hi + half));
            const double y1 = y_of(std::max(lo, r.lo - half));
            const double hgt = std::max(1.0, y1 - y0);
            os << "<rect x=\"" << detail::px(x0) << "\" y=\"" << detail::px(y0) << "\" width=\"" << detail::px(x1 - x0)
               << "\" height=\"" << detail::px(hgt) << "\"/>\n";
        }
    }
    os << "</g>\n";

    // axes
    os << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
    os << "<line x1=\"" << detail::px(left) << "\" y1=\"" << detail::px(bottom) << "\" x2=\"" << detail::px(right)
       << "\" y2=\"" << detail::px(bottom) << "\"/>\n";
    os << "<line x1=\"" << detail::px(left) << "\" y1=\"" << detail::px(top) << "\" x2=\"" << detail::px(left)
       << "\" y2=\"" << detail::px(bottom) << "\"/>\n";
    os << "<line x1=\"" << detail::px(split) << "\" y1=\"" << detail::px(top) << "\" x2=\"" << detail::px(split)
       << "\" y2=\"" << detail::px(bottom) << "\" stroke-dasharray=\"4 3\"/>\n";
    os << "</g>\n";

    os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
    os << "<text x=\"" << detail::px(split - 4) << "\" y=\"" << detail::px(bottom + 14)
       << "\" text-anchor=\"end\">-0</text>\n";
    os << "<text x=\"" << detail::px(split + 4) << "\" y=\"" << detail::px(bottom + 14) << "\">+0</text>\n";
    if (neg_max > 0)
        os << "<text x=\"" << detail::px(x_neg(neg_max)) << "\" y=\"" << detail::px(bottom + 14) << "\">-"
           << detail::label(neg_max) << "</text>\n";
    if (pos_max > 0)
        os << "<text x=\"" << detail::px(pos_right) << "\" y=\"" << detail::px(bottom + 14)
           << "\" text-anchor=\"end\">" << detail::label(pos_max) << "</text>\n";
    os << "<text x=\"" << detail::px((left + right) / 2) << "\" y=\"" << detail::px(bottom + 30)
       << "\" text-anchor=\"middle\">" << detail::xml_escape(d.render.eps_label) << "</text>\n";
    os << "<text x=\"" << detail::px(left - 6) << "\" y=\"" << detail::px(top + 4) << "\" text-anchor=\"end\">"
       << detail::label(hi) << "</text>\n";
    os << "<text x=\"" << detail::px(left - 6) << "\" y=\"" << detail::px(bottom) << "\" text-anchor=\"end\">"
       << detail::label(lo) << "</text>\n";
    os << "<text x=\"" << detail::px(left - 30) << "\" y=\"" << detail::px((top + bottom) / 2)
       << "\" text-anchor=\"middle\">" << detail::xml_escape(d.render.x_label) << "</text>\n";
    os << "</g>\n</svg>\n";
    return os.str();
}

} // namespace cnw
