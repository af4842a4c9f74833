// cnw: coarse non-wandering analysis from the command line.
//
//   cnw analyze SPEC [--out levels.csv] [--matrix-out m.csv]
//   cnw diagram SPEC --eps-min a --eps-max b --eps-step s [--json d.json] [--svg d.svg]
//   cnw detect  SPEC [--min-gap g] [--out certs.json] [--limit n]
//   cnw verify  --seeds N [--max-size S] [--dump-failures DIR]
//
// Exit codes: 0 success, 1 "nothing found" (detect) or violations (verify),
// 2 bad input, 3 resource cap.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cnw/cnw.hpp"

namespace {

using namespace cnw;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError("cannot write '" + path + "'");
    out << bytes;
    if (!out.flush()) throw SpecError("write failed for '" + path + "'");
}

void emit(const std::string& path, const std::string& bytes) {
    if (path.empty() || path == "-")
        std::cout << bytes << std::flush;
    else
        write_file(path, bytes);
}

std::string fmt(double v) {
    if (std::isinf(v)) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

struct Analysis {
    LoadedSystem sys;
    LevelMatrix matrix;
    LevelSummary summary;
};

Analysis analyze_system(const std::string& spec_path, unsigned threads, NegBoundary boundary, bool stability) {
    Analysis a{load_system_text(read_file(spec_path), threads), {}, {}};
    MatrixOptions opt;
    opt.threads = threads;
    opt.use_spatial_index = a.sys.space().is_euclidean() && a.sys.space().dim() <= 3;
    const auto& s = a.sys;
    std::cerr << "system " << s.name() << ": " << s.size() << " samples";
    if (s.spacing() > 0) std::cerr << ", h = " << fmt(s.spacing());
    if (s.is_flow()) {
        const auto& t = s.flow->timing();
        std::cerr << ", dt = " << fmt(t.dt) << ", T = " << fmt(t.t_min) << ", t_max = " << fmt(t.t_max);
        a.matrix = flow_level_matrix(*s.flow, t.t_min, opt);
    } else {
        std::cerr << ", N_max = " << s.map->horizon();
        a.matrix = level_matrix(*s.map, opt);
    }
    std::cerr << ", tau = " << fmt(s.tau) << "\n";
    if (!s.is_flow() && stability) {
        const auto st = horizon_stability(*s.map, a.matrix, opt);
        std::cerr << "horizon stability (N_max " << st.full_horizon << " vs " << st.half_horizon << "): ";
        if (st.stable()) {
            std::cerr << "stable\n";
        } else {
            std::cerr << st.changed_pairs << " pairs changed, e.g.";
            for (const auto& [x, y] : st.examples) std::cerr << " (" << x << "," << y << ")";
            std::cerr << "\n";
        }
    } else if (s.is_flow()) {
        std::cerr << "flow levels use link durations r >= T on the dt grid; larger T can only raise them\n";
    }
    a.summary = summarize(a.matrix, s.tau, boundary, threads);
    return a;
}

std::string matrix_csv(const LevelMatrix& m) {
    std::string out;
    for (std::size_t x = 0; x < m.size(); ++x) {
        for (std::size_t y = 0; y < m.size(); ++y) {
            if (y) out += ',';
            out += fmt(m(x, y));
        }
        out += '\n';
    }
    return out;
}

/// Rounds to 12 significant digits so that range arithmetic yields clean tokens.
double tidy(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

std::vector<ExtendedLevel> diagram_levels(double lo, double hi, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw SpecError("--eps-step must be positive");
    if (!(lo >= 0.0) || !(hi >= lo) || !std::isfinite(hi)) throw SpecError("need 0 <= --eps-min <= --eps-max");
    const double count = std::floor((hi - lo) / step + 1e-9);
    if (count > 10000) throw ResourceLimitError("too many diagram levels; raise --eps-step");
    std::vector<double> mags;
    for (std::size_t k = 0; k <= static_cast<std::size_t>(count); ++k) {
        const double m = tidy(lo + step * static_cast<double>(k));
        if (m > 0.0) mags.push_back(m);
    }
    std::vector<ExtendedLevel> levels;
    for (auto it = mags.rbegin(); it != mags.rend(); ++it) levels.push_back(ExtendedLevel::neg(*it));
    levels.push_back(ExtendedLevel::minus_zero());
    levels.push_back(ExtendedLevel::plus_zero());
    for (double m : mags) levels.push_back(ExtendedLevel::pos(m));
    return levels;
}

Json witness_json(const LinkWitness& w) {
    Json j;
    j["start"] = w.start;
    j["steps"] = w.steps;
    j["start_cost"] = detail::number_or_inf(w.start_cost);
    j["end_cost"] = detail::number_or_inf(w.end_cost);
    j["level"] = detail::number_or_inf(w.level);
    return j;
}

std::string coords_text(const CostSpace& cs, std::size_t i) {
    if (!cs.embedded()) return "-";
    std::string s = "(";
    auto p = cs.point(i);
    for (std::size_t d = 0; d < p.size(); ++d) s += (d ? "," : "") + fmt(p[d]);
    return s + ")";
}

InjectedFault parse_fault(const std::string& s) {
    if (s == "none") return InjectedFault::None;
    if (s == "strict-lambda") return InjectedFault::StrictLambda;
    if (s == "closed-beta") return InjectedFault::ClosedBeta;
    throw SpecError("unknown fault '" + s + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coarse non-wandering levels, diagrams and wandering-domain certificates"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "worker threads (output does not depend on it)")->check(CLI::Range(1u, 1024u));

    std::string spec_path, out_path, matrix_out, json_out, svg_out;
    bool closed = false, no_stability = false;

    auto* analyze = app.add_subcommand("analyze", "per-point lambda/beta as CSV");
    analyze->add_option("spec", spec_path, "system spec (JSON)")->required();
    analyze->add_option("--out", out_path, "levels CSV (default: stdout)");
    analyze->add_option("--matrix-out", matrix_out, "full link-level matrix as CSV");
    analyze->add_flag("--closed-boundary", closed, "negative slices use eps <= beta");
    analyze->add_flag("--no-stability", no_stability, "skip the half-horizon comparison");

    double eps_min = 0.0, eps_max = 1.0, eps_step = 0.1;
    int svg_w = 640, svg_h = 400;
    auto* diag = app.add_subcommand("diagram", "non-wandering diagram as JSON / SVG");
    diag->add_option("spec", spec_path, "system spec (JSON)")->required();
    diag->add_option("--eps-min", eps_min, "smallest magnitude");
    diag->add_option("--eps-max", eps_max, "largest magnitude");
    diag->add_option("--eps-step", eps_step, "magnitude step");
    diag->add_option("--json", json_out, "diagram JSON (default: stdout)");
    diag->add_option("--svg", svg_out, "diagram SVG (1-D systems)");
    diag->add_option("--width", svg_w, "SVG width");
    diag->add_option("--height", svg_h, "SVG height");
    diag->add_flag("--closed-boundary", closed, "negative slices use eps <= beta");

    double min_gap = -1.0;
    std::size_t limit = 100;
    auto* detect = app.add_subcommand("detect", "wandering-domain certificates");
    detect->add_option("spec", spec_path, "system spec (JSON)")->required();
    detect->add_option("--min-gap", min_gap, "smallest reported gap (default 4h, or 1e-9 for tables)");
    detect->add_option("--out", out_path, "certificates JSON");
    detect->add_option("--limit", limit, "report at most this many certificates");

    std::size_t seeds = 1000, max_size = 8;
    std::uint64_t first_seed = 0;
    std::string dump_dir, fault_name = "none";
    auto* verify = app.add_subcommand("verify", "identity suite over random finite instances");
    verify->add_option("--seeds", seeds, "number of instances");
    verify->add_option("--first-seed", first_seed, "seed of the first instance");
    verify->add_option("--max-size", max_size, "largest instance size (2..12)");
    verify->add_option("--dump-failures", dump_dir, "directory for failing instances as table specs");
    verify->add_option("--inject-fault", fault_name, "none | strict-lambda | closed-beta (harness self-test)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const NegBoundary boundary = closed ? NegBoundary::Closed : NegBoundary::Strict;
    try {
        if (*analyze) {
            auto a = analyze_system(spec_path, threads, boundary, !no_stability);
            emit(out_path, export_levels_csv(a.summary, a.sys.space()));
            if (!matrix_out.empty()) write_file(matrix_out, matrix_csv(a.matrix));
            return 0;
        }
        if (*diag) {
            const auto levels = diagram_levels(eps_min, eps_max, eps_step);
            auto a = analyze_system(spec_path, threads, boundary, false);
            DiagramDocument doc;
            doc.system = a.sys.meta();
            doc.points = point_summaries(a.summary, a.sys.space());
            doc.slices = diagram(a.summary, levels);
            doc.render.eps_min = -eps_max;
            doc.render.eps_max = eps_max;
            if (!svg_out.empty()) write_file(svg_out, render_svg(doc, svg_w, svg_h));
            emit(json_out, export_diagram_json(doc));
            return 0;
        }
        if (*detect) {
            auto a = analyze_system(spec_path, threads, boundary, true);
            const double h = a.sys.spacing();
            const double gap = min_gap > 0 ? min_gap : (h > 0 ? 4.0 * h : 1e-9);
            auto certs = find_wandering_certificates(a.matrix, gap, threads);
            const std::size_t total = certs.size();
            if (certs.size() > limit) certs.resize(limit);
            if (a.sys.is_flow())
                attach_witnesses(FlowWindow(*a.sys.flow, a.sys.flow->timing().t_min), certs, threads);
            else
                attach_witnesses(*a.sys.map, certs, threads);
            const auto& cs = a.sys.space();
            std::cerr << total << " certificates with gap >= " << fmt(gap);
            if (total > certs.size()) std::cerr << " (showing " << certs.size() << ")";
            std::cerr << "; evidence at sampled resolution only\n";
            std::ostringstream table;
            table << "x\tz\tx_coords\tz_coords\teps\tgap\n";
            for (const auto& c : certs)
                table << c.x << '\t' << c.z << '\t' << coords_text(cs, c.x) << '\t' << coords_text(cs, c.z) << '\t'
                      << fmt(c.eps) << '\t' << fmt(c.gap) << '\n';
            std::cout << table.str() << std::flush;
            if (!out_path.empty()) {
                Json doc;
                doc["schema_version"] = kSchemaVersion;
                doc["system"] = system_meta_json(a.sys.meta(), cs.size());
                doc["min_gap"] = gap;
                doc["count"] = total;
                Json list = Json::array();
                for (const auto& c : certs) {
                    Json j;
                    j["x"] = c.x;
                    j["z"] = c.z;
                    if (cs.embedded()) {
                        auto px = cs.point(c.x), pz = cs.point(c.z);
                        j["x_coords"] = std::vector<double>(px.begin(), px.end());
                        j["z_coords"] = std::vector<double>(pz.begin(), pz.end());
                    }
                    j["eps"] = detail::number_or_inf(c.eps);
                    j["gap"] = detail::number_or_inf(c.gap);
                    if (c.witness_forward) j["witness"] = witness_json(*c.witness_forward);
                    list.push_back(std::move(j));
                }
                doc["certificates"] = std::move(list);
                write_file(out_path, doc.dump(2) + "\n");
            }
            return total > 0 ? 0 : 1;
        }
        if (*verify) {
            if (seeds == 0) throw SpecError("--seeds must be >= 1");
            if (max_size < 2 || max_size > kMaxOracleSize) throw SpecError("--max-size must lie in [2, 12]");
            const auto fault = parse_fault(fault_name);
            const auto run = run_verification(first_seed, seeds, max_size, fault, threads);
            for (const auto& [name, count] : run.skipped)
                std::cerr << "skipped " << name << " on " << count << " instances (hypothesis not met)\n";
            for (const auto& r : run.failures) {
                std::cout << "seed " << r.seed << " (size " << r.size << "):";
                for (const auto& c : r.checks)
                    if (c.status == CheckStatus::Fail) std::cout << " " << c.name << " [" << c.detail << "]";
                std::cout << "\n";
                if (!dump_dir.empty()) {
                    std::filesystem::create_directories(dump_dir);
                    const auto base = (std::filesystem::path(dump_dir) / ("seed-" + std::to_string(r.seed))).string();
                    write_file(base + ".json", instance_to_spec_json(random_instance(r.seed, max_size)).dump(2) + "\n");
                }
            }
            std::cout << "verified " << run.instances << " instances: " << run.failures.size() << " with violations\n";
            return run.failures.empty() ? 0 : 1;
        }
    } catch (const ResourceLimitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IntegrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
