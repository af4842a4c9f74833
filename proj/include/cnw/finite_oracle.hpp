#pragma once

// Definitional evaluation of every relation on small finite systems, and a
// identity suite that pits it against the matrix reductions.
//
// Relations are piecewise constant in eps and only change at attained costs,
// so each is evaluated at those values, the midpoints between them and one
// value above the largest.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cnw/cost_space.hpp"
#include "cnw/error.hpp"
#include "cnw/extended_level.hpp"
#include "cnw/filtration.hpp"
#include "cnw/link_engine.hpp"
#include "cnw/map_system.hpp"
#include "cnw/parallel.hpp"

namespace cnw {

inline constexpr std::size_t kMaxOracleSize = 12;

enum class CostKind { EuclideanMetric, SymmetricInteger, Asymmetric, Custom };

inline const char* cost_kind_name(CostKind k) {
    switch (k) {
    case CostKind::EuclideanMetric: return "euclidean";
    case CostKind::SymmetricInteger: return "symmetric";
    case CostKind::Asymmetric: return "asymmetric";
    case CostKind::Custom: return "custom";
    }
    return "custom";
}

struct FiniteInstance {
    std::size_t size = 0;
    std::vector<double> cost;        // row-major, inf allowed
    std::vector<std::uint32_t> map;  // image indices
    std::uint64_t seed = 0;
    CostKind kind = CostKind::Custom;

    double c(std::size_t a, std::size_t b) const noexcept { return cost[a * size + b]; }

    void validate() const {
        if (size == 0 || size > kMaxOracleSize) throw SpecError("finite instances have 1 to 12 points");
        if (cost.size() != size * size || map.size() != size) throw SpecError("instance arrays do not match its size");
        for (auto v : map)
            if (v >= size) throw SpecError("map entry out of range");
    }

    std::size_t oracle_horizon() const noexcept { return 2 * size; }

    MapSystem to_system(std::size_t horizon = 0) const {
        validate();
        return MapSystem::tabulated(CostSpace::explicit_costs(size, cost), map,
                                    horizon ? horizon : oracle_horizon(), "finite");
    }

    bool is_permutation() const {
        std::vector<bool> hit(size, false);
        for (auto v : map) {
            if (hit[v]) return false;
            hit[v] = true;
        }
        return true;
    }
};

/// Random instance of 2..max_size points; all choices derive from `seed`.
inline FiniteInstance random_instance(std::uint64_t seed, std::size_t max_size = 8) {
    if (max_size < 2 || max_size > kMaxOracleSize) throw SpecError("max size must lie in [2, 12]");
    std::mt19937_64 rng(seed);
    auto pick = [&](std::uint64_t k) { return static_cast<std::size_t>(rng() % k); };
    FiniteInstance in;
    in.seed = seed;
    in.size = 2 + pick(max_size - 1);
    const std::size_t n = in.size;
    in.cost.assign(n * n, 0.0);
    in.kind = static_cast<CostKind>(pick(3));
    switch (in.kind) {
    case CostKind::EuclideanMetric: {
        const std::size_t dim = 1 + pick(2);
        std::vector<double> pts(n * dim);
        for (auto& p : pts) p = static_cast<double>(pick(6));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                in.cost[a * n + b] = euclidean_distance({pts.data() + a * dim, dim}, {pts.data() + b * dim, dim});
        break;
    }
    case CostKind::SymmetricInteger:
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                const std::size_t r = pick(12);
                const double v = r == 0 ? 0.0 : r == 1 ? kInf : static_cast<double>(1 + pick(4));
                in.cost[a * n + b] = in.cost[b * n + a] = v;
            }
        break;
    default:
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b) continue;
                const std::size_t r = pick(8);
                in.cost[a * n + b] = r == 0 ? 0.0 : r == 1 ? kInf : static_cast<double>(1 + pick(3));
            }
        break;
    }
    in.map.resize(n);
    if (pick(3) == 0) {
        for (std::size_t i = 0; i < n; ++i) in.map[i] = static_cast<std::uint32_t>(i);
        for (std::size_t i = n - 1; i > 0; --i) std::swap(in.map[i], in.map[pick(i + 1)]);
    } else {
        for (auto& v : in.map) v = static_cast<std::uint32_t>(pick(n));
    }
    return in;
}

/// Evaluates relations straight from their definitions, caching per eps.
class DefinitionalOracle {
public:
    explicit DefinitionalOracle(const FiniteInstance& in, std::size_t horizon = 0) : in_(in) {
        in_.validate();
        n_ = in_.size;
        horizon_ = horizon ? horizon : in_.oracle_horizon();
        orbit_.assign(n_ * horizon_, 0);
        for (std::size_t z = 0; z < n_; ++z) {
            std::uint32_t cur = static_cast<std::uint32_t>(z);
            for (std::size_t k = 0; k < horizon_; ++k) {
                cur = in_.map[cur];
                orbit_[z * horizon_ + k] = cur;
            }
        }
        for (double v : in_.cost)
            if (std::isfinite(v)) critical_.push_back(v);
        std::sort(critical_.begin(), critical_.end());
        critical_.erase(std::unique(critical_.begin(), critical_.end()), critical_.end());
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t horizon() const noexcept { return horizon_; }
    const std::vector<double>& critical_values() const noexcept { return critical_; }

    /// f^k(z), 1 <= k <= horizon.
    std::uint32_t iterate(std::size_t z, std::size_t k) const noexcept { return orbit_[z * horizon_ + k - 1]; }

    /// Critical values, midpoints between consecutive ones, and one value above the largest.
    std::vector<double> sample_levels() const {
        std::vector<double> s;
        for (std::size_t i = 0; i < critical_.size(); ++i) {
            s.push_back(critical_[i]);
            if (i + 1 < critical_.size()) s.push_back(0.5 * (critical_[i] + critical_[i + 1]));
        }
        s.push_back(critical_.back() + 1.0);
        return s;
    }

    /// x ~_eps y: some z and 1 <= n <= horizon with c(x,z) <= eps and c(f^n z, y) <= eps.
    bool link(std::size_t x, std::size_t y, double eps) const { return relation(eps)[x * n_ + y] != 0; }

    /// [x]_eps.
    std::vector<std::size_t> reachable(std::size_t x, double eps) const {
        std::vector<std::size_t> out;
        for (std::size_t y = 0; y < n_; ++y)
            if (link(x, y, eps)) out.push_back(y);
        return out;
    }

    /// x ~_{eps+} y: x ~_{eps'} y for every eps' > eps.
    bool plus_link(std::size_t x, std::size_t y, double eps) const { return plus_relation(eps)[x * n_ + y] != 0; }

    std::vector<std::size_t> plus_reachable(std::size_t x, double eps) const {
        std::vector<std::size_t> out;
        for (std::size_t y = 0; y < n_; ++y)
            if (plus_link(x, y, eps)) out.push_back(y);
        return out;
    }

    /// x ~_{-eps+} y: z ~_{eps'+} y for every eps' in [0, eps] and every z in [x]_{eps'}.
    bool neg_link(std::size_t x, std::size_t y, double eps) const {
        for (double e : neg_window(eps))
            for (std::size_t z = 0; z < n_; ++z)
                if (link(x, z, e) && !plus_link(z, y, e)) return false;
        return true;
    }

    bool member(std::size_t x, const ExtendedLevel& level) const {
        if (!level.is_neg()) return plus_link(x, x, level.magnitude);
        return plus_link(x, x, 0.0) && neg_link(x, x, level.magnitude);
    }

    std::vector<std::size_t> omega(const ExtendedLevel& level) const {
        std::vector<std::size_t> out;
        for (std::size_t x = 0; x < n_; ++x)
            if (member(x, level)) out.push_back(x);
        return out;
    }

private:
    const std::vector<unsigned char>& relation(double eps) const {
        auto it = rel_.find(eps);
        if (it != rel_.end()) return it->second;
        std::vector<unsigned char> r(n_ * n_, 0);
        for (std::size_t x = 0; x < n_; ++x)
            for (std::size_t z = 0; z < n_; ++z) {
                if (!(in_.c(x, z) <= eps)) continue;
                for (std::size_t k = 1; k <= horizon_; ++k) {
                    const std::size_t w = iterate(z, k);
                    for (std::size_t y = 0; y < n_; ++y)
                        if (in_.c(w, y) <= eps) r[x * n_ + y] = 1;
                }
            }
        return rel_.emplace(eps, std::move(r)).first->second;
    }

    const std::vector<unsigned char>& plus_relation(double eps) const {
        auto it = plus_.find(eps);
        if (it != plus_.end()) return it->second;
        std::vector<unsigned char> r(n_ * n_, 1);
        if (!std::isinf(eps)) {
            std::vector<double> above;
            for (double c : critical_)
                if (c > eps) above.push_back(c);
            const double next = above.empty() ? eps + 1.0 : above.front();
            above.push_back(0.5 * (eps + next));
            if (above.size() == 1) above.push_back(eps + 2.0);
            for (double e : above) {
                const auto& rel = relation(e);
                for (std::size_t i = 0; i < r.size(); ++i) r[i] &= rel[i];
            }
        }
        return plus_.emplace(eps, std::move(r)).first->second;
    }

    // Representatives of eps' in [0, eps]: 0, every critical value up to eps,
    // midpoints between those, eps itself.
    std::vector<double> neg_window(double eps) const {
        std::vector<double> w{0.0};
        double prev = 0.0;
        for (double c : critical_) {
            if (c > eps) break;
            if (c > prev) w.push_back(0.5 * (prev + c));
            w.push_back(c);
            prev = c;
        }
        if (std::isinf(eps)) {
            w.push_back(prev + 1.0);
        } else if (eps > prev) {
            w.push_back(0.5 * (prev + eps));
        }
        w.push_back(eps);
        std::sort(w.begin(), w.end());
        w.erase(std::unique(w.begin(), w.end()), w.end());
        return w;
    }

    FiniteInstance in_;
    std::size_t n_ = 0;
    std::size_t horizon_ = 0;
    std::vector<std::uint32_t> orbit_;
    std::vector<double> critical_;
    mutable std::map<double, std::vector<unsigned char>> rel_;
    mutable std::map<double, std::vector<unsigned char>> plus_;
};

inline std::vector<std::size_t> definitional_reachable(const FiniteInstance& in, std::size_t x, double eps) {
    if (!(eps >= 0.0)) throw SpecError("eps must be >= 0");
    return DefinitionalOracle(in).reachable(x, eps);
}

inline std::vector<std::size_t> definitional_omega(const FiniteInstance& in, const ExtendedLevel& level) {
    return DefinitionalOracle(in).omega(level);
}

enum class CheckStatus { Pass, Fail, Skipped };

struct IdentityCheck {
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    std::string detail; // witness on failure, reason when skipped
};

struct IdentityReport {
    std::uint64_t seed = 0;
    std::size_t size = 0;
    std::vector<IdentityCheck> checks;

    bool ok() const {
        return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::Fail; });
    }
    const IdentityCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

/// Deliberate reduction bugs, used to show that the suite can fail.
enum class InjectedFault { None, StrictLambda, ClosedBeta };

namespace detail {

inline std::string fmt_set(const std::vector<std::size_t>& s) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << '}';
    return os.str();
}

inline std::string fmt_eps(double e) { return std::isinf(e) ? "inf" : shortest_decimal(e); }

class CheckRecorder {
public:
    explicit CheckRecorder(IdentityReport& r) : r_(r) {}
    // First failure wins; later calls on the same check are ignored.
    void fail(IdentityCheck& c, const std::string& why) {
        if (c.status != CheckStatus::Fail) {
            c.status = CheckStatus::Fail;
            c.detail = why;
        }
    }
    IdentityCheck& add(const std::string& name) {
        r_.checks.push_back({name, CheckStatus::Pass, {}});
        return r_.checks.back();
    }
    void skip(const std::string& name, const std::string& why) { r_.checks.push_back({name, CheckStatus::Skipped, why}); }

private:
    IdentityReport& r_;
};

} // namespace detail

/// Runs the identity suite on one instance. Checks are exhaustive over the sampled levels.
inline IdentityReport verify_identities(const FiniteInstance& in, InjectedFault fault = InjectedFault::None) {
    using detail::fmt_eps;
    using detail::fmt_set;
    in.validate();
    const std::size_t n = in.size;
    const DefinitionalOracle oracle(in);
    const MapSystem sys = in.to_system();
    const LevelMatrix m = level_matrix(sys);
    LevelSummary summary = summarize(m, 0.0, fault == InjectedFault::ClosedBeta ? NegBoundary::Closed : NegBoundary::Strict);
    const CostSpace& space = sys.space();
    const auto levels = oracle.sample_levels();

    auto engine_member = [&](std::size_t x, const ExtendedLevel& l) {
        if (fault == InjectedFault::StrictLambda && !l.is_neg()) return summary.lambda[x] < l.magnitude;
        return omega_membership(summary, x, l);
    };
    auto engine_omega = [&](const ExtendedLevel& l) {
        std::vector<std::size_t> out;
        for (std::size_t x = 0; x < n; ++x)
            if (engine_member(x, l)) out.push_back(x);
        return out;
    };

    IdentityReport report;
    report.seed = in.seed;
    report.size = n;
    detail::CheckRecorder rec(report);

    // [x]_e1 within [x]_e2 for e1 <= e2
    {
        auto& c = rec.add("monotonicity");
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
                const auto a = reachable_set(m, x, levels[i]);
                const auto b = reachable_set(m, x, levels[i + 1]);
                if (!std::includes(b.begin(), b.end(), a.begin(), a.end()))
                    rec.fail(c, "x=" + std::to_string(x) + " eps1=" + fmt_eps(levels[i]) + " eps2=" + fmt_eps(levels[i + 1]));
            }
    }

    // [x]_0 is the forward orbit
    if (space.is_non_degenerate()) {
        auto& c = rec.add("orbit_recovery");
        for (std::size_t x = 0; x < n; ++x) {
            std::vector<std::size_t> orbit;
            for (std::size_t k = 1; k <= oracle.horizon(); ++k) orbit.push_back(oracle.iterate(x, k));
            std::sort(orbit.begin(), orbit.end());
            orbit.erase(std::unique(orbit.begin(), orbit.end()), orbit.end());
            const auto r = reachable_set(m, x, 0.0);
            if (r != orbit) rec.fail(c, "x=" + std::to_string(x) + " [x]_0=" + fmt_set(r) + " orbit=" + fmt_set(orbit));
        }
    } else {
        rec.skip("orbit_recovery", "cost is degenerate");
    }

    // [x]_{eps+} = intersection over eps' > eps, and both equal the thresholded matrix row
    {
        auto& c = rec.add("plus_closure");
        for (std::size_t x = 0; x < n; ++x)
            for (double e : levels) {
                const auto eng = reachable_set(m, x, e);
                const auto plus = oracle.plus_reachable(x, e);
                const auto closed = oracle.reachable(x, e);
                if (eng != plus || eng != closed)
                    rec.fail(c, "x=" + std::to_string(x) + " eps=" + fmt_eps(e) + " engine=" + fmt_set(eng) +
                                    " plus=" + fmt_set(plus) + " closed=" + fmt_set(closed));
            }
    }

    // [x]_{e1+} within [x]_{e2} for e1 < e2
    {
        auto& c = rec.add("plus_chain");
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t i = 0; i < levels.size(); ++i)
                for (std::size_t j = i + 1; j < levels.size(); ++j) {
                    const auto a = oracle.plus_reachable(x, levels[i]);
                    const auto b = oracle.reachable(x, levels[j]);
                    if (!std::includes(b.begin(), b.end(), a.begin(), a.end()))
                        rec.fail(c, "x=" + std::to_string(x) + " eps1=" + fmt_eps(levels[i]) + " eps2=" + fmt_eps(levels[j]));
                }
    }

    // Positive slices nested, everything enters at inf, lambda(x) <= c(f(x), x)
    {
        auto& c = rec.add("positive_filtration");
        std::vector<std::size_t> prev;
        for (double e : levels) {
            const auto cur = oracle.omega(ExtendedLevel::pos(e));
            if (!std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()))
                rec.fail(c, "slice at " + fmt_eps(e) + " misses earlier members");
            prev = cur;
        }
        if (oracle.omega(ExtendedLevel::infinity()).size() != n) rec.fail(c, "slice at inf is not everything");
        for (std::size_t x = 0; x < n; ++x)
            if (!(summary.lambda[x] <= in.c(in.map[x], x)))
                rec.fail(c, "x=" + std::to_string(x) + " lambda=" + fmt_eps(summary.lambda[x]) +
                                " exceeds c(f(x),x)=" + fmt_eps(in.c(in.map[x], x)));
    }

    // Full extended index, ascending
    std::vector<ExtendedLevel> extended;
    for (auto it = levels.rbegin(); it != levels.rend(); ++it)
        if (*it > 0.0) extended.push_back(ExtendedLevel::neg(*it));
    extended.push_back(ExtendedLevel::minus_zero());
    for (double e : levels) extended.push_back(ExtendedLevel::pos(e));
    extended.push_back(ExtendedLevel::infinity());
    {
        auto& c = rec.add("extended_filtration");
        std::vector<std::size_t> prev;
        for (const auto& l : extended) {
            const auto cur = oracle.omega(l);
            if (!std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()))
                rec.fail(c, "slice at " + level_token(l) + " misses earlier members");
            prev = cur;
        }
    }

    // Omega_{-e2} within Omega_{-e1} for e1 <= e2
    {
        auto& c = rec.add("negative_monotonicity");
        for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
            const auto a = oracle.omega(ExtendedLevel::neg(levels[i]));
            const auto b = oracle.omega(ExtendedLevel::neg(levels[i + 1]));
            if (!std::includes(a.begin(), a.end(), b.begin(), b.end()))
                rec.fail(c, "-" + fmt_eps(levels[i + 1]) + " slice " + fmt_set(b) + " not within -" + fmt_eps(levels[i]) +
                                " slice " + fmt_set(a));
        }
    }

    // Permutations with symmetric cost: everything persists at every negative level
    if (in.is_permutation() && space.is_symmetric()) {
        auto& c = rec.add("permutation_persistence");
        for (std::size_t x = 0; x < n; ++x)
            if (!summary.beta[x] || !std::isinf(*summary.beta[x]))
                rec.fail(c, "x=" + std::to_string(x) + " has finite or undefined beta");
        for (double e : levels)
            if (oracle.omega(ExtendedLevel::neg(e)).size() != n) rec.fail(c, "-" + fmt_eps(e) + " slice is not everything");
    } else {
        rec.skip("permutation_persistence", "needs a permutation with symmetric cost");
    }

    // Permutations: x ~_{-0+} x forces x into Omega_0 and onto a cycle
    if (in.is_permutation()) {
        auto& c = rec.add("minus_zero_implies_zero");
        for (std::size_t x = 0; x < n; ++x) {
            if (!oracle.neg_link(x, x, 0.0)) continue;
            bool periodic = false;
            for (std::size_t k = 1; k <= oracle.horizon(); ++k) periodic |= oracle.iterate(x, k) == x;
            if (!oracle.plus_link(x, x, 0.0) || !periodic) rec.fail(c, "x=" + std::to_string(x));
        }
    } else {
        rec.skip("minus_zero_implies_zero", "map is not a permutation");
    }

    // Omega_{-0} = periodic points all of whose orbit returns at level 0
    if (space.is_non_degenerate()) {
        auto& c = rec.add("zero_level");
        std::vector<std::size_t> expect;
        for (std::size_t x = 0; x < n; ++x) {
            bool periodic = false, returns = true;
            for (std::size_t k = 1; k <= oracle.horizon(); ++k) {
                periodic |= oracle.iterate(x, k) == x;
                returns &= m(oracle.iterate(x, k), x) == 0.0;
            }
            if (periodic && returns) expect.push_back(x);
        }
        const auto got = oracle.omega(ExtendedLevel::minus_zero());
        if (got != expect) rec.fail(c, "-0 slice " + fmt_set(got) + " expected " + fmt_set(expect));
        if (in.is_permutation() && got != oracle.omega(ExtendedLevel::plus_zero()))
            rec.fail(c, "-0 and +0 slices differ on a permutation");
    } else {
        rec.skip("zero_level", "cost is degenerate");
    }

    // Level-function membership equals the definitional one
    {
        auto& c = rec.add("reduction_equivalence");
        for (const auto& l : extended) {
            const auto a = engine_omega(l);
            const auto b = oracle.omega(l);
            if (a != b) rec.fail(c, "level " + level_token(l) + " engine=" + fmt_set(a) + " definitional=" + fmt_set(b));
        }
    }

    // Doubling the horizon changes nothing
    {
        auto& c = rec.add("horizon_adequacy");
        const LevelMatrix m4 = level_matrix(in.to_system(4 * n));
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = 0; y < n; ++y)
                if (m(x, y) != m4(x, y))
                    rec.fail(c, "L(" + std::to_string(x) + "," + std::to_string(y) + ") changes from " + fmt_eps(m(x, y)) +
                                    " to " + fmt_eps(m4(x, y)));
    }

    // Slices agree at two extra points inside every gap between critical values
    {
        auto& c = rec.add("piecewise_constancy");
        const auto& crit = oracle.critical_values();
        for (std::size_t i = 0; i + 1 < crit.size(); ++i) {
            const double a = crit[i], b = crit[i + 1];
            const double mid = 0.5 * (a + b), p = a + (b - a) / 3.0, q = a + 2.0 * (b - a) / 3.0;
            for (bool neg : {false, true}) {
                auto lvl = [&](double e) { return neg ? ExtendedLevel::neg(e) : ExtendedLevel::pos(e); };
                const auto s = oracle.omega(lvl(mid));
                if (oracle.omega(lvl(p)) != s || oracle.omega(lvl(q)) != s)
                    rec.fail(c, std::string(neg ? "negative" : "positive") + " slice changes inside (" + fmt_eps(a) + ", " +
                                    fmt_eps(b) + ")");
            }
            for (std::size_t x = 0; x < n; ++x)
                if (oracle.reachable(x, p) != oracle.reachable(x, mid) || oracle.reachable(x, q) != oracle.reachable(x, mid))
                    rec.fail(c, "[x]_eps changes inside (" + fmt_eps(a) + ", " + fmt_eps(b) + ") at x=" + std::to_string(x));
        }
    }
    return report;
}

struct VerificationRun {
    std::size_t instances = 0;
    std::vector<IdentityReport> failures;
    std::map<std::string, std::size_t> skipped; // check name -> count
};

/// Seeds first_seed .. first_seed + count - 1; failures in seed order.
inline VerificationRun run_verification(std::uint64_t first_seed, std::size_t count, std::size_t max_size,
                                        InjectedFault fault = InjectedFault::None, unsigned threads = 1) {
    std::vector<IdentityReport> reports(count);
    parallel_for(count, threads, [&](std::size_t i) {
        reports[i] = verify_identities(random_instance(first_seed + i, max_size), fault);
    });
    VerificationRun run;
    run.instances = count;
    for (auto& r : reports) {
        for (const auto& c : r.checks)
            if (c.status == CheckStatus::Skipped) ++run.skipped[c.name];
        if (!r.ok()) run.failures.push_back(std::move(r));
    }
    return run;
}

} // namespace cnw
