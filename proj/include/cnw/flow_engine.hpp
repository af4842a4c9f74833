#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cnw/cost_space.hpp"
#include "cnw/error.hpp"
#include "cnw/filtration.hpp"
#include "cnw/link_engine.hpp"
#include "cnw/map_system.hpp"
#include "cnw/parallel.hpp"

namespace cnw {

/// Number of dt steps covering [0, t]; t must be a multiple of dt up to rounding.
inline std::size_t time_steps(double t, double dt) {
    return static_cast<std::size_t>(std::llround(t / dt));
}

namespace detail {

inline std::string state_string(std::span<const double> x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ')';
    return os.str();
}

inline void check_finite(std::span<const double> v, double t, std::span<const double> state, const char* what) {
    for (double c : v)
        if (!std::isfinite(c))
            throw IntegrationError(std::string("non-finite ") + what + " at t=" + std::to_string(t) +
                                       ", state " + state_string(state),
                                   t);
}

} // namespace detail

/// Classical fixed-step RK4. Returns (t_max/dt + 1) states, flattened.
inline std::vector<double> integrate(const Evaluator& field, std::span<const double> z, double t_max, double dt) {
    if (!(dt > 0.0)) throw SpecError("dt must be positive");
    if (!(t_max >= 0.0)) throw SpecError("t_max must be >= 0");
    const std::size_t dim = z.size();
    const std::size_t steps = time_steps(t_max, dt);
    std::vector<double> out((steps + 1) * dim);
    std::vector<double> x(z.begin(), z.end()), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    std::copy(x.begin(), x.end(), out.begin());
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * dt;
        field(x, k1);
        detail::check_finite(k1, t, x, "field value");
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
        field(tmp, k2);
        detail::check_finite(k2, t, tmp, "field value");
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
        field(tmp, k3);
        detail::check_finite(k3, t, tmp, "field value");
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + dt * k3[i];
        field(tmp, k4);
        detail::check_finite(k4, t, tmp, "field value");
        for (std::size_t i = 0; i < dim; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        detail::check_finite(x, t + dt, x, "state");
        std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>((s + 1) * dim));
    }
    return out;
}

struct FlowTiming {
    double dt = 0.01;
    double t_min = 1.0; // link duration T
    double t_max = 10.0;
};

/// Vector field on a sampled grid with trajectories stored at times k*dt, k = 0..t_max/dt.
class SemiflowSystem {
public:
    SemiflowSystem(std::string name, CostSpace space, Evaluator field, FlowTiming timing, GridSpec grid = {},
                   unsigned threads = 1)
        : name_(std::move(name)), space_(std::move(space)), field_(std::move(field)), timing_(timing),
          grid_(std::move(grid)) {
        if (!(timing_.dt > 0.0 && timing_.dt <= timing_.t_min && timing_.t_min <= timing_.t_max))
            throw SpecError("flow timing must satisfy 0 < dt <= t_min <= t_max");
        if (!space_.is_euclidean()) throw SpecError("semiflows need a Euclidean sample grid");
        if (space_.size() == 0) throw SpecError("empty sample set");
        steps_ = time_steps(timing_.t_max, timing_.dt);
        dim_ = space_.dim();
        traj_.resize(space_.size() * (steps_ + 1) * dim_);
        parallel_for(space_.size(), threads, [&](std::size_t z) {
            auto path = integrate(field_, space_.point(z), timing_.t_max, timing_.dt);
            std::copy(path.begin(), path.end(), traj_.begin() + static_cast<std::ptrdiff_t>(z * (steps_ + 1) * dim_));
        });
    }

    const std::string& name() const noexcept { return name_; }
    const CostSpace& space() const noexcept { return space_; }
    const FlowTiming& timing() const noexcept { return timing_; }
    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return space_.size(); }
    std::size_t steps() const noexcept { return steps_; }
    double spacing() const noexcept { return grid_.spacing; }

    /// State v^{k dt}(z).
    std::span<const double> state(std::size_t z, std::size_t k) const noexcept {
        return {traj_.data() + (z * (steps_ + 1) + k) * dim_, dim_};
    }

    /// Smallest grid index k with k*dt >= T (up to rounding).
    std::size_t first_index(double T) const {
        if (!(T > 0.0)) throw SpecError("link duration T must be positive");
        if (T > timing_.t_max * (1.0 + 1e-12)) throw SpecError("link duration T exceeds t_max");
        const auto k = static_cast<std::size_t>(std::ceil(T / timing_.dt - 1e-9));
        return std::min(std::max<std::size_t>(k, 1), steps_);
    }

private:
    std::string name_;
    CostSpace space_;
    Evaluator field_;
    FlowTiming timing_;
    GridSpec grid_;
    std::size_t steps_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> traj_;
};

/// (eps, T)-link source: durations r = k*dt with k*dt >= T.
class FlowWindow {
public:
    FlowWindow(const SemiflowSystem& sys, double T) : sys_(&sys), T_(T), first_(sys.first_index(T)) {}

    double link_duration() const noexcept { return T_; }
    const CostSpace& space() const noexcept { return sys_->space(); }
    std::size_t size() const noexcept { return sys_->size(); }
    std::size_t first_step() const noexcept { return first_; }
    std::size_t last_step() const noexcept { return sys_->steps(); }
    double entry_cost(std::size_t x, std::size_t z) const noexcept { return sys_->space().cost(x, z); }
    double exit_cost(std::size_t z, std::size_t k, std::size_t y) const noexcept {
        return sys_->space().cost_from(sys_->state(z, k), y);
    }
    void exit_min_row(std::size_t z, std::span<double> out) const {
        std::fill(out.begin(), out.end(), kInf);
        const auto& cs = sys_->space();
        for (std::size_t k = first_; k <= last_step(); ++k) {
            auto p = sys_->state(z, k);
            for (std::size_t y = 0; y < out.size(); ++y) out[y] = std::min(out[y], cs.cost_from(p, y));
        }
    }

private:
    const SemiflowSystem* sys_;
    double T_;
    std::size_t first_;
};

/// L_T(x, y) for all pairs; non-decreasing in T.
inline LevelMatrix flow_level_matrix(const SemiflowSystem& sys, double T, const MatrixOptions& opt = {}) {
    return level_matrix(FlowWindow(sys, T), opt);
}

/// Level and witness of the cheapest (eps, T)-link; witness.steps is the time index (r = steps*dt).
inline std::pair<double, LinkWitness> flow_link_level(const SemiflowSystem& sys, std::size_t x, std::size_t y,
                                                       double T) {
    return link_level(FlowWindow(sys, T), x, y);
}

/// L_T(x, x) at the working link duration (defaults to t_min).
inline double flow_nw_level(const SemiflowSystem& sys, std::size_t x, std::optional<double> T = std::nullopt) {
    const FlowWindow w(sys, T.value_or(sys.timing().t_min));
    double best = kInf;
    for (std::size_t z = 0; z < w.size(); ++z) {
        const double entry = w.entry_cost(x, z);
        if (entry >= best) continue;
        for (std::size_t k = w.first_step(); k <= w.last_step(); ++k)
            best = std::min(best, std::max(entry, w.exit_cost(z, k, x)));
    }
    return best;
}

inline std::optional<double> flow_robustness_level(const LevelMatrix& flow_matrix, std::size_t x, double tau) {
    return robustness_level(flow_matrix, x, tau);
}

} // namespace cnw
