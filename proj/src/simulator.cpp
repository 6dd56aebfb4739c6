#include "sispatch/simulator.hpp"

#include "sispatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sispatch {

double SimulationState::total() const noexcept
{
    return std::accumulate(S.begin(), S.end(), 0.0) + std::accumulate(I.begin(), I.end(), 0.0);
}

void sis_field(const ConnectivityMatrix& l, const EpidemicParameters& params, std::span<const double> state,
               std::span<double> out)
{
    const std::size_t n = l.size();
    const auto s = state.subspan(0, n);
    const auto i = state.subspan(n, n);
    const DenseMatrix& m = l.matrix();
    for (std::size_t j = 0; j < n; ++j) {
        double move_s = 0.0;
        double move_i = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            move_s += m(j, k) * s[k];
            move_i += m(j, k) * i[k];
        }
        const double pop = s[j] + i[j];
        const double incidence = pop > 1e-300 ? params.rates.beta[j] * s[j] * i[j] / pop : 0.0;
        const double recovery = params.rates.gamma[j] * i[j];
        out[j] = params.dS * move_s - incidence + recovery;
        out[n + j] = params.dI * move_i + incidence - recovery;
    }
    for (std::size_t k = 0; k < 2 * n; ++k) {
        if (!std::isfinite(out[k])) {
            throw Error(ErrorCode::NonFinite, "SIS field is not finite");
        }
    }
}

Vector sis_field(const ConnectivityMatrix& l, const EpidemicParameters& params, const SimulationState& state)
{
    const std::size_t n = l.size();
    Vector y(2 * n);
    std::copy(state.S.begin(), state.S.end(), y.begin());
    std::copy(state.I.begin(), state.I.end(), y.begin() + static_cast<std::ptrdiff_t>(n));
    Vector out(2 * n);
    sis_field(l, params, y, out);
    return out;
}

namespace {

SimulationState unstack(double t, std::span<const double> y, std::size_t n)
{
    SimulationState st;
    st.t = t;
    st.S.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
    st.I.assign(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
    return st;
}

} // namespace

Trajectory simulate(const ConnectivityMatrix& l, const EpidemicParameters& params, const SimulationState& initial,
                    const SimulationOptions& options)
{
    const std::size_t n = l.size();
    params.validate(n);
    if (initial.S.size() != n || initial.I.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "initial state has the wrong dimension");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!(initial.S[j] >= 0.0) || !(initial.I[j] >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "initial state must be nonnegative");
        }
    }
    if (!(initial.total() > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "initial population must be positive");
    }
    if (!(options.stride > 0.0) || !(options.t_end >= initial.t)) {
        throw Error(ErrorCode::InvalidArgument, "bad time controls");
    }

    Vector y(2 * n);
    std::copy(initial.S.begin(), initial.S.end(), y.begin());
    std::copy(initial.I.begin(), initial.I.end(), y.begin() + static_cast<std::ptrdiff_t>(n));

    const VectorField field = [&](std::span<const double> x, std::span<double> dx) { sis_field(l, params, x, dx); };
    Vector scratch(2 * n);
    auto field_norm = [&](std::span<const double> x) {
        field(x, scratch);
        return max_norm(scratch);
    };

    OdeControls controls;
    controls.initial_step = options.initial_step;
    controls.local_tolerance = options.local_tolerance;
    controls.stop_when = [&](double t, std::span<const double> x) {
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (x[k] < -1e-12) {
                std::ostringstream msg;
                msg << "component " << k << " reached " << x[k] << " at t=" << t;
                throw Error(ErrorCode::NegativeState, msg.str());
            }
        }
        return false;
    };

    Trajectory traj;
    traj.samples.push_back(unstack(initial.t, y, n));
    double t = initial.t;
    double norm = field_norm(y);
    traj.converged = norm < options.convergence_tolerance;
    std::size_t k = 0;
    while (t < options.t_end && !(traj.converged && options.stop_on_convergence)) {
        ++k;
        const double t_next = std::min(initial.t + static_cast<double>(k) * options.stride, options.t_end);
        OdeResult step = integrate_ode(field, y, t, t_next, controls);
        y = std::move(step.y);
        t = t_next;
        traj.samples.push_back(unstack(t, y, n));
        norm = field_norm(y);
        traj.converged = norm < options.convergence_tolerance;
    }
    traj.terminal = traj.samples.back();
    traj.field_norm = norm;
    return traj;
}

} // namespace sispatch
