#include "sispatch/equilibrium.hpp"

#include "sispatch/error.hpp"
#include "sispatch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sispatch {

namespace {

// g(x) = coupling x + f(x), f_j(x) = c_j x - beta_j x^2 / (p_j + q_j x).
// Each f_j is concave wherever p_j + q_j x > 0 and p_j >= 0.
//
// With by_gap set the unknown is z = upper - x instead (auxiliary system,
// d > 1, upper = alpha). Then p + q x = d z + x is formed without the
// cancellation in alpha - x, and coupling x = -coupling z because the
// coupling annihilates alpha.
struct ConcaveSystem {
    DenseMatrix coupling;
    Vector c;
    Vector beta;
    Vector p;
    Vector q;
    Vector upper;
    bool by_gap = false;
    double ratio = 0.0;

    std::size_t size() const noexcept { return c.size(); }

    double x_of(std::size_t j, double z) const { return by_gap ? upper[j] - z : z; }

    Vector to_state(std::span<const double> x) const
    {
        Vector z(x.begin(), x.end());
        if (by_gap) {
            for (std::size_t j = 0; j < z.size(); ++j) {
                z[j] = upper[j] - x[j];
            }
        }
        return z;
    }

    Vector to_x(std::span<const double> z) const
    {
        Vector x(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) {
            x[j] = x_of(j, z[j]);
        }
        return x;
    }

    double denominator(std::size_t j, double z) const
    {
        const double den = by_gap ? ratio * z + x_of(j, z) : p[j] + q[j] * z;
        if (beta[j] != 0.0 && !(den >= 1e-14)) {
            std::ostringstream msg;
            msg << "incidence denominator " << den << " in patch " << j + 1;
            throw Error(ErrorCode::NoConvergence, msg.str());
        }
        return den;
    }

    void field(std::span<const double> z, std::span<double> out) const
    {
        coupling.apply(z, out);
        for (std::size_t j = 0; j < size(); ++j) {
            if (by_gap) {
                out[j] = -out[j];
            }
            const double x = x_of(j, z[j]);
            double fj = c[j] * x;
            if (beta[j] != 0.0) {
                fj -= beta[j] * x * x / denominator(j, z[j]);
            }
            out[j] += fj;
        }
    }

    double residual(std::span<const double> z) const
    {
        Vector r(size());
        field(z, r);
        return max_norm(r);
    }

    // derivative with respect to the state variable
    DenseMatrix jacobian(std::span<const double> z) const
    {
        DenseMatrix jac = coupling;
        for (std::size_t j = 0; j < size(); ++j) {
            const double x = x_of(j, z[j]);
            double d = c[j];
            if (beta[j] != 0.0) {
                const double den = denominator(j, z[j]);
                const double num = by_gap ? ratio * (upper[j] + z[j]) + x : 2.0 * p[j] + q[j] * x;
                d -= beta[j] * x * num / (den * den);
            }
            jac(j, j) += d;
        }
        if (by_gap) {
            jac *= -1.0;
        }
        return jac;
    }

    bool inside(std::span<const double> z) const
    {
        for (std::size_t j = 0; j < size(); ++j) {
            const bool ok = by_gap ? z[j] >= 0.0 && z[j] < upper[j] : z[j] > 0.0 && z[j] <= upper[j];
            if (!ok) {
                return false;
            }
        }
        return true;
    }

    // x moved down (within roundoff) and stayed positive
    bool moved_down(std::span<const double> from, std::span<const double> to) const
    {
        for (std::size_t j = 0; j < size(); ++j) {
            const double slack = 1e-15 * upper[j];
            const bool ok = by_gap ? to[j] < upper[j] && to[j] >= from[j] - slack
                                   : to[j] > 0.0 && to[j] <= from[j] + slack;
            if (!ok) {
                return false;
            }
        }
        return true;
    }
};

struct SolveOutcome {
    Vector x;
    double residual = 0.0;
    int steps = 0;
    bool ok = false;
};

// Returns a state with field norm below tol, or nullopt if the budget runs
// out or the integrator fails.
std::optional<Vector> relax(const ConcaveSystem& sys, std::span<const double> start, const AuxiliaryOptions& opt)
{
    const VectorField field = [&](std::span<const double> x, std::span<double> dx) { sys.field(x, dx); };
    Vector scratch(sys.size());
    OdeControls controls;
    controls.initial_step = 1e-2;
    controls.max_step = 1.0;
    controls.max_steps = opt.relax_max_steps;
    controls.stop_when = [&](double, std::span<const double> x) {
        sys.field(x, scratch);
        return max_norm(scratch) < opt.relax_tolerance;
    };
    try {
        const OdeResult res = integrate_ode(field, start, 0.0, 1e7, controls);
        if (!res.stopped_early && !res.reached_end) {
            return std::nullopt;
        }
        sys.field(res.y, scratch);
        if (!(max_norm(scratch) < opt.relax_tolerance) || !sys.inside(res.y)) {
            return std::nullopt;
        }
        return res.y;
    } catch (const Error&) {
        return std::nullopt;
    }
}

// Newton iteration. In monotone mode (start at an upper solution) full steps
// are taken as long as the iterate moves down and stays positive; otherwise
// the step is halved until the residual decreases.
SolveOutcome newton(const ConcaveSystem& sys, Vector x, bool monotone, int max_steps, const AuxiliaryOptions& opt)
{
    const std::size_t n = sys.size();
    SolveOutcome out;
    Vector r(n);
    sys.field(x, r);
    double res = max_norm(r);
    int polish = 0;
    int stalled = 0;
    double last_res = res;
    int step = 0;
    for (; step < max_steps; ++step) {
        if (res <= opt.newton_tolerance) {
            // a few extra steps to reach the roundoff floor
            if (++polish > 3 || res == 0.0) {
                break;
            }
        }
        // acceptable but no longer contracting: roundoff floor of a
        // badly scaled system
        if (res <= opt.accept_residual) {
            stalled = res > 0.5 * last_res ? stalled + 1 : 0;
            if (stalled >= 3) {
                break;
            }
        }
        last_res = res;
        Vector dx;
        try {
            Vector minus_r(n);
            for (std::size_t j = 0; j < n; ++j) {
                minus_r[j] = -r[j];
            }
            dx = linear_solve(sys.jacobian(x), minus_r);
        } catch (const Error&) {
            break;
        }

        bool accepted = false;
        if (monotone) {
            Vector xt(n);
            for (std::size_t j = 0; j < n; ++j) {
                xt[j] = x[j] + dx[j];
            }
            const bool down = sys.moved_down(x, xt);
            if (down) {
                try {
                    Vector rt(n);
                    sys.field(xt, rt);
                    const double res_t = max_norm(rt);
                    // near the floor insist on decrease so the polish stops
                    if (res > opt.newton_tolerance || res_t < res) {
                        x = std::move(xt);
                        r = std::move(rt);
                        res = res_t;
                        accepted = true;
                    }
                } catch (const Error&) {
                }
            }
        }
        if (!accepted) {
            double t = 1.0;
            for (int h = 0; h < 40 && !accepted; ++h, t *= 0.5) {
                Vector xt(n);
                for (std::size_t j = 0; j < n; ++j) {
                    xt[j] = x[j] + t * dx[j];
                }
                if (!sys.inside(xt)) {
                    continue;
                }
                try {
                    Vector rt(n);
                    sys.field(xt, rt);
                    const double res_t = max_norm(rt);
                    if (res_t < res) {
                        x = std::move(xt);
                        r = std::move(rt);
                        res = res_t;
                        accepted = true;
                    }
                } catch (const Error&) {
                }
            }
        }
        if (!accepted) {
            break;
        }
    }
    out.x = std::move(x);
    out.residual = res;
    out.steps = step;
    out.ok = res <= opt.accept_residual;
    return out;
}

struct SystemSolution {
    Vector x;
    double residual = 0.0;
    int steps = 0;
    NewtonStart start = NewtonStart::Relaxation;
};

SystemSolution solve_concave(const ConcaveSystem& sys, std::span<const double> start, const AuxiliaryOptions& opt)
{
    ConcaveSystem plain = sys;
    plain.by_gap = false;
    if (auto relaxed = relax(plain, start, opt)) {
        SolveOutcome polished = newton(sys, sys.to_state(*relaxed), false, opt.max_newton_steps, opt);
        if (polished.ok && sys.inside(polished.x)) {
            return {std::move(polished.x), polished.residual, polished.steps, NewtonStart::Relaxation};
        }
    }
    SolveOutcome from_top = newton(sys, sys.to_state(sys.upper), true, std::max(opt.max_newton_steps, 200), opt);
    if (!from_top.ok) {
        std::ostringstream msg;
        msg << "Newton iteration stalled at residual " << from_top.residual;
        throw Error(ErrorCode::NoConvergence, msg.str());
    }
    return {std::move(from_top.x), from_top.residual, from_top.steps, NewtonStart::UpperSolution};
}

void require_supercritical(const ConnectivityMatrix& l, const PatchRates& rates, double dI)
{
    const std::size_t n = l.size();
    Vector f(n);
    for (std::size_t j = 0; j < n; ++j) {
        f[j] = rates.beta[j] - rates.gamma[j];
    }
    const double s = growth_bound(l, f, dI);
    if (!(s > 0.0)) {
        std::ostringstream msg;
        msg << "s(dI L + diag(beta - gamma)) = " << s << " <= 0, so R0 <= 1";
        throw Error(ErrorCode::SubThreshold, msg.str());
    }
}

void check_inputs(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha, double dI)
{
    rates.validate(l.size());
    if (alpha.size() != l.size()) {
        throw Error(ErrorCode::InvalidArgument, "alpha has the wrong dimension");
    }
    if (!(dI > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "dI must be positive");
    }
}

ConcaveSystem auxiliary_system(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha,
                               double dI, double d)
{
    const std::size_t n = l.size();
    ConcaveSystem sys{dI * l.matrix(), Vector(n), rates.beta, Vector(n), Vector(n, 1.0 - d),
                      Vector(alpha.begin(), alpha.end())};
    for (std::size_t j = 0; j < n; ++j) {
        sys.c[j] = rates.beta[j] - rates.gamma[j];
        sys.p[j] = d * alpha[j];
    }
    sys.ratio = d;
    return sys;
}

} // namespace

void auxiliary_field(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha, double dI,
                     double d, std::span<const double> x, std::span<double> out)
{
    auxiliary_system(l, rates, alpha, dI, d).field(x, out);
}

double auxiliary_residual(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha,
                          double dI, double d, std::span<const double> x)
{
    return auxiliary_system(l, rates, alpha, dI, d).residual(x);
}

AuxiliarySolution solve_auxiliary(const ConnectivityMatrix& l, const PatchRates& rates,
                                  std::span<const double> alpha, double dI, double d,
                                  const AuxiliaryOptions& options)
{
    check_inputs(l, rates, alpha, dI);
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw Error(ErrorCode::InvalidArgument, "d must be positive and finite");
    }
    require_supercritical(l, rates, dI);

    const std::size_t n = l.size();
    const ConcaveSystem sys = auxiliary_system(l, rates, alpha, dI, d);

    Vector start(n);
    if (options.initial) {
        if (options.initial->size() != n) {
            throw Error(ErrorCode::InvalidArgument, "initial state has the wrong dimension");
        }
        start = *options.initial;
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            start[j] = 1e-3 * alpha[j];
        }
    }

    ConcaveSystem solver = sys;
    solver.by_gap = d > 1.0;
    SystemSolution sol = solve_concave(solver, start, options);
    Vector gap(n);
    for (std::size_t j = 0; j < n; ++j) {
        gap[j] = solver.by_gap ? sol.x[j] : alpha[j] - sol.x[j];
    }
    sol.x = solver.to_x(sol.x);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(sol.x[j] > -1e-12 * alpha[j]) || !(sol.x[j] < alpha[j] * (1.0 + 1e-12))) {
            std::ostringstream msg;
            msg << "I_check[" << j + 1 << "] = " << sol.x[j] << " outside (0, " << alpha[j] << ")";
            throw Error(ErrorCode::LeftBox, msg.str());
        }
    }

    AuxiliarySolution out;
    out.I_check = std::move(sol.x);
    out.gap = std::move(gap);
    out.d = d;
    out.dI = dI;
    out.residual = sol.residual;
    out.converged = true;
    out.newton_steps = sol.steps;
    out.start = sol.start;
    out.strict_partition = risk_partition(rates).strict();
    return out;
}

double steady_state_residual(const ConnectivityMatrix& l, const EpidemicParameters& params, std::span<const double> S,
                             std::span<const double> I)
{
    const std::size_t n = l.size();
    Vector y(2 * n);
    std::copy(S.begin(), S.end(), y.begin());
    std::copy(I.begin(), I.end(), y.begin() + static_cast<std::ptrdiff_t>(n));
    Vector out(2 * n);
    sis_field(l, params, y, out);
    return max_norm(out);
}

EndemicEquilibrium recover_equilibrium(const AuxiliarySolution& aux, const ConnectivityMatrix& l,
                                       const EpidemicParameters& params, std::span<const double> alpha)
{
    const std::size_t n = l.size();
    params.validate(n);
    if (!aux.converged || aux.I_check.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "auxiliary solution is not usable");
    }
    const double ratio = params.dI / params.dS;
    if (std::abs(aux.d - ratio) > 1e-12 * ratio || std::abs(aux.dI - params.dI) > 1e-12 * params.dI) {
        std::ostringstream msg;
        msg << "auxiliary solution has d = " << aux.d << ", dI = " << aux.dI << " but parameters give d = " << ratio;
        throw Error(ErrorCode::InconsistentRatio, msg.str());
    }

    Vector s_check(n);
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double gap = aux.gap.size() == n ? aux.gap[j] : alpha[j] - aux.I_check[j];
        s_check[j] = gap / params.dS;
        denom += params.dI * s_check[j] + aux.I_check[j];
    }
    EndemicEquilibrium eq;
    eq.kappa = params.dI * params.N / denom;
    eq.S.resize(n);
    eq.I.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        eq.S[j] = eq.kappa * s_check[j];
        eq.I[j] = eq.kappa * aux.I_check[j] / params.dI;
    }
    eq.total = std::accumulate(eq.S.begin(), eq.S.end(), 0.0) + std::accumulate(eq.I.begin(), eq.I.end(), 0.0);
    eq.residual = steady_state_residual(l, params, eq.S, eq.I);

    const double scale = std::max(1.0, params.N);
    if (!(eq.kappa > 0.0)) {
        throw Error(ErrorCode::ResidualTooLarge, "kappa is not positive");
    }
    if (std::abs(eq.total - params.N) > 1e-9 * params.N) {
        throw Error(ErrorCode::ResidualTooLarge, "recovered state does not conserve N");
    }
    if (eq.residual > 1e-9 * scale) {
        std::ostringstream msg;
        msg << "steady-state residual " << eq.residual;
        throw Error(ErrorCode::ResidualTooLarge, msg.str());
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double lhs = params.dS * eq.S[j] + params.dI * eq.I[j];
        if (std::abs(lhs - eq.kappa * alpha[j]) > 1e-9 * eq.kappa * alpha[j]) {
            throw Error(ErrorCode::ResidualTooLarge, "dS S + dI I is not parallel to alpha");
        }
    }
    return eq;
}

EndemicEquilibrium endemic_equilibrium(const ConnectivityMatrix& l, const EpidemicParameters& params,
                                       std::span<const double> alpha, const AuxiliaryOptions& options)
{
    params.validate(l.size());
    const AuxiliarySolution aux =
        solve_auxiliary(l, params.rates, alpha, params.dI, params.dI / params.dS, options);
    return recover_equilibrium(aux, l, params, alpha);
}

USystemSolution solve_U_system(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha,
                               double dI, double d, const AuxiliaryOptions& options)
{
    check_inputs(l, rates, alpha, dI);
    if (!(d >= 0.0) || !(d < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "d must lie in [0, 1)");
    }
    require_supercritical(l, rates, dI);

    const std::size_t n = l.size();
    ConcaveSystem sys{dI * l.matrix(), Vector(n), rates.beta, Vector(alpha.begin(), alpha.end()), Vector(n, 1.0 - d),
                      Vector(n)};
    double excess = 0.0;
    double gamma_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        sys.c[j] = rates.beta[j] - rates.gamma[j];
        excess = std::max(excess, sys.c[j]);
        if (rates.gamma[j] > 0.0) {
            gamma_min = std::min(gamma_min, rates.gamma[j]);
        }
    }
    // M alpha is invariant once g(M alpha) <= 0 (L alpha = 0 kills coupling).
    double m = 1.0 + (std::isfinite(gamma_min) ? excess / gamma_min : 0.0);
    auto is_upper = [&](double factor) {
        for (std::size_t j = 0; j < n; ++j) {
            const double u = factor * alpha[j];
            const double fj = u * (sys.c[j] - rates.beta[j] * u / (alpha[j] + (1.0 - d) * u));
            if (fj > 0.0) {
                return false;
            }
        }
        return true;
    };
    int doublings = 0;
    while (!is_upper(m)) {
        m *= 2.0;
        if (++doublings > 60) {
            throw Error(ErrorCode::NoConvergence, "no invariant box M alpha found");
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        sys.upper[j] = m * alpha[j];
    }

    Vector start(n);
    if (options.initial) {
        start = *options.initial;
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            start[j] = 1e-3 * alpha[j];
        }
    }
    SystemSolution sol = solve_concave(sys, start, options);

    USystemSolution out;
    out.U_check = std::move(sol.x);
    out.d = d;
    out.dI = dI;
    out.residual = sol.residual;
    out.box_factor = m;

    if (d > 0.0) {
        const AuxiliarySolution aux = solve_auxiliary(l, rates, alpha, dI, d, options);
        for (std::size_t j = 0; j < n; ++j) {
            const double expect = aux.I_check[j] / d;
            if (std::abs(out.U_check[j] - expect) > 1e-8 * std::max(expect, alpha[j])) {
                std::ostringstream msg;
                msg << "U-system and auxiliary system disagree in patch " << j + 1;
                throw Error(ErrorCode::ResidualTooLarge, msg.str());
            }
        }
    }
    return out;
}

} // namespace sispatch
