#include "support.hpp"

#include "sispatch/equilibrium.hpp"
#include "sispatch/error.hpp"
#include "sispatch/simulator.hpp"

#include <doctest.h>

#include <cmath>

using namespace sispatch;
using testing::Rng;
using testing::Star4;

namespace {

SimulationState perturbed_dfe(const Vector& alpha, double N, double eps)
{
    SimulationState st;
    for (double a : alpha) {
        st.S.push_back((1.0 - eps) * a * N);
        st.I.push_back(eps * a * N);
    }
    return st;
}

} // namespace

TEST_CASE("field: hand-computed two-patch values")
{
    const ConnectivityMatrix l = testing::two_patch();
    const EpidemicParameters p{{{2, 1}, {1, 3}}, 0.5, 2.0, 4.0};
    const SimulationState st{0.0, {1, 2}, {1, 0}};
    const Vector f = sis_field(l, p, st);
    // dS (L S) - beta S I / (S + I) + gamma I, then dI (L I) + beta S I / (S + I) - gamma I
    CHECK(std::abs(f[0] - (0.5 * 1.0 - 1.0 + 1.0)) <= 1e-15);
    CHECK(std::abs(f[1] - (0.5 * -1.0)) <= 1e-15);
    CHECK(std::abs(f[2] - (2.0 * -1.0 + 1.0 - 1.0)) <= 1e-15);
    CHECK(std::abs(f[3] - 2.0) <= 1e-15);

    const SimulationState empty{0.0, {0, 1}, {0, 0}};
    const Vector g = sis_field(l, p, empty);
    for (double v : g) {
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("total mass is conserved on random instances")
{
    Rng rng(12);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t n = 2 + rng.index(4);
        const ConnectivityMatrix l = testing::random_graph(rng, n);
        PatchRates r{Vector(n), Vector(n)};
        SimulationState st;
        for (std::size_t j = 0; j < n; ++j) {
            r.beta[j] = rng.uniform(0.0, 4.0);
            r.gamma[j] = rng.uniform(0.1, 3.0);
            st.S.push_back(rng.uniform(0.0, 10.0));
            st.I.push_back(rng.uniform(0.0, 10.0));
        }
        const EpidemicParameters p{r, rng.log_uniform(0.01, 5.0), rng.log_uniform(0.01, 5.0), st.total()};
        SimulationOptions opts;
        opts.t_end = 50.0;
        opts.stop_on_convergence = false;
        const Trajectory tr = simulate(l, p, st, opts);
        CHECK(tr.samples.size() == 51);
        for (const SimulationState& s : tr.samples) {
            CHECK(std::abs(s.total() - p.N) <= 1e-8 * p.N);
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(s.S[j] >= -1e-12);
                CHECK(s.I[j] >= -1e-12);
            }
        }
        CHECK(tr.terminal.t == doctest::Approx(50.0));
    }
}

TEST_CASE("disease-free state is stationary")
{
    const Star4 s;
    SimulationState st;
    for (double a : s.alpha) {
        st.S.push_back(a * s.N);
        st.I.push_back(0.0);
    }
    SimulationOptions opts;
    opts.t_end = 100.0;
    opts.stop_on_convergence = false;
    const Trajectory tr = simulate(s.L, {s.rates, 1.0, 1.0, s.N}, st, opts);
    CHECK(testing::max_abs_diff(tr.terminal.S, st.S) <= 1e-10);
    for (double v : tr.terminal.I) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("input errors")
{
    const Star4 s;
    const EpidemicParameters p{s.rates, 1.0, 1.0, s.N};
    try {
        simulate(s.L, p, {0.0, {1, 1, 1, -1}, {0, 0, 0, 0}});
        FAIL("expected InvalidArgument");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
    CHECK_THROWS_AS(simulate(s.L, p, {0.0, {1, 1}, {0, 0}}), Error);
    CHECK_THROWS_AS(simulate(s.L, p, {0.0, {}, {}}), Error);
}

TEST_CASE("converges to the endemic equilibrium on the star")
{
    const Star4 s;
    const EpidemicParameters p{s.rates, 1.0, 1.0, s.N};
    const EndemicEquilibrium eq = endemic_equilibrium(s.L, p, s.alpha);
    SimulationOptions opts;
    opts.t_end = 500.0;
    const Trajectory tr = simulate(s.L, p, perturbed_dfe(s.alpha, s.N, 1e-3), opts);
    CHECK(tr.converged);
    double scale = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        scale = std::max({scale, eq.S[j], eq.I[j]});
    }
    CHECK(testing::max_abs_diff(tr.terminal.S, eq.S) <= 1e-6 * scale);
    CHECK(testing::max_abs_diff(tr.terminal.I, eq.I) <= 1e-6 * scale);
}

TEST_CASE("random supercritical instances converge to the computed equilibrium")
{
    Rng rng(2024);
    int tested = 0;
    while (tested < 6) {
        const std::size_t n = 2 + rng.index(3);
        const ConnectivityMatrix l = testing::random_graph(rng, n);
        const Vector alpha = perron_vector(l).alpha;
        const PatchRates r = testing::random_strict_rates(rng, n);
        const EpidemicParameters p{r, rng.log_uniform(0.1, 3.0), rng.log_uniform(0.1, 3.0), 10.0};
        Vector f(n);
        for (std::size_t j = 0; j < n; ++j) {
            f[j] = r.beta[j] - r.gamma[j];
        }
        if (growth_bound(l, f, p.dI) < 0.05) {
            continue;
        }
        ++tested;
        const EndemicEquilibrium eq = endemic_equilibrium(l, p, alpha);
        SimulationOptions opts;
        opts.t_end = 5000.0;
        opts.stride = 10.0;
        const Trajectory tr = simulate(l, p, perturbed_dfe(alpha, p.N, 0.1), opts);
        CHECK(tr.converged);
        CHECK(testing::max_abs_diff(tr.terminal.I, eq.I) <= 1e-5 * p.N);
    }
}

TEST_CASE("infection dies out below threshold")
{
    const Star4 s;
    SimulationOptions opts;
    opts.t_end = 2000.0;
    opts.stride = 10.0;
    opts.stop_on_convergence = false;
    const Trajectory tr = simulate(s.L, {s.rates, 1.0, 20.0, s.N}, perturbed_dfe(s.alpha, s.N, 0.2), opts);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(tr.terminal.I[j] <= 1e-6);
        CHECK(std::abs(tr.terminal.S[j] - s.alpha[j] * s.N) <= 1e-5);
    }
}
