#include "oracles.hpp"
#include "support.hpp"

#include "sispatch/error.hpp"
#include "sispatch/reproduction.hpp"

#include <doctest.h>

#include <cmath>

using namespace sispatch;
using testing::Rng;
using testing::Star4;

namespace {

double ratio_min(const PatchRates& r)
{
    double m = INFINITY;
    for (std::size_t j = 0; j < r.size(); ++j) {
        m = std::min(m, rate_ratio(r.beta[j], r.gamma[j]));
    }
    return m;
}

double ratio_max(const PatchRates& r)
{
    double m = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        m = std::max(m, rate_ratio(r.beta[j], r.gamma[j]));
    }
    return m;
}

Vector excess(const PatchRates& r)
{
    Vector f(r.size());
    for (std::size_t j = 0; j < f.size(); ++j) {
        f[j] = r.beta[j] - r.gamma[j];
    }
    return f;
}

} // namespace

TEST_CASE("risk partition")
{
    const RiskPartition p = risk_partition({{3, 4, 1, 1}, {1, 1, 2, 7}});
    CHECK(p.H_plus == std::vector<std::size_t>{0, 1});
    CHECK(p.H_minus == std::vector<std::size_t>{2, 3});
    CHECK(p.strict());

    const RiskPartition ties = risk_partition({{1, 1}, {1, 1}});
    CHECK(ties.H_plus.empty());
    CHECK(ties.H_minus.empty());
    CHECK(ties.ties == std::vector<std::size_t>{0, 1});
    CHECK_THROWS_AS(ties.require_strict(), Error);

    const RiskPartition q = risk_partition({{2, 0}, {1, 2}});
    CHECK(q.H_plus == std::vector<std::size_t>{0});
    CHECK(q.H_minus == std::vector<std::size_t>{1});
}

TEST_CASE("R0 when beta is a multiple of gamma")
{
    Rng rng(2);
    const ConnectivityMatrix l = testing::random_graph(rng, 4);
    const PatchRates r{{2, 4, 6, 1}, {1, 2, 3, 0.5}};
    for (double dI : {1e-3, 0.1, 1.0, 10.0, 1e3}) {
        CHECK(std::abs(r0(l, r, dI) - 2.0) <= 1e-10);
    }
    const Vector alpha = perron_vector(l).alpha;
    CHECK(std::isinf(find_dI_star(l, alpha, r)));
}

TEST_CASE("R0 of the two-patch fixture matches the explicit next-generation matrix")
{
    const ConnectivityMatrix l = testing::two_patch();
    const PatchRates r{{4, 0}, {1, 2}};
    const double dI = 1.0;
    const oracle::Mat2 v{{{1 + dI, -dI}, {-dI, 2 + dI}}};
    const oracle::Mat2 vi = oracle::inverse2(v);
    const oracle::Mat2 k{{{4 * vi[0][0], 4 * vi[0][1]}, {0.0, 0.0}}};
    CHECK(std::abs(r0(l, r, dI) - oracle::radius2(k)) <= 1e-10);
}

TEST_CASE("R0 limits of the star example")
{
    const Star4 s;
    CHECK(std::abs(r0(s.L, s.rates, 1e-6) - 4.0) <= 1e-3);
    CHECK(std::abs(r0(s.L, s.rates, 1e6) - 0.8) <= 1e-3);
    const R0Limits lim = r0_limits(s.rates, s.alpha);
    CHECK(std::abs(lim.limit_zero - 4.0) <= 1e-15);
    CHECK(std::abs(lim.limit_infinity - 0.8) <= 1e-15);
    CHECK_FALSE(lim.limit_zero_is_bound_only);
}

TEST_CASE("R0 limits: symmetric graph and zero transmission")
{
    const ConnectivityMatrix l = testing::two_patch(2.5);
    const Vector alpha = perron_vector(l).alpha;
    const PatchRates r{{3, 1}, {2, 5}};
    CHECK(std::abs(r0_limits(r, alpha).limit_infinity - 4.0 / 7.0) <= 1e-12);

    const R0Limits zero = r0_limits({{0, 0}, {1, 1}}, alpha);
    CHECK(zero.limit_zero == 0.0);
    CHECK(zero.limit_infinity == 0.0);
    CHECK(r0(l, {{0, 0}, {1, 1}}, 1.0) == 0.0);

    const R0Limits flagged = r0_limits({{0, 1}, {0, 1}}, alpha);
    CHECK(flagged.limit_zero_is_bound_only);
}

TEST_CASE("R0 needs some recovery")
{
    const ConnectivityMatrix l = testing::two_patch();
    try {
        r0(l, {{1, 1}, {0, 0}}, 1.0);
        FAIL("expected AllGammaZero");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AllGammaZero);
    }
}

TEST_CASE("lambda1 consistency")
{
    const ConnectivityMatrix l = testing::two_patch();
    CHECK(std::abs(lambda1(l, {{3, 1}, {1, 1}}, 1.0, 0.0) + 1.0) <= 1e-12);

    const Star4 s;
    for (double dI : {0.05, 1.0, 5.0, 30.0}) {
        const double mu0 = 1.0 / r0(s.L, s.rates, dI);
        CHECK(std::abs(lambda1(s.L, s.rates, dI, mu0)) <= 1e-9);
    }
    const double star = find_dI_star(s.L, s.alpha, s.rates);
    CHECK(std::abs(lambda1(s.L, s.rates, star, 1.0)) <= 1e-6);
}

TEST_CASE("R0 properties on random instances")
{
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.index(4);
        const ConnectivityMatrix l = testing::random_graph(rng, n);
        PatchRates r;
        r.beta.resize(n);
        r.gamma.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            r.beta[j] = rng.coin(0.15) ? 0.0 : rng.uniform(0.0, 5.0);
            r.gamma[j] = rng.coin(0.15) ? 0.0 : rng.uniform(0.0, 5.0);
        }
        r.gamma[rng.index(n)] = rng.uniform(0.5, 5.0);
        const double dI = rng.log_uniform(1e-2, 1e2);
        const double value = r0(l, r, dI);
        CHECK(value >= ratio_min(r) * (1 - 1e-12));
        CHECK(value <= ratio_max(r) * (1 + 1e-12));

        if (trial < 100) {
            // sign law
            const double s = lambda1(l, r, dI, 1.0);
            const double gap = value - 1.0;
            if (std::abs(s) > 1e-12 && std::abs(gap) > 1e-12) {
                CHECK((s > 0) == (gap > 0));
            }
        }
        const bool positive = std::all_of(r.beta.begin(), r.beta.end(), [](double b) { return b > 0; });
        if (positive) {
            CHECK(std::abs(r0_next_generation(l, r, dI) - value) <= 1e-8 * std::max(1.0, value));
        }
    }
}

TEST_CASE("R0 strictly decreasing on the star example")
{
    const Star4 s;
    double prev = INFINITY;
    for (int i = 0; i < 50; ++i) {
        const double dI = 1e-3 * std::pow(1e6, i / 49.0);
        const double value = r0(s.L, s.rates, dI);
        CHECK(prev - value > 1e-10);
        prev = value;
    }
}

TEST_CASE("growth bound limits in dI")
{
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.index(4);
        const ConnectivityMatrix l = testing::random_graph(rng, n);
        const Vector alpha = perron_vector(l).alpha;
        Vector f(n);
        double f_max = -INFINITY;
        double f_mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            f[j] = rng.uniform(-3.0, 3.0);
            f_max = std::max(f_max, f[j]);
            f_mean += alpha[j] * f[j];
        }
        CHECK(std::abs(growth_bound(l, f, 1e-8) - f_max) <= 1e-3);
        CHECK(std::abs(growth_bound(l, f, 1e8) - f_mean) <= 1e-3);
    }
}

TEST_CASE("epidemic threshold of the star example")
{
    const Star4 s;
    const double star = find_dI_star(s.L, s.alpha, s.rates);
    CHECK(std::abs(star - 8.478) <= 0.05);
    const Vector f = excess(s.rates);
    double cell = 0.0;
    const double scan =
        oracle::sign_scan([&](double dI) { return growth_bound(s.L, f, dI); }, 1e-3, 20.0, 10000, &cell);
    CHECK(std::abs(scan - star) <= 0.01);
}

TEST_CASE("epidemic threshold of the two-patch fixture")
{
    const ConnectivityMatrix l = testing::two_patch();
    const Vector alpha = perron_vector(l).alpha;
    // s(dI L + diag(3, -2)) = 1/2 - dI + sqrt((dI - 1/2)^2 + 6 + dI) > 0 for
    // every dI, so there is no threshold; the scan agrees
    const PatchRates r{{4, 0}, {1, 2}};
    CHECK(std::isinf(find_dI_star(l, alpha, r)));
    const double scan = oracle::sign_scan(
        [&](double dI) { return growth_bound(l, std::vector<double>{3, -2}, dI); }, 1e-3, 1e3, 10000);
    CHECK(std::isnan(scan));

    // f = (1, -2): det(dI L + diag f) = dI - 2 with negative trace, so the
    // growth bound crosses zero at dI = 2
    const PatchRates q{{2, 0}, {1, 2}};
    const double star = find_dI_star(l, alpha, q, 100.0, 1e-10);
    const double scan_q = oracle::sign_scan(
        [&](double dI) { return growth_bound(l, std::vector<double>{1, -2}, dI); }, 1e-3, 10.0, 100001);
    CHECK(std::abs(star - scan_q) <= 1e-4);
    CHECK(std::abs(star - 2.0) <= 1e-8);
}

TEST_CASE("threshold edge cases")
{
    const ConnectivityMatrix l = testing::two_patch();
    const Vector alpha = perron_vector(l).alpha;
    // mean excess positive: above threshold for every dI
    CHECK(std::isinf(find_dI_star(l, alpha, {{5, 1}, {1, 2}})));
    // no high-risk patch: below threshold for every dI
    CHECK(find_dI_star(l, alpha, {{0.5, 1}, {1, 2}}) == 0.0);
}
