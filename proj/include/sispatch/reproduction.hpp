#pragma once

#include "sispatch/numerics.hpp"
#include "sispatch/patch_graph.hpp"

#include <span>
#include <vector>

namespace sispatch {

/// Per-patch transmission and recovery rates (1/time).
struct PatchRates {
    Vector beta;
    Vector gamma;

    std::size_t size() const noexcept { return beta.size(); }
    /// Lengths match n, entries finite and nonnegative.
    void validate(std::size_t n) const;
    bool gamma_all_zero() const noexcept;
};

struct EpidemicParameters {
    PatchRates rates;
    double dS = 1.0;
    double dI = 1.0;
    double N = 1.0;

    /// Checks rates against n and dS, dI, N > 0; throws InvalidArgument.
    void validate(std::size_t n) const;
};

struct RiskPartition {
    std::vector<std::size_t> H_minus; ///< beta_j < gamma_j
    std::vector<std::size_t> H_plus;  ///< beta_j > gamma_j
    std::vector<std::size_t> ties;    ///< beta_j == gamma_j

    /// Both sets nonempty and no ties.
    bool strict() const noexcept { return ties.empty() && !H_minus.empty() && !H_plus.empty(); }
    /// Throws TiePatch (or InvalidArgument for an empty side) unless strict().
    void require_strict() const;
};

RiskPartition risk_partition(const PatchRates& rates);

/// beta/gamma with the conventions x/0 = inf for x > 0 and 0/0 = 0.
double rate_ratio(double beta, double gamma) noexcept;

/// s(dI L + diag(f)).
SpectralResult growth_spectrum(const ConnectivityMatrix& l, std::span<const double> f, double dI,
                               const SpectralOptions& options = {});
double growth_bound(const ConnectivityMatrix& l, std::span<const double> f, double dI);

/// s(dI L + a diag(beta) - diag(gamma)); at a = 1 this is s(F - V).
double lambda1(const ConnectivityMatrix& l, const PatchRates& rates, double dI, double a);

/// Basic reproduction number rho(F V^-1), F = diag(beta), V = diag(gamma) - dI L.
///
/// Computed as 1/mu0 where mu0 is the root of a -> lambda1(a), bracketed by
/// min beta/gamma <= R0 <= max beta/gamma. Returns 0 when beta == 0.
/// Throws AllGammaZero.
double r0(const ConnectivityMatrix& l, const PatchRates& rates, double dI);

/// Direct power iteration on F V^-1. Requires beta >> 0 (otherwise F V^-1 is
/// reducible); meant as a cross-check of r0().
double r0_next_generation(const ConnectivityMatrix& l, const PatchRates& rates, double dI);

struct R0Limits {
    double limit_zero = 0.0;     ///< max_j beta_j / gamma_j
    double limit_infinity = 0.0; ///< sum alpha beta / sum alpha gamma
    /// Some patch has beta_j = gamma_j = 0; then limit_zero is only known to
    /// bound the small-dispersal limit from above.
    bool limit_zero_is_bound_only = false;
};

R0Limits r0_limits(const PatchRates& rates, std::span<const double> alpha);

/// Dispersal rate at which R0 crosses one.
///
/// Returns +inf when sum alpha_j (beta_j - gamma_j) >= 0 (R0 > 1 for all dI)
/// and 0 when max_j (beta_j - gamma_j) <= 0 (R0 <= 1 for all dI). Otherwise
/// bisects dI -> s(dI L + diag(beta - gamma)) after expanding the bracket
/// from dI_max, to the given relative bracket width.
///
/// Throws NoSignChange if the expansion cap is reached.
double find_dI_star(const ConnectivityMatrix& l, std::span<const double> alpha, const PatchRates& rates,
                    double dI_max = 100.0, double rel_tol = 1e-6);

} // namespace sispatch
