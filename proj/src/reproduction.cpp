#include "sispatch/reproduction.hpp"

#include "sispatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace sispatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_vector(const Vector& v, std::size_t n, const char* name)
{
    if (v.size() != n) {
        std::ostringstream msg;
        msg << name << " has " << v.size() << " entries, expected " << n;
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(v[j]) || v[j] < 0.0) {
            std::ostringstream msg;
            msg << name << "[" << j + 1 << "] = " << v[j] << " must be finite and >= 0";
            throw Error(ErrorCode::InvalidArgument, msg.str());
        }
    }
}

} // namespace

void PatchRates::validate(std::size_t n) const
{
    check_vector(beta, n, "beta");
    check_vector(gamma, n, "gamma");
}

bool PatchRates::gamma_all_zero() const noexcept
{
    return std::all_of(gamma.begin(), gamma.end(), [](double g) { return g == 0.0; });
}

void EpidemicParameters::validate(std::size_t n) const
{
    rates.validate(n);
    if (!(dS > 0.0) || !std::isfinite(dS)) {
        throw Error(ErrorCode::InvalidArgument, "dS must be positive");
    }
    if (!(dI > 0.0) || !std::isfinite(dI)) {
        throw Error(ErrorCode::InvalidArgument, "dI must be positive");
    }
    if (!(N > 0.0) || !std::isfinite(N)) {
        throw Error(ErrorCode::InvalidArgument, "N must be positive");
    }
}

void RiskPartition::require_strict() const
{
    if (!ties.empty()) {
        std::ostringstream msg;
        msg << "patches with beta == gamma:";
        for (std::size_t j : ties) {
            msg << ' ' << j + 1;
        }
        throw Error(ErrorCode::TiePatch, msg.str());
    }
    if (H_minus.empty() || H_plus.empty()) {
        throw Error(ErrorCode::InvalidArgument, "both low-risk and high-risk patches are required");
    }
}

RiskPartition risk_partition(const PatchRates& rates)
{
    RiskPartition p;
    for (std::size_t j = 0; j < rates.size(); ++j) {
        if (rates.beta[j] < rates.gamma[j]) {
            p.H_minus.push_back(j);
        } else if (rates.beta[j] > rates.gamma[j]) {
            p.H_plus.push_back(j);
        } else {
            p.ties.push_back(j);
        }
    }
    return p;
}

double rate_ratio(double beta, double gamma) noexcept
{
    if (gamma == 0.0) {
        return beta > 0.0 ? kInf : 0.0;
    }
    return beta / gamma;
}

SpectralResult growth_spectrum(const ConnectivityMatrix& l, std::span<const double> f, double dI,
                               const SpectralOptions& options)
{
    DenseMatrix a = dI * l.matrix();
    a.add_diagonal(f);
    return spectral_bound(a, options);
}

double growth_bound(const ConnectivityMatrix& l, std::span<const double> f, double dI)
{
    return growth_spectrum(l, f, dI).value;
}

namespace {

// a -> s(dI L + a diag(beta) - diag(gamma)), warm-started from the previous
// eigenvector; bisection calls it with nearby arguments.
class Lambda1 {
public:
    Lambda1(const ConnectivityMatrix& l, const PatchRates& rates, double dI) : base_(dI * l.matrix()), rates_(rates)
    {
        for (std::size_t j = 0; j < rates.size(); ++j) {
            base_(j, j) -= rates.gamma[j];
        }
    }

    double operator()(double a)
    {
        DenseMatrix m = base_;
        for (std::size_t j = 0; j < rates_.size(); ++j) {
            m(j, j) += a * rates_.beta[j];
        }
        SpectralOptions opts;
        if (!warm_.empty()) {
            opts.initial = warm_;
        }
        SpectralResult res = spectral_bound(m, opts);
        warm_ = std::move(res.eigenvector);
        return res.value;
    }

private:
    DenseMatrix base_;
    const PatchRates& rates_;
    Vector warm_;
};

} // namespace

double lambda1(const ConnectivityMatrix& l, const PatchRates& rates, double dI, double a)
{
    rates.validate(l.size());
    Lambda1 f(l, rates, dI);
    return f(a);
}

double r0(const ConnectivityMatrix& l, const PatchRates& rates, double dI)
{
    rates.validate(l.size());
    if (rates.gamma_all_zero()) {
        throw Error(ErrorCode::AllGammaZero, "every recovery rate is zero");
    }
    if (!(dI > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "dI must be positive");
    }
    if (std::all_of(rates.beta.begin(), rates.beta.end(), [](double b) { return b == 0.0; })) {
        return 0.0;
    }

    double r_min = kInf;
    double r_max = 0.0;
    for (std::size_t j = 0; j < rates.size(); ++j) {
        const double r = rate_ratio(rates.beta[j], rates.gamma[j]);
        r_min = std::min(r_min, r);
        r_max = std::max(r_max, r);
    }
    if (r_min == r_max) {
        // beta is a multiple of gamma
        return r_max;
    }

    Lambda1 lam(l, rates, dI);
    // mu0 = 1/R0 lies in [1/r_max, 1/r_min].
    const double a_lo = std::isinf(r_max) ? 0.0 : 1.0 / r_max;
    double a_hi = 0.0;
    if (r_min > 0.0) {
        a_hi = 1.0 / r_min;
    } else {
        a_hi = std::max(1.0, 2.0 * a_lo);
        int expansions = 0;
        while (lam(a_hi) <= 0.0) {
            a_hi *= 2.0;
            if (++expansions > 2000) {
                throw Error(ErrorCode::NoConvergence, "could not bracket 1/R0");
            }
        }
    }

    const double at_lo = lam(a_lo);
    if (at_lo >= 0.0) {
        return 1.0 / a_lo;
    }
    const double at_hi = lam(a_hi);
    if (at_hi <= 0.0) {
        return 1.0 / a_hi;
    }
    const double mu0 = bisect_monotone(std::ref(lam), a_lo, a_hi, 1e-15 * a_hi, Monotonicity::Increasing);
    return 1.0 / mu0;
}

double r0_next_generation(const ConnectivityMatrix& l, const PatchRates& rates, double dI)
{
    rates.validate(l.size());
    if (rates.gamma_all_zero()) {
        throw Error(ErrorCode::AllGammaZero, "every recovery rate is zero");
    }
    const std::size_t n = l.size();
    if (std::any_of(rates.beta.begin(), rates.beta.end(), [](double b) { return !(b > 0.0); })) {
        throw Error(ErrorCode::InvalidArgument, "next-generation power iteration needs beta >> 0");
    }
    DenseMatrix v = -dI * l.matrix();
    v.add_diagonal(rates.gamma);
    DenseMatrix k(n);
    Vector e(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        e.assign(n, 0.0);
        e[c] = 1.0;
        const Vector col = linear_solve(v, e);
        for (std::size_t r = 0; r < n; ++r) {
            // V^-1 of an irreducible nonsingular M-matrix is positive; clip
            // roundoff-level negatives
            k(r, c) = rates.beta[r] * std::max(col[r], 0.0);
        }
    }
    return spectral_bound(k).value;
}

R0Limits r0_limits(const PatchRates& rates, std::span<const double> alpha)
{
    if (rates.gamma_all_zero()) {
        throw Error(ErrorCode::AllGammaZero, "every recovery rate is zero");
    }
    R0Limits out;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < rates.size(); ++j) {
        out.limit_zero = std::max(out.limit_zero, rate_ratio(rates.beta[j], rates.gamma[j]));
        if (rates.beta[j] == 0.0 && rates.gamma[j] == 0.0) {
            out.limit_zero_is_bound_only = true;
        }
        num += alpha[j] * rates.beta[j];
        den += alpha[j] * rates.gamma[j];
    }
    out.limit_infinity = num / den;
    return out;
}

double find_dI_star(const ConnectivityMatrix& l, std::span<const double> alpha, const PatchRates& rates,
                    double dI_max, double rel_tol)
{
    rates.validate(l.size());
    const std::size_t n = l.size();
    Vector f(n);
    double weighted = 0.0;
    double f_max = -kInf;
    for (std::size_t j = 0; j < n; ++j) {
        f[j] = rates.beta[j] - rates.gamma[j];
        weighted += alpha[j] * f[j];
        f_max = std::max(f_max, f[j]);
    }
    if (weighted >= 0.0) {
        return kInf;
    }
    if (f_max <= 0.0) {
        return 0.0;
    }

    Vector warm;
    auto growth = [&](double dI) {
        SpectralOptions opts;
        if (!warm.empty()) {
            opts.initial = warm;
        }
        SpectralResult res = growth_spectrum(l, f, dI, opts);
        warm = std::move(res.eigenvector);
        return res.value;
    };

    double hi = dI_max > 0.0 ? dI_max : 1.0;
    int expansions = 0;
    while (growth(hi) >= 0.0) {
        hi *= 2.0;
        if (++expansions > 200) {
            throw Error(ErrorCode::NoSignChange, "s(dI L + diag(beta - gamma)) stays nonnegative");
        }
    }
    double lo = 0.5 * hi;
    int contractions = 0;
    while (growth(lo) <= 0.0) {
        hi = lo;
        lo *= 0.5;
        if (++contractions > 1000) {
            throw Error(ErrorCode::NoSignChange, "s(dI L + diag(beta - gamma)) stays nonpositive");
        }
    }
    return bisect_monotone(growth, lo, hi, rel_tol * lo, Monotonicity::Decreasing);
}

} // namespace sispatch
