#include "sispatch/asymptotics.hpp"

#include "sispatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sispatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDeadBand = 1e-10;

void require_positive_dI(double dI)
{
    if (!(dI > 0.0) || !std::isfinite(dI)) {
        throw Error(ErrorCode::InvalidArgument, "dI must be positive and finite");
    }
}

} // namespace

Vector alpha_star(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha, double dI,
                  const RiskPartition& partition)
{
    partition.require_strict();
    require_positive_dI(dI);
    const auto& hm = partition.H_minus;
    const std::size_t m = hm.size();
    DenseMatrix a(m);
    Vector rhs(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t j = hm[r];
        for (std::size_t c = 0; c < m; ++c) {
            a(r, c) = -dI * l(j, hm[c]);
        }
        a(r, r) += rates.gamma[j] - rates.beta[j];
        for (std::size_t k : partition.H_plus) {
            rhs[r] += dI * l(j, k) * alpha[k];
        }
    }
    Vector x = linear_solve(a, rhs);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t j = hm[r];
        if (!(x[r] > 0.0) || !(x[r] < alpha[j])) {
            std::ostringstream msg;
            msg << "alpha*[" << j + 1 << "] = " << x[r] << " outside (0, " << alpha[j] << ")";
            throw Error(ErrorCode::BoxViolation, msg.str());
        }
    }
    return x;
}

Vector limit_profile(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha, double dI,
                     const RiskPartition& partition)
{
    const Vector star = alpha_star(l, rates, alpha, dI, partition);
    Vector out(alpha.begin(), alpha.end());
    for (std::size_t r = 0; r < partition.H_minus.size(); ++r) {
        out[partition.H_minus[r]] = star[r];
    }
    return out;
}

Vector h_functions(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha, double dI,
                   const RiskPartition& partition)
{
    const Vector i0 = limit_profile(l, rates, alpha, dI, partition);
    Vector h;
    h.reserve(partition.H_plus.size());
    for (std::size_t j : partition.H_plus) {
        double coupling = 0.0;
        for (std::size_t k = 0; k < l.size(); ++k) {
            coupling += l(j, k) * i0[k];
        }
        h.push_back(dI * coupling + (rates.beta[j] - rates.gamma[j]) * alpha[j]);
    }
    return h;
}

HLimits h_limits(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha,
                 const RiskPartition& partition)
{
    partition.require_strict();
    const auto& hm = partition.H_minus;
    const auto& hp = partition.H_plus;
    const std::size_t m = hm.size();

    DenseMatrix mt(m);
    Vector w(m);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
            mt(r, c) = -l(hm[r], hm[c]);
        }
        w[r] = (rates.gamma[hm[r]] - rates.beta[hm[r]]) * alpha[hm[r]];
    }
    const Vector y = linear_solve(mt, w);

    HLimits out;
    for (std::size_t j : hp) {
        const double own = (rates.beta[j] - rates.gamma[j]) * alpha[j];
        double coupled = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            coupled += l(j, hm[c]) * y[c];
        }
        out.at_zero.push_back(own);
        out.at_infinity.push_back(own - coupled);
    }
    return out;
}

std::optional<double> find_dI_star_star(const ConnectivityMatrix& l, const PatchRates& rates,
                                        std::span<const double> alpha, const RiskPartition& partition,
                                        double dI_star)
{
    const HLimits lim = h_limits(l, rates, alpha, partition);
    std::optional<double> best;
    for (std::size_t r = 0; r < partition.H_plus.size(); ++r) {
        if (!(lim.at_infinity[r] < 0.0) || !(lim.at_zero[r] > 0.0)) {
            continue;
        }
        auto h = [&](double dI) { return h_functions(l, rates, alpha, dI, partition)[r]; };
        double hi = 1.0;
        int guard = 0;
        while (h(hi) >= 0.0) {
            hi *= 2.0;
            if (++guard > 200) {
                throw Error(ErrorCode::NoSignChange, "h_j stays nonnegative");
            }
        }
        double lo = 0.5 * hi;
        guard = 0;
        while (h(lo) <= 0.0) {
            hi = lo;
            lo *= 0.5;
            if (++guard > 1000) {
                throw Error(ErrorCode::NoSignChange, "h_j stays nonpositive");
            }
        }
        const double root = bisect_monotone(h, lo, hi, 1e-15 * hi, Monotonicity::Decreasing);
        if (!best || root < *best) {
            best = root;
        }
    }
    // dI_star is only known to its bisection width
    if (best && *best > dI_star * (1.0 + 1e-5)) {
        return std::nullopt;
    }
    return best;
}

std::string_view to_string(ClassificationMethod m) noexcept
{
    return m == ClassificationMethod::AnalyticII ? "analytic-ii" : "numeric";
}

JClassification classify_J(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha,
                           double dI, const RiskPartition& partition, ClassificationMode mode)
{
    partition.require_strict();
    require_positive_dI(dI);
    const std::size_t n = l.size();

    JClassification out;
    out.dI = dI;
    out.h_values = h_functions(l, rates, alpha, dI, partition);
    bool all_positive = true;
    for (std::size_t r = 0; r < out.h_values.size(); ++r) {
        const double h = out.h_values[r];
        if (std::abs(h) <= kDeadBand) {
            std::ostringstream msg;
            msg << "h_" << partition.H_plus[r] + 1 << "(" << dI << ") = " << h << " is within the dead band";
            throw Error(ErrorCode::DegenerateH, msg.str());
        }
        all_positive = all_positive && h > 0.0;
    }

    if (all_positive && mode == ClassificationMode::Auto) {
        Vector f(n);
        for (std::size_t j = 0; j < n; ++j) {
            f[j] = rates.beta[j] - rates.gamma[j];
        }
        if (!(growth_bound(l, f, dI) > 0.0)) {
            throw Error(ErrorCode::SubThreshold, "R0 <= 1 at this dI");
        }
        out.method = ClassificationMethod::AnalyticII;
        out.J_plus = partition.H_plus;
        out.J_minus = partition.H_minus;
        out.I_check_star = limit_profile(l, rates, alpha, dI, partition);
        return out;
    }

    out.method = ClassificationMethod::Numeric;
    Vector previous;
    Vector last;
    for (double dS = 1e-2; dS > 0.5e-6; dS *= 0.1) {
        AuxiliaryOptions opts;
        if (!last.empty()) {
            opts.initial = last;
        }
        AuxiliarySolution aux = solve_auxiliary(l, rates, alpha, dI, dI / dS, opts);
        previous = std::move(last);
        last = std::move(aux.I_check);
    }

    out.I_check_star.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double gap = alpha[j] - last[j];
        const double gap_prev = alpha[j] - previous[j];
        if (gap < 1e-4 * alpha[j] && gap < 0.5 * gap_prev) {
            out.J_plus.push_back(j);
            out.I_check_star[j] = alpha[j];
        } else {
            out.J_minus.push_back(j);
            // the error is linear in dS: one Richardson step over the last decade
            const double x = last[j] + (last[j] - previous[j]) / 9.0;
            out.I_check_star[j] = std::clamp(x, 0.0, alpha[j]);
        }
    }

    for (std::size_t j : partition.H_minus) {
        if (std::find(out.J_minus.begin(), out.J_minus.end(), j) == out.J_minus.end()) {
            std::ostringstream msg;
            msg << "low-risk patch " << j + 1 << " classified into J+";
            throw Error(ErrorCode::NoConvergence, msg.str());
        }
    }
    if (!all_positive && out.J_plus.size() >= partition.H_plus.size()) {
        throw Error(ErrorCode::NoConvergence, "J+ = H+ although some h_j < 0");
    }
    if (all_positive && out.J_plus != partition.H_plus) {
        throw Error(ErrorCode::NoConvergence, "numeric classification disagrees with h_j > 0");
    }
    return out;
}

Vector limiting_S_profile(const JClassification& classification, std::span<const double> alpha, double N)
{
    const std::size_t n = alpha.size();
    if (classification.I_check_star.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "classification has the wrong dimension");
    }
    double weight = 0.0;
    for (std::size_t j : classification.J_minus) {
        weight += alpha[j] - classification.I_check_star[j];
    }
    if (classification.J_minus.empty() || !(weight > 0.0)) {
        throw Error(ErrorCode::EmptyJMinus, "J- carries no susceptible weight");
    }
    Vector s(n, 0.0);
    for (std::size_t j : classification.J_minus) {
        s[j] = N * (alpha[j] - classification.I_check_star[j]) / weight;
    }
    return s;
}

AsymptoticProfile asymptotic_profile(const ConnectivityMatrix& l, const EpidemicParameters& params,
                                     std::span<const double> alpha, ClassificationMode mode)
{
    params.validate(l.size());
    const RiskPartition partition = risk_partition(params.rates);
    AsymptoticProfile out;
    out.dI_used = params.dI;
    out.alpha_star = alpha_star(l, params.rates, alpha, params.dI, partition);
    out.I_check_zero = limit_profile(l, params.rates, alpha, params.dI, partition);
    JClassification cls = classify_J(l, params.rates, alpha, params.dI, partition, mode);
    out.h_values = cls.h_values;
    out.method = cls.method;
    out.S_star = limiting_S_profile(cls, alpha, params.N);
    out.J_plus = std::move(cls.J_plus);
    out.J_minus = std::move(cls.J_minus);
    return out;
}

LimitState dI_to_zero_profiles(const PatchRates& rates, std::span<const double> alpha, double N, double d0)
{
    const std::size_t n = rates.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (!(rates.gamma[j] > 0.0)) {
            std::ostringstream msg;
            msg << "gamma[" << j + 1 << "] = 0";
            throw Error(ErrorCode::ZeroGamma, msg.str());
        }
    }
    if (!(d0 >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "d0 must be >= 0");
    }
    LimitState out{Vector(n, 0.0), Vector(n, 0.0)};

    if (std::isinf(d0)) {
        const RiskPartition partition = risk_partition(rates);
        double mass = 0.0;
        for (std::size_t j : partition.H_minus) {
            mass += alpha[j];
        }
        if (!(mass > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "no low-risk patch");
        }
        for (std::size_t j : partition.H_minus) {
            out.S[j] = N * alpha[j] / mass;
        }
        return out;
    }

    // w_j = alpha_j (beta_j - gamma_j)+ / (d0 (beta_j - gamma_j)+ + gamma_j)
    Vector w(n);
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double excess = std::max(rates.beta[j] - rates.gamma[j], 0.0);
        w[j] = alpha[j] * excess / (d0 * excess + rates.gamma[j]);
        denom += alpha[j] + (1.0 - d0) * w[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
        out.S[j] = N * (alpha[j] - d0 * w[j]) / denom;
        out.I[j] = N * w[j] / denom;
    }
    return out;
}

double symmetric_lower_bound(const ConnectivityMatrix& l, const PatchRates& rates, const RiskPartition& partition)
{
    if (!l.is_symmetric()) {
        throw Error(ErrorCode::NotSymmetric, "connectivity matrix is not symmetric");
    }
    partition.require_strict();
    auto row_sum = [&](std::size_t k, const std::vector<std::size_t>& set) {
        double s = 0.0;
        for (std::size_t j : set) {
            if (j != k) {
                s += l(k, j);
            }
        }
        return s;
    };
    double high = -kInf;
    for (std::size_t k : partition.H_plus) {
        high = std::max(high, row_sum(k, partition.H_minus) / (rates.beta[k] - rates.gamma[k]));
    }
    double low = -kInf;
    for (std::size_t k : partition.H_minus) {
        low = std::max(low, row_sum(k, partition.H_plus) / (rates.beta[k] - rates.gamma[k]));
    }
    const double bracket = high + low;
    return bracket > 0.0 ? 1.0 / bracket : kInf;
}

ThresholdReport threshold_report(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha)
{
    const RiskPartition partition = risk_partition(rates);
    partition.require_strict();
    ThresholdReport out;
    out.dI_star = find_dI_star(l, alpha, rates);
    out.dI_star_star = find_dI_star_star(l, rates, alpha, partition, out.dI_star);
    if (l.is_symmetric()) {
        out.symmetric_lower_bound = symmetric_lower_bound(l, rates, partition);
    }
    return out;
}

} // namespace sispatch
