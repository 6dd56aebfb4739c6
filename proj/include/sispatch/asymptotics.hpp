#pragma once

#include "sispatch/equilibrium.hpp"
#include "sispatch/numerics.hpp"
#include "sispatch/patch_graph.hpp"
#include "sispatch/reproduction.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sispatch {

/// Solution on H- of the linear system
///   -dI sum_{k in H-} L_jk x_k + (gamma_j - beta_j) x_j = dI sum_{k in H+} L_jk alpha_k,
/// one entry per patch of partition.H_minus. Throws BoxViolation unless
/// 0 < x_j < alpha_j.
Vector alpha_star(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha, double dI,
                  const RiskPartition& partition);

/// alpha_star on H-, alpha on H+.
Vector limit_profile(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha, double dI,
                     const RiskPartition& partition);

/// h_j(dI) = dI (L I0)_j + (beta_j - gamma_j) alpha_j for j in H+, in the
/// order of partition.H_plus, with I0 = limit_profile(...).
Vector h_functions(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha, double dI,
                   const RiskPartition& partition);

struct HLimits {
    Vector at_zero;
    Vector at_infinity;
};

/// Closed-form limits of h as dI -> 0 and dI -> infinity; the latter is
/// -N~ M~^-1 ((gamma - beta) alpha)|H- + ((beta - gamma) alpha)|H+ with
/// M~ = -L on H- x H- and N~ = L on H+ x H-.
HLimits h_limits(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha,
                 const RiskPartition& partition);

/// Smallest root over H+ of the h_j that change sign. Returns nullopt if
/// none does, or if the smallest root exceeds dI_star.
std::optional<double> find_dI_star_star(const ConnectivityMatrix& l, const PatchRates& rates,
                                        std::span<const double> alpha, const RiskPartition& partition,
                                        double dI_star);

enum class ClassificationMethod { AnalyticII, Numeric };

std::string_view to_string(ClassificationMethod m) noexcept;

enum class ClassificationMode {
    /// analytic when every h_j > 0, otherwise numeric
    Auto,
    Numeric,
};

struct JClassification {
    std::vector<std::size_t> J_plus;
    std::vector<std::size_t> J_minus;
    ClassificationMethod method = ClassificationMethod::AnalyticII;
    /// in H+ order
    Vector h_values;
    /// Limit of I_check as dS -> 0: limit_profile for the analytic path,
    /// extrapolated from the dS schedule for the numeric one.
    Vector I_check_star;
    double dI = 0.0;
};

/// Splits the patches into J+ (I_check -> alpha as dS -> 0) and J-.
///
/// Numeric path: solve_auxiliary at dS = 1e-2, ..., 1e-6; j goes to J+ when
/// alpha_j - I_check_j < 1e-4 alpha_j at the smallest dS and the gap shrank by
/// at least half over the last decade.
///
/// Throws DegenerateH when some |h_j| <= 1e-10, SubThreshold.
JClassification classify_J(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha,
                           double dI, const RiskPartition& partition,
                           ClassificationMode mode = ClassificationMode::Auto);

/// S*_j = N (alpha_j - I*_j) / sum_{k in J-} (alpha_k - I*_k) on J-, 0 on J+.
/// Throws EmptyJMinus.
Vector limiting_S_profile(const JClassification& classification, std::span<const double> alpha, double N);

struct AsymptoticProfile {
    /// in H- order
    Vector alpha_star;
    Vector I_check_zero;
    /// in H+ order
    Vector h_values;
    std::vector<std::size_t> J_plus;
    std::vector<std::size_t> J_minus;
    ClassificationMethod method = ClassificationMethod::AnalyticII;
    Vector S_star;
    double dI_used = 0.0;
};

/// Everything above at one dI; requires a strict partition.
AsymptoticProfile asymptotic_profile(const ConnectivityMatrix& l, const EpidemicParameters& params,
                                     std::span<const double> alpha,
                                     ClassificationMode mode = ClassificationMode::Auto);

struct LimitState {
    Vector S;
    Vector I;
};

/// Limit of the endemic equilibrium as dI -> 0 with dI/dS -> d0 (d0 may be
/// +infinity). Throws ZeroGamma if some gamma_j = 0.
LimitState dI_to_zero_profiles(const PatchRates& rates, std::span<const double> alpha, double N, double d0);

/// [max_{k in H+} L-_k / (beta_k - gamma_k) + max_{k in H-} L+_k / (beta_k - gamma_k)]^-1
/// with L-_k, L+_k the row sums of L over H- and H+ (off the diagonal).
/// +infinity when the bracket is <= 0. Throws NotSymmetric.
double symmetric_lower_bound(const ConnectivityMatrix& l, const PatchRates& rates, const RiskPartition& partition);

struct ThresholdReport {
    double dI_star = 0.0;
    std::optional<double> dI_star_star;
    std::optional<double> symmetric_lower_bound;
};

ThresholdReport threshold_report(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha);

} // namespace sispatch
