#pragma once

#include "sispatch/numerics.hpp"
#include "sispatch/patch_graph.hpp"
#include "sispatch/reproduction.hpp"

#include <optional>
#include <span>

namespace sispatch {

struct AuxiliaryOptions {
    /// Relaxation start; defaults to 1e-3 * alpha. Must lie in the open box.
    std::optional<Vector> initial;
    /// Relaxation runs until the field max-norm drops below this.
    double relax_tolerance = 1e-6;
    /// Step budget for the relaxation; past it the Newton phase starts from
    /// the upper solution instead.
    std::size_t relax_max_steps = 20000;
    double newton_tolerance = 1e-12;
    int max_newton_steps = 50;
    /// Residual above which the solve is reported as failed.
    double accept_residual = 1e-10;
};

/// Which start the Newton phase used.
enum class NewtonStart { Relaxation, UpperSolution };

/// Positive solution of the auxiliary system for the scaled infected
/// profile, at a given dI and ratio d = dI / dS.
struct AuxiliarySolution {
    Vector I_check;
    /// alpha - I_check to full relative precision; I_check itself may round
    /// to alpha at large d. Optional for recover_equilibrium.
    Vector gap;
    double d = 0.0;
    double dI = 0.0;
    double residual = 0.0;
    bool converged = false;
    int newton_steps = 0;
    NewtonStart start = NewtonStart::Relaxation;
    /// False when the risk partition is not strict; the solve only needs
    /// s(dI L + diag(beta - gamma)) > 0.
    bool strict_partition = true;
};

/// dI (L x)_j + f_j(x_j), f_j(x) = x (beta_j - gamma_j - beta_j x / (d (alpha_j - x) + x)).
void auxiliary_field(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha, double dI,
                     double d, std::span<const double> x, std::span<double> out);

double auxiliary_residual(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha,
                          double dI, double d, std::span<const double> x);

/// Solves the auxiliary system on 0 < x < alpha.
///
/// Phase one relaxes the monotone flow x' = g(x) from the initial state with
/// the RK4 kernel. Phase two is Newton with Jacobian dI L + diag(f'_j),
/// damped by step halving. Every f_j is concave on [0, alpha_j], so alpha
/// is an upper solution and undamped Newton started there decreases
/// monotonically to the solution; that start is used when the relaxation
/// exhausts its budget (large d makes the flow stiff near alpha) or the
/// damped polish stalls.
///
/// Throws SubThreshold, NoConvergence, LeftBox.
AuxiliarySolution solve_auxiliary(const ConnectivityMatrix& l, const PatchRates& rates,
                                  std::span<const double> alpha, double dI, double d,
                                  const AuxiliaryOptions& options = {});

struct EndemicEquilibrium {
    Vector S;
    Vector I;
    double kappa = 0.0;
    /// max-norm of the steady-state system
    double residual = 0.0;
    double total = 0.0;
};

/// Max-norm of the steady-state equations at (S, I).
double steady_state_residual(const ConnectivityMatrix& l, const EpidemicParameters& params, std::span<const double> S,
                             std::span<const double> I);

/// S = kappa (alpha - I_check) / dS, I = kappa I_check / dI with
/// kappa = dI N / sum(dI S_check + I_check).
///
/// Throws InconsistentRatio if aux.d != dI/dS, ResidualTooLarge if the
/// recovered state misses conservation, the steady-state equations, or
/// dS S + dI I = kappa alpha (all at 1e-9, relative to N where it applies).
EndemicEquilibrium recover_equilibrium(const AuxiliarySolution& aux, const ConnectivityMatrix& l,
                                       const EpidemicParameters& params, std::span<const double> alpha);

/// solve_auxiliary followed by recover_equilibrium.
EndemicEquilibrium endemic_equilibrium(const ConnectivityMatrix& l, const EpidemicParameters& params,
                                       std::span<const double> alpha, const AuxiliaryOptions& options = {});

struct USystemSolution {
    Vector U_check;
    double d = 0.0;
    double dI = 0.0;
    double residual = 0.0;
    /// Box factor M with 0 <= U <= M alpha invariant.
    double box_factor = 0.0;
};

/// Positive solution of the rescaled system
/// dI (L U)_j + U_j (beta_j - gamma_j - beta_j U_j / (alpha_j + (1 - d) U_j)) = 0
/// for d in [0, 1). For d > 0 the result is checked against
/// solve_auxiliary via U = I_check / d.
///
/// Throws SubThreshold, NoConvergence.
USystemSolution solve_U_system(const ConnectivityMatrix& l, const PatchRates& rates, std::span<const double> alpha,
                               double dI, double d, const AuxiliaryOptions& options = {});

} // namespace sispatch
