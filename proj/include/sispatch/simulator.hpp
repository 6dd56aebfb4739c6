#pragma once

#include "sispatch/numerics.hpp"
#include "sispatch/patch_graph.hpp"
#include "sispatch/reproduction.hpp"

#include <span>
#include <vector>

namespace sispatch {

struct SimulationState {
    double t = 0.0;
    Vector S;
    Vector I;

    double total() const noexcept;
};

/// Right-hand side of the patch SIS system for the stacked state (S, I) of
/// length 2n. The standard incidence beta S I / (S + I) is taken as 0 when
/// S + I <= 1e-300.
void sis_field(const ConnectivityMatrix& l, const EpidemicParameters& params, std::span<const double> state,
               std::span<double> out);

Vector sis_field(const ConnectivityMatrix& l, const EpidemicParameters& params, const SimulationState& state);

struct SimulationOptions {
    double t_end = 500.0;
    /// Sampling interval; samples land exactly on multiples of stride.
    double stride = 1.0;
    double initial_step = 1e-2;
    double local_tolerance = 1e-8;
    /// Field max-norm below which a sample counts as converged.
    double convergence_tolerance = 1e-8;
    bool stop_on_convergence = true;
};

struct Trajectory {
    std::vector<SimulationState> samples;
    SimulationState terminal;
    bool converged = false;
    double field_norm = 0.0;
};

/// Integrates the full 2n-dimensional system from `initial`.
///
/// Throws InvalidArgument for a negative or empty initial state and
/// NegativeState if any component drops below -1e-12 (no clipping).
Trajectory simulate(const ConnectivityMatrix& l, const EpidemicParameters& params, const SimulationState& initial,
                    const SimulationOptions& options = {});

} // namespace sispatch
