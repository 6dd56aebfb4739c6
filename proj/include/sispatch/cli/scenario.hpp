#pragma once

#include "sispatch/patch_graph.hpp"
#include "sispatch/reproduction.hpp"
#include "sispatch/simulator.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sispatch::cli {

enum class GridKind { Geometric, Linear };

struct Grid {
    double from = 1.0;
    double to = 1.0;
    std::size_t points = 1;
    GridKind kind = GridKind::Geometric;

    Vector values() const;
};

/// "from:to:points:geometric|linear"
Grid parse_grid(std::string_view text);

enum class SweepParameter { dS, dI };

struct Sweep {
    SweepParameter parameter = SweepParameter::dI;
    Grid grid;
};

struct Scenario {
    ConnectivityMatrix L;
    Vector alpha;
    EpidemicParameters params;
    std::optional<Sweep> sweep;
    std::optional<SimulationState> initial;
    /// FNV-1a of the canonical document, hex
    std::string config_hash;
};

/// Parses a JSON scenario document:
///
///   {"connectivity": {"matrix": [[...], ...]} | {"star": {"a": [...], "b": [...]}},
///    "beta": [...], "gamma": [...], "dS": 1, "dI": 1, "N": 100,
///    "sweep": {"parameter": "dI", "grid": "geometric", "from": 1e-3, "to": 1e3, "points": 50},
///    "initial": {"S": [...], "I": [...]}}
///
/// Syntax errors report line and column; schema errors name the field.
/// Graph and parameter validation runs here too.
Scenario parse_scenario(std::string_view text);

Scenario load_scenario(const std::string& path);

/// The four-patch star example: a = (1, 2, 3), b = (1, 1, 1),
/// beta = (3, 4, 1, 1), gamma = (1, 1, 2, gamma_4), N = 100, dS = dI = 1.
Scenario star_example_scenario(double gamma_4 = 3.0);

std::uint64_t fnv1a(std::string_view bytes) noexcept;

} // namespace sispatch::cli
