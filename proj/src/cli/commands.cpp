#include "sispatch/cli/commands.hpp"

#include "sispatch/asymptotics.hpp"
#include "sispatch/cli/parallel.hpp"
#include "sispatch/equilibrium.hpp"
#include "sispatch/error.hpp"
#include "sispatch/simulator.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace sispatch::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string patch_list(const std::vector<std::size_t>& set)
{
    if (set.empty()) {
        return "{}";
    }
    std::string s = "{";
    for (std::size_t i = 0; i < set.size(); ++i) {
        s += (i ? "," : "") + std::to_string(set[i] + 1);
    }
    return s + "}";
}

std::string vector_text(std::span<const double> v)
{
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? ", " : "") + format_number(v[i]);
    }
    return s + ")";
}

// One parameter set per sweep point; just the config point without a sweep.
struct SweepPoints {
    SweepParameter parameter = SweepParameter::dI;
    std::vector<EpidemicParameters> points;
};

SweepPoints sweep_points(const Scenario& sc, const CommandOptions& opt)
{
    SweepPoints out;
    std::optional<Grid> grid = opt.grid;
    if (sc.sweep) {
        out.parameter = sc.sweep->parameter;
        if (!grid) {
            grid = sc.sweep->grid;
        }
    }
    if (!grid) {
        out.points.push_back(sc.params);
        return out;
    }
    for (double v : grid->values()) {
        EpidemicParameters p = sc.params;
        (out.parameter == SweepParameter::dI ? p.dI : p.dS) = v;
        p.validate(sc.L.size());
        out.points.push_back(std::move(p));
    }
    return out;
}

Vector excess(const PatchRates& rates)
{
    Vector f(rates.size());
    for (std::size_t j = 0; j < f.size(); ++j) {
        f[j] = rates.beta[j] - rates.gamma[j];
    }
    return f;
}

std::vector<Column> patch_columns(const std::string& prefix, std::size_t n, bool nullable = false)
{
    std::vector<Column> cols;
    for (std::size_t j = 0; j < n; ++j) {
        cols.push_back({prefix + std::to_string(j + 1), nullable});
    }
    return cols;
}

void append(std::vector<Column>& a, std::vector<Column> b)
{
    a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
}

void write_table(const ResultTable& t, const std::filesystem::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    }
    t.write_csv(f);
}

} // namespace

void stamp(ResultTable& table, const std::string& subcommand, const std::string& config_hash)
{
    table.add_provenance(std::string("sispatch ") + kToolVersion);
    table.add_provenance("subcommand: " + subcommand);
    table.add_provenance("config: fnv1a-64 " + config_hash);
}

int cmd_validate(const Scenario& sc, std::ostream& out, std::ostream& log)
{
    const std::size_t n = sc.L.size();
    const RiskPartition part = risk_partition(sc.params.rates);
    const bool a3 = part.strict();
    out << "patches: " << n << '\n';
    out << "alpha: " << vector_text(sc.alpha) << '\n';
    out << "H+: " << patch_list(part.H_plus) << '\n';
    out << "H-: " << patch_list(part.H_minus) << '\n';
    out << "ties: " << patch_list(part.ties) << '\n';
    out << "symmetric: " << (sc.L.is_symmetric() ? "yes" : "no") << '\n';
    out << "A0 nonnegative rates, positive dS, dI, N: yes\n";
    out << "A1 L quasi-positive and irreducible: yes\n";
    out << "A2 nonnegative initial data: yes\n";
    out << "A3 H- and H+ nonempty, no ties: " << (a3 ? "yes" : "no") << '\n';
    if (!a3) {
        log << "warning: A3 fails; equilibrium and asymptotic commands need a strict risk partition\n";
    }
    return 0;
}

ResultTable cmd_r0(const Scenario& sc, const CommandOptions& opt)
{
    const SweepPoints sp = sweep_points(sc, opt);
    if ((opt.grid || sc.sweep) && sp.parameter != SweepParameter::dI) {
        throw Error(ErrorCode::ConfigError, "sweep.parameter: R0 does not depend on dS; sweep dI");
    }
    const PatchRates& rates = sc.params.rates;
    const Vector f = excess(rates);
    const auto rows = parallel_map(
        sp.points.size(),
        [&](std::size_t i) {
            const double dI = sp.points[i].dI;
            return std::vector<double>{dI, r0(sc.L, rates, dI), growth_bound(sc.L, f, dI)};
        },
        opt.threads);

    ResultTable t({{"dI"}, {"R0"}, {"s_F_minus_V"}});
    stamp(t, "r0", sc.config_hash);
    t.add_provenance("last two rows: limits dI -> 0 and dI -> inf");
    for (const auto& r : rows) {
        t.add_row(r);
    }
    const R0Limits lim = r0_limits(rates, sc.alpha);
    double f_max = -kInf;
    double f_mean = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        f_max = std::max(f_max, f[j]);
        f_mean += sc.alpha[j] * f[j];
    }
    t.add_row({0.0, lim.limit_zero, f_max});
    t.add_row({kInf, lim.limit_infinity, f_mean});
    return t;
}

ResultTable cmd_profile(const Scenario& sc, const CommandOptions& opt)
{
    const std::size_t n = sc.L.size();
    const RiskPartition part = risk_partition(sc.params.rates);
    part.require_strict();
    const SweepPoints sp = sweep_points(sc, opt);
    if ((opt.grid || sc.sweep) && sp.parameter != SweepParameter::dI) {
        throw Error(ErrorCode::ConfigError, "sweep.parameter: the profile is a function of dI");
    }
    const PatchRates& rates = sc.params.rates;
    const ThresholdReport thr = threshold_report(sc.L, rates, sc.alpha);

    std::vector<Column> cols{{"dI"}, {"status"}};
    for (std::size_t j : part.H_plus) {
        cols.push_back({"h_" + std::to_string(j + 1)});
    }
    cols.push_back({"dI_star"});
    cols.push_back({"dI_star_star", true});
    append(cols, patch_columns("Jplus_", n, true));
    cols.push_back({"numeric", true});
    append(cols, patch_columns("Sstar_", n, true));

    const auto rows = parallel_map(
        sp.points.size(),
        [&](std::size_t i) {
            const double dI = sp.points[i].dI;
            std::vector<double> row{dI, 0.0};
            for (double h : h_functions(sc.L, rates, sc.alpha, dI, part)) {
                row.push_back(h);
            }
            row.push_back(thr.dI_star);
            row.push_back(thr.dI_star_star ? *thr.dI_star_star : kNaN);
            std::vector<double> tail(2 * n + 1, kNaN);
            try {
                const JClassification cls = classify_J(sc.L, rates, sc.alpha, dI, part);
                const Vector s = limiting_S_profile(cls, sc.alpha, sc.params.N);
                for (std::size_t j = 0; j < n; ++j) {
                    tail[j] = 0.0;
                    tail[n + 1 + j] = s[j];
                }
                for (std::size_t j : cls.J_plus) {
                    tail[j] = 1.0;
                }
                tail[n] = cls.method == ClassificationMethod::Numeric ? 1.0 : 0.0;
            } catch (const Error& e) {
                if (e.code() == ErrorCode::DegenerateH) {
                    row[1] = 1.0;
                } else if (e.code() == ErrorCode::SubThreshold) {
                    row[1] = 2.0;
                } else {
                    throw;
                }
            }
            row.insert(row.end(), tail.begin(), tail.end());
            return row;
        },
        opt.threads);

    ResultTable t(std::move(cols));
    stamp(t, "profile", sc.config_hash);
    t.add_provenance("status: 0 ok, 1 h_j within 1e-10 of 0, 2 R0 <= 1");
    for (const auto& r : rows) {
        t.add_row(r);
    }
    return t;
}

ResultTable cmd_equilibrium(const Scenario& sc, const CommandOptions& opt, std::ostream& log)
{
    const std::size_t n = sc.L.size();
    const SweepPoints sp = sweep_points(sc, opt);
    std::vector<Column> cols{{"dS"}, {"dI"}};
    append(cols, patch_columns("S_", n));
    append(cols, patch_columns("I_", n));
    cols.push_back({"kappa"});
    cols.push_back({"residual"});
    cols.push_back({"total"});

    std::vector<std::vector<double>> rows;
    try {
        rows = parallel_map(
            sp.points.size(),
            [&](std::size_t i) {
                const EpidemicParameters& p = sp.points[i];
                const EndemicEquilibrium eq = endemic_equilibrium(sc.L, p, sc.alpha);
                std::vector<double> row{p.dS, p.dI};
                row.insert(row.end(), eq.S.begin(), eq.S.end());
                row.insert(row.end(), eq.I.begin(), eq.I.end());
                row.push_back(eq.kappa);
                row.push_back(eq.residual);
                row.push_back(eq.total);
                return row;
            },
            opt.threads);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SubThreshold) {
            for (const auto& p : sp.points) {
                const double r = r0(sc.L, p.rates, p.dI);
                if (r <= 1.0) {
                    log << "R0 = " << format_number(r) << " at dI = " << format_number(p.dI)
                        << ": no endemic equilibrium\n";
                    break;
                }
            }
        }
        throw;
    }
    ResultTable t(std::move(cols));
    stamp(t, "equilibrium", sc.config_hash);
    for (auto& r : rows) {
        t.add_row(std::move(r));
    }
    return t;
}

ResultTable cmd_simulate(const Scenario& sc, const CommandOptions& opt, std::ostream& log)
{
    const std::size_t n = sc.L.size();
    const double N = sc.params.N;
    SimulationState init;
    init.S.resize(n);
    init.I.resize(n);
    if (opt.initial == "config") {
        if (!sc.initial) {
            throw Error(ErrorCode::ConfigError, "initial: --initial config needs an 'initial' block");
        }
        init = *sc.initial;
        init.t = 0.0;
    } else if (opt.initial == "dfe" || opt.initial == "dfe-perturbed") {
        const double eps = opt.initial == "dfe" ? 0.0 : 1e-3;
        for (std::size_t j = 0; j < n; ++j) {
            init.I[j] = eps * N * sc.alpha[j];
            init.S[j] = N * sc.alpha[j] - init.I[j];
        }
    } else if (opt.initial == "uniform") {
        for (std::size_t j = 0; j < n; ++j) {
            init.S[j] = 0.9 * N / static_cast<double>(n);
            init.I[j] = 0.1 * N / static_cast<double>(n);
        }
    } else {
        throw Error(ErrorCode::ConfigError, "--initial: expected dfe, dfe-perturbed, uniform or config");
    }

    SimulationOptions so;
    so.t_end = opt.t_end;
    so.stride = opt.stride;
    so.stop_on_convergence = false;
    if (opt.tol) {
        so.convergence_tolerance = *opt.tol;
    }
    const Trajectory tr = simulate(sc.L, sc.params, init, so);

    std::vector<Column> cols{{"t"}};
    append(cols, patch_columns("S_", n));
    append(cols, patch_columns("I_", n));
    cols.push_back({"total"});
    ResultTable t(std::move(cols));
    stamp(t, "simulate", sc.config_hash);
    t.add_provenance("initial: " + opt.initial);
    for (const auto& s : tr.samples) {
        std::vector<double> row{s.t};
        row.insert(row.end(), s.S.begin(), s.S.end());
        row.insert(row.end(), s.I.begin(), s.I.end());
        row.push_back(s.total());
        t.add_row(std::move(row));
    }
    log << "t_end = " << format_number(tr.terminal.t) << ", field norm " << format_number(tr.field_norm)
        << (tr.converged ? ", converged" : ", not converged") << '\n';
    return t;
}

int cmd_star_example(std::ostream& out, const std::optional<std::string>& bundle_dir, double gamma_4,
                     unsigned threads)
{
    const Scenario sc = star_example_scenario(gamma_4);
    const PatchRates& rates = sc.params.rates;
    const RiskPartition part = risk_partition(rates);

    out << "star graph, n = 4, a = (1, 2, 3), b = (1, 1, 1)\n";
    out << "beta = " << vector_text(rates.beta) << ", gamma = " << vector_text(rates.gamma) << ", N = 100\n";
    out << "alpha = " << vector_text(sc.alpha) << '\n';
    out << "H+ = " << patch_list(part.H_plus) << ", H- = " << patch_list(part.H_minus) << '\n';

    const R0Limits lim = r0_limits(rates, sc.alpha);
    out << "R0 -> " << format_number(lim.limit_zero) << " as dI -> 0, " << format_number(lim.limit_infinity)
        << " as dI -> inf\n";
    const ThresholdReport thr = threshold_report(sc.L, rates, sc.alpha);
    out << "dI* = " << format_number(thr.dI_star) << '\n';
    out << "dI** = " << (thr.dI_star_star ? format_number(*thr.dI_star_star) : std::string("none")) << '\n';
    const HLimits hl = h_limits(sc.L, rates, sc.alpha, part);
    for (std::size_t r = 0; r < part.H_plus.size(); ++r) {
        out << "h_" << part.H_plus[r] + 1 << ": " << format_number(hl.at_zero[r]) << " as dI -> 0, "
            << format_number(hl.at_infinity[r]) << " as dI -> inf\n";
    }
    for (double dI : {0.1, 2.0}) {
        const JClassification cls = classify_J(sc.L, rates, sc.alpha, dI, part, ClassificationMode::Numeric);
        const Vector s = limiting_S_profile(cls, sc.alpha, sc.params.N);
        out << "dI = " << format_number(dI) << ": J+ = " << patch_list(cls.J_plus)
            << ", J- = " << patch_list(cls.J_minus) << ", S* = " << vector_text(s) << '\n';
    }
    const EndemicEquilibrium eq = endemic_equilibrium(sc.L, sc.params, sc.alpha);
    out << "equilibrium at dS = dI = 1: S = " << vector_text(eq.S) << ", I = " << vector_text(eq.I)
        << ", residual " << format_number(eq.residual) << '\n';
    for (double d0 : {0.0, 1.0, kInf}) {
        const LimitState ls = dI_to_zero_profiles(rates, sc.alpha, sc.params.N, d0);
        out << "dI -> 0 with dI/dS -> " << format_number(d0) << ": S = " << vector_text(ls.S)
            << ", I = " << vector_text(ls.I) << '\n';
    }

    if (bundle_dir) {
        const std::filesystem::path dir(*bundle_dir);
        std::filesystem::create_directories(dir);
        CommandOptions o;
        o.threads = threads;
        o.grid = Grid{1e-3, 1e3, 50, GridKind::Geometric};
        write_table(cmd_r0(sc, o), dir / "r0.csv");
        o.grid = Grid{1e-2, 8.0, 80, GridKind::Linear};
        write_table(cmd_profile(sc, o), dir / "profile.csv");
        o.grid.reset();
        write_table(cmd_equilibrium(sc, o, out), dir / "equilibrium.csv");
        out << "wrote r0.csv, profile.csv, equilibrium.csv to " << dir.string() << '\n';
    }
    return 0;
}

} // namespace sispatch::cli
