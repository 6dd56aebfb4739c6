#include "sispatch/cli/scenario.hpp"

#include "sispatch/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sispatch::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what)
{
    throw Error(ErrorCode::ConfigError, field + ": " + what);
}

double number(const json& doc, const std::string& field)
{
    if (!doc.is_number()) {
        fail(field, "expected a number");
    }
    const double v = doc.get<double>();
    if (!std::isfinite(v)) {
        fail(field, "must be finite");
    }
    return v;
}

double positive(const json& parent, const char* key, const std::string& field, double fallback)
{
    if (!parent.contains(key)) {
        return fallback;
    }
    const double v = number(parent.at(key), field);
    if (!(v > 0.0)) {
        fail(field, "must be positive");
    }
    return v;
}

Vector vector_field(const json& doc, const std::string& field)
{
    if (!doc.is_array()) {
        fail(field, "expected an array of numbers");
    }
    Vector out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        out.push_back(number(doc[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
}

const json& required(const json& parent, const char* key, const std::string& field)
{
    if (!parent.is_object() || !parent.contains(key)) {
        fail(field, "missing");
    }
    return parent.at(key);
}

GridKind grid_kind(std::string_view name, const std::string& field)
{
    if (name == "geometric") {
        return GridKind::Geometric;
    }
    if (name == "linear") {
        return GridKind::Linear;
    }
    fail(field, "expected 'geometric' or 'linear'");
}

void check_grid(const Grid& g, const std::string& field)
{
    if (g.points < 1) {
        fail(field, "needs at least one point");
    }
    if (g.kind == GridKind::Geometric && !(g.from > 0.0 && g.to > 0.0)) {
        fail(field, "geometric grid needs positive endpoints");
    }
}

ConnectivityMatrix connectivity(const json& doc)
{
    if (!doc.is_object()) {
        fail("connectivity", "expected an object");
    }
    if (doc.contains("matrix")) {
        const json& rows = doc.at("matrix");
        if (!rows.is_array() || rows.empty()) {
            fail("connectivity.matrix", "expected a square array of rows");
        }
        const std::size_t n = rows.size();
        DenseMatrix raw(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::string field = "connectivity.matrix[" + std::to_string(i) + "]";
            const Vector row = vector_field(rows[i], field);
            if (row.size() != n) {
                fail(field, "has " + std::to_string(row.size()) + " entries, expected " + std::to_string(n));
            }
            for (std::size_t k = 0; k < n; ++k) {
                raw(i, k) = row[k];
            }
        }
        return build_connectivity(raw);
    }
    if (doc.contains("star")) {
        const json& star = doc.at("star");
        const Vector a = vector_field(required(star, "a", "connectivity.star.a"), "connectivity.star.a");
        const Vector b = vector_field(required(star, "b", "connectivity.star.b"), "connectivity.star.b");
        if (a.size() != b.size()) {
            fail("connectivity.star", "a and b differ in length");
        }
        return star_graph(a, b);
    }
    fail("connectivity", "expected 'matrix' or 'star'");
}

std::string hex(std::uint64_t v)
{
    std::ostringstream s;
    s << std::hex;
    s.width(16);
    s.fill('0');
    s << v;
    return s.str();
}

Scenario from_json(const json& doc)
{
    if (!doc.is_object()) {
        fail("<root>", "expected an object");
    }
    ConnectivityMatrix l = connectivity(required(doc, "connectivity", "connectivity"));
    const std::size_t n = l.size();

    EpidemicParameters params;
    params.rates.beta = vector_field(required(doc, "beta", "beta"), "beta");
    params.rates.gamma = vector_field(required(doc, "gamma", "gamma"), "gamma");
    for (const char* key : {"beta", "gamma"}) {
        const Vector& v = std::string_view(key) == "beta" ? params.rates.beta : params.rates.gamma;
        if (v.size() != n) {
            fail(key, "has " + std::to_string(v.size()) + " entries but the graph has " + std::to_string(n) +
                          " patches");
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (v[j] < 0.0) {
                fail(std::string(key) + "[" + std::to_string(j) + "]", "must be >= 0");
            }
        }
    }
    params.dS = positive(doc, "dS", "dS", 1.0);
    params.dI = positive(doc, "dI", "dI", 1.0);
    params.N = positive(doc, "N", "N", 1.0);
    params.validate(n);

    std::optional<Sweep> sweep;
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        Sweep out;
        const json& param = required(s, "parameter", "sweep.parameter");
        if (param == "dI") {
            out.parameter = SweepParameter::dI;
        } else if (param == "dS") {
            out.parameter = SweepParameter::dS;
        } else {
            fail("sweep.parameter", "expected 'dI' or 'dS'");
        }
        const json& kind = required(s, "grid", "sweep.grid");
        if (!kind.is_string()) {
            fail("sweep.grid", "expected a string");
        }
        out.grid.kind = grid_kind(kind.get<std::string>(), "sweep.grid");
        out.grid.from = number(required(s, "from", "sweep.from"), "sweep.from");
        out.grid.to = number(required(s, "to", "sweep.to"), "sweep.to");
        const json& pts = required(s, "points", "sweep.points");
        if (!pts.is_number_integer() || pts.get<long long>() < 1) {
            fail("sweep.points", "expected a positive integer");
        }
        out.grid.points = pts.get<std::size_t>();
        check_grid(out.grid, "sweep");
        sweep = out;
    }

    std::optional<SimulationState> initial;
    if (doc.contains("initial")) {
        const json& init = doc.at("initial");
        SimulationState st;
        st.S = vector_field(required(init, "S", "initial.S"), "initial.S");
        st.I = vector_field(required(init, "I", "initial.I"), "initial.I");
        if (st.S.size() != n || st.I.size() != n) {
            fail("initial", "S and I need " + std::to_string(n) + " entries");
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (st.S[j] < 0.0 || st.I[j] < 0.0) {
                fail("initial", "entries must be >= 0");
            }
        }
        initial = std::move(st);
    }

    Vector alpha = perron_vector(l).alpha;
    return Scenario{std::move(l), std::move(alpha), std::move(params), sweep, std::move(initial),
                    hex(fnv1a(doc.dump()))};
}

} // namespace

Vector Grid::values() const
{
    Vector out(points);
    if (points == 1) {
        out[0] = from;
        return out;
    }
    const double steps = static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / steps;
        out[i] = kind == GridKind::Geometric ? from * std::pow(to / from, t) : from + (to - from) * t;
    }
    out.back() = to;
    return out;
}

Grid parse_grid(std::string_view text)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t colon = text.find(':', start);
        parts.push_back(text.substr(start, colon - start));
        if (colon == std::string_view::npos) {
            break;
        }
        start = colon + 1;
    }
    if (parts.size() != 4) {
        fail("--grid", "expected from:to:points:geometric|linear");
    }
    auto parse_double = [](std::string_view s) {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
            fail("--grid", "bad number '" + std::string(s) + "'");
        }
        return v;
    };
    Grid g;
    g.from = parse_double(parts[0]);
    g.to = parse_double(parts[1]);
    std::size_t pts = 0;
    const auto res = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), pts);
    if (res.ec != std::errc() || res.ptr != parts[2].data() + parts[2].size()) {
        fail("--grid", "bad point count '" + std::string(parts[2]) + "'");
    }
    g.points = pts;
    g.kind = grid_kind(parts[3], "--grid");
    check_grid(g, "--grid");
    return g;
}

Scenario parse_scenario(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // byte offset -> line:column
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << "syntax error at line " << line << ", column " << col;
        throw Error(ErrorCode::ConfigError, msg.str());
    }
    return from_json(doc);
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::ConfigError, "cannot read " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

Scenario star_example_scenario(double gamma_4)
{
    json doc = {
        {"connectivity", {{"star", {{"a", {1.0, 2.0, 3.0}}, {"b", {1.0, 1.0, 1.0}}}}}},
        {"beta", {3.0, 4.0, 1.0, 1.0}},
        {"gamma", {1.0, 1.0, 2.0, gamma_4}},
        {"dS", 1.0},
        {"dI", 1.0},
        {"N", 100.0},
    };
    return from_json(doc);
}

std::uint64_t fnv1a(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace sispatch::cli
