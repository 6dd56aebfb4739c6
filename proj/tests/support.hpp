#pragma once

#include "sispatch/patch_graph.hpp"
#include "sispatch/reproduction.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing {

using sispatch::ConnectivityMatrix;
using sispatch::DenseMatrix;
using sispatch::PatchRates;
using sispatch::Vector;

// The four-patch star example; gamma_4 = 3 gives R0 -> 4/5, dI* = 8.476,
// dI** = 0.5486.
struct Star4 {
    ConnectivityMatrix L = sispatch::star_graph(std::vector<double>{1, 2, 3}, std::vector<double>{1, 1, 1});
    Vector alpha;
    PatchRates rates;
    double N = 100.0;

    explicit Star4(double gamma_4 = 3.0) : rates{{3, 4, 1, 1}, {1, 1, 2, gamma_4}}
    {
        alpha = sispatch::perron_vector(L).alpha;
    }
};

inline ConnectivityMatrix two_patch(double w = 1.0)
{
    return sispatch::build_connectivity(DenseMatrix::from_rows({{0, w}, {w, 0}}));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

private:
    std::mt19937_64 gen_;
};

// Random off-diagonal flows on n patches: a directed ring keeps the graph
// strongly connected, other edges appear with probability `density`.
inline ConnectivityMatrix random_graph(Rng& rng, std::size_t n, double density = 0.5)
{
    DenseMatrix raw(n);
    for (std::size_t j = 0; j < n; ++j) {
        raw((j + 1) % n, j) = rng.uniform(0.2, 3.0);
        for (std::size_t k = 0; k < n; ++k) {
            if (k != j && raw(j, k) == 0.0 && rng.coin(density)) {
                raw(j, k) = rng.uniform(0.0, 3.0);
            }
        }
    }
    return sispatch::build_connectivity(raw);
}

inline ConnectivityMatrix random_symmetric_graph(Rng& rng, std::size_t n, double density = 0.5)
{
    DenseMatrix raw(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = (j + 1) % n;
        raw(j, k) = raw(k, j) = rng.uniform(0.2, 3.0);
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            if (raw(j, k) == 0.0 && rng.coin(density)) {
                raw(j, k) = raw(k, j) = rng.uniform(0.0, 3.0);
            }
        }
    }
    return sispatch::build_connectivity(raw);
}

// Rates with a strict partition: at least one patch on each side, no ties.
inline PatchRates random_strict_rates(Rng& rng, std::size_t n)
{
    PatchRates r;
    r.beta.resize(n);
    r.gamma.resize(n);
    const std::size_t high = rng.index(n);
    std::size_t low = rng.index(n - 1);
    if (low >= high) {
        ++low;
    }
    for (std::size_t j = 0; j < n; ++j) {
        const bool is_high = j == high || (j != low && rng.coin());
        r.gamma[j] = rng.uniform(0.5, 3.0);
        r.beta[j] = is_high ? r.gamma[j] + rng.uniform(0.2, 3.0) : r.gamma[j] * rng.uniform(0.0, 0.9);
    }
    return r;
}

inline double max_abs_diff(const Vector& a, const Vector& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

} // namespace testing
