#pragma once

#include "sispatch/numerics.hpp"

#include <span>

namespace sispatch {

/// Movement matrix L between patches.
///
/// Orientation: L(j, k) for j != k is the rate at which individuals move
/// from patch k into patch j. The diagonal holds minus the total out-flow of
/// each patch, so every column sums to zero. Many codes use the transposed
/// convention; input matrices here must follow this one.
class ConnectivityMatrix {
public:
    /// Builds L from raw off-diagonal movement rates. Any diagonal in `raw`
    /// is ignored and rebuilt from the column sums.
    ///
    /// Throws InvalidArgument (n < 2, non-finite), NegativeEntry, NotIrreducible.
    static ConnectivityMatrix from_off_diagonal(const DenseMatrix& raw);

    std::size_t size() const noexcept { return l_.size(); }
    const DenseMatrix& matrix() const noexcept { return l_; }
    double operator()(std::size_t j, std::size_t k) const { return l_(j, k); }

    bool is_symmetric(double tol = 1e-12) const noexcept;

private:
    explicit ConnectivityMatrix(DenseMatrix l) : l_(std::move(l)) {}
    DenseMatrix l_;
};

inline ConnectivityMatrix build_connectivity(const DenseMatrix& raw)
{
    return ConnectivityMatrix::from_off_diagonal(raw);
}

/// Positive right null vector of L, normalized to sum one.
struct PerronData {
    Vector alpha;
};

/// Perron vector of L, from the spectral-bound kernel (whose value must be
/// zero to 1e-10 relative to the shift) and polished by a bordered solve.
PerronData perron_vector(const ConnectivityMatrix& l, const SpectralOptions& options = {});

/// Star graph with hub patch 0 and spokes 1..n-1: the hub sends a[i] into
/// spoke i+1 and receives b[i] from it. Throws NonPositiveDegree.
ConnectivityMatrix star_graph(std::span<const double> a, std::span<const double> b);

/// Closed-form Perron vector of star_graph(a, b):
/// (1, r_1, ..., r_{n-1}) / (1 + sum r_i) with r_i = a_i / b_i.
Vector star_perron_vector(std::span<const double> a, std::span<const double> b);

} // namespace sispatch
