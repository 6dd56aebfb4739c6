#include "sispatch/patch_graph.hpp"

#include "sispatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sispatch {

ConnectivityMatrix ConnectivityMatrix::from_off_diagonal(const DenseMatrix& raw)
{
    const std::size_t n = raw.size();
    if (n < 2) {
        throw Error(ErrorCode::InvalidArgument, "at least two patches are required");
    }
    DenseMatrix l(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            if (j == k) {
                continue;
            }
            const double v = raw(j, k);
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::InvalidArgument, "non-finite movement rate");
            }
            if (v < 0.0) {
                std::ostringstream msg;
                msg << "movement rate into patch " << j + 1 << " from patch " << k + 1 << " is " << v;
                throw Error(ErrorCode::NegativeEntry, msg.str());
            }
            l(j, k) = v;
        }
    }
    // Column sums: off-diagonals accumulated in index order, diagonal last,
    // so summing the column the same way gives exactly zero.
    for (std::size_t k = 0; k < n; ++k) {
        double out = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != k) {
                out += l(j, k);
            }
        }
        l(k, k) = -out;
    }

    std::pair<std::size_t, std::size_t> gap;
    if (!is_irreducible(l, &gap)) {
        std::ostringstream msg;
        msg << "patch " << gap.second + 1 << " is not reachable from patch " << gap.first + 1;
        throw Error(ErrorCode::NotIrreducible, msg.str());
    }
    return ConnectivityMatrix(std::move(l));
}

bool ConnectivityMatrix::is_symmetric(double tol) const noexcept
{
    const std::size_t n = size();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            if (std::abs(l_(j, k) - l_(k, j)) > tol) {
                return false;
            }
        }
    }
    return true;
}

PerronData perron_vector(const ConnectivityMatrix& l, const SpectralOptions& options)
{
    const SpectralResult spec = spectral_bound(l.matrix(), options);
    double shift = 1.0;
    for (std::size_t j = 0; j < l.size(); ++j) {
        shift = std::max(shift, 1.0 + std::abs(l(j, j)));
    }
    if (std::abs(spec.value) > 1e-10 * shift) {
        std::ostringstream msg;
        msg << "spectral bound of L came out as " << spec.value;
        throw Error(ErrorCode::NoConvergence, msg.str());
    }

    // Replace the last row of L alpha = 0 by sum(alpha) = 1; the rows of L
    // are dependent (columns sum to zero) so nothing is lost.
    const std::size_t n = l.size();
    DenseMatrix bordered = l.matrix();
    for (std::size_t k = 0; k < n; ++k) {
        bordered(n - 1, k) = 1.0;
    }
    Vector rhs(n, 0.0);
    rhs[n - 1] = 1.0;
    Vector alpha = spec.eigenvector;
    try {
        Vector polished = linear_solve(bordered, rhs);
        const bool positive = std::all_of(polished.begin(), polished.end(), [](double x) { return x > 0.0; });
        if (positive && max_norm(l.matrix().apply(polished)) <= max_norm(l.matrix().apply(alpha))) {
            alpha = std::move(polished);
        }
    } catch (const Error&) {
        // keep the power-iteration vector
    }
    const double s = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    for (double& a : alpha) {
        a /= s;
    }
    return PerronData{std::move(alpha)};
}

ConnectivityMatrix star_graph(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.empty()) {
        throw Error(ErrorCode::InvalidArgument, "star graph needs equal, nonempty spoke vectors");
    }
    const std::size_t n = a.size() + 1;
    DenseMatrix raw(n);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0.0) || !(b[i] > 0.0)) {
            std::ostringstream msg;
            msg << "spoke " << i + 1 << " has a=" << a[i] << ", b=" << b[i];
            throw Error(ErrorCode::NonPositiveDegree, msg.str());
        }
        raw(i + 1, 0) = a[i];
        raw(0, i + 1) = b[i];
    }
    return ConnectivityMatrix::from_off_diagonal(raw);
}

Vector star_perron_vector(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.empty()) {
        throw Error(ErrorCode::InvalidArgument, "star graph needs equal, nonempty spoke vectors");
    }
    Vector alpha(a.size() + 1);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0.0) || !(b[i] > 0.0)) {
            throw Error(ErrorCode::NonPositiveDegree, "star degrees must be positive");
        }
        alpha[i + 1] = a[i] / b[i];
        s += alpha[i + 1];
    }
    alpha[0] = 1.0 / (1.0 + s);
    for (std::size_t i = 1; i < alpha.size(); ++i) {
        alpha[i] /= 1.0 + s;
    }
    return alpha;
}

} // namespace sispatch
