#pragma once

// Small dense kernels shared by the domain modules: spectral bound of a
// quasi-positive matrix, Gaussian elimination, monotone bisection and an
// explicit RK4 integrator. Patch counts are small, so everything is dense.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sispatch {

using Vector = std::vector<double>;

/// Square matrix stored row-major.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n);
    DenseMatrix(std::size_t n, std::vector<double> row_major);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> d);
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t size() const noexcept { return n_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
    const std::vector<double>& data() const noexcept { return data_; }

    Vector apply(std::span<const double> x) const;
    void apply(std::span<const double> x, std::span<double> out) const;

    DenseMatrix& operator+=(const DenseMatrix& other);
    DenseMatrix& operator*=(double s);
    void add_diagonal(std::span<const double> d);
    void add_diagonal(double c);

    double max_norm() const noexcept;
    bool all_finite() const noexcept;
    bool is_quasi_positive() const noexcept;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);

/// Strong connectivity of the digraph with an edge whenever an off-diagonal
/// entry is nonzero. On failure, `unreachable` receives a (from, to) pair.
bool is_irreducible(const DenseMatrix& a, std::pair<std::size_t, std::size_t>* unreachable = nullptr);

double max_norm(std::span<const double> x) noexcept;

struct SpectralOptions {
    /// Collatz-Wielandt bracket width on the shifted matrix, relative to max(1, rho).
    double tolerance = 1e-12;
    int max_iterations = 100000;
    /// Optional positive warm start; uniform when absent.
    std::optional<Vector> initial;
};

struct SpectralResult {
    double value = 0.0;
    /// Strictly positive, sums to one.
    Vector eigenvector;
    int iterations = 0;
    /// max-norm of A v - value v
    double residual = 0.0;
};

/// Spectral bound s(A) of an irreducible quasi-positive matrix together with
/// its positive eigenvector.
///
/// Power iteration runs on B = A + cI with c = 1 + max_j |A_jj|, which is
/// nonnegative, irreducible and has a positive diagonal, hence primitive.
/// Iteration stops once the Collatz-Wielandt bounds min/max (Bv)_i / v_i
/// agree to the requested tolerance; the eigenpair is then refined by a
/// couple of Newton steps on (A - lambda I) v = 0, sum(v) = 1.
///
/// Throws NonQuasiPositive, Reducible, NonFinite or NoConvergence.
SpectralResult spectral_bound(const DenseMatrix& a, const SpectralOptions& options = {});

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Throws Singular when a pivot falls below 1e-14 * max|A_ij|.
Vector linear_solve(const DenseMatrix& a, std::span<const double> b);

enum class Monotonicity { Increasing, Decreasing };

/// Midpoint bisection for the root of a monotone function on [lo, hi].
/// The sign pattern at the ends must match `direction`; throws BadBracket
/// otherwise. Stops when the bracket is narrower than `tol`.
double bisect_monotone(const std::function<double(double)>& f, double lo, double hi, double tol,
                       Monotonicity direction);

using VectorField = std::function<void(std::span<const double> y, std::span<double> dydt)>;

struct OdeControls {
    double initial_step = 1e-2;
    /// Upper bound on the step after regrowth; defaults to initial_step.
    std::optional<double> max_step;
    /// Max-norm bound on the step-doubling error estimate.
    double local_tolerance = 1e-8;
    double min_step = 1e-12;
    /// 0 means unlimited.
    std::size_t max_steps = 0;
    /// Checked after every accepted step; returning true ends integration.
    std::function<bool(double t, std::span<const double> y)> stop_when;
};

struct OdeResult {
    double t = 0.0;
    Vector y;
    bool stopped_early = false;
    bool reached_end = false;
    std::size_t steps = 0;
    double last_step = 0.0;
};

/// Fixed-step RK4 that halves the step whenever the step-doubling error
/// estimate exceeds the local tolerance, and regrows it (up to max_step)
/// when the estimate is comfortably small.
///
/// Throws StepUnderflow or NonFinite.
OdeResult integrate_ode(const VectorField& field, std::span<const double> y0, double t0, double t_end,
                        const OdeControls& controls = {});

} // namespace sispatch
