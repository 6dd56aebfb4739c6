#include "sispatch/numerics.hpp"

#include "sispatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace sispatch {

DenseMatrix::DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t n, std::vector<double> row_major) : n_(n), data_(std::move(row_major))
{
    if (data_.size() != n * n) {
        throw Error(ErrorCode::InvalidArgument, "row-major data does not have n*n entries");
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n)
{
    DenseMatrix m(n);
    m.add_diagonal(1.0);
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d)
{
    DenseMatrix m(d.size());
    m.add_diagonal(d);
    return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows)
{
    const std::size_t n = rows.size();
    DenseMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
            throw Error(ErrorCode::InvalidArgument, "matrix is not square");
        }
        for (std::size_t j = 0; j < n; ++j) {
            m(i, j) = rows[i][j];
        }
    }
    return m;
}

Vector DenseMatrix::apply(std::span<const double> x) const
{
    Vector out(n_);
    apply(x, out);
    return out;
}

void DenseMatrix::apply(std::span<const double> x, std::span<double> out) const
{
    for (std::size_t i = 0; i < n_; ++i) {
        const double* r = data_.data() + i * n_;
        double acc = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            acc += r[j] * x[j];
        }
        out[i] = acc;
    }
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other)
{
    if (other.n_ != n_) {
        throw Error(ErrorCode::InvalidArgument, "dimension mismatch in matrix sum");
    }
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += other.data_[k];
    }
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s)
{
    for (double& v : data_) {
        v *= s;
    }
    return *this;
}

void DenseMatrix::add_diagonal(std::span<const double> d)
{
    if (d.size() != n_) {
        throw Error(ErrorCode::InvalidArgument, "diagonal length mismatch");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        (*this)(i, i) += d[i];
    }
}

void DenseMatrix::add_diagonal(double c)
{
    for (std::size_t i = 0; i < n_; ++i) {
        (*this)(i, i) += c;
    }
}

double DenseMatrix::max_norm() const noexcept
{
    double m = 0.0;
    for (double v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

bool DenseMatrix::all_finite() const noexcept
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool DenseMatrix::is_quasi_positive() const noexcept
{
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            if (i != j && (*this)(i, j) < 0.0) {
                return false;
            }
        }
    }
    return true;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b)
{
    a += b;
    return a;
}

DenseMatrix operator*(double s, DenseMatrix a)
{
    a *= s;
    return a;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b)
{
    const std::size_t n = a.size();
    DenseMatrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < n; ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

double max_norm(std::span<const double> x) noexcept
{
    double m = 0.0;
    for (double v : x) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

namespace {

// Breadth-first reachability from vertex 0; `forward` follows j -> i edges
// for a nonzero entry a(i, j), the reverse pass follows i -> j.
std::vector<bool> reachable_from_first(const DenseMatrix& a, bool forward)
{
    const std::size_t n = a.size();
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> frontier;
    seen[0] = true;
    frontier.push(0);
    while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop();
        for (std::size_t v = 0; v < n; ++v) {
            if (v == u || seen[v]) {
                continue;
            }
            const double entry = forward ? a(v, u) : a(u, v);
            if (entry != 0.0) {
                seen[v] = true;
                frontier.push(v);
            }
        }
    }
    return seen;
}

} // namespace

bool is_irreducible(const DenseMatrix& a, std::pair<std::size_t, std::size_t>* unreachable)
{
    const std::size_t n = a.size();
    if (n <= 1) {
        return true;
    }
    const auto fwd = reachable_from_first(a, true);
    for (std::size_t v = 0; v < n; ++v) {
        if (!fwd[v]) {
            if (unreachable) {
                *unreachable = {0, v};
            }
            return false;
        }
    }
    const auto rev = reachable_from_first(a, false);
    for (std::size_t v = 0; v < n; ++v) {
        if (!rev[v]) {
            if (unreachable) {
                *unreachable = {v, 0};
            }
            return false;
        }
    }
    return true;
}

namespace {

double eigen_residual(const DenseMatrix& a, std::span<const double> v, double lambda)
{
    const Vector av = a.apply(v);
    double r = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        r = std::max(r, std::abs(av[i] - lambda * v[i]));
    }
    return r;
}

// Newton step for F(v, lambda) = ((A - lambda I) v, sum(v) - 1).
bool newton_eigen_step(const DenseMatrix& a, Vector& v, double& lambda)
{
    const std::size_t n = a.size();
    DenseMatrix jac(n + 1);
    Vector rhs(n + 1);
    const Vector av = a.apply(v);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            jac(i, j) = a(i, j);
        }
        jac(i, i) -= lambda;
        jac(i, n) = -v[i];
        jac(n, i) = 1.0;
        rhs[i] = -(av[i] - lambda * v[i]);
        sum += v[i];
    }
    rhs[n] = 1.0 - sum;
    Vector delta;
    try {
        delta = linear_solve(jac, rhs);
    } catch (const Error&) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        v[i] += delta[i];
    }
    lambda += delta[n];
    return true;
}

} // namespace

SpectralResult spectral_bound(const DenseMatrix& a, const SpectralOptions& options)
{
    const std::size_t n = a.size();
    if (n == 0) {
        throw Error(ErrorCode::InvalidArgument, "empty matrix");
    }
    if (!a.all_finite()) {
        throw Error(ErrorCode::NonFinite, "matrix has non-finite entries");
    }
    if (!a.is_quasi_positive()) {
        throw Error(ErrorCode::NonQuasiPositive, "matrix has a negative off-diagonal entry");
    }
    std::pair<std::size_t, std::size_t> gap;
    if (!is_irreducible(a, &gap)) {
        std::ostringstream msg;
        msg << "no path from index " << gap.first << " to index " << gap.second;
        throw Error(ErrorCode::Reducible, msg.str());
    }

    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        shift = std::max(shift, std::abs(a(i, i)));
    }
    shift += 1.0;
    DenseMatrix b = a;
    b.add_diagonal(shift);

    Vector v(n, 1.0 / static_cast<double>(n));
    if (options.initial && options.initial->size() == n) {
        const Vector& init = *options.initial;
        const bool positive =
            std::all_of(init.begin(), init.end(), [](double x) { return x > 0.0 && std::isfinite(x); });
        if (positive) {
            const double s = std::accumulate(init.begin(), init.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = init[i] / s;
            }
        }
    }

    Vector w(n);
    double rho = 0.0;
    int iter = 0;
    bool converged = false;
    for (iter = 1; iter <= options.max_iterations; ++iter) {
        b.apply(v, w);
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ratio = w[i] / v[i];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            total += w[i];
        }
        // v sums to one, so total is the weighted mean of the ratios.
        rho = total;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = w[i] / total;
        }
        if (hi - lo <= options.tolerance * std::max(1.0, hi)) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw Error(ErrorCode::NoConvergence, "power iteration hit the iteration cap");
    }

    double lambda = rho - shift;
    double residual = eigen_residual(a, v, lambda);
    for (int k = 0; k < 3 && residual > 0.0; ++k) {
        Vector v_try = v;
        double l_try = lambda;
        if (!newton_eigen_step(a, v_try, l_try)) {
            break;
        }
        if (!std::all_of(v_try.begin(), v_try.end(), [](double x) { return x > 0.0; })) {
            break;
        }
        const double r_try = eigen_residual(a, v_try, l_try);
        if (!(r_try < residual)) {
            break;
        }
        v = std::move(v_try);
        lambda = l_try;
        residual = r_try;
    }
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) {
        x /= s;
    }

    SpectralResult result;
    result.value = lambda;
    result.eigenvector = std::move(v);
    result.iterations = iter;
    result.residual = eigen_residual(a, result.eigenvector, lambda);
    return result;
}

namespace {

// Row-pivoted LU factors, packed in place.
struct LuFactors {
    std::size_t n = 0;
    std::vector<double> lu;
    std::vector<std::size_t> perm;

    Vector solve(std::span<const double> b) const
    {
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = b[perm[i]];
            for (std::size_t j = 0; j < i; ++j) {
                acc -= lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for (std::size_t i = n; i-- > 0;) {
            double acc = x[i];
            for (std::size_t j = i + 1; j < n; ++j) {
                acc -= lu[i * n + j] * x[j];
            }
            x[i] = acc / lu[i * n + i];
        }
        return x;
    }
};

LuFactors factorize(const DenseMatrix& a)
{
    const std::size_t n = a.size();
    const double scale = a.max_norm();
    if (scale == 0.0) {
        throw Error(ErrorCode::Singular, "zero matrix");
    }
    const double pivot_floor = 1e-14 * scale;
    LuFactors f{n, a.data(), std::vector<std::size_t>(n)};
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    auto at = [&](std::size_t i, std::size_t j) -> double& { return f.lu[i * n + j]; };

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(at(r, col)) > std::abs(at(piv, col))) {
                piv = r;
            }
        }
        if (std::abs(at(piv, col)) < pivot_floor) {
            throw Error(ErrorCode::Singular, "pivot below 1e-14 * max-norm in column " + std::to_string(col));
        }
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(at(piv, j), at(col, j));
            }
            std::swap(f.perm[piv], f.perm[col]);
        }
        const double p = at(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = at(r, col) / p;
            at(r, col) = factor;
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t j = col + 1; j < n; ++j) {
                at(r, j) -= factor * at(col, j);
            }
        }
    }
    return f;
}

} // namespace

Vector linear_solve(const DenseMatrix& a, std::span<const double> b)
{
    const std::size_t n = a.size();
    if (b.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "right-hand side length mismatch");
    }
    const LuFactors lu = factorize(a);
    Vector x = lu.solve(b);

    // one step of iterative refinement
    const Vector ax = a.apply(x);
    Vector r(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = b[i] - ax[i];
    }
    const Vector dx = lu.solve(r);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += dx[i];
    }
    return x;
}

double bisect_monotone(const std::function<double(double)>& f, double lo, double hi, double tol,
                       Monotonicity direction)
{
    if (!(lo <= hi)) {
        throw Error(ErrorCode::BadBracket, "lower end exceeds upper end");
    }
    const double sign = direction == Monotonicity::Increasing ? 1.0 : -1.0;
    const double f_lo = sign * f(lo);
    const double f_hi = sign * f(hi);
    if (f_lo == 0.0) {
        return lo;
    }
    if (f_hi == 0.0) {
        return hi;
    }
    if (!(f_lo < 0.0 && f_hi > 0.0)) {
        std::ostringstream msg;
        msg << "no sign change consistent with the declared direction on [" << lo << ", " << hi << "]";
        throw Error(ErrorCode::BadBracket, msg.str());
    }
    while (hi - lo > tol) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double fm = sign * f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if (fm < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo + 0.5 * (hi - lo);
}

namespace {

struct Rk4Workspace {
    Vector k1, k2, k3, k4, tmp;
    explicit Rk4Workspace(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
};

void rk4_step(const VectorField& field, std::span<const double> y, double h, std::span<double> out,
              Rk4Workspace& ws)
{
    const std::size_t n = y.size();
    field(y, ws.k1);
    for (std::size_t i = 0; i < n; ++i) {
        ws.tmp[i] = y[i] + 0.5 * h * ws.k1[i];
    }
    field(ws.tmp, ws.k2);
    for (std::size_t i = 0; i < n; ++i) {
        ws.tmp[i] = y[i] + 0.5 * h * ws.k2[i];
    }
    field(ws.tmp, ws.k3);
    for (std::size_t i = 0; i < n; ++i) {
        ws.tmp[i] = y[i] + h * ws.k3[i];
    }
    field(ws.tmp, ws.k4);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = y[i] + h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
}

} // namespace

OdeResult integrate_ode(const VectorField& field, std::span<const double> y0, double t0, double t_end,
                        const OdeControls& controls)
{
    const std::size_t n = y0.size();
    OdeResult result;
    result.t = t0;
    result.y.assign(y0.begin(), y0.end());
    const double h_max = controls.max_step.value_or(controls.initial_step);
    double h = std::min(controls.initial_step, h_max);
    if (!(h > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "step must be positive");
    }

    Rk4Workspace ws(n);
    Vector full(n), half(n), twice(n);

    if (controls.stop_when && controls.stop_when(result.t, result.y)) {
        result.stopped_early = true;
        result.last_step = h;
        return result;
    }

    while (result.t < t_end) {
        if (controls.max_steps != 0 && result.steps >= controls.max_steps) {
            break;
        }
        const double remaining = t_end - result.t;
        const bool final_step = h >= remaining;
        const double step = final_step ? remaining : h;

        rk4_step(field, result.y, step, full, ws);
        rk4_step(field, result.y, 0.5 * step, half, ws);
        rk4_step(field, half, 0.5 * step, twice, ws);
        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(twice[i]) || !std::isfinite(full[i])) {
                finite = false;
                break;
            }
            err = std::max(err, std::abs(twice[i] - full[i]));
        }
        if (!finite || err > controls.local_tolerance) {
            h = 0.5 * step;
            if (h < controls.min_step) {
                if (!finite) {
                    throw Error(ErrorCode::NonFinite, "state left the finite range");
                }
                throw Error(ErrorCode::StepUnderflow, "step fell below the minimum step");
            }
            continue;
        }

        result.y.swap(twice);
        result.t = final_step ? t_end : result.t + step;
        ++result.steps;
        result.last_step = step;
        if (err < controls.local_tolerance / 64.0 && !final_step) {
            h = std::min(2.0 * step, h_max);
        }
        if (controls.stop_when && controls.stop_when(result.t, result.y)) {
            result.stopped_early = result.t < t_end;
            break;
        }
    }
    result.reached_end = result.t >= t_end;
    return result;
}

} // namespace sispatch
