#include "apfv/linsolve.hpp"

#include "apfv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace apfv {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Plain Thomas elimination on rows [0, n). lower[0] and upper[n-1] unused.
std::vector<double> thomas(std::span<const double> a, std::span<const double> b,
                           std::span<const double> c, std::span<const double> d) {
    const std::size_t n = b.size();
    std::vector<double> cp(n), dp(n), x(n);
    auto check = [&](double piv, std::size_t k) {
        const double scale = std::abs(b[k]) + (k > 0 ? std::abs(a[k]) : 0.0) +
                             (k + 1 < n ? std::abs(c[k]) : 0.0);
        if (!(std::abs(piv) > 64 * kEps * scale))
            throw SolverError("tridiagonal solve: zero pivot at row " + std::to_string(k),
                              static_cast<std::ptrdiff_t>(k));
    };
    check(b[0], 0);
    cp[0] = n > 1 ? c[0] / b[0] : 0.0;
    dp[0] = d[0] / b[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double piv = b[k] - a[k] * cp[k - 1];
        check(piv, k);
        cp[k] = k + 1 < n ? c[k] / piv : 0.0;
        dp[k] = (d[k] - a[k] * dp[k - 1]) / piv;
    }
    x[n - 1] = dp[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) x[k] = dp[k] - cp[k] * x[k + 1];
    return x;
}

bool constant_kernel(std::span<const double> a, std::span<const double> b,
                     std::span<const double> c, bool periodic) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double l = (periodic || k > 0) ? a[k] : 0.0;
        const double u = (periodic || k + 1 < n) ? c[k] : 0.0;
        const double scale = std::abs(l) + std::abs(b[k]) + std::abs(u);
        if (std::abs(l + b[k] + u) > 1e3 * kEps * scale) return false;
    }
    return true;
}

}  // namespace

std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs, bool periodic,
                                      Gauge gauge) {
    const std::size_t n = diag.size();
    if (n < 3 || lower.size() != n || upper.size() != n || rhs.size() != n)
        throw PreconditionError("solve_tridiagonal: need n >= 3 and matching sizes");

    const bool singular = constant_kernel(lower, diag, upper, periodic);

    if (gauge == Gauge::zero_mean) {
        if (!singular)
            throw PreconditionError("solve_tridiagonal: zero-mean gauge needs a constant kernel");
        // Discard the incompatible mean, pin x[0] = 0 and drop row 0. The
        // remaining rows form an ordinary tridiagonal system in x[1..n-1].
        const double mean = std::accumulate(rhs.begin(), rhs.end(), 0.0) / double(n);
        const std::size_t m = n - 1;
        std::vector<double> a(m), b(m), c(m), d(m);
        for (std::size_t r = 0; r < m; ++r) {
            const std::size_t k = r + 1;
            a[r] = r > 0 ? lower[k] : 0.0;
            b[r] = diag[k];
            c[r] = r + 1 < m ? upper[k] : 0.0;
            d[r] = rhs[k] - mean;
        }
        auto y = thomas(a, b, c, d);
        std::vector<double> x(n, 0.0);
        std::copy(y.begin(), y.end(), x.begin() + 1);
        const double xm = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
        for (auto& v : x) v -= xm;
        return x;
    }

    if (singular)
        throw SolverError("solve_tridiagonal: singular system (constant kernel) without gauge");

    if (!periodic) return thomas(lower, diag, upper, rhs);

    // Cyclic case by Sherman-Morrison: A = T + u v^T with
    // u = (gamma, 0, ..., 0, alpha), v = (1, 0, ..., 0, beta / gamma).
    const double alpha = upper[n - 1];
    const double beta = lower[0];
    const double gamma = -diag[0];
    std::vector<double> b(diag.begin(), diag.end());
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    auto y = thomas(lower, b, upper, rhs);
    auto z = thomas(lower, b, upper, u);
    const double denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    if (!(std::abs(denom) > 1e3 * kEps * (1.0 + std::abs(z[0]) + std::abs(beta * z[n - 1] / gamma))))
        throw SolverError("solve_tridiagonal: singular cyclic system");
    const double f = (y[0] + beta * y[n - 1] / gamma) / denom;
    for (std::size_t k = 0; k < n; ++k) y[k] -= f * z[k];
    return y;
}

// ---------------------------------------------------------------------------

SparseSystem::SparseSystem(std::size_t dim, bool symmetric)
    : dim_(dim), symmetric_(symmetric), rhs_(dim, 0.0) {}

void SparseSystem::add(std::size_t row, std::size_t col, double value) {
    if (row >= dim_ || col >= dim_)
        throw PreconditionError("SparseSystem::add: index out of range");
    entries_.push_back({row, col, value});
    finalized_ = false;
}

void SparseSystem::finalize() {
    if (finalized_) return;
    std::sort(entries_.begin(), entries_.end(), [](const Entry& x, const Entry& y) {
        return x.row != y.row ? x.row < y.row : x.col < y.col;
    });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col)
            merged.back().value += e.value;
        else
            merged.push_back(e);
    }
    entries_ = std::move(merged);
    finalized_ = true;
}

Eigen::SparseMatrix<double> SparseSystem::to_sparse() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(entries_.size());
    for (const auto& e : entries_)
        t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    return A;
}

Eigen::MatrixXd SparseSystem::to_dense() const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_),
                                              static_cast<Eigen::Index>(dim_));
    for (const auto& e : entries_) A(e.row, e.col) += e.value;
    return A;
}

std::vector<double> SparseSystem::apply(std::span<const double> x) const {
    std::vector<double> y(dim_, 0.0);
    for (const auto& e : entries_) y[e.row] += e.value * x[e.col];
    return y;
}

// ---------------------------------------------------------------------------

struct Factorization::Impl {
    bool dense = true;
    Eigen::PartialPivLU<Eigen::MatrixXd> dlu;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> slu;
};

Factorization::Factorization(const SparseSystem& sys)
    : impl_(std::make_unique<Impl>()), dim_(sys.dimension()) {
    if (dim_ == 0) throw PreconditionError("Factorization: empty system");
    if (dim_ < kDenseThreshold) {
        impl_->dense = true;
        impl_->dlu.compute(sys.to_dense());
        const auto& lu = impl_->dlu.matrixLU();
        const double umax = lu.diagonal().cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < lu.rows(); ++i) {
            if (!(std::abs(lu(i, i)) > double(dim_) * kEps * umax))
                throw SolverError("dense LU: singular matrix, zero pivot at index " +
                                      std::to_string(i),
                                  i);
        }
    } else {
        impl_->dense = false;
        auto A = sys.to_sparse();
        impl_->slu.analyzePattern(A);
        impl_->slu.factorize(A);
        if (impl_->slu.info() != Eigen::Success)
            throw SolverError("sparse LU: " + impl_->slu.lastErrorMessage());
    }
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& b) const {
    if (impl_->dense) return impl_->dlu.solve(b);
    return impl_->slu.solve(b);
}

Eigen::VectorXd Factorization::solve_transpose(const Eigen::VectorXd& b) const {
    if (impl_->dense) return impl_->dlu.transpose().solve(b);
    return impl_->slu.transpose().solve(b);
}

std::vector<double> solve_sparse(const SparseSystem& sys) {
    Factorization lu(sys);
    Eigen::Map<const Eigen::VectorXd> b(sys.rhs().data(), static_cast<Eigen::Index>(sys.dimension()));
    Eigen::VectorXd x = lu.solve(b);
    return {x.data(), x.data() + x.size()};
}

double condition_estimate(const SparseSystem& sys) {
    Factorization lu(sys);
    return condition_estimate(sys, lu);
}

double condition_estimate(const SparseSystem& sys, const Factorization& lu) {
    const auto n = static_cast<Eigen::Index>(sys.dimension());
    const auto A = sys.to_sparse();
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(0.5, 1.5);
    Eigen::VectorXd start(n);
    for (Eigen::Index i = 0; i < n; ++i) start(i) = U(rng);

    constexpr int kIters = 64;
    // Largest singular value: power iteration on A^T A.
    Eigen::VectorXd v = start.normalized();
    double smax2 = 0.0;
    for (int it = 0; it < kIters; ++it) {
        Eigen::VectorXd w = A.transpose() * (A * v);
        smax2 = v.dot(w);
        const double nw = w.norm();
        if (nw == 0.0) break;
        v = w / nw;
    }
    // Smallest singular value: power iteration on (A^T A)^{-1} = A^{-1} A^{-T}.
    v = start.normalized();
    double inv2 = 0.0;
    for (int it = 0; it < kIters; ++it) {
        Eigen::VectorXd w = lu.solve(lu.solve_transpose(v));
        inv2 = v.dot(w);
        const double nw = w.norm();
        if (nw == 0.0) break;
        v = w / nw;
    }
    return std::sqrt(smax2) * std::sqrt(inv2);
}

}  // namespace apfv
