/// @file linsolve.hpp
/// @brief Tridiagonal, cyclic-tridiagonal and general sparse direct solves.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace apfv {

enum class Gauge { none, zero_mean };

/// Solves the (optionally cyclic) tridiagonal system
///   lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1] = rhs[k].
/// For periodic systems lower[0] couples x[n-1] and upper[n-1] couples x[0];
/// otherwise those two entries are ignored.
///
/// With Gauge::zero_mean the operator must have constant vectors in its
/// kernel. The component of rhs along the constants is discarded and the
/// returned solution has zero mean.
std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs,
                                      bool periodic,
                                      Gauge gauge = Gauge::none);

/// Triplet-assembled square system. Duplicate entries are summed by finalize().
class SparseSystem {
public:
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    explicit SparseSystem(std::size_t dim = 0, bool symmetric = false);

    void add(std::size_t row, std::size_t col, double value);
    void finalize();

    std::size_t dimension() const noexcept { return dim_; }
    bool symmetric() const noexcept { return symmetric_; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::vector<double>& rhs() noexcept { return rhs_; }
    const std::vector<double>& rhs() const noexcept { return rhs_; }

    Eigen::SparseMatrix<double> to_sparse() const;
    Eigen::MatrixXd to_dense() const;

    /// y = A x
    std::vector<double> apply(std::span<const double> x) const;

private:
    std::size_t dim_;
    bool symmetric_;
    bool finalized_ = false;
    std::vector<Entry> entries_;
    std::vector<double> rhs_;
};

/// Dense systems below this dimension are factorized with partial-pivot LU.
inline constexpr std::size_t kDenseThreshold = 2000;

/// LU factorization of a SparseSystem, dense or sparse by dimension.
class Factorization {
public:
    explicit Factorization(const SparseSystem& sys);
    ~Factorization();
    Factorization(Factorization&&) noexcept;
    Factorization& operator=(Factorization&&) noexcept;

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    Eigen::VectorXd solve_transpose(const Eigen::VectorXd& b) const;
    std::size_t dimension() const noexcept { return dim_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t dim_;
};

/// Direct solve of sys with sys.rhs(). Throws SolverError on singularity.
std::vector<double> solve_sparse(const SparseSystem& sys);

/// Estimate of ||A||_2 ||A^{-1}||_2 from 64 power iterations on A^T A and
/// on its inverse.
double condition_estimate(const SparseSystem& sys);
double condition_estimate(const SparseSystem& sys, const Factorization& lu);

}  // namespace apfv
