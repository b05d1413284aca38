#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace netctrl {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RowVector = Eigen::RowVectorXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Malformed or inconsistent caller input (shapes, domains, unusable transforms).
class InvalidInput : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A decomposition did not converge or produced non-finite output.
class NumericalFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * Relative thresholds shared by every numerical decision.
 *
 * rank_rel        singular values at or below rank_rel * sigma_max * max(rows, cols) count as zero
 * eig_cluster_rel eigenvalues closer than eig_cluster_rel * (1 + max|mu|) are one eigenvalue
 * residual_rel    bound for relative residuals such as |vM - mu v| / (|M| |v|)
 */
struct Tolerances {
    double rank_rel = 1e-12;
    double eig_cluster_rel = 1e-8;
    double residual_rel = 1e-9;

    bool valid() const;
    /// Throws InvalidInput naming the first offending field.
    void require_valid() const;
};

/// Builds a real matrix from nested rows; used heavily by tests and fixtures.
Matrix real_matrix(std::initializer_list<std::initializer_list<double>> rows);
RowVector real_row(std::initializer_list<double> entries);

void require_finite(const Matrix& m, std::string_view what);

// (a (x) b)[i*p + k, j*q + l] = a[i,j] * b[k,l]
Matrix kron(const Matrix& a, const Matrix& b);
RowVector kron(const RowVector& a, const RowVector& b);

Matrix block_diag(const std::vector<Matrix>& blocks);

/// Largest singular value.
double norm2(const Matrix& m);
double norm2(const RowVector& v);

struct RankInfo {
    int rank = 0;
    Eigen::VectorXd singular_values;
    double cutoff = 0.0;
    // Factor by which the boundary singular values clear the cutoff (>= 1 when
    // the decision is unambiguous; +inf when nothing sits near the boundary).
    double margin = kInf;
};

RankInfo rank_info(const Matrix& m, const Tolerances& tol);
int numerical_rank(const Matrix& m, const Tolerances& tol);

/// Stacks equal-length row vectors into a matrix.
Matrix stack_rows(const std::vector<RowVector>& vs);
bool linearly_independent(const std::vector<RowVector>& vs, const Tolerances& tol);

/// value/cutoff when value > cutoff, cutoff/value otherwise.
double clearance(double value, double cutoff);

/// Row-orthonormal basis (under v w^H) of the span of the given rows.
Matrix orthonormal_rows(const Matrix& rows);

/**
 * Canonical basis of a row space: reduced row echelon form (pivot 1), each
 * row then scaled to unit norm. Entries negligible against the row norm are
 * flushed to exact zero so that reports are stable.
 */
std::vector<RowVector> canonical_rows(const Matrix& rows);

/// Unit norm, first significant entry rotated onto the positive real axis.
RowVector canonical_vector(const RowVector& v);

}  // namespace netctrl
