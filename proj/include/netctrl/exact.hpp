#pragma once

// Exact rational linear algebra for the Jordan-form path. Everything here is
// slow and small-N by nature; the floating-point modules never depend on it
// for their own verdicts.

#include "netctrl/matrix.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <vector>

namespace netctrl {

using Rational = boost::multiprecision::cpp_rational;

class QMatrix {
  public:
    QMatrix() = default;
    QMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

    static QMatrix identity(int n);
    static QMatrix from_ints(const std::vector<std::vector<long long>>& rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Rational& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
    const Rational& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * cols_ + j)]; }

    bool operator==(const QMatrix& o) const = default;

    QMatrix operator*(const QMatrix& o) const;
    QMatrix operator-(const QMatrix& o) const;
    QMatrix shifted(const Rational& mu) const;  // this - mu I

    Matrix to_complex() const;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Rational> data_;
};

/// Exact value of a finite double (every finite double is a dyadic rational).
Rational rational_from_double(double x);

/// Parses "3", "-2", "0.125", "1e-3", "2.5E2", "-7/3". Throws InvalidInput on anything else.
Rational parse_rational(const std::string& text);

/// "p" or "p/q" in lowest terms.
std::string format_rational(const Rational& r);

/// Exact when every entry is real; nullopt when any entry has a non-zero imaginary part.
std::optional<QMatrix> exact_from_complex(const Matrix& m);

int exact_rank(const QMatrix& m);
Rational exact_determinant(const QMatrix& m);
/// Basis (as columns) of {x : m x = 0}.
std::vector<std::vector<Rational>> exact_null_space(const QMatrix& m);

struct ExactBlock {
    Rational eigenvalue;
    int size = 0;
};

/**
 * Jordan block structure of c over the rationals. approx_eigenvalues (any
 * multiplicity, any order) seed the rational candidates; each candidate is
 * confirmed exactly. Returns nullopt, with why filled in, when some
 * eigenvalue is not rational.
 */
std::optional<std::vector<ExactBlock>> exact_jordan_blocks(const QMatrix& c,
                                                          const std::vector<Complex>& approx_eigenvalues,
                                                          std::string& why);

/// Jordan matrix for the blocks laid out along the diagonal in the given order.
QMatrix jordan_matrix(const std::vector<ExactBlock>& blocks);

/**
 * An invertible X with X c = j X and X(r, s) = 0 wherever allowed[r][s] is
 * false, or nullopt. The solution space is computed exactly; invertible
 * members are sought among deterministic integer combinations of its basis.
 */
std::optional<QMatrix> solve_patterned_similarity(const QMatrix& c, const QMatrix& j,
                                                  const std::vector<std::vector<bool>>& allowed);

struct ExactTransform {
    QMatrix t;
    QMatrix j;
};

struct ExactSearchLimits {
    int max_dimension = 10;
    int max_orderings = 5040;
};

/**
 * Searches the distinct orderings of the Jordan blocks of c for a patterned
 * invertible T with T c T^-1 = J. Orderings are visited in lexicographic
 * order of (eigenvalue, -size).
 */
std::optional<ExactTransform> exact_patterned_transform(const QMatrix& c,
                                                        const std::vector<Complex>& approx_eigenvalues,
                                                        const std::vector<std::vector<bool>>& allowed,
                                                        std::string& why,
                                                        const ExactSearchLimits& limits = {});

}  // namespace netctrl
