#pragma once

#include "netctrl/exact.hpp"
#include "netctrl/matrix.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace netctrl {

/// One eigenvalue cluster of a square matrix together with a basis of its left eigenspace.
struct LeftEigenPair {
    Complex value;
    std::vector<RowVector> vectors;  // canonical basis, each of unit norm
    int geom_mult = 0;
    int alg_mult = 0;
    // How clearly the left null space of (M - value I) separates from the rest.
    double margin = kInf;
};

/**
 * Left eigenstructure of m. Computed eigenvalues closer than
 * eig_cluster_rel * (1 + max|mu|) are merged; nearby groups are further merged
 * when their mean has a generalized eigenspace of the combined size, which
 * reunites the split eigenvalues of a defective block. Pairs are ordered by
 * (real, imag) of the value.
 */
std::vector<LeftEigenPair> eigen_left(const Matrix& m, const Tolerances& tol);

int geometric_multiplicity(const Matrix& m, Complex mu, const Tolerances& tol);

/// |t c - j t| <= residual_rel |t| |c|. Throws InvalidInput when t is singular.
bool verify_similarity(const Matrix& t, const Matrix& c, const Matrix& j, const Tolerances& tol);

/// True when |v m - mu v| <= residual_rel |m| |v|.
bool is_left_eigenvector(const RowVector& v, const Matrix& m, Complex mu, const Tolerances& tol);
double left_residual(const RowVector& v, const Matrix& m, Complex mu);

struct JordanBlock {
    int start = 0;
    int length = 0;
};

struct TransformPair {
    Matrix t;
    Matrix j;
    std::vector<Complex> lambdas;
    std::vector<JordanBlock> blocks;  // every diagonal position is covered, singletons included
    std::string source;               // user | identity | diagonalizable | exact_rational

    bool diagonal() const;
    /// Index of the block containing row i.
    const JordanBlock& block_of(int i) const;
};

struct NotComputable {
    std::string reason;
};

using TransformResult = std::variant<TransformPair, NotComputable>;

/// Fills lambdas and blocks from j.
TransformPair make_transform_pair(Matrix t, Matrix j, std::string source);

/// Blocks read off the superdiagonal of an upper-triangular j.
std::vector<JordanBlock> jordan_blocks_of(const Matrix& j);

/// True when c is exactly in Jordan form (zero below the diagonal, unit superdiagonal inside constant blocks).
bool is_exact_jordan_form(const Matrix& c);

/**
 * Similarity T c T^-1 = J with J in Jordan form. Tried in order: c already
 * in Jordan form; diagonalizable at tolerance (rows of T are left
 * eigenvectors); exact rational Jordan form when c is exactly rational (exact
 * may supply the rational entries when they are not dyadic). Anything else
 * is NotComputable.
 */
TransformResult jordan_structure(const Matrix& c, const Tolerances& tol,
                                 const std::optional<QMatrix>& exact = std::nullopt);

/**
 * Same search restricted to T whose entry (r, s) may be non-zero only when
 * allowed[r][s]. Used by the network analyzer for the identical-node pattern.
 */
TransformResult patterned_jordan_structure(const Matrix& c, const Tolerances& tol,
                                           const std::optional<QMatrix>& exact,
                                           const std::vector<std::vector<bool>>& allowed);

}  // namespace netctrl
