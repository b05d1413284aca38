#include "netctrl/matrix.hpp"

#include "netctrl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace netctrl {

bool Tolerances::valid() const {
    auto ok = [](double x) { return std::isfinite(x) && x > 0.0 && x < 1.0; };
    return ok(rank_rel) && ok(eig_cluster_rel) && ok(residual_rel);
}

void Tolerances::require_valid() const {
    auto check = [](double x, const char* name) {
        if (!(std::isfinite(x) && x > 0.0 && x < 1.0)) {
            std::ostringstream os;
            os << "tolerance " << name << " must lie in (0, 1), got " << x;
            throw InvalidInput(os.str());
        }
    };
    check(rank_rel, "rank_rel");
    check(eig_cluster_rel, "eig_cluster_rel");
    check(residual_rel, "residual_rel");
}

Matrix real_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.begin()->size());
    Matrix m(r, c);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        if (static_cast<Eigen::Index>(row.size()) != c) {
            throw InvalidInput("real_matrix: ragged rows");
        }
        Eigen::Index j = 0;
        for (double x : row) {
            m(i, j++) = Complex(x, 0.0);
        }
        ++i;
    }
    return m;
}

RowVector real_row(std::initializer_list<double> entries) {
    RowVector v(static_cast<Eigen::Index>(entries.size()));
    Eigen::Index j = 0;
    for (double x : entries) {
        v(j++) = Complex(x, 0.0);
    }
    return v;
}

void require_finite(const Matrix& m, std::string_view what) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
                std::ostringstream os;
                os << what << ": non-finite entry at (" << i << ", " << j << ")";
                throw InvalidInput(os.str());
            }
        }
    }
}

Matrix kron(const Matrix& a, const Matrix& b) {
    return kernels::kron_parallel(a, b);
}

RowVector kron(const RowVector& a, const RowVector& b) {
    RowVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
    if (blocks.empty()) {
        throw InvalidInput("block_diag: empty block list");
    }
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix out = Matrix::Zero(rows, cols);
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

double norm2(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double norm2(const RowVector& v) { return v.norm(); }

RankInfo rank_info(const Matrix& m, const Tolerances& tol) {
    if (m.size() == 0) {
        throw InvalidInput("numerical_rank: empty matrix");
    }
    require_finite(m, "numerical_rank");
    Eigen::JacobiSVD<Matrix> svd(m);
    RankInfo info;
    info.singular_values = svd.singularValues();
    const auto& s = info.singular_values;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s(i))) {
            std::ostringstream os;
            os << "SVD failed on " << m.rows() << "x" << m.cols() << " matrix";
            throw NumericalFailure(os.str());
        }
    }
    if (s.size() == 0 || s(0) == 0.0) {
        return info;
    }
    info.cutoff = tol.rank_rel * s(0) * static_cast<double>(std::max(m.rows(), m.cols()));
    while (info.rank < s.size() && s(info.rank) > info.cutoff) {
        ++info.rank;
    }
    if (info.rank > 0) {
        info.margin = std::min(info.margin, clearance(s(info.rank - 1), info.cutoff));
    }
    if (info.rank < s.size()) {
        info.margin = std::min(info.margin, clearance(s(info.rank), info.cutoff));
    }
    return info;
}

int numerical_rank(const Matrix& m, const Tolerances& tol) { return rank_info(m, tol).rank; }

Matrix stack_rows(const std::vector<RowVector>& vs) {
    if (vs.empty()) {
        return Matrix(0, 0);
    }
    const auto len = vs.front().size();
    Matrix out(static_cast<Eigen::Index>(vs.size()), len);
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (vs[i].size() != len) {
            std::ostringstream os;
            os << "row vector " << i << " has length " << vs[i].size() << ", expected " << len;
            throw InvalidInput(os.str());
        }
        out.row(static_cast<Eigen::Index>(i)) = vs[i];
    }
    return out;
}

bool linearly_independent(const std::vector<RowVector>& vs, const Tolerances& tol) {
    if (vs.empty()) {
        return true;
    }
    const Matrix m = stack_rows(vs);
    return numerical_rank(m, tol) == static_cast<int>(vs.size());
}

double clearance(double value, double cutoff) {
    if (value > cutoff) {
        return cutoff > 0.0 ? value / cutoff : kInf;
    }
    return value > 0.0 ? cutoff / value : kInf;
}

Matrix orthonormal_rows(const Matrix& rows) {
    if (rows.rows() == 0) {
        return rows;
    }
    // Q from QR of rows^T spans the same column space; Q^T rows are orthonormal.
    Eigen::HouseholderQR<Matrix> qr(rows.transpose());
    Matrix q = qr.householderQ() * Matrix::Identity(rows.cols(), rows.rows());
    return q.transpose();
}

RowVector canonical_vector(const RowVector& v) {
    const double nrm = v.norm();
    if (nrm == 0.0) {
        return v;
    }
    RowVector out = v / nrm;
    const double flush = 1e-14;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        double re = std::abs(out(i).real()) < flush ? 0.0 : out(i).real();
        double im = std::abs(out(i).imag()) < flush ? 0.0 : out(i).imag();
        out(i) = Complex(re, im);
    }
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (std::abs(out(i)) > 1e-8) {
            const Complex phase = std::abs(out(i)) / out(i);
            out *= phase;
            out(i) = Complex(out(i).real(), 0.0);
            break;
        }
    }
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        double re = std::abs(out(i).real()) < flush ? 0.0 : out(i).real();
        double im = std::abs(out(i).imag()) < flush ? 0.0 : out(i).imag();
        out(i) = Complex(re, im);
    }
    return out;
}

std::vector<RowVector> canonical_rows(const Matrix& rows) {
    Matrix m = rows;
    const Eigen::Index k = m.rows();
    const Eigen::Index n = m.cols();
    const double scale = m.cwiseAbs().maxCoeff();
    std::vector<RowVector> out;
    if (k == 0 || scale == 0.0) {
        return out;
    }
    const double skip = 1e-10 * scale;
    Eigen::Index pivot_row = 0;
    for (Eigen::Index col = 0; col < n && pivot_row < k; ++col) {
        Eigen::Index best = pivot_row;
        for (Eigen::Index r = pivot_row + 1; r < k; ++r) {
            if (std::abs(m(r, col)) > std::abs(m(best, col))) {
                best = r;
            }
        }
        if (std::abs(m(best, col)) <= skip) {
            continue;
        }
        m.row(pivot_row).swap(m.row(best));
        m.row(pivot_row) /= m(pivot_row, col);
        for (Eigen::Index r = 0; r < k; ++r) {
            if (r != pivot_row) {
                m.row(r) -= m(r, col) * m.row(pivot_row);
            }
        }
        ++pivot_row;
    }
    for (Eigen::Index r = 0; r < pivot_row; ++r) {
        out.push_back(canonical_vector(m.row(r)));
    }
    return out;
}

}  // namespace netctrl
