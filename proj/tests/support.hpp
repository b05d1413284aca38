#pragma once

// Test-side oracles. Nothing here calls into the library's numerical code:
// ranks come from exact rational elimination and Kronecker products from the
// index formula, so the unit tests compare two independent computations.

#include "netctrl/io.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace testing {

using Q = boost::multiprecision::cpp_rational;
using QRows = std::vector<std::vector<Q>>;
using netctrl::Complex;
using netctrl::Matrix;

inline std::string fixture(const std::string& name) { return std::string(NETCTRL_FIXTURE_DIR) + "/" + name; }

inline netctrl::ParsedSystem load(const std::string& name) { return netctrl::parse_system_file(fixture(name)); }

// Integer-valued complex matrix to exact rows; throws if an entry is not an integer.
inline QRows to_q(const Matrix& m) {
    QRows out(static_cast<std::size_t>(m.rows()), std::vector<Q>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double x = m(i, j).real();
            if (m(i, j).imag() != 0.0 || x != std::round(x)) {
                throw std::runtime_error("to_q: non-integer entry");
            }
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = Q(static_cast<long long>(x));
        }
    }
    return out;
}

inline int exact_rank(QRows rows) {
    if (rows.empty()) {
        return 0;
    }
    const std::size_t cols = rows.front().size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
        std::size_t p = r;
        while (p < rows.size() && rows[p][c] == 0) {
            ++p;
        }
        if (p == rows.size()) {
            continue;
        }
        std::swap(rows[p], rows[r]);
        for (std::size_t i = r + 1; i < rows.size(); ++i) {
            if (rows[i][c] != 0) {
                const Q f = rows[i][c] / rows[r][c];
                for (std::size_t k = c; k < cols; ++k) {
                    rows[i][k] -= f * rows[r][k];
                }
            }
        }
        ++r;
    }
    return static_cast<int>(r);
}

inline QRows q_mul(const QRows& a, const QRows& b) {
    QRows out(a.size(), std::vector<Q>(b.front().size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (a[i][k] == 0) {
                continue;
            }
            for (std::size_t j = 0; j < b.front().size(); ++j) {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    return out;
}

// Exact rank of [G, FG, ..., F^(k-1) G] for integer F, G.
inline int exact_kalman_rank(const Matrix& f, const Matrix& g) {
    const QRows fq = to_q(f);
    QRows block = to_q(g);
    const std::size_t k = fq.size();
    QRows ctrb(k);
    for (std::size_t step = 0; step < k; ++step) {
        for (std::size_t i = 0; i < k; ++i) {
            ctrb[i].insert(ctrb[i].end(), block[i].begin(), block[i].end());
        }
        block = q_mul(fq, block);
    }
    return exact_rank(std::move(ctrb));
}

inline Matrix kron_reference(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            for (Eigen::Index k = 0; k < b.rows(); ++k) {
                for (Eigen::Index l = 0; l < b.cols(); ++l) {
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
                }
            }
        }
    }
    return out;
}

inline Matrix random_int_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, int bound) {
    std::uniform_int_distribution<int> d(-bound, bound);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            m(i, j) = static_cast<double>(d(rng));
        }
    }
    return m;
}

inline Matrix random_complex(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> d;
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            m(i, j) = Complex(d(rng), d(rng));
        }
    }
    return m;
}

// Random matrix with condition number below max_cond.
inline Matrix random_well_conditioned(std::mt19937_64& rng, Eigen::Index n, double max_cond) {
    for (;;) {
        Matrix s = random_complex(rng, n, n);
        const auto sv = Eigen::JacobiSVD<Matrix>(s).singularValues();
        if (sv(n - 1) > 0.0 && sv(0) / sv(n - 1) < max_cond) {
            return s;
        }
    }
}

inline double rel_residual(const Matrix& got, const Matrix& want) {
    const double scale = std::max(1.0, want.norm());
    return (got - want).norm() / scale;
}

inline netctrl::NetworkedSystem make_system(std::vector<Matrix> nodes, Matrix b, Matrix h, Matrix c,
                                            std::vector<double> d) {
    netctrl::NetworkedSystem sys;
    sys.dims = {static_cast<int>(nodes.size()), static_cast<int>(b.rows()), static_cast<int>(b.cols())};
    sys.node_matrices = std::move(nodes);
    sys.b = std::move(b);
    sys.h = std::move(h);
    sys.c = std::move(c);
    sys.control_selection = std::move(d);
    return sys;
}

}  // namespace testing
