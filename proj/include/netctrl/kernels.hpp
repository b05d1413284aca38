#pragma once

// Data-parallel inner loops. Each OpenMP kernel has a serial twin that is the
// reference implementation in tests and the baseline in the benchmark.

#include "netctrl/matrix.hpp"

namespace netctrl::kernels {

// Below this many output entries the thread start-up costs more than the loop.
inline constexpr Eigen::Index kParallelThreshold = 1 << 14;

inline Matrix kron_serial(const Matrix& a, const Matrix& b) {
    const Eigen::Index p = b.rows();
    const Eigen::Index q = b.cols();
    Matrix out(a.rows() * p, a.cols() * q);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            for (Eigen::Index k = 0; k < p; ++k) {
                for (Eigen::Index l = 0; l < q; ++l) {
                    out(i * p + k, j * q + l) = a(i, j) * b(k, l);
                }
            }
        }
    }
    return out;
}

inline Matrix kron_parallel(const Matrix& a, const Matrix& b) {
    const Eigen::Index p = b.rows();
    const Eigen::Index q = b.cols();
    const Eigen::Index ar = a.rows();
    const Eigen::Index ac = a.cols();
    Matrix out(ar * p, ac * q);
    const bool big = out.size() >= kParallelThreshold;
#pragma omp parallel for collapse(2) schedule(static) if (big)
    for (Eigen::Index i = 0; i < ar; ++i) {
        for (Eigen::Index j = 0; j < ac; ++j) {
            out.block(i * p, j * q, p, q) = a(i, j) * b;
        }
    }
    return out;
}

}  // namespace netctrl::kernels
