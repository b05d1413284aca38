#include "netctrl/system.hpp"

#include <cmath>
#include <sstream>

namespace netctrl {

Matrix NetworkedSystem::d() const {
    const auto n = static_cast<Eigen::Index>(control_selection.size());
    Matrix out = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i, i) = control_selection[static_cast<std::size_t>(i)];
    }
    return out;
}

namespace {

bool same_matrix(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool finite(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const Complex z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            return false;
        }
    }
    return true;
}

void check_shape(std::vector<Violation>& out, const std::string& path, const Matrix& m, int rows, int cols) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream os;
        os << "expected " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
        out.push_back({path, os.str()});
    } else if (!finite(m)) {
        out.push_back({path, "non-finite entry"});
    }
}

}  // namespace

bool operator==(const NetworkedSystem& a, const NetworkedSystem& b) {
    if (!(a.dims == b.dims) || a.node_matrices.size() != b.node_matrices.size() ||
        a.control_selection != b.control_selection || a.exact != b.exact) {
        return false;
    }
    for (std::size_t i = 0; i < a.node_matrices.size(); ++i) {
        if (!same_matrix(a.node_matrices[i], b.node_matrices[i])) {
            return false;
        }
    }
    return same_matrix(a.b, b.b) && same_matrix(a.h, b.h) && same_matrix(a.c, b.c);
}

std::vector<Violation> validate(const NetworkedSystem& sys) {
    std::vector<Violation> out;
    const auto [N, n, m] = sys.dims;
    if (N < 1) {
        out.push_back({"dims.N", "must be at least 1"});
    }
    if (n < 1) {
        out.push_back({"dims.n", "must be at least 1"});
    }
    if (m < 1) {
        out.push_back({"dims.m", "must be at least 1"});
    }
    if (!out.empty()) {
        return out;
    }
    if (sys.node_matrices.size() != static_cast<std::size_t>(N)) {
        std::ostringstream os;
        os << "expected " << N << " node matrices, got " << sys.node_matrices.size();
        out.push_back({"node_matrices", os.str()});
    }
    for (std::size_t i = 0; i < sys.node_matrices.size(); ++i) {
        check_shape(out, "node_matrices[" + std::to_string(i) + "]", sys.node_matrices[i], n, n);
    }
    check_shape(out, "B", sys.b, n, m);
    check_shape(out, "H", sys.h, n, n);
    check_shape(out, "C", sys.c, N, N);
    if (sys.control_selection.size() != static_cast<std::size_t>(N)) {
        std::ostringstream os;
        os << "expected " << N << " entries, got " << sys.control_selection.size();
        out.push_back({"control_selection", os.str()});
    }
    for (std::size_t i = 0; i < sys.control_selection.size(); ++i) {
        const double d = sys.control_selection[i];
        if (d != 0.0 && d != 1.0) {
            std::ostringstream os;
            os << "must be 0 or 1, got " << d;
            out.push_back({"control_selection[" + std::to_string(i) + "]", os.str()});
        }
    }
    if (sys.exact && out.empty()) {
        const auto& e = *sys.exact;
        bool ok = e.node_matrices.size() == sys.node_matrices.size() && e.b.rows() == n && e.b.cols() == m &&
                  e.h.rows() == n && e.h.cols() == n && e.c.rows() == N && e.c.cols() == N;
        for (std::size_t i = 0; ok && i < e.node_matrices.size(); ++i) {
            ok = e.node_matrices[i].rows() == n && e.node_matrices[i].cols() == n;
        }
        if (!ok) {
            out.push_back({"exact", "exact entries disagree with the floating-point shapes"});
        }
    }
    return out;
}

std::string describe(const std::vector<Violation>& violations) {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        os << (i ? "; " : "") << violations[i].path << ": " << violations[i].message;
    }
    return os.str();
}

void require_valid(const NetworkedSystem& sys) {
    const auto v = validate(sys);
    if (!v.empty()) {
        throw InvalidInput("invalid system: " + describe(v));
    }
}

AssembledPair assemble(const NetworkedSystem& sys) {
    require_valid(sys);
    AssembledPair p;
    p.f = sys.block_a() + kron(sys.c, sys.h);
    p.g = kron(sys.d(), sys.b);
    return p;
}

Partition node_partition(const NetworkedSystem& sys, [[maybe_unused]] const Tolerances& tol) {
    require_valid(sys);
    Partition classes;
    std::vector<bool> placed(sys.node_matrices.size(), false);
    for (std::size_t i = 0; i < sys.node_matrices.size(); ++i) {
        if (placed[i]) {
            continue;
        }
        classes.push_back({static_cast<int>(i)});
        for (std::size_t j = i + 1; j < sys.node_matrices.size(); ++j) {
            if (!placed[j] && same_matrix(sys.node_matrices[i], sys.node_matrices[j])) {
                placed[j] = true;
                classes.back().push_back(static_cast<int>(j));
            }
        }
    }
    return classes;
}

std::vector<std::vector<bool>> class_pattern(const Partition& p, int n_nodes) {
    std::vector<std::vector<bool>> allowed(static_cast<std::size_t>(n_nodes),
                                           std::vector<bool>(static_cast<std::size_t>(n_nodes), false));
    for (const auto& cls : p) {
        for (int r : cls) {
            for (int s : cls) {
                allowed[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)] = true;
            }
        }
    }
    return allowed;
}

bool is_homogeneous(const NetworkedSystem& sys) { return node_partition(sys, Tolerances{}).size() == 1; }

std::vector<int> source_nodes(const NetworkedSystem& sys) {
    std::vector<int> out;
    for (Eigen::Index j = 0; j < sys.c.rows(); ++j) {
        if ((sys.c.row(j).array() == Complex(0.0, 0.0)).all()) {
            out.push_back(static_cast<int>(j));
        }
    }
    return out;
}

std::vector<int> sink_nodes(const NetworkedSystem& sys) {
    std::vector<int> out;
    for (Eigen::Index j = 0; j < sys.c.cols(); ++j) {
        if ((sys.c.col(j).array() == Complex(0.0, 0.0)).all()) {
            out.push_back(static_cast<int>(j));
        }
    }
    return out;
}

}  // namespace netctrl
