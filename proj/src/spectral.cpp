#include "netctrl/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace netctrl {

namespace {

void require_square(const Matrix& m, const char* what) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        std::ostringstream os;
        os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw InvalidInput(os.str());
    }
}

bool value_less(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) {
        return a.real() < b.real();
    }
    return a.imag() < b.imag();
}

bool is_real_matrix(const Matrix& m) { return m.imag().cwiseAbs().maxCoeff() == 0.0; }

// Dimension of the null space of ((m - mu I)/s)^k at rank tolerance.
int generalized_nullity(const Matrix& m, Complex mu, int k, const Tolerances& tol) {
    const Eigen::Index n = m.rows();
    Matrix shift = m - mu * Matrix::Identity(n, n);
    const double s = std::max(1.0, norm2(shift));
    shift /= s;
    Matrix power = shift;
    for (int i = 1; i < k; ++i) {
        power = power * shift;
    }
    // power has norm <= 1, so the cutoff is absolute; relative to sv(0) it
    // would reject a nearly nilpotent power outright
    Eigen::JacobiSVD<Matrix> svd(power);
    const auto& sv = svd.singularValues();
    const double cutoff = tol.rank_rel * static_cast<double>(n) * k;
    int nullity = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) <= cutoff) {
            ++nullity;
        }
    }
    return nullity;
}

struct Cluster {
    std::vector<Complex> members;
    Complex mean() const {
        Complex sum = 0.0;
        for (const auto& x : members) {
            sum += x;
        }
        return sum / static_cast<double>(members.size());
    }
};

std::vector<Cluster> cluster_eigenvalues(const Matrix& m, const Eigen::VectorXcd& vals, const Tolerances& tol) {
    const auto n = vals.size();
    double max_mod = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        max_mod = std::max(max_mod, std::abs(vals(i)));
    }
    const double scale = 1.0 + max_mod;
    const double thr = tol.eig_cluster_rel * scale;

    // single linkage at the clustering threshold
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Eigen::Index x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        }
        return x;
    };
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            if (std::abs(vals(a) - vals(b)) <= thr) {
                parent[static_cast<std::size_t>(find(a))] = find(b);
            }
        }
    }
    std::vector<Cluster> clusters;
    std::vector<int> slot(static_cast<std::size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto root = static_cast<std::size_t>(find(i));
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(clusters.size());
            clusters.emplace_back();
        }
        clusters[static_cast<std::size_t>(slot[root])].members.push_back(vals(i));
    }

    // Perturbed defective blocks split by ~eps^(1/k) around a mean that stays
    // accurate; reunite the largest set of nearby clusters whose mean carries a
    // generalized eigenspace of the combined size.
    const double radius = std::max(thr, 1e-2 * scale);
    const std::size_t nc = clusters.size();
    std::vector<std::size_t> comp(nc);
    std::iota(comp.begin(), comp.end(), 0);
    std::function<std::size_t(std::size_t)> root = [&](std::size_t x) { return comp[x] == x ? x : comp[x] = root(comp[x]); };
    for (std::size_t a = 0; a < nc; ++a) {
        for (std::size_t b = a + 1; b < nc; ++b) {
            if (std::abs(clusters[a].mean() - clusters[b].mean()) <= radius) {
                comp[root(a)] = root(b);
            }
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t a = 0; a < nc; ++a) {
        components[root(a)].push_back(a);
    }
    std::vector<Cluster> out;
    for (auto& [r, members] : components) {
        std::vector<Cluster> pool;
        for (const auto idx : members) {
            pool.push_back(clusters[idx]);
        }
        while (pool.size() > 1 && pool.size() <= 12) {
            // subsets as bitmasks, most eigenvalues first
            std::vector<unsigned> masks;
            for (unsigned mask = 1; mask < (1u << pool.size()); ++mask) {
                if (std::popcount(mask) >= 2) {
                    masks.push_back(mask);
                }
            }
            auto weight = [&](unsigned mask) {
                std::size_t w = 0;
                for (std::size_t i = 0; i < pool.size(); ++i) {
                    if (mask & (1u << i)) {
                        w += pool[i].members.size();
                    }
                }
                return w;
            };
            std::stable_sort(masks.begin(), masks.end(), [&](unsigned a, unsigned b) { return weight(a) > weight(b); });
            bool merged_any = false;
            for (const unsigned mask : masks) {
                Cluster merged;
                for (std::size_t i = 0; i < pool.size(); ++i) {
                    if (mask & (1u << i)) {
                        merged.members.insert(merged.members.end(), pool[i].members.begin(), pool[i].members.end());
                    }
                }
                const int k = static_cast<int>(merged.members.size());
                if (generalized_nullity(m, merged.mean(), k, tol) >= k) {
                    std::vector<Cluster> rest;
                    for (std::size_t i = 0; i < pool.size(); ++i) {
                        if (!(mask & (1u << i))) {
                            rest.push_back(std::move(pool[i]));
                        }
                    }
                    out.push_back(std::move(merged));
                    pool = std::move(rest);
                    merged_any = true;
                    break;
                }
            }
            if (!merged_any) {
                break;
            }
        }
        for (auto& c : pool) {
            out.push_back(std::move(c));
        }
    }
    clusters = std::move(out);
    return clusters;
}

}  // namespace

std::vector<LeftEigenPair> eigen_left(const Matrix& m, const Tolerances& tol) {
    require_square(m, "eigen_left");
    require_finite(m, "eigen_left");
    const Eigen::Index n = m.rows();
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    if (es.info() != Eigen::Success) {
        std::ostringstream os;
        os << "eigensolver did not converge on " << n << "x" << n << " matrix";
        throw NumericalFailure(os.str());
    }
    const Eigen::VectorXcd vals = es.eigenvalues();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(vals(i).real()) || !std::isfinite(vals(i).imag())) {
            throw NumericalFailure("eigensolver returned non-finite eigenvalues");
        }
    }
    const bool real_input = is_real_matrix(m);
    double max_mod = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        max_mod = std::max(max_mod, std::abs(vals(i)));
    }
    const double thr = tol.eig_cluster_rel * (1.0 + max_mod);

    std::vector<LeftEigenPair> pairs;
    for (const auto& cluster : cluster_eigenvalues(m, vals, tol)) {
        LeftEigenPair pair;
        pair.value = cluster.mean();
        if (real_input && std::abs(pair.value.imag()) <= thr) {
            pair.value = Complex(pair.value.real(), 0.0);
        }
        pair.alg_mult = static_cast<int>(cluster.members.size());

        const Matrix shift_t = (m - pair.value * Matrix::Identity(n, n)).transpose();
        Eigen::JacobiSVD<Matrix> svd(shift_t, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double cutoff = sv(0) == 0.0 ? 0.0 : tol.rank_rel * sv(0) * static_cast<double>(n);
        int rank = 0;
        while (rank < n && sv(rank) > cutoff) {
            ++rank;
        }
        const int gamma = std::clamp(static_cast<int>(n) - rank, 1, pair.alg_mult);
        const Eigen::Index first_null = n - gamma;
        double margin = kInf;
        if (sv(first_null) > 0.0) {
            margin = std::min(margin, cutoff / sv(first_null));
        }
        if (first_null > 0) {
            margin = std::min(margin, cutoff > 0.0 ? sv(first_null - 1) / cutoff : kInf);
        }
        pair.margin = margin;

        const Matrix null_rows = svd.matrixV().rightCols(gamma).transpose();
        pair.vectors = canonical_rows(null_rows);
        pair.geom_mult = static_cast<int>(pair.vectors.size());
        pairs.push_back(std::move(pair));
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const LeftEigenPair& a, const LeftEigenPair& b) { return value_less(a.value, b.value); });
    return pairs;
}

int geometric_multiplicity(const Matrix& m, Complex mu, const Tolerances& tol) {
    require_square(m, "geometric_multiplicity");
    const Eigen::Index n = m.rows();
    const Matrix shift = m - mu * Matrix::Identity(n, n);
    if (shift.cwiseAbs().maxCoeff() == 0.0) {
        return static_cast<int>(n);
    }
    return static_cast<int>(n) - numerical_rank(shift, tol);
}

double left_residual(const RowVector& v, const Matrix& m, Complex mu) { return (v * m - mu * v).norm(); }

bool is_left_eigenvector(const RowVector& v, const Matrix& m, Complex mu, const Tolerances& tol) {
    const double nv = v.norm();
    if (nv == 0.0) {
        return false;
    }
    return left_residual(v, m, mu) <= tol.residual_rel * norm2(m) * nv;
}

bool verify_similarity(const Matrix& t, const Matrix& c, const Matrix& j, const Tolerances& tol) {
    require_square(t, "verify_similarity");
    if (c.rows() != t.rows() || c.cols() != t.cols() || j.rows() != t.rows() || j.cols() != t.cols()) {
        throw InvalidInput("verify_similarity: shapes not conformable");
    }
    if (numerical_rank(t, tol) < t.rows()) {
        throw InvalidInput("verify_similarity: transform is singular");
    }
    const double lhs = norm2(Matrix(t * c - j * t));
    return lhs <= tol.residual_rel * norm2(t) * norm2(c);
}

bool TransformPair::diagonal() const {
    return std::all_of(blocks.begin(), blocks.end(), [](const JordanBlock& b) { return b.length == 1; });
}

const JordanBlock& TransformPair::block_of(int i) const {
    for (const auto& b : blocks) {
        if (i >= b.start && i < b.start + b.length) {
            return b;
        }
    }
    throw InvalidInput("TransformPair::block_of: index out of range");
}

std::vector<JordanBlock> jordan_blocks_of(const Matrix& j) {
    std::vector<JordanBlock> blocks;
    for (Eigen::Index i = 0; i < j.rows(); ++i) {
        if (i > 0 && std::abs(j(i - 1, i)) > 0.5) {
            ++blocks.back().length;
        } else {
            blocks.push_back({static_cast<int>(i), 1});
        }
    }
    return blocks;
}

bool is_exact_jordan_form(const Matrix& c) {
    if (c.rows() != c.cols()) {
        return false;
    }
    const Eigen::Index n = c.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k == i) {
                continue;
            }
            if (k == i + 1) {
                if (c(i, k) == Complex(1.0, 0.0)) {
                    if (c(i, i) != c(k, k)) {
                        return false;
                    }
                } else if (c(i, k) != Complex(0.0, 0.0)) {
                    return false;
                }
            } else if (c(i, k) != Complex(0.0, 0.0)) {
                return false;
            }
        }
    }
    return true;
}

TransformPair make_transform_pair(Matrix t, Matrix j, std::string source) {
    TransformPair tp;
    tp.blocks = jordan_blocks_of(j);
    tp.lambdas.reserve(static_cast<std::size_t>(j.rows()));
    for (Eigen::Index i = 0; i < j.rows(); ++i) {
        tp.lambdas.push_back(j(i, i));
    }
    tp.t = std::move(t);
    tp.j = std::move(j);
    tp.source = std::move(source);
    return tp;
}

namespace {

std::vector<std::vector<int>> groups_of(const std::vector<std::vector<bool>>& allowed) {
    const int n = static_cast<int>(allowed.size());
    std::vector<int> group(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < n; ++i) {
        if (group[static_cast<std::size_t>(i)] >= 0) {
            continue;
        }
        group[static_cast<std::size_t>(i)] = static_cast<int>(groups.size());
        groups.push_back({i});
        for (int k = i + 1; k < n; ++k) {
            if (allowed[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]) {
                group[static_cast<std::size_t>(k)] = group[static_cast<std::size_t>(i)];
                groups.back().push_back(k);
            }
        }
    }
    return groups;
}

std::string format_group(const std::vector<int>& g) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < g.size(); ++i) {
        os << (i ? "," : "") << g[i] + 1;
    }
    os << "}";
    return os.str();
}

// Left eigenvectors supported on each group; T rows within a group follow the pair order.
std::optional<TransformPair> diagonalizable_path(const Matrix& c, const std::vector<LeftEigenPair>& pairs,
                                                 const std::vector<std::vector<int>>& groups,
                                                 const Tolerances& tol, std::string& why) {
    const Eigen::Index n = c.rows();
    int total = 0;
    for (const auto& p : pairs) {
        total += p.geom_mult;
    }
    if (total != n) {
        why = "C is not diagonalizable at tolerance";
        return std::nullopt;
    }
    Matrix t = Matrix::Zero(n, n);
    Matrix j = Matrix::Zero(n, n);
    for (const auto& g : groups) {
        std::vector<bool> inside(static_cast<std::size_t>(n), false);
        for (int i : g) {
            inside[static_cast<std::size_t>(i)] = true;
        }
        std::vector<int> outside;
        for (int i = 0; i < n; ++i) {
            if (!inside[static_cast<std::size_t>(i)]) {
                outside.push_back(i);
            }
        }
        std::vector<std::pair<Complex, RowVector>> rows;
        for (const auto& p : pairs) {
            const Matrix basis = orthonormal_rows(stack_rows(p.vectors));
            const Eigen::Index gamma = basis.rows();
            Matrix alphas;
            if (outside.empty()) {
                alphas = Matrix::Identity(gamma, gamma);
            } else {
                Matrix w(gamma, static_cast<Eigen::Index>(outside.size()));
                for (std::size_t k = 0; k < outside.size(); ++k) {
                    w.col(static_cast<Eigen::Index>(k)) = basis.col(outside[k]);
                }
                // alpha w = 0  <=>  w^T alpha^T = 0
                Eigen::JacobiSVD<Matrix> svd(w.transpose(), Eigen::ComputeFullV);
                const auto& sv = svd.singularValues();
                Eigen::Index rank = 0;
                while (rank < sv.size() && sv(rank) > tol.residual_rel) {
                    ++rank;
                }
                alphas = svd.matrixV().rightCols(gamma - rank).transpose();
            }
            if (alphas.rows() == 0) {
                continue;
            }
            Matrix vecs = alphas * basis;
            for (int i : outside) {
                vecs.col(i).setZero();
            }
            for (const auto& v : canonical_rows(vecs)) {
                rows.emplace_back(p.value, v);
            }
        }
        if (rows.size() != g.size()) {
            std::ostringstream os;
            os << "node class " << format_group(g) << " carries " << rows.size() << " left eigenvectors of C supported on it, needs "
               << g.size();
            why = os.str();
            return std::nullopt;
        }
        for (std::size_t k = 0; k < g.size(); ++k) {
            t.row(g[k]) = rows[k].second;
            j(g[k], g[k]) = rows[k].first;
        }
    }
    try {
        if (!verify_similarity(t, c, j, tol)) {
            why = "eigenvector transform fails the similarity residual (C is close to defective)";
            return std::nullopt;
        }
    } catch (const InvalidInput&) {
        why = "eigenvector transform is singular at tolerance";
        return std::nullopt;
    }
    return make_transform_pair(std::move(t), std::move(j), "diagonalizable");
}

TransformResult search(const Matrix& c, const Tolerances& tol, const std::optional<QMatrix>& exact,
                       const std::vector<std::vector<bool>>& allowed) {
    require_square(c, "jordan_structure");
    require_finite(c, "jordan_structure");
    const Eigen::Index n = c.rows();
    if (is_exact_jordan_form(c)) {
        return make_transform_pair(Matrix::Identity(n, n), c, "identity");
    }
    const auto pairs = eigen_left(c, tol);
    const auto groups = groups_of(allowed);

    std::string diag_why;
    if (auto tp = diagonalizable_path(c, pairs, groups, tol, diag_why)) {
        return *tp;
    }

    std::optional<QMatrix> q = exact;
    if (!q) {
        q = exact_from_complex(c);
    }
    std::string exact_why;
    if (!q) {
        exact_why = "C has non-real entries";
    } else {
        std::vector<Complex> approx;
        for (const auto& p : pairs) {
            approx.push_back(p.value);
        }
        if (auto et = exact_patterned_transform(*q, approx, allowed, exact_why)) {
            Matrix t = et->t.to_complex();
            Matrix j = et->j.to_complex();
            try {
                if (verify_similarity(t, c, j, tol)) {
                    return make_transform_pair(std::move(t), std::move(j), "exact_rational");
                }
                exact_why = "exact transform loses the similarity residual in floating point";
            } catch (const InvalidInput&) {
                exact_why = "exact transform is singular in floating point";
            }
        }
    }
    return NotComputable{"diagonalizable path: " + diag_why + "; exact path: " + exact_why};
}

}  // namespace

TransformResult jordan_structure(const Matrix& c, const Tolerances& tol, const std::optional<QMatrix>& exact) {
    const auto n = static_cast<std::size_t>(c.rows());
    return search(c, tol, exact, std::vector<std::vector<bool>>(n, std::vector<bool>(n, true)));
}

TransformResult patterned_jordan_structure(const Matrix& c, const Tolerances& tol, const std::optional<QMatrix>& exact,
                                           const std::vector<std::vector<bool>>& allowed) {
    if (allowed.size() != static_cast<std::size_t>(c.rows())) {
        throw InvalidInput("patterned_jordan_structure: pattern size mismatch");
    }
    return search(c, tol, exact, allowed);
}

}  // namespace netctrl
