#include "netctrl/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace netctrl {

std::string_view to_string(ConditionStatus s) {
    switch (s) {
        case ConditionStatus::Pass:
            return "pass";
        case ConditionStatus::Fail:
            return "fail";
        case ConditionStatus::Vacuous:
            return "vacuous";
        case ConditionStatus::NotEvaluated:
            return "not_evaluated";
    }
    return "unknown";
}

namespace {

std::string fmt(Complex z) {
    std::ostringstream os;
    os.precision(17);
    if (z.imag() == 0.0) {
        os << z.real();
    } else {
        os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    }
    return os.str();
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

RowVector lift(const Matrix& t, int i, const RowVector& xi) { return kron(RowVector(t.row(i)), xi); }

// Snaps T C T^-1 onto Jordan structure; throws when it is clearly not one.
Matrix snap_jordan(const Matrix& raw, const Matrix& c, const Tolerances& tol) {
    const Eigen::Index n = raw.rows();
    const double thr = tol.eig_cluster_rel * (1.0 + norm2(c));
    const bool real_c = c.imag().cwiseAbs().maxCoeff() == 0.0;
    Matrix j = Matrix::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const Complex x = raw(r, k);
            if (k == r) {
                j(r, k) = real_c && std::abs(x.imag()) <= thr ? Complex(x.real(), 0.0) : x;
            } else if (k == r + 1) {
                if (std::abs(x - 1.0) <= thr) {
                    j(r, k) = 1.0;
                } else if (std::abs(x) > thr) {
                    std::ostringstream os;
                    os << "T C T^-1 has superdiagonal entry (" << r + 1 << ", " << k + 1 << ") = " << fmt(x)
                       << ", neither 0 nor 1";
                    throw InvalidInput(os.str());
                }
            } else if (std::abs(x) > thr) {
                std::ostringstream os;
                os << "T C T^-1 is not in Jordan form: entry (" << r + 1 << ", " << k + 1 << ") = " << fmt(x);
                throw InvalidInput(os.str());
            }
        }
    }
    for (const auto& b : jordan_blocks_of(j)) {
        if (b.length < 2) {
            continue;
        }
        Complex mean = 0.0;
        for (int i = b.start; i < b.start + b.length; ++i) {
            mean += j(i, i);
        }
        mean /= static_cast<double>(b.length);
        for (int i = b.start; i < b.start + b.length; ++i) {
            if (std::abs(j(i, i) - mean) > thr) {
                throw InvalidInput("T C T^-1 has a unit superdiagonal between unequal diagonal entries");
            }
            j(i, i) = mean;
        }
    }
    return j;
}

// A combination alpha of the rows of basis with alpha basis m ~ 0, if one exists.
std::optional<RowVector> annihilating_combination(const Matrix& basis, const Matrix& m, double cutoff) {
    const Eigen::Index gamma = basis.rows();
    const Matrix w = basis * m;
    Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const double sigma = gamma <= sv.size() ? sv(gamma - 1) : 0.0;
    if (sigma > cutoff) {
        return std::nullopt;
    }
    const RowVector alpha = svd.matrixU().col(gamma - 1).adjoint();
    return canonical_vector(alpha * basis);
}

double max_node_norm(const NetworkedSystem& sys) {
    double out = 0.0;
    for (const auto& a : sys.node_matrices) {
        out = std::max(out, norm2(a));
    }
    return out;
}

}  // namespace

bool commutation_check(const Matrix& t, const NetworkedSystem& sys, const Tolerances& tol) {
    const auto n = static_cast<Eigen::Index>(sys.node_matrices.size());
    if (t.rows() != n || t.cols() != n) {
        throw InvalidInput("commutation_check: T must be N x N");
    }
    const double bound = tol.residual_rel * norm2(t) * max_node_norm(sys);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (i == k || t(i, k) == Complex(0.0, 0.0)) {
                continue;
            }
            const Matrix diff = sys.node_matrices[static_cast<std::size_t>(i)] - sys.node_matrices[static_cast<std::size_t>(k)];
            if (std::abs(t(i, k)) * norm2(diff) > bound) {
                return false;
            }
        }
    }
    return true;
}

TransformResult construct_admissible_T(const NetworkedSystem& sys, const Tolerances& tol,
                                       const std::optional<Matrix>& user_t) {
    require_valid(sys);
    const int n = sys.dims.N;
    if (user_t) {
        const Matrix& t = *user_t;
        if (t.rows() != n || t.cols() != n) {
            std::ostringstream os;
            os << "supplied T is " << t.rows() << "x" << t.cols() << ", expected " << n << "x" << n;
            throw InvalidInput(os.str());
        }
        require_finite(t, "supplied T");
        if (numerical_rank(t, tol) < n) {
            throw InvalidInput("supplied T is singular");
        }
        const Matrix raw = (t * sys.c) * t.fullPivLu().inverse();
        Matrix j = snap_jordan(raw, sys.c, tol);
        if (!verify_similarity(t, sys.c, j, tol)) {
            throw InvalidInput("supplied T fails the similarity check T C = J T");
        }
        if (!commutation_check(t, sys, tol)) {
            throw InvalidInput("supplied T (x) I does not commute with blockdiag(A_i): T couples non-identical nodes");
        }
        return make_transform_pair(t, std::move(j), "user");
    }

    const Partition classes = node_partition(sys, tol);
    std::optional<QMatrix> exact_c;
    if (sys.exact) {
        exact_c = sys.exact->c;
    }
    TransformResult r = classes.size() == 1
                            ? jordan_structure(sys.c, tol, exact_c)
                            : patterned_jordan_structure(sys.c, tol, exact_c, class_pattern(classes, n));
    if (auto* tp = std::get_if<TransformPair>(&r)) {
        if (!commutation_check(tp->t, sys, tol)) {
            return NotComputable{"constructed T does not commute with blockdiag(A_i)"};
        }
    }
    return r;
}

SpectralSummary build_spectral_summary(const NetworkedSystem& sys, const TransformPair& tp, const Tolerances& tol) {
    SpectralSummary s;
    const int n_nodes = sys.dims.N;
    s.nodes.resize(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
        auto& ns = s.nodes[static_cast<std::size_t>(i)];
        ns.node = i;
        ns.lambda = tp.lambdas[static_cast<std::size_t>(i)];
        ns.modified = sys.node_matrices[static_cast<std::size_t>(i)] + ns.lambda * sys.h;
        ns.pairs = eigen_left(ns.modified, tol);
        for (const auto& p : ns.pairs) {
            s.sigma_f.insert(s.sigma_f.end(), static_cast<std::size_t>(p.alg_mult), p.value);
        }
    }

    // Cross-node clustering of the per-node eigenvalues.
    struct Entry {
        int node;
        std::size_t pair;
        Complex value;
    };
    std::vector<Entry> entries;
    double max_mod = 0.0;
    for (const auto& ns : s.nodes) {
        for (std::size_t p = 0; p < ns.pairs.size(); ++p) {
            entries.push_back({ns.node, p, ns.pairs[p].value});
            max_mod = std::max(max_mod, std::abs(ns.pairs[p].value));
        }
    }
    const double thr = tol.eig_cluster_rel * (1.0 + max_mod);
    const std::size_t ne = entries.size();
    std::vector<std::size_t> parent(ne);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            x = parent[x] = parent[parent[x]];
        }
        return x;
    };
    for (std::size_t a = 0; a < ne; ++a) {
        for (std::size_t b = a + 1; b < ne; ++b) {
            if (std::abs(entries[a].value - entries[b].value) <= thr) {
                parent[find(a)] = find(b);
            }
        }
    }
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<int> slot(ne, -1);
    for (std::size_t i = 0; i < ne; ++i) {
        const auto root = find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(clusters.size());
            clusters.emplace_back();
        }
        clusters[static_cast<std::size_t>(slot[root])].push_back(i);
    }
    for (const auto& cl : clusters) {
        // clearance: links inside the cluster against thr, gaps to everything else against thr
        double margin = kInf;
        for (std::size_t a : cl) {
            double nearest_in = kInf;
            for (std::size_t b : cl) {
                if (a != b) {
                    nearest_in = std::min(nearest_in, std::abs(entries[a].value - entries[b].value));
                }
            }
            if (nearest_in < kInf && nearest_in > 0.0) {
                margin = std::min(margin, thr / nearest_in);
            }
            for (std::size_t b = 0; b < ne; ++b) {
                if (find(b) != find(a)) {
                    margin = std::min(margin, std::abs(entries[a].value - entries[b].value) / thr);
                }
            }
        }
        s.cluster_margin = std::min(s.cluster_margin, margin);

        std::vector<int> nodes;
        for (std::size_t e : cl) {
            nodes.push_back(entries[e].node);
        }
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        if (nodes.size() < 2) {
            continue;
        }
        CommonGroup g;
        Complex sum = 0.0;
        for (std::size_t e : cl) {
            sum += entries[e].value;
        }
        g.sigma = sum / static_cast<double>(cl.size());
        g.nodes = nodes;
        g.vectors.resize(nodes.size());
        for (std::size_t e : cl) {
            const auto k = static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), entries[e].node) - nodes.begin());
            const auto& vs = s.nodes[static_cast<std::size_t>(entries[e].node)].pairs[entries[e].pair].vectors;
            g.vectors[k].insert(g.vectors[k].end(), vs.begin(), vs.end());
        }
        g.margin = margin;
        g.fragile = margin < 10.0;
        s.common_groups.push_back(std::move(g));
    }
    std::sort(s.common_groups.begin(), s.common_groups.end(), [](const CommonGroup& a, const CommonGroup& b) {
        if (a.sigma.real() != b.sigma.real()) {
            return a.sigma.real() < b.sigma.real();
        }
        return a.sigma.imag() < b.sigma.imag();
    });
    return s;
}

ConditionResult check_jordan_hypothesis(const SpectralSummary& summary, const TransformPair& tp, const Matrix& h,
                                        const Tolerances& tol) {
    ConditionResult r;
    const double cutoff = tol.residual_rel * norm2(h);
    bool any_block = false;
    for (const auto& b : tp.blocks) {
        if (b.length < 2) {
            continue;
        }
        any_block = true;
        for (int i = b.start; i < b.start + b.length; ++i) {
            const auto& ns = summary.nodes[static_cast<std::size_t>(i)];
            for (const auto& p : ns.pairs) {
                for (std::size_t k = 0; k < p.vectors.size(); ++k) {
                    const double res = (p.vectors[k] * h).norm() / p.vectors[k].norm();
                    r.margin = std::min(r.margin, clearance(res, cutoff));
                    if (res > cutoff && r.status != ConditionStatus::Fail) {
                        r.status = ConditionStatus::Fail;
                        r.node = i;
                        r.local_witness = Witness{p.value, p.vectors[k]};
                        std::ostringstream os;
                        os << "node " << i + 1 << " lies in a Jordan block of length " << b.length << " (rows " << b.start + 1
                           << ".." << b.start + b.length << ") but left eigenvector " << k + 1
                           << " of A_i + lambda_i H for eigenvalue " << fmt(p.value) << " has |xi H| = " << fmt(res);
                        if (i == b.start + b.length - 1) {
                            os << "; this is the last node of the block, required by the stated hypothesis only";
                        }
                        r.detail = os.str();
                    }
                }
            }
        }
    }
    if (!any_block) {
        r.status = ConditionStatus::Vacuous;
        r.detail = "J has no Jordan block of length >= 2";
    } else if (r.status != ConditionStatus::Fail) {
        r.status = ConditionStatus::Pass;
        r.detail = "every left eigenvector of every node inside a Jordan block annihilates H";
    }
    return r;
}

ConditionResult check_input_reach(const TransformPair& tp, const NetworkedSystem& sys, const Tolerances& tol) {
    ConditionResult r;
    const Matrix td = tp.t * sys.d();
    const double cutoff = tol.residual_rel * norm2(tp.t);
    for (Eigen::Index i = 0; i < td.rows(); ++i) {
        const double nr = td.row(i).norm();
        r.margin = std::min(r.margin, clearance(nr, cutoff));
        if (nr <= cutoff && !r.node) {
            r.node = static_cast<int>(i);
        }
    }
    if (r.node) {
        r.status = ConditionStatus::Fail;
        r.detail = "e_" + std::to_string(*r.node + 1) + " T D = 0";
    } else {
        r.status = ConditionStatus::Pass;
        r.detail = "every row of T D is non-zero";
    }
    return r;
}

ConditionResult check_modified_pairs(const NetworkedSystem& sys, const TransformPair& tp, const Tolerances& tol,
                                     const SpectralSummary* summary) {
    const int n_nodes = sys.dims.N;
    std::vector<Verdict> per_node(static_cast<std::size_t>(n_nodes));
#pragma omp parallel for schedule(dynamic) if (n_nodes >= 8)
    for (int i = 0; i < n_nodes; ++i) {
        const Matrix m = summary ? summary->nodes[static_cast<std::size_t>(i)].modified
                                 : Matrix(sys.node_matrices[static_cast<std::size_t>(i)] +
                                          tp.lambdas[static_cast<std::size_t>(i)] * sys.h);
        per_node[static_cast<std::size_t>(i)] = pbh_controllable(m, sys.b, tol);
    }
    ConditionResult r;
    for (int i = 0; i < n_nodes; ++i) {
        const auto& v = per_node[static_cast<std::size_t>(i)];
        r.margin = std::min(r.margin, v.margin);
        if (v.status == Status::Uncontrollable && !r.node) {
            r.node = i;
            r.local_witness = v.witness;
            r.witness = Witness{v.witness->value, canonical_vector(lift(tp.t, i, v.witness->vector))};
        }
    }
    if (r.node) {
        r.status = ConditionStatus::Fail;
        r.detail = "(A_i + lambda_i H, B) is uncontrollable at node " + std::to_string(*r.node + 1) + " (eigenvalue " +
                   fmt(r.local_witness->value) + ")";
    } else {
        r.status = ConditionStatus::Pass;
        r.detail = "(A_i + lambda_i H, B) is controllable at every node";
    }
    return r;
}

ConditionResult check_common_eig_independence(const SpectralSummary& summary, const TransformPair& tp,
                                              const NetworkedSystem& sys, const Tolerances& tol) {
    ConditionResult r;
    if (summary.common_groups.empty()) {
        r.status = ConditionStatus::Vacuous;
        r.detail = "no eigenvalue is shared by two or more nodes";
        return r;
    }
    const Matrix td = tp.t * sys.d();
    const auto ng = static_cast<int>(summary.common_groups.size());
    struct GroupResult {
        RankInfo info;
        int count = 0;
        std::optional<RowVector> lifted;
    };
    std::vector<GroupResult> results(static_cast<std::size_t>(ng));
#pragma omp parallel for schedule(dynamic) if (ng >= 4)
    for (int gi = 0; gi < ng; ++gi) {
        const auto& g = summary.common_groups[static_cast<std::size_t>(gi)];
        std::vector<RowVector> rows;
        std::vector<RowVector> lifts;
        for (std::size_t k = 0; k < g.nodes.size(); ++k) {
            const RowVector etd = td.row(g.nodes[k]);
            for (const auto& xi : g.vectors[k]) {
                rows.push_back(kron(etd, RowVector(xi * sys.b)));
                lifts.push_back(lift(tp.t, g.nodes[k], xi));
            }
        }
        auto& out = results[static_cast<std::size_t>(gi)];
        const Matrix stacked = stack_rows(rows);
        out.info = rank_info(stacked, tol);
        out.count = static_cast<int>(rows.size());
        if (out.info.rank < out.count) {
            Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullU);
            const RowVector alpha = svd.matrixU().col(out.count - 1).adjoint();
            RowVector v = RowVector::Zero(lifts.front().size());
            for (std::size_t l = 0; l < lifts.size(); ++l) {
                v += alpha(static_cast<Eigen::Index>(l)) * lifts[l];
            }
            out.lifted = canonical_vector(v);
        }
    }
    for (int gi = 0; gi < ng; ++gi) {
        const auto& g = summary.common_groups[static_cast<std::size_t>(gi)];
        const auto& res = results[static_cast<std::size_t>(gi)];
        r.margin = std::min({r.margin, res.info.margin, g.margin});
        if (res.info.rank < res.count && !r.sigma) {
            r.sigma = g.sigma;
            r.witness = Witness{g.sigma, *res.lifted};
            std::ostringstream os;
            os << "vectors (e_i T D) (x) (xi B) at shared eigenvalue " << fmt(g.sigma) << " (nodes";
            for (int i : g.nodes) {
                os << " " << i + 1;
            }
            os << ") have rank " << res.info.rank << " < " << res.count;
            r.detail = os.str();
        }
    }
    if (r.sigma) {
        r.status = ConditionStatus::Fail;
    } else {
        r.status = ConditionStatus::Pass;
        r.detail = std::to_string(ng) + " shared eigenvalue group(s), all independent";
    }
    return r;
}

namespace {

void finish_uncontrollable(TheoremReport& rep, const ConditionResult& cr, const std::string& tag,
                           const AssembledPair& pair, const Tolerances& tol) {
    rep.verdict.status = Status::Uncontrollable;
    rep.verdict.condition = tag;
    rep.verdict.node = cr.node;
    rep.verdict.witness = cr.witness;
    if (cr.witness && witness_valid(*cr.witness, pair, tol)) {
        rep.verdict.detail = tag + " failed: " + cr.detail;
    } else {
        rep.verdict.detail = "condition failed; witness residual too large (" + tag + ": " + cr.detail + ")";
    }
}

TheoremReport run_theorem(const NetworkedSystem& sys, const Tolerances& tol, const std::optional<Matrix>& user_t,
                          const std::string& method) {
    require_valid(sys);
    tol.require_valid();
    TheoremReport rep;
    rep.verdict.method = method;
    auto tr = construct_admissible_T(sys, tol, user_t);
    if (const auto* nc = std::get_if<NotComputable>(&tr)) {
        rep.verdict.status = Status::NotApplicable;
        rep.verdict.detail = "transform construction failed: " + nc->reason;
        return rep;
    }
    const TransformPair& tp = rep.transform.emplace(std::get<TransformPair>(std::move(tr)));
    auto& cond = rep.conditions;
    double margin = kInf;

    cond.commutation.status = ConditionStatus::Pass;
    cond.commutation.detail = "T (x) I commutes with blockdiag(A_i)";

    const SpectralSummary& summary = rep.summary.emplace(build_spectral_summary(sys, tp, tol));
    margin = std::min(margin, summary.cluster_margin);
    for (const auto& g : summary.common_groups) {
        if (g.fragile) {
            rep.notes.push_back("shared eigenvalue " + fmt(g.sigma) + " sits near the clustering threshold");
        }
    }

    cond.jordan_hypothesis = check_jordan_hypothesis(summary, tp, sys.h, tol);
    if (cond.jordan_hypothesis.status == ConditionStatus::Fail) {
        rep.verdict.status = Status::NotApplicable;
        rep.verdict.detail = "jordan_hypothesis failed: " + cond.jordan_hypothesis.detail;
        rep.verdict.node = cond.jordan_hypothesis.node;
        rep.verdict.margin = std::min(margin, cond.jordan_hypothesis.margin);
        return rep;
    }
    if (cond.jordan_hypothesis.status == ConditionStatus::Pass) {
        rep.notes.push_back("the hypothesis was checked on every node of each Jordan block, including the last");
    }
    margin = std::min(margin, cond.jordan_hypothesis.margin);

    const AssembledPair pair = assemble(sys);
    const SpectralSummary* sp = &summary;

    cond.input_reach = check_input_reach(tp, sys, tol);
    margin = std::min(margin, cond.input_reach.margin);
    if (cond.input_reach.status == ConditionStatus::Fail) {
        const int i = *cond.input_reach.node;
        const auto& p = summary.nodes[static_cast<std::size_t>(i)].pairs.front();
        cond.input_reach.local_witness = Witness{p.value, p.vectors.front()};
        cond.input_reach.witness = Witness{p.value, canonical_vector(lift(tp.t, i, p.vectors.front()))};
        finish_uncontrollable(rep, cond.input_reach, "input_reach", pair, tol);
        rep.verdict.margin = margin;
        return rep;
    }

    cond.modified_pairs = check_modified_pairs(sys, tp, tol, sp);
    margin = std::min(margin, cond.modified_pairs.margin);
    if (cond.modified_pairs.status == ConditionStatus::Fail) {
        finish_uncontrollable(rep, cond.modified_pairs, "modified_pairs", pair, tol);
        rep.verdict.margin = margin;
        return rep;
    }

    cond.common_independence = check_common_eig_independence(summary, tp, sys, tol);
    margin = std::min(margin, cond.common_independence.margin);
    if (cond.common_independence.status == ConditionStatus::Fail) {
        finish_uncontrollable(rep, cond.common_independence, "common_independence", pair, tol);
        rep.verdict.margin = margin;
        return rep;
    }

    rep.verdict.status = Status::Controllable;
    rep.verdict.detail = "all conditions hold";
    rep.verdict.margin = margin;
    return rep;
}

}  // namespace

TheoremReport theorem1_verdict(const NetworkedSystem& sys, const Tolerances& tol, const std::optional<Matrix>& user_t) {
    return run_theorem(sys, tol, user_t, "theorem");
}

TheoremReport homogeneous_verdict(const NetworkedSystem& sys, const Tolerances& tol,
                                  const std::optional<Matrix>& user_t) {
    if (!is_homogeneous(sys)) {
        throw InvalidInput("homogeneous_verdict: node matrices are not all identical");
    }
    TheoremReport rep = run_theorem(sys, tol, user_t, "homogeneous");
    if (rep.transform && rep.transform->diagonal()) {
        Verdict network_pair = pbh_controllable(sys.c, sys.d(), tol);
        network_pair.method = "network_pair";
        network_pair.detail = "(C, D) is " + std::string(to_string(network_pair.status)) +
                     "; for diagonalizable C this is equivalent to input_reach. " + network_pair.detail;
        const auto reach = rep.conditions.input_reach.status;
        if (reach != ConditionStatus::NotEvaluated &&
            (reach == ConditionStatus::Pass) != (network_pair.status == Status::Controllable)) {
            rep.notes.push_back("(C, D) controllability disagrees with input_reach; one decision is near tolerance");
        }
        rep.network_pair = std::move(network_pair);
    }
    return rep;
}

TheoremReport theorem_verdict(const NetworkedSystem& sys, const Tolerances& tol, const std::optional<Matrix>& user_t) {
    return is_homogeneous(sys) ? homogeneous_verdict(sys, tol, user_t) : theorem1_verdict(sys, tol, user_t);
}

std::vector<LiftedEigenvector> reconstruct_left_eigenvectors(const SpectralSummary& summary, const TransformPair& tp) {
    std::vector<LiftedEigenvector> out;
    for (const auto& ns : summary.nodes) {
        for (const auto& p : ns.pairs) {
            for (const auto& xi : p.vectors) {
                out.push_back({ns.node, p.value, lift(tp.t, ns.node, xi)});
            }
        }
    }
    return out;
}

Verdict corollary_eTD(const NetworkedSystem& sys, const TransformPair& tp, const Tolerances& tol) {
    Verdict v;
    v.method = "corollary_eTD";
    const ConditionResult reach = check_input_reach(tp, sys, tol);
    v.margin = reach.margin;
    if (reach.status == ConditionStatus::Pass) {
        v.detail = "corollary silent: every row of T D is non-zero";
        return v;
    }
    const int i = *reach.node;
    const Matrix m = sys.node_matrices[static_cast<std::size_t>(i)] + tp.lambdas[static_cast<std::size_t>(i)] * sys.h;
    const auto pairs = eigen_left(m, tol);
    const auto& block = tp.block_of(i);
    const bool last_in_block = i == block.start + block.length - 1;
    std::optional<Witness> local;
    for (const auto& p : pairs) {
        if (last_in_block) {
            local = Witness{p.value, p.vectors.front()};
            break;
        }
        // Inside a block the lifted vector is an eigenvector of F only when xi H = 0.
        const Matrix basis = orthonormal_rows(stack_rows(p.vectors));
        if (auto xi = annihilating_combination(basis, sys.h, tol.residual_rel * norm2(sys.h))) {
            local = Witness{p.value, *xi};
            break;
        }
    }
    v.node = i;
    if (!local) {
        v.detail = "corollary silent: e_" + std::to_string(i + 1) +
                   " T D = 0 but row lies inside a Jordan block and no left eigenvector of A_i + lambda_i H annihilates H";
        return v;
    }
    v.status = Status::Uncontrollable;
    v.condition = "input_reach";
    v.witness = Witness{local->value, canonical_vector(lift(tp.t, i, local->vector))};
    v.detail = "e_" + std::to_string(i + 1) + " T D = 0";
    if (!witness_valid(*v.witness, assemble(sys), tol)) {
        v.detail += "; witness residual too large";
    }
    return v;
}

Verdict source_node_check(const NetworkedSystem& sys, const Tolerances& tol) {
    require_valid(sys);
    Verdict v;
    v.method = "source_node";
    const auto sources = source_nodes(sys);
    if (sources.empty()) {
        v.detail = "no source node: every row of C has a non-zero entry";
        return v;
    }
    std::ostringstream silent;
    for (int j : sources) {
        const Verdict local = pbh_controllable(sys.node_matrices[static_cast<std::size_t>(j)], sys.b, tol);
        v.margin = std::min(v.margin, local.margin);
        if (local.status == Status::Uncontrollable) {
            const int n_nodes = sys.dims.N;
            RowVector e = RowVector::Zero(n_nodes);
            e(j) = 1.0;
            v.status = Status::Uncontrollable;
            v.condition = "source_node";
            v.node = j;
            v.witness = Witness{local.witness->value, kron(e, local.witness->vector)};
            v.detail = "node " + std::to_string(j + 1) + " has no incoming edges and (A_j, B) is uncontrollable";
            if (!witness_valid(*v.witness, assemble(sys), tol)) {
                v.detail += "; witness residual too large";
            }
            return v;
        }
        silent << (silent.tellp() > 0 ? ", " : "") << j + 1;
    }
    v.detail = "theorem silent: (A_j, B) is controllable for source node(s) " + silent.str();
    return v;
}

Verdict sink_node_check(const NetworkedSystem& sys, const Tolerances& tol) {
    require_valid(sys);
    Verdict v;
    v.method = "sink_node";
    const auto sinks = sink_nodes(sys);
    if (sinks.empty()) {
        v.detail = "no sink node: every column of C has a non-zero entry";
        return v;
    }
    const double cutoff = tol.residual_rel * norm2(sys.h);
    std::vector<std::string> reasons;
    for (int j : sinks) {
        const Matrix& a = sys.node_matrices[static_cast<std::size_t>(j)];
        bool annihilates = true;
        for (const auto& p : eigen_left(a, tol)) {
            for (const auto& xi : p.vectors) {
                const double res = (xi * sys.h).norm();
                v.margin = std::min(v.margin, clearance(res, cutoff));
                annihilates = annihilates && res <= cutoff;
            }
        }
        const Verdict local = pbh_controllable(a, sys.b, tol);
        v.margin = std::min(v.margin, local.margin);
        const std::string node = "node " + std::to_string(j + 1);
        if (!annihilates) {
            reasons.push_back(node + ": some left eigenvector of A_j does not annihilate H, so controllability of (A_j, B) "
                                     "is not necessary for a node without outgoing edges");
            continue;
        }
        if (local.status == Status::Uncontrollable) {
            const int n_nodes = sys.dims.N;
            RowVector e = RowVector::Zero(n_nodes);
            e(j) = 1.0;
            v.status = Status::Uncontrollable;
            v.condition = "sink_node";
            v.node = j;
            v.witness = Witness{local.witness->value, kron(e, local.witness->vector)};
            v.detail = node + " has no outgoing edges, its left eigenvectors annihilate H and (A_j, B) is uncontrollable";
            if (!witness_valid(*v.witness, assemble(sys), tol)) {
                v.detail += "; witness residual too large";
            }
            return v;
        }
        reasons.push_back(node + ": (A_j, B) is controllable; theorem silent");
    }
    std::ostringstream os;
    for (std::size_t k = 0; k < reasons.size(); ++k) {
        os << (k ? "; " : "") << reasons[k];
    }
    v.detail = os.str();
    return v;
}

}  // namespace netctrl
