#include "netctrl/classical.hpp"

#include "netctrl/spectral.hpp"

#include <sstream>

namespace netctrl {

std::string_view to_string(Status s) {
    switch (s) {
        case Status::Controllable:
            return "controllable";
        case Status::Uncontrollable:
            return "uncontrollable";
        case Status::NotApplicable:
            return "not_applicable";
    }
    return "unknown";
}

namespace {

void require_pair(const Matrix& f, const Matrix& g, const char* what) {
    if (f.rows() == 0 || f.rows() != f.cols() || g.rows() != f.rows() || g.cols() == 0) {
        std::ostringstream os;
        os << what << ": F must be square and G must share its row count (got F " << f.rows() << "x" << f.cols()
           << ", G " << g.rows() << "x" << g.cols() << ")";
        throw InvalidInput(os.str());
    }
    require_finite(f, what);
    require_finite(g, what);
}

}  // namespace

Verdict kalman_controllable(const AssembledPair& p, const Tolerances& tol, int cap) {
    require_pair(p.f, p.g, "kalman_controllable");
    Verdict v;
    v.method = "kalman";
    const Eigen::Index k = p.f.rows();
    if (k > cap) {
        std::ostringstream os;
        os << "state dimension " << k << " exceeds the Kalman cap of " << cap << "; PBH is the oracle of record";
        v.detail = os.str();
        return v;
    }
    // Rank of [G, FG, ..., F^(k-1) G] via an orthonormal basis of the same
    // Krylov space (staircase form). Each step keeps the directions of F Q_new
    // that survive projection off the basis; monomial powers would lose them
    // to conditioning long before they vanish. The recurrence runs in long
    // double: near a defective eigenvalue rounding in the basis is amplified
    // by orders of magnitude and double precision can fake a surviving direction.
    using Wide = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
    const Wide f = p.f.cast<std::complex<long double>>();
    const double nf = norm2(p.f);
    const double ng = norm2(p.g);
    const double dim = static_cast<double>(k);
    Wide basis(k, 0);
    Wide w = p.g.cast<std::complex<long double>>();
    double cutoff = tol.rank_rel * dim * ng;
    int steps = 0;
    while (basis.cols() < k && w.cols() > 0) {
        for (int pass = 0; pass < 2 && basis.cols() > 0; ++pass) {
            w -= basis * (basis.adjoint() * w);
        }
        Eigen::JacobiSVD<Wide> svd(w, Eigen::ComputeThinU);
        const auto& sv = svd.singularValues();
        auto value = [&](Eigen::Index i) { return static_cast<double>(sv(i)); };
        Eigen::Index kept = 0;
        while (kept < sv.size() && value(kept) > cutoff && kept + basis.cols() < k) {
            ++kept;
        }
        if (kept > 0) {
            v.margin = std::min(v.margin, clearance(value(kept - 1), cutoff));
        }
        if (kept < sv.size()) {
            v.margin = std::min(v.margin, clearance(value(kept), cutoff));
        }
        if (kept == 0) {
            break;
        }
        const Wide fresh = svd.matrixU().leftCols(kept);
        basis.conservativeResize(Eigen::NoChange, basis.cols() + kept);
        basis.rightCols(kept) = fresh;
        w = f * fresh;
        cutoff = tol.rank_rel * dim * nf;
        ++steps;
    }
    const auto rank = static_cast<int>(basis.cols());
    v.rank = rank;
    v.status = rank == k ? Status::Controllable : Status::Uncontrollable;
    std::ostringstream os;
    os << "rank " << rank << " of " << k << "x" << k * p.g.cols() << " controllability matrix; orthonormal Krylov basis built in "
       << steps << " steps";
    v.detail = os.str();
    return v;
}

Verdict pbh_controllable(const AssembledPair& p, const Tolerances& tol) {
    require_pair(p.f, p.g, "pbh_controllable");
    Verdict v;
    v.method = "pbh";
    v.status = Status::Controllable;
    const double ng = norm2(p.g);
    const double cutoff = tol.residual_rel * ng;
    int tested = 0;
    for (const auto& pair : eigen_left(p.f, tol)) {
        v.margin = std::min(v.margin, pair.margin);
        const Matrix basis = orthonormal_rows(stack_rows(pair.vectors));
        const Eigen::Index gamma = basis.rows();
        const Matrix w = basis * p.g;
        Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeFullU);
        const auto& sv = svd.singularValues();
        const double sigma = gamma <= sv.size() ? sv(gamma - 1) : 0.0;
        v.margin = std::min(v.margin, clearance(sigma, cutoff));
        ++tested;
        if (sigma <= cutoff && !v.witness) {
            const RowVector alpha = svd.matrixU().col(gamma - 1).adjoint();
            v.status = Status::Uncontrollable;
            v.witness = Witness{pair.value, canonical_vector(alpha * basis)};
        }
    }
    std::ostringstream os;
    if (v.witness) {
        os.precision(17);
        os << "left eigenvector for eigenvalue (" << v.witness->value.real() << ", " << v.witness->value.imag()
           << ") annihilates G";
        if (!witness_valid(*v.witness, p, tol)) {
            os << "; witness residual too large";
        }
    } else {
        os << tested << " eigenspaces tested, none annihilates G";
    }
    v.detail = os.str();
    return v;
}

Verdict pbh_controllable(const Matrix& a, const Matrix& b, const Tolerances& tol) {
    return pbh_controllable(AssembledPair{a, b}, tol);
}

bool witness_valid(const Witness& w, const AssembledPair& p, const Tolerances& tol) {
    const double nv = w.vector.norm();
    if (nv == 0.0 || w.vector.size() != p.f.rows()) {
        return false;
    }
    const double eig_res = (w.vector * p.f - w.value * w.vector).norm();
    const double in_res = (w.vector * p.g).norm();
    return eig_res <= tol.residual_rel * norm2(p.f) * nv && in_res <= tol.residual_rel * norm2(p.g) * nv;
}

}  // namespace netctrl
