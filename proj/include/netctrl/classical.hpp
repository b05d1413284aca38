#pragma once

#include "netctrl/matrix.hpp"
#include "netctrl/system.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace netctrl {

enum class Status { Controllable, Uncontrollable, NotApplicable };

std::string_view to_string(Status s);

/// Left eigenpair (value, vector) of the state matrix whose vector annihilates the input matrix.
struct Witness {
    Complex value;
    RowVector vector;
};

struct Verdict {
    Status status = Status::NotApplicable;
    std::optional<Witness> witness;
    std::string method;
    std::string detail;
    std::string condition;     // failed-condition tag, empty when none
    std::optional<int> node;   // 0-based node the verdict hinges on, if any
    std::optional<int> rank;   // Kalman only
    double margin = kInf;      // smallest clearance among the decisions taken
};

inline constexpr int kKalmanCap = 64;

/**
 * Rank of [G, FG, ..., F^(k-1) G] with k = rows(F), measured on an orthonormal
 * basis of the same column space. NotApplicable above the dimension cap.
 */
Verdict kalman_controllable(const AssembledPair& p, const Tolerances& tol, int cap = kKalmanCap);

/**
 * Left eigenvectors of F against G. For an eigenspace with orthonormal basis V
 * of dimension g, the pair fails exactly when the g-th singular value of V G
 * is at or below residual_rel |G|; the witness is the combination of V rows
 * along the corresponding left singular vector.
 */
Verdict pbh_controllable(const AssembledPair& p, const Tolerances& tol);
Verdict pbh_controllable(const Matrix& a, const Matrix& b, const Tolerances& tol);

/// |vF - mu v| <= residual_rel |F| |v| and |vG| <= residual_rel |G| |v|.
bool witness_valid(const Witness& w, const AssembledPair& p, const Tolerances& tol);

}  // namespace netctrl
