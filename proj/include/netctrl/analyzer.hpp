#pragma once

// Eigenstructure-based controllability test for networked systems.
//
// With an admissible T (T C T^-1 = J in Jordan form and T (x) I commuting with
// blockdiag(A_i)), the left eigenvectors of F are e_i T (x) xi for left
// eigenvectors xi of A_i + lambda_i H. Controllability then reduces to three
// conditions:
//   input_reach          every row of T D is non-zero
//   modified_pairs       every (A_i + lambda_i H, B) is controllable
//   common_independence  for each eigenvalue shared by several nodes, the
//                        vectors (e_i T D) (x) (xi B) are linearly independent
// valid when every node covered by a Jordan block of length >= 2 has xi H = 0
// for all of its left eigenvectors.

#include "netctrl/classical.hpp"
#include "netctrl/spectral.hpp"
#include "netctrl/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace netctrl {

struct NodeSpectrum {
    int node = 0;
    Complex lambda;
    Matrix modified;  // A_i + lambda_i H
    std::vector<LeftEigenPair> pairs;
};

struct CommonGroup {
    Complex sigma;
    std::vector<int> nodes;                        // ascending
    std::vector<std::vector<RowVector>> vectors;   // per entry of nodes
    double margin = kInf;                          // clearance of the clustering decision
    bool fragile = false;
};

struct SpectralSummary {
    std::vector<NodeSpectrum> nodes;
    std::vector<Complex> sigma_f;  // eigenvalue multiset, values repeated by algebraic multiplicity
    std::vector<CommonGroup> common_groups;
    double cluster_margin = kInf;  // clearance of every cross-node clustering decision
};

enum class ConditionStatus { Pass, Fail, Vacuous, NotEvaluated };

std::string_view to_string(ConditionStatus s);

struct ConditionResult {
    ConditionStatus status = ConditionStatus::NotEvaluated;
    std::string detail;
    std::optional<int> node;               // 0-based
    std::optional<Complex> sigma;          // common_independence only
    std::optional<Witness> local_witness;  // node- or group-level vector before lifting to F
    std::optional<Witness> witness;        // lifted to a left eigenvector of F
    double margin = kInf;
};

struct Conditions {
    ConditionResult commutation;
    ConditionResult jordan_hypothesis;
    ConditionResult input_reach;
    ConditionResult modified_pairs;
    ConditionResult common_independence;
};

struct TheoremReport {
    Verdict verdict;
    Conditions conditions;
    std::optional<TransformPair> transform;
    std::optional<SpectralSummary> summary;
    std::optional<Verdict> network_pair;  // homogeneous with diagonal J: PBH on (C, D)
    std::vector<std::string> notes;
};

/**
 * user_t, when given, is verified and never trusted: a failing similarity or
 * commutation check throws InvalidInput. Otherwise T is searched with its
 * pattern confined to the classes of identical nodes (or unconstrained when
 * every node is identical).
 */
TransformResult construct_admissible_T(const NetworkedSystem& sys, const Tolerances& tol,
                                       const std::optional<Matrix>& user_t = std::nullopt);

/// Blockwise form: |t_ij (A_i - A_j)| <= residual_rel |t| max|A_k| for all i, j.
bool commutation_check(const Matrix& t, const NetworkedSystem& sys, const Tolerances& tol);

SpectralSummary build_spectral_summary(const NetworkedSystem& sys, const TransformPair& tp, const Tolerances& tol);

ConditionResult check_jordan_hypothesis(const SpectralSummary& summary, const TransformPair& tp, const Matrix& h,
                                        const Tolerances& tol);
ConditionResult check_input_reach(const TransformPair& tp, const NetworkedSystem& sys, const Tolerances& tol);
ConditionResult check_modified_pairs(const NetworkedSystem& sys, const TransformPair& tp, const Tolerances& tol,
                                     const SpectralSummary* summary = nullptr);
ConditionResult check_common_eig_independence(const SpectralSummary& summary, const TransformPair& tp,
                                              const NetworkedSystem& sys, const Tolerances& tol);

TheoremReport theorem1_verdict(const NetworkedSystem& sys, const Tolerances& tol,
                               const std::optional<Matrix>& user_t = std::nullopt);
/// Requires a single class of identical nodes.
TheoremReport homogeneous_verdict(const NetworkedSystem& sys, const Tolerances& tol,
                                  const std::optional<Matrix>& user_t = std::nullopt);
/// Dispatches to homogeneous_verdict when all nodes are identical.
TheoremReport theorem_verdict(const NetworkedSystem& sys, const Tolerances& tol,
                              const std::optional<Matrix>& user_t = std::nullopt);

struct LiftedEigenvector {
    int node = 0;
    Complex value;
    RowVector vector;  // e_i T (x) xi
};

std::vector<LiftedEigenvector> reconstruct_left_eigenvectors(const SpectralSummary& summary, const TransformPair& tp);

/// Uncontrollable when some row of T D vanishes and the lifted witness is a genuine eigenvector.
Verdict corollary_eTD(const NetworkedSystem& sys, const TransformPair& tp, const Tolerances& tol);

/// Node with a zero row of C (no incoming edges) and (A_j, B) uncontrollable.
Verdict source_node_check(const NetworkedSystem& sys, const Tolerances& tol);
/// Node with a zero column of C whose left eigenvectors all annihilate H and (A_j, B) uncontrollable.
Verdict sink_node_check(const NetworkedSystem& sys, const Tolerances& tol);

}  // namespace netctrl
