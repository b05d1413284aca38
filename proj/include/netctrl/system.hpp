#pragma once

#include "netctrl/exact.hpp"
#include "netctrl/matrix.hpp"

#include <optional>
#include <string>
#include <vector>

namespace netctrl {

struct Dims {
    int N = 0;  // nodes
    int n = 0;  // node state dimension
    int m = 0;  // input dimension

    bool operator==(const Dims&) const = default;
};

/// Exact rational copies of the real-valued inputs, kept when the source had them.
struct ExactEntries {
    std::vector<QMatrix> node_matrices;
    QMatrix b;
    QMatrix h;
    QMatrix c;

    bool operator==(const ExactEntries&) const = default;
};

/**
 * N coupled nodes x_i' = A_i x_i + sum_j c_ij H x_j + d_i B u_i.
 * c_ij != 0 means an edge from node j into node i.
 */
struct NetworkedSystem {
    Dims dims;
    std::vector<Matrix> node_matrices;
    Matrix b;
    Matrix h;
    Matrix c;
    std::vector<double> control_selection;
    std::optional<ExactEntries> exact;

    Matrix d() const;
    Matrix block_a() const { return block_diag(node_matrices); }
};

bool operator==(const NetworkedSystem& a, const NetworkedSystem& b);

struct Violation {
    std::string path;  // e.g. node_matrices[0], control_selection[1]
    std::string message;
};

std::vector<Violation> validate(const NetworkedSystem& sys);
std::string describe(const std::vector<Violation>& violations);
/// Throws InvalidInput carrying every violation.
void require_valid(const NetworkedSystem& sys);

/// F = blockdiag(A_i) + C (x) H and G = D (x) B.
struct AssembledPair {
    Matrix f;
    Matrix g;
};

AssembledPair assemble(const NetworkedSystem& sys);

/// Classes of nodes with exactly equal A_i, each sorted, ordered by first member.
using Partition = std::vector<std::vector<int>>;
Partition node_partition(const NetworkedSystem& sys, const Tolerances& tol);

/// allowed[r][s] is true when r and s share a class.
std::vector<std::vector<bool>> class_pattern(const Partition& p, int n_nodes);

bool is_homogeneous(const NetworkedSystem& sys);

/// Nodes whose row (no incoming edges) or column (no outgoing edges) of C is exactly zero.
std::vector<int> source_nodes(const NetworkedSystem& sys);
std::vector<int> sink_nodes(const NetworkedSystem& sys);

}  // namespace netctrl
