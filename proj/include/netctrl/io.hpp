#pragma once

// System documents in, reports out. Both are JSON; reports are written with a
// fixed key order and 17 significant digits so that identical inputs give
// byte-identical output.

#include "netctrl/analyzer.hpp"
#include "netctrl/oracle.hpp"
#include "netctrl/system.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace netctrl {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSystemFormat = "netctrl-system/1";

struct ToleranceOverrides {
    std::optional<double> rank_rel;
    std::optional<double> eig_cluster_rel;
    std::optional<double> residual_rel;

    Tolerances apply(Tolerances base) const;
};

struct ParsedSystem {
    NetworkedSystem system;
    std::optional<Matrix> t;
    ToleranceOverrides tolerances;
};

/**
 * Entries may be integers, decimals (read exactly from their text), "p/q"
 * strings, or [re, im] pairs inside nested rows. Matrices are nested rows or,
 * when the shape is implied by dims, a flat row-major list. The system is
 * validated before returning; every failure is an InvalidInput naming the
 * field path.
 */
ParsedSystem parse_system_text(const std::string& text);
ParsedSystem parse_system_file(const std::string& path);

/// A bare matrix document, or an object holding it under "T".
Matrix parse_matrix_text(const std::string& text, const std::string& what);

std::string read_file(const std::string& path);

/// Exact rationals are written as integers or "p/q"; other entries with 17 significant digits.
std::string render_system(const NetworkedSystem& sys, const std::optional<Matrix>& t = std::nullopt,
                          const std::optional<Tolerances>& tol = std::nullopt, const std::string& comment = "");

std::string sha256_hex(std::string_view bytes);

/// Pretty printer with 17 significant digits for every floating-point number.
std::string dump_json(const Json& j);

Json number_json(double x);  // null when not finite
Json complex_json(Complex z);
Json eigenvalue_json(Complex z, const Tolerances& tol);  // tiny imaginary parts suppressed
Json row_json(const RowVector& v);
Json matrix_json(const Matrix& m);
Json tolerances_json(const Tolerances& tol);
Json verdict_json(const Verdict& v, const Tolerances& tol);
Json theorem_json(const TheoremReport& r, const Tolerances& tol);
Json cross_report_json(const CrossReport& r);
Json batch_summary_json(const BatchSummary& s);
Json gen_spec_json(const GenSpec& g);

struct CheckResult {
    std::string digest;
    Dims dims;
    Tolerances tol;
    std::string method;
    std::optional<TheoremReport> theorem;
    std::optional<Verdict> corollary;
    std::optional<Verdict> source;
    std::optional<Verdict> sink;
    std::optional<Verdict> kalman;
    std::optional<Verdict> pbh;
};

/// method is one of theorem, kalman, pbh, all.
CheckResult run_check(const NetworkedSystem& sys, const Tolerances& tol, const std::string& method,
                      const std::optional<Matrix>& user_t, std::string digest);
Json check_report_json(const CheckResult& r);

}  // namespace netctrl
