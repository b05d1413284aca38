#include "netctrl/oracle.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace netctrl {

void GenSpec::require_valid() const {
    if (max_nodes < 1 || node_dim < 1 || input_dim < 1 || entry_bound < 1) {
        throw InvalidInput("gen spec: max_nodes, node_dim, input_dim and entry_bound must be positive");
    }
    if (!(control_density >= 0.0 && control_density <= 1.0)) {
        throw InvalidInput("gen spec: control_density must lie in [0, 1]");
    }
    if (plant_jordan && max_nodes < 2) {
        throw InvalidInput("gen spec: plant_jordan needs max_nodes >= 2");
    }
    if (plant_jordan && ensure_diagonalizable) {
        throw InvalidInput("gen spec: plant_jordan and ensure_diagonalizable are mutually exclusive");
    }
}

namespace {

using IMat = std::vector<std::vector<long long>>;
using Rng = std::mt19937_64;

IMat zeros(int r, int c) { return IMat(static_cast<std::size_t>(r), std::vector<long long>(static_cast<std::size_t>(c), 0)); }

IMat identity(int n) {
    IMat m = zeros(n, n);
    for (int i = 0; i < n; ++i) {
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    }
    return m;
}

long long draw(Rng& rng, long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng); }

bool coin(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

IMat random_int(Rng& rng, int r, int c, int b) {
    IMat m = zeros(r, c);
    for (auto& row : m) {
        for (auto& x : row) {
            x = draw(rng, -b, b);
        }
    }
    return m;
}

IMat mul(const IMat& a, const IMat& b) {
    IMat out = zeros(static_cast<int>(a.size()), static_cast<int>(b.front().size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < b.size(); ++k) {
            for (std::size_t j = 0; j < b.front().size(); ++j) {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    return out;
}

Matrix to_matrix(const IMat& m) {
    Matrix out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.front().size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(m[i][j]);
        }
    }
    return out;
}

// Unimodular P with its exact inverse; row operations only between nodes of the same type when typed.
std::pair<IMat, IMat> unimodular(Rng& rng, const std::vector<int>& type_of, bool class_block) {
    const int n = static_cast<int>(type_of.size());
    IMat p = identity(n);
    IMat pinv = identity(n);
    for (int step = 0; step < 2 * n; ++step) {
        const auto r = static_cast<std::size_t>(draw(rng, 0, n - 1));
        const auto s = static_cast<std::size_t>(draw(rng, 0, n - 1));
        if (r == s || (class_block && type_of[r] != type_of[s])) {
            continue;
        }
        const long long k = coin(rng, 0.5) ? 1 : -1;
        // P <- E P with E = I + k e_r e_s^T; P^-1 <- P^-1 E^-1
        for (int j = 0; j < n; ++j) {
            p[r][static_cast<std::size_t>(j)] += k * p[s][static_cast<std::size_t>(j)];
        }
        for (int i = 0; i < n; ++i) {
            pinv[static_cast<std::size_t>(i)][s] -= k * pinv[static_cast<std::size_t>(i)][r];
        }
    }
    return {p, pinv};
}

IMat diagonal_ints(Rng& rng, int n, int b) {
    IMat d = zeros(n, n);
    for (int i = 0; i < n; ++i) {
        d[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = draw(rng, -b, b);
    }
    return d;
}

IMat planted_jordan(Rng& rng, int n, int b) {
    IMat j = zeros(n, n);
    int pos = 0;
    int first = static_cast<int>(draw(rng, 2, n));
    while (pos < n) {
        const int len = pos == 0 ? first : static_cast<int>(draw(rng, 1, std::min(2, n - pos)));
        const long long lambda = draw(rng, -b, b);
        for (int i = pos; i < pos + len; ++i) {
            j[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = lambda;
            if (i + 1 < pos + len) {
                j[static_cast<std::size_t>(i)][static_cast<std::size_t>(i + 1)] = 1;
            }
        }
        pos += len;
    }
    return j;
}

IMat random_c(Rng& rng, const GenSpec& spec, const std::vector<int>& type_of) {
    const int n = static_cast<int>(type_of.size());
    const int b = spec.entry_bound;
    if (spec.plant_jordan) {
        auto [p, pinv] = unimodular(rng, type_of, coin(rng, 0.5));
        return mul(mul(pinv, planted_jordan(rng, n, b)), p);
    }
    switch (draw(rng, 0, 2)) {
        case 0:
            return random_int(rng, n, n, b);
        case 1: {
            IMat c = zeros(n, n);
            for (auto& row : c) {
                for (auto& x : row) {
                    x = coin(rng, 0.3) ? draw(rng, -b, b) : 0;
                }
            }
            return c;
        }
        default: {
            // admissible by construction: T = P keeps the pattern of identical nodes
            auto [p, pinv] = unimodular(rng, type_of, true);
            return mul(mul(pinv, diagonal_ints(rng, n, b)), p);
        }
    }
}

bool diagonalizable(const IMat& c, const Tolerances& tol) {
    int total = 0;
    for (const auto& p : eigen_left(to_matrix(c), tol)) {
        total += p.geom_mult;
    }
    return total == static_cast<int>(c.size());
}

}  // namespace

NetworkedSystem generate(const GenSpec& spec, const Tolerances& tol) {
    spec.require_valid();
    Rng rng(spec.seed);
    const int lo = spec.plant_jordan ? 2 : 1;
    const int n_nodes = static_cast<int>(draw(rng, lo, spec.max_nodes));
    const int n = spec.node_dim;
    const int m = spec.input_dim;
    const int b = spec.entry_bound;

    const int types = spec.homogeneous ? 1 : static_cast<int>(draw(rng, 1, n_nodes));
    std::vector<int> type_of(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
        type_of[static_cast<std::size_t>(i)] = i < types ? i : static_cast<int>(draw(rng, 0, types - 1));
    }
    std::shuffle(type_of.begin(), type_of.end(), rng);
    std::vector<IMat> type_a;
    for (int k = 0; k < types; ++k) {
        type_a.push_back(random_int(rng, n, n, b));
    }
    const IMat bm = random_int(rng, n, m, b);

    IMat h;
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double p_zero = spec.plant_jordan ? 0.4 : 0.15;
    if (u < p_zero) {
        h = zeros(n, n);
    } else if (u < 2 * p_zero) {
        h = mul(random_int(rng, n, 1, b), random_int(rng, 1, n, b));
    } else {
        h = random_int(rng, n, n, b);
    }

    std::vector<double> d(static_cast<std::size_t>(n_nodes));
    for (auto& x : d) {
        x = coin(rng, spec.control_density) ? 1.0 : 0.0;
    }

    IMat c = random_c(rng, spec, type_of);
    if (spec.ensure_diagonalizable) {
        int tries = 0;
        while (!diagonalizable(c, tol)) {
            if (++tries >= 1000) {
                throw GenerationFailure("no diagonalizable C after 1000 draws");
            }
            c = random_c(rng, spec, type_of);
        }
    }

    NetworkedSystem sys;
    sys.dims = {n_nodes, n, m};
    ExactEntries ex;
    for (int i = 0; i < n_nodes; ++i) {
        const IMat& a = type_a[static_cast<std::size_t>(type_of[static_cast<std::size_t>(i)])];
        sys.node_matrices.push_back(to_matrix(a));
        ex.node_matrices.push_back(QMatrix::from_ints(a));
    }
    sys.b = to_matrix(bm);
    sys.h = to_matrix(h);
    sys.c = to_matrix(c);
    sys.control_selection = d;
    ex.b = QMatrix::from_ints(bm);
    ex.h = QMatrix::from_ints(h);
    ex.c = QMatrix::from_ints(c);
    sys.exact = std::move(ex);
    return sys;
}

std::uint64_t instance_seed(std::uint64_t batch_seed, std::uint64_t id) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = batch_seed + 0x9E3779B97F4A7C15ULL * (id + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

template <typename F>
Verdict guarded(const char* method, std::vector<std::string>& errors, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        Verdict v;
        v.method = method;
        v.detail = std::string("error: ") + e.what();
        errors.push_back(std::string(method) + ": " + e.what());
        return v;
    }
}

}  // namespace

CrossReport cross_validate(const NetworkedSystem& sys, const Tolerances& tol, int kalman_cap) {
    require_valid(sys);
    CrossReport r;
    r.dims = sys.dims;
    const AssembledPair pair = assemble(sys);
    std::optional<TransformPair> tp;
    r.theorem = guarded("theorem", r.errors, [&] {
        TheoremReport rep = theorem_verdict(sys, tol);
        if (rep.transform) {
            tp = rep.transform;
            r.transform_source = rep.transform->source;
        }
        return rep.verdict;
    });
    r.kalman = guarded("kalman", r.errors, [&] { return kalman_controllable(pair, tol, kalman_cap); });
    r.pbh = guarded("pbh", r.errors, [&] { return pbh_controllable(pair, tol); });
    r.source = guarded("source_node", r.errors, [&] { return source_node_check(sys, tol); });
    r.sink = guarded("sink_node", r.errors, [&] { return sink_node_check(sys, tol); });
    if (tp) {
        r.corollary = guarded("corollary_eTD", r.errors, [&] { return corollary_eTD(sys, *tp, tol); });
    }

    std::optional<Status> seen;
    auto fold = [&](const Verdict& v) {
        if (v.status == Status::NotApplicable) {
            return;
        }
        if (seen && *seen != v.status) {
            r.agreement = false;
        }
        seen = v.status;
    };
    for (const Verdict* v : {&r.theorem, &r.kalman, &r.pbh, &r.source, &r.sink}) {
        fold(*v);
    }
    if (r.corollary) {
        fold(*r.corollary);
    }
    for (const Verdict* v : {&r.theorem, &r.kalman, &r.pbh}) {
        if (v->status != Status::NotApplicable) {
            r.min_margin = std::min(r.min_margin, v->margin);
        }
    }
    r.fragile = r.min_margin < 10.0;
    r.disagreement = !r.agreement && !r.fragile;
    return r;
}

namespace {

CrossReport one_instance(const GenSpec& spec, std::uint64_t id, const Tolerances& tol) {
    GenSpec local = spec;
    local.seed = instance_seed(spec.seed, id);
    CrossReport r;
    try {
        NetworkedSystem sys = generate(local, tol);
        r = cross_validate(sys, tol);
        if (r.disagreement || !r.errors.empty()) {
            r.system = std::move(sys);
        }
    } catch (const std::exception& e) {
        r.errors.push_back(std::string("generate: ") + e.what());
    }
    r.id = id;
    r.seed = local.seed;
    return r;
}

}  // namespace

std::vector<CrossReport> run_batch(const GenSpec& spec, int trials, const Tolerances& tol) {
    spec.require_valid();
    std::vector<CrossReport> out(static_cast<std::size_t>(std::max(trials, 0)));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < trials; ++i) {
        out[static_cast<std::size_t>(i)] = one_instance(spec, static_cast<std::uint64_t>(i), tol);
    }
    return out;
}

std::vector<CrossReport> run_batch_serial(const GenSpec& spec, int trials, const Tolerances& tol) {
    spec.require_valid();
    std::vector<CrossReport> out;
    for (int i = 0; i < trials; ++i) {
        out.push_back(one_instance(spec, static_cast<std::uint64_t>(i), tol));
    }
    return out;
}

BatchSummary summarize(const std::vector<CrossReport>& reports) {
    BatchSummary s;
    s.trials = static_cast<int>(reports.size());
    for (const auto& r : reports) {
        for (const Verdict* v : {&r.theorem, &r.kalman, &r.pbh, &r.source, &r.sink}) {
            if (!v->method.empty()) {
                ++s.counts[v->method][std::string(to_string(v->status))];
            }
        }
        if (r.corollary) {
            ++s.counts[r.corollary->method][std::string(to_string(r.corollary->status))];
        }
        s.agreements += r.agreement ? 1 : 0;
        s.disagreements += r.disagreement ? 1 : 0;
        s.fragile += r.fragile ? 1 : 0;
        s.fragile_disagreements += (!r.agreement && r.fragile) ? 1 : 0;
        s.theorem_fallbacks += r.theorem.status == Status::NotApplicable ? 1 : 0;
        s.errors += r.errors.empty() ? 0 : 1;
        ++s.transform_sources[r.transform_source.empty() ? "none" : r.transform_source];
    }
    return s;
}

}  // namespace netctrl
