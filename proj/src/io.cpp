#include "netctrl/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace netctrl {

Tolerances ToleranceOverrides::apply(Tolerances base) const {
    if (rank_rel) {
        base.rank_rel = *rank_rel;
    }
    if (eig_cluster_rel) {
        base.eig_cluster_rel = *eig_cluster_rel;
    }
    if (residual_rel) {
        base.residual_rel = *residual_rel;
    }
    return base;
}

namespace {

// DOM builder that keeps the source text of every decimal number. Decimals
// are stored as binary values, which JSON text itself can never produce.
class RawSax {
  public:
    Json root;

    bool null() { return add(nullptr); }
    bool boolean(bool b) { return add(b); }
    bool number_integer(Json::number_integer_t v) { return add(v); }
    bool number_unsigned(Json::number_unsigned_t v) { return add(v); }
    bool number_float(Json::number_float_t, const Json::string_t& raw) {
        return add(Json::binary(Json::binary_t::container_type(raw.begin(), raw.end())));
    }
    bool string(Json::string_t& s) { return add(s); }
    bool binary(Json::binary_t& b) { return add(Json::binary(b)); }
    bool start_object(std::size_t) {
        stack_.push_back(slot(Json::object()));
        return true;
    }
    bool key(Json::string_t& k) {
        key_ = k;
        return true;
    }
    bool end_object() {
        stack_.pop_back();
        return true;
    }
    bool start_array(std::size_t) {
        stack_.push_back(slot(Json::array()));
        return true;
    }
    bool end_array() {
        stack_.pop_back();
        return true;
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
        throw InvalidInput(std::string("malformed JSON: ") + ex.what());
    }

  private:
    std::vector<Json*> stack_;
    std::string key_;

    Json* slot(Json v) {
        if (stack_.empty()) {
            root = std::move(v);
            return &root;
        }
        Json& top = *stack_.back();
        if (top.is_array()) {
            top.push_back(std::move(v));
            return &top.back();
        }
        Json& s = top[key_];
        s = std::move(v);
        return &s;
    }
    bool add(Json v) {
        slot(std::move(v));
        return true;
    }
};

Json parse_raw(const std::string& text) {
    RawSax sax;
    Json::sax_parse(text, &sax);
    return std::move(sax.root);
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw InvalidInput(path + ": " + msg); }

struct Entry {
    Complex z;
    std::optional<Rational> q;
};

double decimal_to_double(const std::string& text, const std::string& path) {
    double x = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && text.front() == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last || !std::isfinite(x)) {
        fail(path, "number out of range: " + text);
    }
    return x;
}

Entry parse_scalar(const Json& j, const std::string& path) {
    Entry e;
    if (j.is_number_unsigned()) {
        const auto v = j.get<Json::number_unsigned_t>();
        e.q = Rational(v);
        e.z = static_cast<double>(v);
    } else if (j.is_number_integer()) {
        const auto v = j.get<Json::number_integer_t>();
        e.q = Rational(v);
        e.z = static_cast<double>(v);
    } else if (j.is_binary()) {
        const auto& bytes = j.get_binary();
        const std::string raw(bytes.begin(), bytes.end());
        try {
            e.q = parse_rational(raw);
        } catch (const std::exception& ex) {
            fail(path, ex.what());
        }
        e.z = decimal_to_double(raw, path);
    } else if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        try {
            e.q = parse_rational(s);
        } catch (const std::exception& ex) {
            fail(path, ex.what());
        }
        if (s.find('/') == std::string::npos) {
            e.z = decimal_to_double(s, path);
        } else {
            const double x = e.q->convert_to<double>();
            if (!std::isfinite(x)) {
                fail(path, "number out of range: " + s);
            }
            e.z = x;
        }
    } else {
        fail(path, "expected a number or a \"p/q\" string");
    }
    return e;
}

Entry parse_entry(const Json& j, const std::string& path) {
    if (j.is_array()) {
        if (j.size() != 2) {
            fail(path, "complex entries are [re, im] pairs");
        }
        const Entry re = parse_scalar(j[0], path + "[0]");
        const Entry im = parse_scalar(j[1], path + "[1]");
        Entry e;
        e.z = Complex(re.z.real(), im.z.real());
        if (im.q && *im.q == 0) {
            e.q = re.q;
        }
        return e;
    }
    return parse_scalar(j, path);
}

struct ParsedMatrix {
    Matrix m;
    std::optional<QMatrix> q;
};

// Nested rows, or a flat row-major list when the shape is known (rows, cols > 0).
ParsedMatrix parse_matrix(const Json& j, const std::string& path, int rows, int cols) {
    if (!j.is_array() || j.empty()) {
        fail(path, "expected a non-empty array");
    }
    const bool nested = std::all_of(j.begin(), j.end(), [](const Json& x) { return x.is_array(); });
    std::vector<std::vector<Entry>> grid;
    if (nested) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            const std::string rp = path + "[" + std::to_string(i) + "]";
            if (j[i].empty()) {
                fail(rp, "empty row");
            }
            if (!grid.empty() && j[i].size() != grid.front().size()) {
                fail(rp, "ragged row: expected " + std::to_string(grid.front().size()) + " entries");
            }
            std::vector<Entry> row;
            for (std::size_t k = 0; k < j[i].size(); ++k) {
                row.push_back(parse_entry(j[i][k], rp + "[" + std::to_string(k) + "]"));
            }
            grid.push_back(std::move(row));
        }
    } else {
        if (rows <= 0 || cols <= 0) {
            fail(path, "flat lists need known dimensions");
        }
        if (j.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
            fail(path, "flat list of " + std::to_string(j.size()) + " entries, expected " + std::to_string(rows) + "x" +
                           std::to_string(cols));
        }
        for (int i = 0; i < rows; ++i) {
            std::vector<Entry> row;
            for (int k = 0; k < cols; ++k) {
                const auto idx = static_cast<std::size_t>(i * cols + k);
                row.push_back(parse_scalar(j[idx], path + "[" + std::to_string(idx) + "]"));
            }
            grid.push_back(std::move(row));
        }
    }
    ParsedMatrix out;
    const auto r = static_cast<int>(grid.size());
    const auto c = static_cast<int>(grid.front().size());
    out.m.resize(r, c);
    QMatrix q(r, c);
    bool exact = true;
    for (int i = 0; i < r; ++i) {
        for (int k = 0; k < c; ++k) {
            const Entry& e = grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            out.m(i, k) = e.z;
            if (e.q) {
                q(i, k) = *e.q;
            } else {
                exact = false;
            }
        }
    }
    if (exact) {
        out.q = std::move(q);
    }
    return out;
}

const Json& require_field(const Json& doc, const char* name) {
    if (!doc.contains(name)) {
        throw InvalidInput(std::string("missing field \"") + name + "\"");
    }
    return doc[name];
}

int parse_dim(const Json& dims, const char* name) {
    const std::string path = std::string("dims.") + name;
    if (!dims.contains(name)) {
        throw InvalidInput("missing field \"" + path + "\"");
    }
    const Json& v = dims[name];
    if (!v.is_number_integer()) {
        fail(path, "expected an integer");
    }
    const auto x = v.get<long long>();
    if (x < 1 || x > 100000) {
        fail(path, "out of range");
    }
    return static_cast<int>(x);
}

double parse_tolerance(const Json& j, const std::string& path) {
    const Entry e = parse_scalar(j, path);
    return e.z.real();
}

// True for [[[x, ...], ...], ...] with inner rows that are not complex pairs: a list of matrices.
bool looks_like_matrix_list(const Json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty() || !j[0][0].is_array()) {
        return false;
    }
    const Json& inner = j[0][0];
    return inner.size() != 2 || (!inner.empty() && inner[0].is_array());
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot read " + path);
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ParsedSystem parse_system_text(const std::string& text) {
    const Json doc = parse_raw(text);
    if (!doc.is_object()) {
        throw InvalidInput("system document must be a JSON object");
    }
    static const std::vector<std::string> known = {"version", "comment", "dims", "homogeneous", "node_matrices", "B",
                                                   "H", "C", "d", "T", "tolerances"};
    for (const auto& [k, v] : doc.items()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            throw InvalidInput("unknown field \"" + k + "\"");
        }
    }
    const Json& version = require_field(doc, "version");
    if (!version.is_string() || version.get<std::string>() != kSystemFormat) {
        fail("version", std::string("expected \"") + kSystemFormat + "\"");
    }
    const Json& dims = require_field(doc, "dims");
    if (!dims.is_object()) {
        fail("dims", "expected an object {N, n, m}");
    }
    ParsedSystem out;
    NetworkedSystem& sys = out.system;
    sys.dims = {parse_dim(dims, "N"), parse_dim(dims, "n"), parse_dim(dims, "m")};
    const auto [N, n, m] = sys.dims;

    bool homogeneous = false;
    if (doc.contains("homogeneous")) {
        if (!doc["homogeneous"].is_boolean()) {
            fail("homogeneous", "expected true or false");
        }
        homogeneous = doc["homogeneous"].get<bool>();
    }
    ExactEntries ex;
    bool exact = true;
    auto keep = [&](const ParsedMatrix& pm, QMatrix& dst) {
        if (pm.q) {
            dst = *pm.q;
        } else {
            exact = false;
        }
    };

    const Json& nodes = require_field(doc, "node_matrices");
    if (homogeneous) {
        const ParsedMatrix a = parse_matrix(nodes, "node_matrices", n, n);
        for (int i = 0; i < N; ++i) {
            sys.node_matrices.push_back(a.m);
            ex.node_matrices.emplace_back();
            keep(a, ex.node_matrices.back());
        }
    } else {
        if (!nodes.is_array()) {
            fail("node_matrices", "expected a list of matrices");
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const ParsedMatrix a = parse_matrix(nodes[i], "node_matrices[" + std::to_string(i) + "]", n, n);
            sys.node_matrices.push_back(a.m);
            ex.node_matrices.emplace_back();
            keep(a, ex.node_matrices.back());
        }
    }
    const Json& b = require_field(doc, "B");
    if (looks_like_matrix_list(b)) {
        fail("B", "one input matrix per node is not supported; the model has a single shared B");
    }
    const ParsedMatrix pb = parse_matrix(b, "B", n, m);
    const ParsedMatrix ph = parse_matrix(require_field(doc, "H"), "H", n, n);
    const ParsedMatrix pc = parse_matrix(require_field(doc, "C"), "C", N, N);
    sys.b = pb.m;
    sys.h = ph.m;
    sys.c = pc.m;
    keep(pb, ex.b);
    keep(ph, ex.h);
    keep(pc, ex.c);

    const Json& d = require_field(doc, "d");
    if (!d.is_array()) {
        fail("d", "expected a list of 0/1 entries");
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
        sys.control_selection.push_back(parse_scalar(d[i], "d[" + std::to_string(i) + "]").z.real());
    }
    if (exact) {
        sys.exact = std::move(ex);
    }

    if (doc.contains("T")) {
        out.t = parse_matrix(doc["T"], "T", N, N).m;
    }
    if (doc.contains("tolerances")) {
        const Json& t = doc["tolerances"];
        if (!t.is_object()) {
            fail("tolerances", "expected an object");
        }
        for (const auto& [k, v] : t.items()) {
            const std::string path = "tolerances." + k;
            if (k == "rank_rel") {
                out.tolerances.rank_rel = parse_tolerance(v, path);
            } else if (k == "eig_cluster_rel") {
                out.tolerances.eig_cluster_rel = parse_tolerance(v, path);
            } else if (k == "residual_rel") {
                out.tolerances.residual_rel = parse_tolerance(v, path);
            } else {
                fail(path, "unknown tolerance");
            }
        }
        out.tolerances.apply(Tolerances{}).require_valid();
    }
    require_valid(sys);
    return out;
}

ParsedSystem parse_system_file(const std::string& path) { return parse_system_text(read_file(path)); }

Matrix parse_matrix_text(const std::string& text, const std::string& what) {
    const Json doc = parse_raw(text);
    if (doc.is_object()) {
        if (!doc.contains("T")) {
            throw InvalidInput(what + ": expected a matrix or an object with field \"T\"");
        }
        return parse_matrix(doc["T"], what + ".T", 0, 0).m;
    }
    return parse_matrix(doc, what, 0, 0).m;
}

Json number_json(double x) {
    if (!std::isfinite(x)) {
        return nullptr;
    }
    return x;
}

Json complex_json(Complex z) { return Json::array({number_json(z.real()), number_json(z.imag())}); }

Json eigenvalue_json(Complex z, const Tolerances& tol) {
    if (std::abs(z.imag()) <= tol.eig_cluster_rel * (1.0 + std::abs(z.real()))) {
        z = Complex(z.real(), 0.0);
    }
    return complex_json(z);
}

Json row_json(const RowVector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(complex_json(v(i)));
    }
    return out;
}

Json matrix_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.push_back(row_json(m.row(i)));
    }
    return out;
}

namespace {

Json exact_entry_json(const Rational& q) {
    if (denominator(q) == 1) {
        const auto& num = numerator(q);
        if (num >= std::numeric_limits<long long>::min() && num <= std::numeric_limits<long long>::max()) {
            return num.convert_to<long long>();
        }
    }
    return format_rational(q);
}

Json plain_entry_json(Complex z) {
    if (z.imag() == 0.0) {
        if (std::trunc(z.real()) == z.real() && std::abs(z.real()) < 9e15) {
            return static_cast<long long>(z.real());
        }
        return z.real();
    }
    return complex_json(z);
}

Json system_matrix_json(const Matrix& m, const QMatrix* q) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(q ? exact_entry_json((*q)(static_cast<int>(i), static_cast<int>(k))) : plain_entry_json(m(i, k)));
        }
        out.push_back(std::move(row));
    }
    return out;
}

void write_json(std::string& out, const Json& j, int depth);

void write_scalar(std::string& out, const Json& j) {
    if (j.is_number_float()) {
        const double x = j.get<double>();
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
        out.append(buf, ptr);
    } else {
        out += j.dump();
    }
}

bool is_flat(const Json& j) {
    return std::all_of(j.begin(), j.end(), [](const Json& x) {
        return x.is_primitive() || (x.is_array() && std::all_of(x.begin(), x.end(), [](const Json& y) { return y.is_primitive(); }));
    });
}

void write_inline(std::string& out, const Json& j) {
    if (j.is_array()) {
        out += '[';
        bool first = true;
        for (const auto& x : j) {
            out += first ? "" : ", ";
            first = false;
            write_inline(out, x);
        }
        out += ']';
    } else {
        write_scalar(out, j);
    }
}

void write_json(std::string& out, const Json& j, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            out += first ? "" : ",\n";
            first = false;
            out += pad + Json(k).dump() + ": ";
            write_json(out, v, depth + 1);
        }
        out += "\n" + close + "}";
    } else if (j.is_array()) {
        if (j.empty() || is_flat(j)) {
            write_inline(out, j);
            return;
        }
        out += "[\n";
        bool first = true;
        for (const auto& v : j) {
            out += first ? "" : ",\n";
            first = false;
            out += pad;
            write_json(out, v, depth + 1);
        }
        out += "\n" + close + "]";
    } else {
        write_scalar(out, j);
    }
}

}  // namespace

std::string dump_json(const Json& j) {
    std::string out;
    write_json(out, j, 0);
    out += '\n';
    return out;
}

std::string render_system(const NetworkedSystem& sys, const std::optional<Matrix>& t,
                          const std::optional<Tolerances>& tol, const std::string& comment) {
    Json doc;
    doc["version"] = kSystemFormat;
    if (!comment.empty()) {
        doc["comment"] = comment;
    }
    doc["dims"] = {{"N", sys.dims.N}, {"n", sys.dims.n}, {"m", sys.dims.m}};
    const ExactEntries* ex = sys.exact ? &*sys.exact : nullptr;
    Json nodes = Json::array();
    for (std::size_t i = 0; i < sys.node_matrices.size(); ++i) {
        nodes.push_back(system_matrix_json(sys.node_matrices[i], ex ? &ex->node_matrices[i] : nullptr));
    }
    doc["node_matrices"] = std::move(nodes);
    doc["B"] = system_matrix_json(sys.b, ex ? &ex->b : nullptr);
    doc["H"] = system_matrix_json(sys.h, ex ? &ex->h : nullptr);
    doc["C"] = system_matrix_json(sys.c, ex ? &ex->c : nullptr);
    Json d = Json::array();
    for (double x : sys.control_selection) {
        d.push_back(plain_entry_json(x));
    }
    doc["d"] = std::move(d);
    if (t) {
        doc["T"] = system_matrix_json(*t, nullptr);
    }
    if (tol) {
        doc["tolerances"] = tolerances_json(*tol);
    }
    return dump_json(doc);
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericalFailure("SHA-256 digest failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return os.str();
}

Json tolerances_json(const Tolerances& tol) {
    return {{"rank_rel", tol.rank_rel}, {"eig_cluster_rel", tol.eig_cluster_rel}, {"residual_rel", tol.residual_rel}};
}

Json verdict_json(const Verdict& v, const Tolerances& tol) {
    Json j;
    j["method"] = v.method;
    j["status"] = std::string(to_string(v.status));
    if (!v.condition.empty()) {
        j["failed_condition"] = v.condition;
    }
    if (v.node) {
        j["node"] = *v.node + 1;
    }
    if (v.rank) {
        j["rank"] = *v.rank;
    }
    j["margin"] = number_json(v.margin);
    j["detail"] = v.detail;
    if (v.witness) {
        j["witness"] = {{"eigenvalue", eigenvalue_json(v.witness->value, tol)}, {"vector", row_json(v.witness->vector)}};
    }
    return j;
}

namespace {

Json condition_json(const ConditionResult& c, const Tolerances& tol) {
    Json j;
    j["status"] = std::string(to_string(c.status));
    if (c.node) {
        j["node"] = *c.node + 1;
    }
    if (c.sigma) {
        j["sigma"] = eigenvalue_json(*c.sigma, tol);
    }
    if (c.status != ConditionStatus::NotEvaluated) {
        j["margin"] = number_json(c.margin);
    }
    j["detail"] = c.detail;
    if (c.local_witness) {
        j["local_witness"] = {{"eigenvalue", eigenvalue_json(c.local_witness->value, tol)},
                              {"vector", row_json(c.local_witness->vector)}};
    }
    return j;
}

}  // namespace

Json theorem_json(const TheoremReport& r, const Tolerances& tol) {
    Json j;
    j["verdict"] = verdict_json(r.verdict, tol);
    const auto& c = r.conditions;
    j["condition_results"] = {{"commutation", condition_json(c.commutation, tol)},
                              {"jordan_hypothesis", condition_json(c.jordan_hypothesis, tol)},
                              {"input_reach", condition_json(c.input_reach, tol)},
                              {"modified_pairs", condition_json(c.modified_pairs, tol)},
                              {"common_independence", condition_json(c.common_independence, tol)}};
    if (r.transform) {
        const auto& tp = *r.transform;
        Json lambdas = Json::array();
        for (const auto& l : tp.lambdas) {
            lambdas.push_back(eigenvalue_json(l, tol));
        }
        Json blocks = Json::array();
        for (const auto& b : tp.blocks) {
            blocks.push_back({{"start", b.start + 1}, {"length", b.length}});
        }
        j["transform"] = {{"source", tp.source}, {"T", matrix_json(tp.t)}, {"J", matrix_json(tp.j)},
                          {"lambdas", lambdas}, {"blocks", blocks}};
    }
    if (r.summary) {
        const auto& s = *r.summary;
        Json nodes = Json::array();
        for (const auto& ns : s.nodes) {
            Json pairs = Json::array();
            for (const auto& p : ns.pairs) {
                Json vecs = Json::array();
                for (const auto& v : p.vectors) {
                    vecs.push_back(row_json(v));
                }
                pairs.push_back({{"eigenvalue", eigenvalue_json(p.value, tol)},
                                 {"alg_mult", p.alg_mult},
                                 {"geom_mult", p.geom_mult},
                                 {"margin", number_json(p.margin)},
                                 {"left_eigenvectors", vecs}});
            }
            nodes.push_back({{"node", ns.node + 1}, {"lambda", eigenvalue_json(ns.lambda, tol)}, {"eigenpairs", pairs}});
        }
        Json sigma = Json::array();
        for (const auto& z : s.sigma_f) {
            sigma.push_back(eigenvalue_json(z, tol));
        }
        Json groups = Json::array();
        for (const auto& g : s.common_groups) {
            Json nodes1 = Json::array();
            for (int i : g.nodes) {
                nodes1.push_back(i + 1);
            }
            groups.push_back({{"sigma", eigenvalue_json(g.sigma, tol)},
                              {"nodes", nodes1},
                              {"margin", number_json(g.margin)},
                              {"fragile", g.fragile}});
        }
        j["spectral_summary"] = {{"nodes", nodes},
                                 {"sigma_F", sigma},
                                 {"common_groups", groups},
                                 {"cluster_margin", number_json(s.cluster_margin)}};
    }
    if (r.network_pair) {
        j["network_pair"] = verdict_json(*r.network_pair, tol);
    }
    j["notes"] = r.notes;
    return j;
}

Json gen_spec_json(const GenSpec& g) {
    return {{"seed", g.seed},
            {"max_nodes", g.max_nodes},
            {"node_dim", g.node_dim},
            {"input_dim", g.input_dim},
            {"entry_bound", g.entry_bound},
            {"homogeneous", g.homogeneous},
            {"ensure_diagonalizable", g.ensure_diagonalizable},
            {"plant_jordan", g.plant_jordan},
            {"control_density", g.control_density}};
}

Json cross_report_json(const CrossReport& r) {
    Tolerances tol;
    Json statuses;
    Json margins;
    for (const Verdict* v : {&r.theorem, &r.kalman, &r.pbh, &r.source, &r.sink}) {
        statuses[v->method] = std::string(to_string(v->status));
        margins[v->method] = number_json(v->margin);
    }
    if (r.corollary) {
        statuses[r.corollary->method] = std::string(to_string(r.corollary->status));
    }
    Json j;
    j["id"] = r.id;
    j["seed"] = r.seed;
    j["dims"] = {{"N", r.dims.N}, {"n", r.dims.n}, {"m", r.dims.m}};
    j["statuses"] = statuses;
    j["margins"] = margins;
    j["transform_source"] = r.transform_source;
    j["agreement"] = r.agreement;
    j["fragile"] = r.fragile;
    j["disagreement"] = r.disagreement;
    if (r.kalman.rank) {
        j["kalman_rank"] = *r.kalman.rank;
    }
    if (!r.errors.empty()) {
        j["errors"] = r.errors;
    }
    if (r.disagreement) {
        j["theorem_detail"] = r.theorem.detail;
    }
    return j;
}

Json batch_summary_json(const BatchSummary& s) {
    Json counts;
    for (const auto& [method, by_status] : s.counts) {
        Json m;
        for (const auto& [status, n] : by_status) {
            m[status] = n;
        }
        counts[method] = m;
    }
    Json sources;
    for (const auto& [k, n] : s.transform_sources) {
        sources[k] = n;
    }
    return {{"trials", s.trials},
            {"agreements", s.agreements},
            {"disagreements", s.disagreements},
            {"fragile", s.fragile},
            {"fragile_rate", s.fragile_rate()},
            {"fragile_disagreements", s.fragile_disagreements},
            {"theorem_fallbacks", s.theorem_fallbacks},
            {"errors", s.errors},
            {"transform_sources", sources},
            {"counts", counts}};
}

CheckResult run_check(const NetworkedSystem& sys, const Tolerances& tol, const std::string& method,
                      const std::optional<Matrix>& user_t, std::string digest) {
    tol.require_valid();
    require_valid(sys);
    if (method != "theorem" && method != "kalman" && method != "pbh" && method != "all") {
        throw InvalidInput("unknown method \"" + method + "\"");
    }
    CheckResult r;
    r.digest = std::move(digest);
    r.dims = sys.dims;
    r.tol = tol;
    r.method = method;
    const bool all = method == "all";
    if (all || method == "theorem") {
        r.theorem = theorem_verdict(sys, tol, user_t);
        if (r.theorem->transform) {
            r.corollary = corollary_eTD(sys, *r.theorem->transform, tol);
        }
        r.source = source_node_check(sys, tol);
        r.sink = sink_node_check(sys, tol);
    }
    if (all || method == "kalman" || method == "pbh") {
        const AssembledPair pair = assemble(sys);
        if (all || method == "kalman") {
            r.kalman = kalman_controllable(pair, tol);
        }
        if (all || method == "pbh") {
            r.pbh = pbh_controllable(pair, tol);
        }
    }
    return r;
}

Json check_report_json(const CheckResult& r) {
    const Tolerances& tol = r.tol;
    Json j;
    j["tool"] = {{"name", "netctrl"}, {"version", kToolVersion}};
    j["input_digest"] = "sha256:" + r.digest;
    j["method"] = r.method;
    j["dims"] = {{"N", r.dims.N}, {"n", r.dims.n}, {"m", r.dims.m}};
    j["tolerances"] = tolerances_json(tol);
    Json verdicts;
    Json margins;
    auto put = [&](const char* key, const std::optional<Verdict>& v) {
        if (v) {
            verdicts[key] = verdict_json(*v, tol);
            margins[key] = number_json(v->margin);
        }
    };
    if (r.theorem) {
        put("theorem", r.theorem->verdict);
    }
    put("corollary_eTD", r.corollary);
    put("source_node", r.source);
    put("sink_node", r.sink);
    put("kalman", r.kalman);
    put("pbh", r.pbh);
    j["verdicts"] = verdicts;
    j["margins"] = margins;
    if (r.theorem) {
        Json t = theorem_json(*r.theorem, tol);
        t.erase("verdict");
        j["theorem"] = std::move(t);
    }
    return j;
}

}  // namespace netctrl
