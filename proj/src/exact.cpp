#include "netctrl/exact.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <regex>
#include <sstream>

namespace netctrl {

namespace mp = boost::multiprecision;

QMatrix QMatrix::identity(int n) {
    QMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = 1;
    }
    return m;
}

QMatrix QMatrix::from_ints(const std::vector<std::vector<long long>>& rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r == 0 ? 0 : static_cast<int>(rows.front().size());
    QMatrix m(r, c);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) {
            m(i, j) = Rational(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
    }
    return m;
}

QMatrix QMatrix::operator*(const QMatrix& o) const {
    if (cols_ != o.rows_) {
        throw InvalidInput("QMatrix product: shape mismatch");
    }
    QMatrix out(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int k = 0; k < cols_; ++k) {
            const Rational& a = (*this)(i, k);
            if (a == 0) {
                continue;
            }
            for (int j = 0; j < o.cols_; ++j) {
                out(i, j) += a * o(k, j);
            }
        }
    }
    return out;
}

QMatrix QMatrix::operator-(const QMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
        throw InvalidInput("QMatrix difference: shape mismatch");
    }
    QMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
        out.data_[i] = data_[i] - o.data_[i];
    }
    return out;
}

QMatrix QMatrix::shifted(const Rational& mu) const {
    QMatrix out = *this;
    for (int i = 0; i < std::min(rows_, cols_); ++i) {
        out(i, i) -= mu;
    }
    return out;
}

Matrix QMatrix::to_complex() const {
    Matrix m(rows_, cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) {
            m(i, j) = Complex(static_cast<double>((*this)(i, j)), 0.0);
        }
    }
    return m;
}

Rational rational_from_double(double x) {
    if (!std::isfinite(x)) {
        throw InvalidInput("rational_from_double: non-finite value");
    }
    if (x == 0.0) {
        return Rational(0);
    }
    int exp = 0;
    const double frac = std::frexp(x, &exp);
    const auto mant = static_cast<long long>(std::ldexp(frac, 53));
    exp -= 53;
    mp::cpp_int num(mant);
    mp::cpp_int den(1);
    if (exp >= 0) {
        num <<= exp;
    } else {
        den <<= -exp;
    }
    return Rational(num, den);
}

namespace {

// cpp_int reads a leading 0 as an octal prefix.
mp::cpp_int decimal_int(std::string digits) {
    bool negative = false;
    if (!digits.empty() && (digits.front() == '+' || digits.front() == '-')) {
        negative = digits.front() == '-';
        digits.erase(0, 1);
    }
    const auto first = digits.find_first_not_of('0');
    digits = first == std::string::npos ? std::string("0") : digits.substr(first);
    mp::cpp_int out(digits);
    return negative ? mp::cpp_int(-out) : out;
}

}  // namespace

Rational parse_rational(const std::string& text) {
    static const std::regex fraction(R"(^\s*([+-]?\d+)\s*/\s*(\d+)\s*$)");
    static const std::regex decimal(R"(^\s*([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, fraction)) {
        const mp::cpp_int p = decimal_int(m[1].str());
        const mp::cpp_int q = decimal_int(m[2].str());
        if (q == 0) {
            throw InvalidInput("zero denominator in \"" + text + "\"");
        }
        return Rational(p, q);
    }
    if (std::regex_match(text, m, decimal)) {
        const std::string int_part = m[2].str();
        const std::string frac_part = m[3].matched ? m[3].str() : std::string();
        if (int_part.empty() && frac_part.empty()) {
            throw InvalidInput("not a number: \"" + text + "\"");
        }
        long long exponent = 0;
        if (m[4].matched) {
            const std::string e = m[4].str();
            if (e.size() > 6) {
                throw InvalidInput("exponent out of range in \"" + text + "\"");
            }
            exponent = std::stoll(e);
        }
        const mp::cpp_int digits = decimal_int(int_part + frac_part);
        exponent -= static_cast<long long>(frac_part.size());
        mp::cpp_int scale = mp::pow(mp::cpp_int(10), static_cast<unsigned>(std::llabs(exponent)));
        Rational r = exponent >= 0 ? Rational(digits * scale) : Rational(digits, scale);
        if (m[1].str() == "-") {
            r = -r;
        }
        return r;
    }
    throw InvalidInput("not a number: \"" + text + "\"");
}

std::string format_rational(const Rational& r) {
    const mp::cpp_int num = mp::numerator(r);
    const mp::cpp_int den = mp::denominator(r);
    if (den == 1) {
        return num.str();
    }
    return num.str() + "/" + den.str();
}

std::optional<QMatrix> exact_from_complex(const Matrix& m) {
    QMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (m(i, j).imag() != 0.0 || !std::isfinite(m(i, j).real())) {
                return std::nullopt;
            }
            out(static_cast<int>(i), static_cast<int>(j)) = rational_from_double(m(i, j).real());
        }
    }
    return out;
}

namespace {

// In-place reduced row echelon form; returns pivot columns.
std::vector<int> rref(QMatrix& m) {
    std::vector<int> pivots;
    int row = 0;
    for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
        int sel = -1;
        for (int r = row; r < m.rows(); ++r) {
            if (m(r, col) != 0) {
                sel = r;
                break;
            }
        }
        if (sel < 0) {
            continue;
        }
        if (sel != row) {
            for (int c = 0; c < m.cols(); ++c) {
                std::swap(m(sel, c), m(row, c));
            }
        }
        const Rational inv = Rational(1) / m(row, col);
        for (int c = col; c < m.cols(); ++c) {
            m(row, c) *= inv;
        }
        for (int r = 0; r < m.rows(); ++r) {
            if (r == row || m(r, col) == 0) {
                continue;
            }
            const Rational f = m(r, col);
            for (int c = col; c < m.cols(); ++c) {
                m(r, c) -= f * m(row, c);
            }
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

}  // namespace

int exact_rank(const QMatrix& m) {
    QMatrix w = m;
    return static_cast<int>(rref(w).size());
}

Rational exact_determinant(const QMatrix& m) {
    if (m.rows() != m.cols()) {
        throw InvalidInput("determinant of non-square matrix");
    }
    QMatrix w = m;
    const int n = w.rows();
    Rational det = 1;
    for (int col = 0; col < n; ++col) {
        int sel = -1;
        for (int r = col; r < n; ++r) {
            if (w(r, col) != 0) {
                sel = r;
                break;
            }
        }
        if (sel < 0) {
            return Rational(0);
        }
        if (sel != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(w(sel, c), w(col, c));
            }
            det = -det;
        }
        det *= w(col, col);
        const Rational inv = Rational(1) / w(col, col);
        for (int r = col + 1; r < n; ++r) {
            if (w(r, col) == 0) {
                continue;
            }
            const Rational f = w(r, col) * inv;
            for (int c = col; c < n; ++c) {
                w(r, c) -= f * w(col, c);
            }
        }
    }
    return det;
}

std::vector<std::vector<Rational>> exact_null_space(const QMatrix& m) {
    QMatrix w = m;
    const std::vector<int> pivots = rref(w);
    std::vector<bool> is_pivot(static_cast<std::size_t>(m.cols()), false);
    for (int p : pivots) {
        is_pivot[static_cast<std::size_t>(p)] = true;
    }
    std::vector<std::vector<Rational>> basis;
    for (int free = 0; free < m.cols(); ++free) {
        if (is_pivot[static_cast<std::size_t>(free)]) {
            continue;
        }
        std::vector<Rational> x(static_cast<std::size_t>(m.cols()));
        x[static_cast<std::size_t>(free)] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) {
            x[static_cast<std::size_t>(pivots[r])] = -w(static_cast<int>(r), free);
        }
        basis.push_back(std::move(x));
    }
    return basis;
}

std::optional<std::vector<ExactBlock>> exact_jordan_blocks(const QMatrix& c,
                                                          const std::vector<Complex>& approx_eigenvalues,
                                                          std::string& why) {
    const int n = c.rows();
    if (n != c.cols()) {
        throw InvalidInput("exact_jordan_blocks: matrix not square");
    }
    // Eigenvalues of a rational matrix that are rational have the form k / lcm(denominators).
    mp::cpp_int den = 1;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            den = mp::lcm(den, mp::denominator(c(i, j)));
        }
    }
    if (den > mp::cpp_int(1) << 40) {
        why = "entry denominators too large for the exact Jordan path";
        return std::nullopt;
    }
    const double den_d = static_cast<double>(den);

    std::vector<Rational> candidates;
    for (const Complex& mu : approx_eigenvalues) {
        if (std::abs(mu.imag()) > 1e-6 * (1.0 + std::abs(mu))) {
            why = "topology matrix has non-real eigenvalues";
            return std::nullopt;
        }
        const double k = std::nearbyint(mu.real() * den_d);
        if (std::abs(k) > 9.0e15) {
            why = "eigenvalue magnitude too large for the exact Jordan path";
            return std::nullopt;
        }
        Rational cand(mp::cpp_int(static_cast<long long>(k)), den);
        if (std::find(candidates.begin(), candidates.end(), cand) == candidates.end()) {
            candidates.push_back(cand);
        }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<ExactBlock> blocks;
    int total = 0;
    for (const Rational& r : candidates) {
        const QMatrix shift = c.shifted(r);
        QMatrix power = shift;
        std::vector<int> nullity{0};
        while (true) {
            const int nu = n - exact_rank(power);
            if (nu == nullity.back()) {
                break;
            }
            nullity.push_back(nu);
            if (nu == n) {
                break;
            }
            power = power * shift;
        }
        const int alg = nullity.back();
        if (alg == 0) {
            continue;
        }
        total += alg;
        // at_least[j] = number of blocks of size >= j
        std::vector<int> at_least(nullity.size() + 1, 0);
        for (std::size_t j = 1; j < nullity.size(); ++j) {
            at_least[j] = nullity[j] - nullity[j - 1];
        }
        for (std::size_t j = 1; j < nullity.size(); ++j) {
            const int exactly = at_least[j] - at_least[j + 1];
            for (int b = 0; b < exactly; ++b) {
                blocks.push_back({r, static_cast<int>(j)});
            }
        }
    }
    if (total != n) {
        why = "topology matrix has eigenvalues that are not rational";
        return std::nullopt;
    }
    return blocks;
}

QMatrix jordan_matrix(const std::vector<ExactBlock>& blocks) {
    int n = 0;
    for (const auto& b : blocks) {
        n += b.size;
    }
    QMatrix j(n, n);
    int pos = 0;
    for (const auto& b : blocks) {
        for (int k = 0; k < b.size; ++k) {
            j(pos + k, pos + k) = b.eigenvalue;
            if (k + 1 < b.size) {
                j(pos + k, pos + k + 1) = 1;
            }
        }
        pos += b.size;
    }
    return j;
}

std::optional<QMatrix> solve_patterned_similarity(const QMatrix& c, const QMatrix& j,
                                                  const std::vector<std::vector<bool>>& allowed) {
    const int n = c.rows();
    std::vector<int> var(static_cast<std::size_t>(n * n), -1);
    int unknowns = 0;
    for (int r = 0; r < n; ++r) {
        for (int s = 0; s < n; ++s) {
            if (allowed[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)]) {
                var[static_cast<std::size_t>(r * n + s)] = unknowns++;
            }
        }
    }
    if (unknowns == 0) {
        return std::nullopt;
    }
    // Entry (r, s): sum_k X[r,k] c[k,s] - sum_k j[r,k] X[k,s] = 0.
    QMatrix eq(n * n, unknowns);
    for (int r = 0; r < n; ++r) {
        for (int s = 0; s < n; ++s) {
            const int row = r * n + s;
            for (int k = 0; k < n; ++k) {
                const int a = var[static_cast<std::size_t>(r * n + k)];
                if (a >= 0 && c(k, s) != 0) {
                    eq(row, a) += c(k, s);
                }
                const int b = var[static_cast<std::size_t>(k * n + s)];
                if (b >= 0 && j(r, k) != 0) {
                    eq(row, b) -= j(r, k);
                }
            }
        }
    }
    const auto basis = exact_null_space(eq);
    if (basis.empty()) {
        return std::nullopt;
    }

    auto assemble = [&](const std::vector<long long>& coeff) {
        QMatrix x(n, n);
        for (std::size_t b = 0; b < basis.size(); ++b) {
            if (coeff[b] == 0) {
                continue;
            }
            for (int r = 0; r < n; ++r) {
                for (int s = 0; s < n; ++s) {
                    const int v = var[static_cast<std::size_t>(r * n + s)];
                    if (v >= 0) {
                        x(r, s) += Rational(coeff[b]) * basis[b][static_cast<std::size_t>(v)];
                    }
                }
            }
        }
        return x;
    };

    std::mt19937_64 rng(0x6a09e667f3bcc908ULL);
    std::uniform_int_distribution<int> pick(-9, 9);
    for (int attempt = 0; attempt < 48; ++attempt) {
        std::vector<long long> coeff(basis.size(), 1);
        if (attempt > 0) {
            for (auto& v : coeff) {
                v = pick(rng);
            }
        }
        QMatrix x = assemble(coeff);
        if (exact_determinant(x) != 0) {
            return x;
        }
    }
    return std::nullopt;
}

std::optional<ExactTransform> exact_patterned_transform(const QMatrix& c,
                                                        const std::vector<Complex>& approx_eigenvalues,
                                                        const std::vector<std::vector<bool>>& allowed,
                                                        std::string& why, const ExactSearchLimits& limits) {
    const int n = c.rows();
    if (n > limits.max_dimension) {
        why = "exact Jordan path limited to N <= " + std::to_string(limits.max_dimension);
        return std::nullopt;
    }
    auto blocks = exact_jordan_blocks(c, approx_eigenvalues, why);
    if (!blocks) {
        return std::nullopt;
    }
    auto order = [](const ExactBlock& a, const ExactBlock& b) {
        if (a.eigenvalue != b.eigenvalue) {
            return a.eigenvalue < b.eigenvalue;
        }
        return a.size > b.size;
    };
    std::sort(blocks->begin(), blocks->end(), order);
    int visited = 0;
    do {
        if (++visited > limits.max_orderings) {
            why = "exact Jordan path exceeded " + std::to_string(limits.max_orderings) + " block orderings";
            return std::nullopt;
        }
        const QMatrix j = jordan_matrix(*blocks);
        if (auto x = solve_patterned_similarity(c, j, allowed)) {
            return ExactTransform{std::move(*x), j};
        }
    } while (std::next_permutation(blocks->begin(), blocks->end(), order));
    why = "no Jordan block ordering admits an invertible transform with the identical-node support pattern";
    return std::nullopt;
}

}  // namespace netctrl
