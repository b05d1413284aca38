#include "support.hpp"

#include "netctrl/spectral.hpp"

#include <doctest.h>

using namespace netctrl;

namespace {

const Tolerances kTol;

bool pair_residuals_hold(const Matrix& m, const std::vector<LeftEigenPair>& pairs) {
    for (const auto& p : pairs) {
        for (const auto& v : p.vectors) {
            if (!is_left_eigenvector(v, m, p.value, kTol)) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("eigen_left on small matrices") {
    SUBCASE("diagonal") {
        const auto pairs = eigen_left(real_matrix({{1, 0}, {0, 2}}), kTol);
        REQUIRE(pairs.size() == 2);
        CHECK(pairs[0].value == Complex(1, 0));
        CHECK(pairs[1].value == Complex(2, 0));
        CHECK(pairs[0].geom_mult == 1);
        CHECK(Matrix(pairs[0].vectors[0]) == Matrix(real_row({1, 0})));
        CHECK(Matrix(pairs[1].vectors[0]) == Matrix(real_row({0, 1})));
    }
    SUBCASE("nilpotent block: v M = 0 forces v = [0, 1]") {
        const auto pairs = eigen_left(real_matrix({{0, 1}, {0, 0}}), kTol);
        REQUIRE(pairs.size() == 1);
        CHECK(pairs[0].value == Complex(0, 0));
        CHECK(pairs[0].geom_mult == 1);
        CHECK(pairs[0].alg_mult == 2);
        CHECK(Matrix(pairs[0].vectors[0]) == Matrix(real_row({0, 1})));
    }
    SUBCASE("identity") {
        const auto pairs = eigen_left(Matrix::Identity(3, 3), kTol);
        REQUIRE(pairs.size() == 1);
        CHECK(pairs[0].geom_mult == 3);
        CHECK(linearly_independent(pairs[0].vectors, kTol));
    }
}

TEST_CASE("a nilpotent block of order 3 stays one eigenvalue") {
    // A^3 = 0 exactly; the eigensolver splits the triple zero by ~1e-5
    const Matrix a = real_matrix({{0, 0, -1}, {1, 1, 2}, {-1, -1, -1}});
    REQUIRE((a * a * a).cwiseAbs().maxCoeff() == 0.0);
    const auto pairs = eigen_left(a, kTol);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].alg_mult == 3);
    CHECK(pairs[0].geom_mult == 1);
    CHECK(std::abs(pairs[0].value) < 1e-12);
}

TEST_CASE("eigen_left invariants on random matrices") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 60; ++t) {
        const int n = 1 + t % 6;
        const Matrix m = t % 2 ? testing::random_int_matrix(rng, n, n, 2) : testing::random_complex(rng, n, n);
        const auto pairs = eigen_left(m, kTol);
        int total = 0;
        for (const auto& p : pairs) {
            CHECK(p.geom_mult == static_cast<int>(p.vectors.size()));
            CHECK(p.geom_mult >= 1);
            CHECK(p.geom_mult <= p.alg_mult);
            CHECK(linearly_independent(p.vectors, kTol));
            total += p.alg_mult;
        }
        CHECK(total == n);
        CHECK(pair_residuals_hold(m, pairs));
    }
}

TEST_CASE("geometric_multiplicity") {
    CHECK(geometric_multiplicity(Matrix::Identity(2, 2), 1.0, kTol) == 2);
    CHECK(geometric_multiplicity(real_matrix({{0, 1}, {0, 0}}), 0.0, kTol) == 1);
    CHECK(geometric_multiplicity(real_matrix({{1, 0}, {0, 2}}), 3.0, kTol) == 0);
}

TEST_CASE("verify_similarity") {
    std::mt19937_64 rng(41);
    const Matrix c = testing::random_complex(rng, 4, 4);
    CHECK(verify_similarity(Matrix::Identity(4, 4), c, c, kTol));

    // T C T^-1 for the line-with-self-loop topology; J worked out by hand
    const Matrix t = real_matrix({{1, 0, -1}, {0, 1, 0}, {0, 0, 1}});
    const Matrix c1 = real_matrix({{0, 0, 1}, {0, 1, 1}, {0, 0, 1}});
    const Matrix j = real_matrix({{0, 0, 0}, {0, 1, 1}, {0, 0, 1}});
    CHECK(verify_similarity(t, c1, j, kTol));
    Matrix jp = j;
    jp(0, 0) += 1.0;
    CHECK_FALSE(verify_similarity(t, c1, jp, kTol));

    CHECK_THROWS_AS(verify_similarity(real_matrix({{1, 1}, {1, 1}}), Matrix::Identity(2, 2), Matrix::Identity(2, 2), kTol),
                    InvalidInput);
}

TEST_CASE("similar matrices map left eigenvectors through the transform") {
    // if P B = A P and v A = mu v then (v P) B = mu (v P)
    std::mt19937_64 rng(43);
    for (int t = 0; t < 40; ++t) {
        const int n = 2 + t % 4;
        const Matrix a = testing::random_complex(rng, n, n);
        const Matrix p = testing::random_well_conditioned(rng, n, 50.0);
        const Matrix b = p.inverse() * a * p;
        REQUIRE(verify_similarity(p, b, a, kTol));
        for (const auto& pair : eigen_left(a, kTol)) {
            for (const auto& v : pair.vectors) {
                const RowVector w = v * p;
                CHECK(left_residual(w, b, pair.value) <= 1e-9 * norm2(b) * w.norm());
            }
        }
    }
}

TEST_CASE("jordan_structure") {
    SUBCASE("already diagonal") {
        const auto r = jordan_structure(real_matrix({{3, 0}, {0, 5}}), kTol);
        REQUIRE(std::holds_alternative<TransformPair>(r));
        const auto& tp = std::get<TransformPair>(r);
        CHECK(tp.t == Matrix::Identity(2, 2));
        CHECK(tp.j == real_matrix({{3, 0}, {0, 5}}));
        CHECK(tp.source == "identity");
    }
    SUBCASE("already a Jordan block") {
        const Matrix c = real_matrix({{1, 1}, {0, 1}});
        const auto r = jordan_structure(c, kTol);
        REQUIRE(std::holds_alternative<TransformPair>(r));
        const auto& tp = std::get<TransformPair>(r);
        CHECK(tp.t == Matrix::Identity(2, 2));
        CHECK(tp.j == c);
        REQUIRE(tp.blocks.size() == 1);
        CHECK(tp.blocks[0].length == 2);
    }
    SUBCASE("star topology with a self-referencing hub") {
        const Matrix c = real_matrix({{0, 0, 1}, {1, 0, 0}, {1, 0, 0}});
        const auto r = jordan_structure(c, kTol);
        REQUIRE(std::holds_alternative<TransformPair>(r));
        const auto& tp = std::get<TransformPair>(r);
        CHECK(tp.diagonal());
        CHECK(verify_similarity(tp.t, c, tp.j, kTol));
        std::vector<double> lambdas;
        for (const auto& l : tp.lambdas) {
            CHECK(std::abs(l.imag()) < 1e-12);
            lambdas.push_back(l.real());
        }
        std::sort(lambdas.begin(), lambdas.end());
        CHECK(lambdas[0] == doctest::Approx(-1.0));
        CHECK(std::abs(lambdas[1]) < 1e-12);
        CHECK(lambdas[2] == doctest::Approx(1.0));

        // the transform stored in the star fixture, with J = diag(0, 1, -1)
        const double s = 0.8660254037844386;
        const Matrix t_fixture = real_matrix({{0, 1, -1}, {s, 0, s}, {-s, 0, s}});
        CHECK(verify_similarity(t_fixture, c, real_matrix({{0, 0, 0}, {0, 1, 0}, {0, 0, -1}}), kTol));
    }
    SUBCASE("defective rational matrix goes through the exact path") {
        const Matrix c = real_matrix({{3, -1, 1}, {1, 1, 1}, {0, 0, -1}});
        const auto r = jordan_structure(c, kTol);
        REQUIRE(std::holds_alternative<TransformPair>(r));
        const auto& tp = std::get<TransformPair>(r);
        CHECK(tp.source == "exact_rational");
        CHECK_FALSE(tp.diagonal());
        CHECK(verify_similarity(tp.t, c, tp.j, kTol));
    }
    SUBCASE("defective with irrational eigenvalues is not computable") {
        const double s = 1.4142135623730951;
        const Matrix c = real_matrix({{s - 1, 1}, {-1, s + 1}});
        CHECK(std::holds_alternative<NotComputable>(jordan_structure(c, kTol)));
    }
}

TEST_CASE("jordan_structure output always verifies") {
    std::mt19937_64 rng(47);
    int found = 0;
    for (int t = 0; t < 80; ++t) {
        const int n = 1 + t % 5;
        const Matrix c = testing::random_int_matrix(rng, n, n, 2);
        const auto r = jordan_structure(c, kTol);
        if (const auto* tp = std::get_if<TransformPair>(&r)) {
            ++found;
            CHECK(verify_similarity(tp->t, c, tp->j, kTol));
            for (Eigen::Index i = 0; i < n; ++i) {
                CHECK(tp->j(i, i) == tp->lambdas[static_cast<std::size_t>(i)]);
                for (Eigen::Index k = 0; k < i; ++k) {
                    CHECK(tp->j(i, k) == Complex(0, 0));
                }
            }
        }
    }
    CHECK(found > 60);
}

TEST_CASE("jordan_blocks_of reads the superdiagonal") {
    const Matrix j = real_matrix({{2, 1, 0, 0}, {0, 2, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 5}});
    const auto blocks = jordan_blocks_of(j);
    REQUIRE(blocks.size() == 3);
    CHECK(blocks[0].start == 0);
    CHECK(blocks[0].length == 2);
    CHECK(blocks[1].length == 1);
    CHECK(blocks[2].start == 3);
    CHECK(is_exact_jordan_form(j));
    CHECK_FALSE(is_exact_jordan_form(real_matrix({{1, 1}, {0, 2}})));
}

}
