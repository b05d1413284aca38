#include "support.hpp"

#include "netctrl/oracle.hpp"

#include <doctest.h>

using namespace netctrl;

namespace {

const Tolerances kTol;

bool same_reports(const CrossReport& a, const CrossReport& b) {
    return a.id == b.id && a.seed == b.seed && a.theorem.status == b.theorem.status &&
           a.kalman.status == b.kalman.status && a.kalman.rank == b.kalman.rank && a.pbh.status == b.pbh.status &&
           a.agreement == b.agreement && a.fragile == b.fragile && a.min_margin == b.min_margin &&
           a.transform_source == b.transform_source && a.system == b.system;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("generation is deterministic and honours the spec") {
    GenSpec spec;
    spec.seed = 17;
    CHECK(generate(spec) == generate(spec));

    spec.homogeneous = true;
    const auto h = generate(spec);
    CHECK(node_partition(h, kTol).size() == 1);

    spec.homogeneous = false;
    spec.control_density = 0.0;
    const auto z = generate(spec);
    CHECK(z.d().cwiseAbs().maxCoeff() == 0.0);

    for (std::uint64_t s = 0; s < 20; ++s) {
        GenSpec g;
        g.seed = s;
        g.max_nodes = 3;
        g.node_dim = 2;
        g.entry_bound = 3;
        const auto sys = generate(g);
        CHECK(validate(sys).empty());
        CHECK(sys.dims.N >= 1);
        CHECK(sys.dims.N <= 3);
        CHECK(sys.exact.has_value());
        for (const auto& a : sys.node_matrices) {
            CHECK(a.cwiseAbs().maxCoeff() <= 3.0);
        }
    }
}

TEST_CASE("diagonalizable and planted-Jordan modes") {
    for (std::uint64_t s = 0; s < 15; ++s) {
        GenSpec g;
        g.seed = s;
        g.ensure_diagonalizable = true;
        const auto sys = generate(g);
        const auto r = jordan_structure(sys.c, kTol, sys.exact->c);
        REQUIRE(std::holds_alternative<TransformPair>(r));
        CHECK(std::get<TransformPair>(r).diagonal());

        GenSpec p;
        p.seed = s;
        p.plant_jordan = true;
        const auto planted = generate(p);
        CHECK(planted.dims.N >= 2);
        const auto rj = jordan_structure(planted.c, kTol, planted.exact->c);
        REQUIRE(std::holds_alternative<TransformPair>(rj));
        CHECK_FALSE(std::get<TransformPair>(rj).diagonal());
    }
}

TEST_CASE("invalid generation specs") {
    GenSpec g;
    g.max_nodes = 0;
    CHECK_THROWS_AS(g.require_valid(), InvalidInput);
    g = GenSpec{};
    g.control_density = 1.5;
    CHECK_THROWS_AS(g.require_valid(), InvalidInput);
}

TEST_CASE("instance seeds are distinct") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        seen.insert(instance_seed(1, i));
    }
    CHECK(seen.size() == 1000);
    CHECK(instance_seed(1, 5) != instance_seed(2, 5));
}

TEST_CASE("cross validation on the worked examples") {
    const auto ex1 = cross_validate(testing::load("example1.json").system, kTol);
    CHECK(ex1.agreement);
    CHECK(ex1.kalman.status == Status::Controllable);
    CHECK(ex1.pbh.status == Status::Controllable);

    const auto ex3 = cross_validate(testing::load("example3.json").system, kTol);
    CHECK(ex3.agreement);
    CHECK(ex3.theorem.status == Status::Uncontrollable);
    CHECK(ex3.kalman.status == Status::Uncontrollable);

    const auto ex5 = cross_validate(testing::load("example5.json").system, kTol);
    CHECK(ex5.theorem.status == Status::NotApplicable);
    CHECK(ex5.agreement);
    CHECK_FALSE(ex5.disagreement);
}

TEST_CASE("parallel batch equals the serial reference") {
    GenSpec g;
    g.seed = 3;
    const auto par = run_batch(g, 60, kTol);
    const auto ser = run_batch_serial(g, 60, kTol);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(par[i].id == i);
        CHECK(same_reports(par[i], ser[i]));
    }
    const auto a = summarize(par);
    const auto b = summarize(ser);
    CHECK(a.counts == b.counts);
    CHECK(a.disagreements == b.disagreements);
    CHECK(a.trials == 60);
}

TEST_CASE("batch summaries") {
    CHECK(summarize(run_batch(GenSpec{}, 0, kTol)).trials == 0);

    GenSpec g;
    g.seed = 4;
    g.control_density = 0.0;
    const auto reports = run_batch(g, 10, kTol);
    const auto s = summarize(reports);
    CHECK(s.disagreements == 0);
    CHECK(s.counts.at("kalman").at("uncontrollable") == 10);
    CHECK(s.counts.at("pbh").at("uncontrollable") == 10);
    for (const auto& r : reports) {
        CHECK(r.theorem.status != Status::Controllable);
    }
}

TEST_CASE("seeded batch has no confident disagreement") {
    GenSpec g;
    g.seed = 1;
    const auto s = summarize(run_batch(g, 200, kTol));
    CHECK(s.disagreements == 0);
    CHECK(s.errors == 0);
    CHECK(s.fragile_rate() < 0.05);
}

}
