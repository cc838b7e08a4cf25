#include "bbeval/optimizers.hpp"

#include "test_support.hpp"

#include <algorithm>
#include <cmath>

using namespace bbeval;
using testing::error_kind;

namespace {

OptimizerSpec random_spec() { return {"rs", OptimizerKind::random_search, nlohmann::json::object(), "v1"}; }

OptimizerSpec pso_spec(std::size_t swarm = 20) {
    return {"pso", OptimizerKind::pso, {{"swarm_size", swarm}}, "v1"};
}

const Box unit2{{0, 1}, {0, 1}};

double best_found(const OptimizerSpec &spec, const BenchmarkFunction &fn, std::size_t budget, std::uint64_t seed) {
    Session s(spec, fn.domain, budget, seed);
    double best = -INFINITY;
    for (std::size_t i = 0; i < budget; ++i) {
        auto x = s.suggest();
        double v = evaluate(fn, *x);
        best = std::max(best, v);
        s.observe(*x, v);
    }
    return best;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

} // namespace

TEST_CASE("spec parsing and validation") {
    auto spec = optimizer_spec_from_json({{"method_id", "p"}, {"kind", "pso"}, {"params", {{"swarm_size", 8}}}});
    CHECK(spec.kind == OptimizerKind::pso);
    CHECK(PsoParams::from(spec).swarm_size == 8);
    CHECK(PsoParams::from(spec).inertia == 0.729);
    CHECK(optimizer_spec_from_json(to_json(spec)).params == spec.params);

    CHECK(error_kind([] { optimizer_spec_from_json({{"method_id", "p"}, {"kind", "anneal"}}); }) ==
          ErrorKind::FatalConfigError);
    CHECK(error_kind([] { validate(pso_spec(1)); }) == ErrorKind::FatalConfigError);
    CHECK(error_kind([] { validate({"p", OptimizerKind::pso, {{"inertia", -0.1}}, ""}); }) ==
          ErrorKind::FatalConfigError);
    CHECK(error_kind([] { validate({"e", OptimizerKind::external, nlohmann::json::object(), ""}); }) ==
          ErrorKind::FatalConfigError);

    auto ext = ExternalParams::from({"e", OptimizerKind::external, {{"command", "/bin/opt --x"}, {"timeout_s", 2}}, ""});
    CHECK(ext.timeout == std::chrono::milliseconds(2000));
    CHECK_FALSE(ext.command.empty());
}

TEST_CASE("random search is deterministic and contained") {
    Session a(random_spec(), unit2, 10000, 5), b(random_spec(), unit2, 10000, 5);
    auto first = a.suggest();
    CHECK(a.suggest() == first);
    CHECK(b.suggest() == first);
    for (int i = 0; i < 10000; ++i) {
        auto x = a.suggest();
        REQUIRE(x);
        CHECK(contains(unit2, *x));
        a.observe(*x, 0.0);
    }
    Session c(random_spec(), unit2, 1, 6);
    CHECK(c.suggest() != first);
}

TEST_CASE("PSO generation boundary depends on observed values") {
    auto run = [](bool reversed) {
        Session s(pso_spec(10), unit2, 50, 9);
        for (int i = 0; i < 10; ++i) {
            auto x = s.suggest();
            s.observe(*x, reversed ? static_cast<double>(i) : static_cast<double>(-i));
        }
        return *s.suggest();
    };
    auto first10 = [](double sign) {
        Session s(pso_spec(10), unit2, 50, 9);
        std::vector<Point> pts;
        for (int i = 0; i < 10; ++i) {
            pts.push_back(*s.suggest());
            s.observe(pts.back(), sign * i);
        }
        return pts;
    };
    CHECK(first10(1.0) == first10(-1.0));
    CHECK(run(true) != run(false));
    CHECK(run(true) == run(true));
}

TEST_CASE("PSO full sequence is a pure function of seed and values") {
    const auto &fn = find_function("neg_rastrigin_2d");
    auto trace = [&](std::uint64_t seed) {
        Session s(pso_spec(), fn.domain, 120, seed);
        std::vector<Point> pts;
        for (int i = 0; i < 120; ++i) {
            pts.push_back(*s.suggest());
            s.observe(pts.back(), evaluate(fn, pts.back()));
        }
        return pts;
    };
    CHECK(trace(3) == trace(3));
    CHECK(trace(3) != trace(4));
}

TEST_CASE("PSO global best is nondecreasing and points stay in the box") {
    const auto &fn = find_function("neg_rosenbrock_2d");
    ParticleSwarm pso(fn.domain, PsoParams{}, 11);
    double last = -INFINITY, best_seen = -INFINITY;
    for (int i = 0; i < 400; ++i) {
        auto x = pso.ask();
        REQUIRE(x);
        CHECK(contains(fn.domain, *x));
        double v = evaluate(fn, *x);
        best_seen = std::max(best_seen, v);
        pso.tell(v);
        CHECK(pso.global_best_value() >= last);
        CHECK(pso.global_best_value() == best_seen);
        last = pso.global_best_value();
    }
    CHECK(pso.generation() == 20);
}

TEST_CASE("session protocol") {
    Session s(random_spec(), unit2, 3, 1);
    auto x = s.suggest();
    s.observe(*x, 1.0);
    CHECK(s.history().size() == 1);
    CHECK(error_kind([&] { s.observe(*x, 1.0); }) == ErrorKind::OutOfOrderObservation);

    auto y = s.suggest();
    CHECK(error_kind([&] { s.observe(Point{0.5, 0.5}, 1.0); }) == ErrorKind::OutOfOrderObservation);
    s.observe(*y, 2.0);
    auto z = s.suggest();
    s.observe(*z, 3.0);
    CHECK(s.history().size() == 3);
    CHECK(error_kind([&] { s.suggest(); }) == ErrorKind::BudgetExhausted);
    CHECK(s.history()[1].value == 2.0);
}

TEST_CASE("PSO beats random search on the sphere at budget 200") {
    const auto &fn = find_function("neg_sphere_2d");
    std::vector<double> pso, rs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        pso.push_back(best_found(pso_spec(), fn, 200, seed));
        rs.push_back(best_found(random_spec(), fn, 200, seed));
    }
    CHECK(median(pso) > median(rs));
}
