#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bethe/errors.hpp"
#include "bethe/io.hpp"
#include "bethe/parallel.hpp"
#include "doctest.h"

using namespace bethe;
using nlohmann::json;

namespace {

json base_config() {
    return json{{"model",
                 {{"K", 4},
                  {"m", 2},
                  {"A", {-0.5, 0.0, 0.0, 0.5}},
                  {"lambda", 0.0},
                  {"disorder", {{"variant", "zero"}, {"sigma", 1.0}}}}},
                {"experiment", "interval"}};
}

}  // namespace

TEST_CASE("model params JSON round trip") {
    auto p = validate_params(3, 2,
                             [] {
                                 RMatrix A(2, 2);
                                 A << 0.25, -0.5, -0.5, 1.0;
                                 return A;
                             }(),
                             0.3, {DisorderVariant::GOE, 0.8});
    auto j = model_params_to_json(p);
    auto q = model_params_from_json(j);
    CHECK(q.K == p.K);
    CHECK(q.m == p.m);
    CHECK((q.A - p.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK(q.lambda == p.lambda);
    CHECK(q.disorder.variant == p.disorder.variant);
    CHECK(q.disorder.sigma == p.disorder.sigma);
}

TEST_CASE("green block JSON round trip") {
    CMatrix G(2, 2);
    G << cplx(1.5, -0.25), cplx(0.0, 2.0), cplx(0.0, 2.0), cplx(-3.0, 0.125);
    auto back = green_from_json(green_to_json(G));
    CHECK((G - back).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("interval experiment output line") {
    auto cfg = run_config_from_json(base_config());
    std::ostringstream os;
    CHECK(run_experiment(cfg, os) == 0);
    CHECK(os.str().find("I_AK = (-1.5, 1.5)") != std::string::npos);
}

TEST_CASE("config validation and exit reasons") {
    // unknown experiment
    auto bad = base_config();
    bad["experiment"] = "nonsense";
    CHECK_THROWS_AS(run_config_from_json(bad), validation_error);

    // stochastic run without mandatory seed
    auto st = base_config();
    st["experiment"] = "transport";
    st["model"]["lambda"] = 0.5;
    st["model"]["disorder"]["variant"] = "diagonal_gaussian_iid";
    st["grids"] = {{"E", {0.0}}, {"eta", {0.5}}, {"r_max", 3}};
    st["sampling"] = {{"n_samples", 10}};
    CHECK_THROWS_AS(run_config_from_json(st), validation_error);

    // too-few-samples surfaces as a validation error
    st["sampling"] = {{"n_samples", 1}, {"seed", 7}};
    auto cfg = run_config_from_json(st);
    std::ostringstream os;
    CHECK_THROWS_AS(run_experiment(cfg, os), validation_error);
}

TEST_CASE("transport CSV: header, stable order, worker invariance") {
    auto j = base_config();
    j["model"] = {{"K", 2},
                  {"m", 1},
                  {"A", {0.0}},
                  {"lambda", 0.1},
                  {"disorder", {{"variant", "diagonal_gaussian_iid"}, {"sigma", 1.0}}}};
    j["experiment"] = "transport";
    j["grids"] = {{"E", {0.0}}, {"eta", {0.4}}, {"r_max", 4}, {"depth", 5}};
    j["sampling"] = {{"n_samples", 200}, {"seed", 31}};

    auto run_with_workers = [&](int w) {
        auto jj = j;
        jj["workers"] = w;
        auto cfg = run_config_from_json(jj);
        std::ostringstream os;
        REQUIRE(run_experiment(cfg, os) == 0);
        return os.str();
    };
    const std::string one = run_with_workers(1);
    const std::string eight = run_with_workers(8);
    CHECK(one == eight);  // bit-identical CSV for any worker count
    CHECK(one.rfind("E,eta,lambda,r_max,J,J_stderr,indicator\n", 0) == 0);
}

TEST_CASE("worker resolution and env override") {
    ::setenv("BETHE_LAB_WORKERS", "3", 1);
    CHECK(resolve_workers(0) == 3);
    CHECK(resolve_workers(5) == 5);  // explicit request wins
    ::unsetenv("BETHE_LAB_WORKERS");
    CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("verify experiment") {
    auto j = base_config();
    j["experiment"] = "verify";
    j["level"] = "fast";
    j["sampling"] = {{"seed", 5}};
    auto cfg = run_config_from_json(j);
    std::ostringstream os;
    CHECK(run_experiment(cfg, os) == 0);
    CHECK(os.str().find("[FAIL]") == std::string::npos);
}

TEST_CASE("ward experiment writes a JSON report") {
    auto j = base_config();
    j["model"] = {{"K", 2},
                  {"m", 1},
                  {"A", {0.0}},
                  {"lambda", 0.2},
                  {"disorder", {{"variant", "diagonal_gaussian_iid"}, {"sigma", 1.0}}}};
    j["experiment"] = "ward";
    j["grids"] = {{"E", {0.0}}, {"eta", {0.3}}, {"r_top", 1}, {"depth", 4}};
    j["sampling"] = {{"n_samples", 300}, {"seed", 77}};
    j["output"] = {{"json", "ward_test_report.json"}};
    auto cfg = run_config_from_json(j);
    std::ostringstream os;
    const int rc = run_experiment(cfg, os);
    CHECK((rc == 0 || rc == 4));
    std::ifstream is("ward_test_report.json");
    REQUIRE(is.good());
    json rep;
    is >> rep;
    CHECK(rep.contains("checks"));
    CHECK(rep.at("r_top") == 1);
    std::remove("ward_test_report.json");
}
