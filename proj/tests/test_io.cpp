#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "vibronic/io.hpp"

using namespace vibronic;
using vibronic::testing::h3_jt2;
using vibronic::testing::h3_pjt2;
using vibronic::testing::h3_pjt3;

TEST_SUITE("io") {

TEST_CASE("g17 formatting round-trips doubles exactly") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double v = u(rng) * std::pow(10.0, (i % 17) - 8);
        const double back = std::stod(format_g17(v));
        CHECK(back == v);
    }
}

TEST_CASE("params json round trip") {
    for (const ModelParams m :
         {ModelParams{h3_pjt2()}, ModelParams{h3_pjt3()}, ModelParams{h3_jt2()}}) {
        const std::string text = format_params_json(m);
        const ModelParams back = parse_params_json(text);
        REQUIRE(model_dim(back) == model_dim(m));
        CHECK(format_params_json(back) == text);
    }
}

TEST_CASE("params json rejects malformed input") {
    CHECK_THROWS_AS(parse_params_json("not json"), SchemaError);
    CHECK_THROWS_AS(parse_params_json("[1,2]"), SchemaError);
    // Unknown top-level key.
    CHECK_THROWS_AS(
        parse_params_json(R"({"model":"jt","order":2,"extra":1,"params":{}})"), SchemaError);
    // Unknown parameter name.
    CHECK_THROWS_AS(parse_params_json(
                        R"({"model":"jt","order":2,"params":{"eps_E":[0,0],"omega":[0,0],"k":[0,0],"g":[0,0],"zeta":[0,0]}})"),
                    SchemaError);
    // Complex value given as a scalar.
    CHECK_THROWS_AS(parse_params_json(
                        R"({"model":"jt","order":2,"params":{"eps_E":0.3,"omega":[0,0],"k":[0,0],"g":[0,0]}})"),
                    SchemaError);
    // Third-order jt is not a thing.
    CHECK_THROWS_AS(parse_params_json(
                        R"({"model":"jt","order":3,"params":{"eps_E":[0,0],"omega":[0,0],"k":[0,0],"g":[0,0]}})"),
                    SchemaError);
    // Missing third-order coefficients.
    CHECK_THROWS_AS(parse_params_json(
                        R"({"model":"pjt","order":3,"params":{"eps_E":[0,0],"eps_A":[0,0],"omega":[0,0],"k":[0,0],"g":[0,0],"alpha":[0,0]}})"),
                    SchemaError);
}

TEST_CASE("slice csv round trip including ambiguous labels") {
    SynthSpec spec;
    spec.qx = {-0.4, -0.1, 0.2, 0.5};
    spec.sigma = 1e-4;
    spec.seed = 3;
    auto samples = synth_data(ModelParams{h3_pjt2()}, spec);
    samples[0].branch = kBranchAmbiguousA1;
    const std::string text = format_slice_csv(samples);
    const auto back = parse_slice_csv(text);
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].q.qx == samples[i].q.qx);
        CHECK(back[i].branch == samples[i].branch);
        CHECK(back[i].eps_n == samples[i].eps_n);
        CHECK(back[i].gamma_n == samples[i].gamma_n);
    }
}

TEST_CASE("slice csv schema violations") {
    CHECK_THROWS_AS(parse_slice_csv("qx,branch\n"), SchemaError);
    CHECK_THROWS_AS(parse_slice_csv("qx,branch,eps_n,gamma_n,v_ion\n0.1,5,0.3,0.01,0\n"),
                    SchemaError);
    CHECK_THROWS_AS(parse_slice_csv("qx,branch,eps_n,gamma_n,v_ion\n0.1,1,abc,0.01,0\n"),
                    SchemaError);
}

TEST_CASE("validation reports instead of throwing") {
    const auto ok = validate_params_text(format_params_json(ModelParams{h3_pjt2()}), "mem");
    CHECK(ok.ok());
    const auto bad = validate_params_text("{\"model\":\"pjt\"}", "mem");
    CHECK(!bad.ok());

    // Invariant violations are reported with their data row, not thrown.
    const auto row_issue = validate_slice_text(
        "qx,branch,eps_n,gamma_n,v_ion\n0.2,1,0.3,0.01,0\n0.1,1,0.3,-0.01,0\n", "mem");
    CHECK(!row_issue.ok());
    CHECK(row_issue.issues[0].row == 3);
    CHECK(row_issue.issues[0].message.find("gamma") != std::string::npos);

    const auto td_ok = validate_timedelay_text("e,ddelta_de\n0.1,2\n0.2,3\n", "mem");
    CHECK(td_ok.ok());
    const auto td_bad = validate_timedelay_text("e,ddelta_de\n0.2,2\n0.1,3\n", "mem");
    CHECK(!td_bad.ok());
}

TEST_CASE("grid spec parsing") {
    const auto cart = parse_grid_spec("qx=-0.5:0.5:101,qy=-0.5:0.5:101");
    CHECK(!cart.polar);
    CHECK(cart.axis_a.lo == -0.5);
    CHECK(cart.axis_a.n == 101);
    const auto polar = parse_grid_spec("rho=0:0.5:51,phi=0:360:73");
    CHECK(polar.polar);
    CHECK(polar.axis_b.hi == doctest::Approx(2.0 * 3.14159265358979323846));
    CHECK_THROWS_AS(parse_grid_spec("qx=-0.5:0.5:101"), SchemaError);
    CHECK_THROWS_AS(parse_grid_spec("a=0:1:2,b=0:1:2"), SchemaError);
    CHECK_THROWS_AS(parse_grid_spec("qx=0:1:0,qy=0:1:2"), SchemaError);
}

TEST_CASE("atomic write replaces the file completely") {
    const std::string path = "/tmp/vibronic_io_test.txt";
    atomic_write(path, "first\n");
    atomic_write(path, "second\n");
    CHECK(read_file(path) == "second\n");
    std::remove(path.c_str());
}

}  // TEST_SUITE
