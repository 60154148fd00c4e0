#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qoper/json_io.hpp"
#include "test_support.hpp"

using namespace qoper;
using namespace qoper::testing;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string outfile = "cli_test_stdout.tmp";
    const std::string cmd = std::string(QOPER_CLI_PATH) + " " + args + " > " + outfile + " 2>cli_test_stderr.tmp";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(outfile);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string a1_bundle_path(bool perturb) {
    const QQInstance inst = a1_instance(cplx(1.7, 0.0), cplx(0.6, 0.0), cplx(1.0, 0.0));
    QQSolution sol;
    sol.q_plus = {Poly::from_roots({a1_closed_form_root(cplx(1.7, 0.0), cplx(0.6, 0.0),
                                                        cplx(1.0, 0.0))})};
    sol.q_minus = reconstruct_qminus(inst, sol.q_plus);
    if (perturb) sol.q_minus[0] += Poly(cplx(0.01, 0.0));
    json bundle{{"schema", kSchemaTag},
                {"instance", instance_to_json(inst)},
                {"solution", solution_to_json(sol)}};
    const std::string path = perturb ? "a1_bad.json" : "a1_good.json";
    write_file(path, bundle.dump());
    return path;
}

}  // namespace

TEST_CASE("cartan show") {
    const auto r = run_cli("cartan show A 2");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["positive_roots"] == 3);
    CHECK(j["w0_reduced_word"] == json::array({1, 2, 1}));
}

TEST_CASE("qq verify exit codes") {
    SUBCASE("verified fixture exits 0") {
        const auto r = run_cli("qq verify --input " + a1_bundle_path(false));
        CHECK(r.exit_code == 0);
        CHECK(json::parse(r.out)["pass"] == true);
    }
    SUBCASE("perturbed fixture exits 1 with a named failing check") {
        const auto r = run_cli("qq verify --input " + a1_bundle_path(true));
        CHECK(r.exit_code == 1);
        const json j = json::parse(r.out);
        bool residual_flagged = false;
        for (const auto& c : j["checks"])
            if (c["name"] == "qq_residual" && c["pass"] == false) residual_flagged = true;
        CHECK(residual_flagged);
    }
    SUBCASE("malformed JSON exits 2") {
        write_file("broken.json", "{ not json");
        CHECK(run_cli("qq verify --input broken.json").exit_code == 2);
    }
    SUBCASE("missing schema tag exits 2") {
        write_file("noschema.json", "{}");
        CHECK(run_cli("qq verify --input noschema.json").exit_code == 2);
    }
}

TEST_CASE("bethe solve") {
    const QQInstance inst = a1_instance(cplx(1.7, 0.0), cplx(0.6, 0.0), cplx(1.0, 0.0));
    write_file("a1_inst.json", instance_to_json(inst).dump());

    SUBCASE("m = 1 emits one verified line matching the closed form") {
        const auto r = run_cli("bethe solve --input a1_inst.json --degrees 1 --seed 5");
        CHECK(r.exit_code == 0);
        const json line = json::parse(r.out);
        const QQSolution sol = solution_from_json(line);
        const auto rts = roots(sol.q_plus[0]);
        CHECK(std::abs(rts[0] - cplx(0.60625, 0.0)) < 1e-10);
        CHECK(line["relative_residual"].get<double>() < 1e-9);
    }
    SUBCASE("m = 0 emits the trivial line") {
        const auto r = run_cli("bethe solve --input a1_inst.json --degrees 0");
        CHECK(r.exit_code == 0);
        CHECK(json::parse(r.out)["q_plus"][0].size() == 1);  // the constant 1
    }
    SUBCASE("infeasible degrees exit 1 with a diagnostic") {
        const auto r = run_cli("bethe solve --input a1_inst.json --degrees 4");
        CHECK(r.exit_code == 1);
    }
    SUBCASE("determinism: identical bytes for identical (input, seed)") {
        const auto r1 = run_cli("bethe solve --input a1_inst.json --degrees 1 --seed 9");
        const auto r2 = run_cli("bethe solve --input a1_inst.json --degrees 1 --seed 9");
        CHECK(r1.out == r2.out);
        CHECK_FALSE(r1.out.empty());
    }
    SUBCASE("csv format") {
        const auto r = run_cli("bethe solve --input a1_inst.json --degrees 1 --format csv");
        CHECK(r.exit_code == 0);
        CHECK(r.out.rfind("solution,node,k,root_re,root_im\n", 0) == 0);
    }
    SUBCASE("every emitted solution re-verifies under qq verify") {
        const auto r = run_cli("bethe solve --input a1_inst.json --degrees 1 --seed 3");
        REQUIRE(r.exit_code == 0);
        const json line = json::parse(r.out);
        json bundle{{"schema", kSchemaTag},
                    {"instance", instance_to_json(inst)},
                    {"solution", line}};
        write_file("a1_emitted.json", bundle.dump());
        CHECK(run_cli("qq verify --input a1_emitted.json").exit_code == 0);
    }
}

TEST_CASE("bethe residual and qminus round trip through the CLI") {
    const auto path = a1_bundle_path(false);
    const auto r = run_cli("bethe residual --input " + path + " --format csv");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("node,k,") == 0);

    const auto r2 = run_cli("qq qminus --input " + path);
    CHECK(r2.exit_code == 0);
    CHECK(json::parse(r2.out)["relative_residual"].get<double>() < 1e-9);
}

TEST_CASE("tq eval on the A1 fixture") {
    const auto r = run_cli("tq eval --input " + a1_bundle_path(false));
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["pass"] == true);
    CHECK(j["residues_at_shifted_roots"][0]["vanishes"] == true);
}

TEST_CASE("backlund apply with involution check") {
    const auto r = run_cli("backlund apply --word 1 --input " + a1_bundle_path(false));
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["steps"].size() == 1);
    CHECK(j["ztwist_certificate"]["pass"] == true);  // [1] is w0 for A1
}

TEST_CASE("canonical agrees with tq through the CLI") {
    const auto r = run_cli("canonical --input " + a1_bundle_path(false));
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["shape_check"]["pass"] == true);
    CHECK(j["tq_agreement"] == true);
}

TEST_CASE("json round trips") {
    Rng rng(67);
    const QQInstance inst = random_instance(rng, LieType::B, 2, 2);
    const QQInstance back = instance_from_json(instance_to_json(inst));
    CHECK(back.cartan.lie_type == inst.cartan.lie_type);
    CHECK(back.cartan.ordering == inst.cartan.ordering);
    CHECK(std::abs(back.q - inst.q) == 0.0);
    for (int i = 0; i < 2; ++i) {
        CHECK(back.lambdas[i].near_equal(inst.lambdas[i], 1e-16));
        CHECK(back.twist.zetas[i] == inst.twist.zetas[i]);
    }

    QQSolution sol;
    sol.q_plus = {Poly::from_roots({cplx(0.4, 0.8)}), Poly::one()};
    sol.q_minus = {Poly(std::vector<cplx>{cplx(0.25, -1.5), cplx(0.0, 2.0)}), Poly(cplx(3.0, 0.5))};
    const QQSolution sol_back = solution_from_json(solution_to_json(sol));
    for (int i = 0; i < 2; ++i) {
        CHECK(sol_back.q_plus[i].near_equal(sol.q_plus[i], 1e-16));
        CHECK(sol_back.q_minus[i].near_equal(sol.q_minus[i], 1e-16));
    }
}

TEST_CASE("qq reorder verbs") {
    Rng rng(61);
    const QQInstance a2 = random_instance(rng, LieType::A, 2, 2);
    const auto sols = solved_solutions(a2, {1, 1});
    REQUIRE_FALSE(sols.empty());
    json bundle{{"schema", kSchemaTag},
                {"instance", instance_to_json(a2)},
                {"solution", solution_to_json(sols[0])}};
    write_file("a2_bundle.json", bundle.dump());

    const auto r = run_cli("qq reorder --input a2_bundle.json --word 2,1");
    CHECK(r.exit_code == 0);
    CHECK(json::parse(r.out)["relative_residual"].get<double>() < 1e-8);

    const auto rc = run_cli("qq reorder --input a2_bundle.json --cyclic");
    CHECK(rc.exit_code == 0);
    CHECK(json::parse(rc.out)["relative_residual"].get<double>() < 1e-8);

    const auto rm = run_cli("miura check --input a2_bundle.json");
    CHECK(rm.exit_code == 0);
    CHECK(json::parse(rm.out)["pass"] == true);
}
