#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

using namespace qoper;
using namespace qoper::testing;

namespace {

const cplx kQ(1.7, 0.0);
const cplx kZeta(0.6, 0.0);
const cplx kZ1(1.0, 0.0);

}  // namespace

TEST_CASE("instance validation") {
    CHECK_NOTHROW(a1_instance(kQ, kZeta, kZ1));
    // non-monic Lambda
    QQInstance bad;
    bad.cartan = cartan_matrix(LieType::A, 1);
    bad.q = kQ;
    bad.twist.zetas = {kZeta};
    bad.lambdas = {Poly(std::vector<cplx>{cplx(-1.0, 0.0), cplx(2.0, 0.0)})};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    // constant Lambda
    bad.lambdas = {Poly::one()};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    // q a root of unity
    bad.lambdas = {Poly::from_roots({kZ1})};
    bad.q = cplx(0.0, 1.0);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("qq_residual structure") {
    const QQInstance inst = a1_instance(kQ, kZeta, kZ1);

    SUBCASE("Q- = 0 leaves minus the right-hand side") {
        QQSolution sol;
        sol.q_plus = {Poly::from_roots({cplx(5.0, 0.0)})};
        sol.q_minus = {Poly::zero()};
        const auto res = qq_residual(inst, sol);
        CHECK(res[0].near_equal(-qq_rhs(inst, sol.q_plus, 1), 1e-14));
    }

    SUBCASE("A2 middle structure: f_i = Lambda_i Q_{i+1}(qz) Q_{i-1}(z)") {
        Rng rng(14);
        const QQInstance a3 = random_instance(rng, LieType::A, 3, 2);
        std::vector<Poly> qp = {Poly::from_roots({cplx(0.7, 0.1)}),
                                Poly::from_roots({cplx(-1.2, 0.4)}),
                                Poly::from_roots({cplx(0.2, -0.9)})};
        const Poly expected =
            a3.lambdas[1] * qp[2].qshift(a3.q, 1) * qp[0];
        CHECK(qq_rhs(a3, qp, 2).near_equal(expected, 1e-13));
    }
}

TEST_CASE("reconstruct_qminus: closed forms") {
    const QQInstance inst = a1_instance(kQ, kZeta, kZ1);

    SUBCASE("Q+ = 1: Q-(z) = z/(zeta - zeta^{-1} q) - z1/(zeta - zeta^{-1})") {
        const auto qm = reconstruct_qminus(inst, {Poly::one()});
        const cplx zi = cplx(1.0, 0.0) / kZeta;
        CHECK(std::abs(qm[0].coeff(1) - cplx(1.0, 0.0) / (kZeta - zi * kQ)) < 1e-14);
        CHECK(std::abs(qm[0].coeff(0) + kZ1 / (kZeta - zi)) < 1e-14);
        QQSolution sol{{Poly::one()}, qm};
        CHECK(qq_residual_relative(inst, sol) < 1e-12);
    }

    SUBCASE("m = 1 closed-form Bethe root gives vanishing residual") {
        const cplx w = a1_closed_form_root(kQ, kZeta, kZ1);
        QQSolution sol;
        sol.q_plus = {Poly::from_roots({w})};
        sol.q_minus = reconstruct_qminus(inst, sol.q_plus);
        CHECK(qq_residual_relative(inst, sol) < 1e-10);
        CHECK(sol.q_minus[0].degree() == qminus_degree(inst, {1})[0]);
    }

    SUBCASE("A2 with both Q+ = 1: decoupled linear systems") {
        Rng rng(8);
        const QQInstance a2 = random_instance(rng, LieType::A, 2, 2);
        const auto qm = reconstruct_qminus(a2, {Poly::one(), Poly::one()});
        QQSolution sol{{Poly::one(), Poly::one()}, qm};
        CHECK(qq_residual_relative(a2, sol) < 1e-12);
    }

    SUBCASE("Lambda with a root at 0 is permitted by the general system") {
        const QQInstance inst0 =
            make_instance(LieType::A, 1, kQ, {kZeta}, {Poly::from_roots({cplx(0.0, 0.0)})});
        const auto qm = reconstruct_qminus(inst0, {Poly::one()});
        QQSolution sol{{Poly::one()}, qm};
        CHECK(qq_residual_relative(inst0, sol) < 1e-12);
    }

    SUBCASE("non-Bethe Q+ fails the consistency check") {
        QQSolution sol;
        const cplx w = a1_closed_form_root(kQ, kZeta, kZ1) + cplx(0.25, 0.0);
        CHECK_THROWS_WITH_AS(
            (void)reconstruct_qminus(inst, {Poly::from_roots({w})}),
            doctest::Contains("consistency"), std::runtime_error);
    }
}

TEST_CASE("qminus_degree") {
    const QQInstance inst = a1_instance(kQ, kZeta, kZ1);
    CHECK(qminus_degree(inst, {0}) == std::vector<int>{1});

    const QQInstance inst2 =
        make_instance(LieType::A, 1, kQ, {kZeta}, {Poly::from_roots({kZ1, cplx(2.3, 0.0)})});
    CHECK(qminus_degree(inst2, {1}) == std::vector<int>{1});

    Rng rng(4);
    const QQInstance a2 = random_instance(rng, LieType::A, 2, 1);
    // deg Lambda = (1,1), m+ = (1,1): m- = 1 - 1 + m+_other = 1
    CHECK(qminus_degree(a2, {1, 1}) == std::vector<int>{1, 1});

    CHECK_THROWS_AS((void)qminus_degree(inst, {5}), std::runtime_error);
}

TEST_CASE("nondegeneracy report") {
    SUBCASE("constructed violation with witness") {
        const cplx w(5.0, 0.0);
        const QQInstance inst = a1_instance(kQ, kZeta, kQ * w);  // Lambda root at q*w
        QQSolution sol;
        sol.q_plus = {Poly::from_roots({w})};
        sol.q_minus = {Poly::one()};
        const auto rep = check_nondegenerate(inst, sol, 10, 1e-9);
        CHECK_FALSE(rep.pass);
        // the witness pins Q+ root w against Lambda root q*w at a single
        // q-power (sign depends on which root is listed first)
        bool found = false;
        for (const auto& e : rep.entries)
            if (!e.pass && e.kind == "qdistinct" && std::abs(e.witness_n) == 1) found = true;
        CHECK(found);
    }
    SUBCASE("clean instance passes") {
        const QQInstance inst = a1_instance(cplx(2.0, 0.0), kZeta, kZ1);
        QQSolution sol;
        sol.q_plus = {Poly::from_roots({cplx(5.0, 0.0)})};
        sol.q_minus = {Poly::one()};
        CHECK(check_nondegenerate(inst, sol, 10, 1e-9).pass);
    }
    SUBCASE("end-to-end A2 solution passes") {
        Rng rng(12);
        const QQInstance a2 = random_instance(rng, LieType::A, 2, 2);
        const auto sols = solved_solutions(a2, {1, 1});
        REQUIRE_FALSE(sols.empty());
        CHECK(check_nondegenerate(a2, sols[0], 20, 1e-7).pass);
    }
}

TEST_CASE("reordering gauge maps") {
    Rng rng(31);
    const QQInstance a2 = random_instance(rng, LieType::A, 2, 2);
    const auto sols = solved_solutions(a2, {1, 1});
    REQUIRE_FALSE(sols.empty());
    const QQSolution sol = sols[0];

    SUBCASE("identity reorder is the identity") {
        const auto [mi, ms] = reorder_gauge(a2, sol, {1, 2});
        CHECK(ms.q_plus[0].near_equal(sol.q_plus[0], 1e-14));
        CHECK(ms.q_minus[1].near_equal(sol.q_minus[1], 1e-14));
        CHECK(mi.lambdas[0].near_equal(a2.lambdas[0], 1e-14));
    }

    SUBCASE("(1,2) -> (2,1): one node shifted by a single power of q") {
        const auto [mi, ms] = reorder_gauge(a2, sol, {2, 1});
        CHECK(qq_residual_relative(mi, ms) < 1e-10);
        // node 1 untouched (basepoint), node 2 q-shifted
        CHECK(ms.q_plus[0].near_equal(sol.q_plus[0], 1e-13));
        const Poly shifted = sol.q_plus[1].qshift(a2.q, 1).monic();
        CHECK(ms.q_plus[1].near_equal(shifted, 1e-12));
    }

    SUBCASE("round trip recovers the original") {
        const auto [mi, ms] = reorder_gauge(a2, sol, {2, 1});
        const auto [bi, bs] = reorder_gauge(mi, ms, {1, 2});
        CHECK(qq_residual_relative(bi, bs) < 1e-10);
        for (int i = 0; i < 2; ++i) {
            CHECK(bs.q_plus[i].near_equal(sol.q_plus[i], 1e-12));
            CHECK(bs.q_minus[i].near_equal(sol.q_minus[i], 1e-11));
            CHECK(bi.lambdas[i].near_equal(a2.lambdas[i], 1e-12));
        }
    }

    SUBCASE("A3 nontrivial permutation keeps the residual") {
        const QQInstance a3 = random_instance(rng, LieType::A, 3, 2);
        const auto s3 = solved_solutions(a3, {1, 0, 1});
        if (!s3.empty()) {
            const auto [mi, ms] = reorder_gauge(a3, s3[0], {3, 1, 2});
            CHECK(qq_residual_relative(mi, ms) < 1e-9);
        }
    }
}

TEST_CASE("cyclic Coxeter shift") {
    SUBCASE("rank 1: ordering unchanged, global q^{-1} substitution") {
        const QQInstance inst = a1_instance(kQ, kZeta, kZ1);
        const cplx w = a1_closed_form_root(kQ, kZeta, kZ1);
        QQSolution sol;
        sol.q_plus = {Poly::from_roots({w})};
        sol.q_minus = reconstruct_qminus(inst, sol.q_plus);
        const auto [ci, cs] = cyclic_coxeter_shift(inst, sol);
        CHECK(ci.cartan.ordering == std::vector<int>{1});
        CHECK(qq_residual_relative(ci, cs) < 1e-10);
        CHECK(std::abs(cs.q_plus[0].coeff(0) + kQ * w) < 1e-12);  // root moved to q*w
    }

    Rng rng(77);
    const QQInstance a2 = random_instance(rng, LieType::A, 2, 2);
    const auto sols = solved_solutions(a2, {1, 1});
    REQUIRE_FALSE(sols.empty());

    SUBCASE("A2 rotation preserves the residual") {
        const auto [ci, cs] = cyclic_coxeter_shift(a2, sols[0]);
        CHECK(ci.cartan.ordering == std::vector<int>{2, 1});
        CHECK(qq_residual_relative(ci, cs) < 1e-10);
    }

    SUBCASE("r rotations equal a uniform q^{-1} substitution") {
        QQInstance cur = a2;
        QQSolution curs = sols[0];
        for (int t = 0; t < 2; ++t) {
            auto [ni, ns] = cyclic_coxeter_shift(cur, curs);
            cur = ni;
            curs = ns;
        }
        CHECK(cur.cartan.ordering == a2.cartan.ordering);
        CHECK(qq_residual_relative(cur, curs) < 1e-10);
        for (int i = 0; i < 2; ++i) {
            const int m = sols[0].q_plus[i].degree();
            const Poly expect = sols[0].q_plus[i].qshift(a2.q, -1).scaled(int_pow(a2.q, m));
            CHECK(curs.q_plus[i].near_equal(expect, 1e-11));
        }
    }
}

TEST_CASE("non-default ordering drives the whole pipeline") {
    Rng rng(88);
    QQInstance a2 = random_instance(rng, LieType::A, 2, 2);
    a2.cartan.ordering = {2, 1};
    a2.validate();
    const auto sols = solved_solutions(a2, {1, 1}, 13);
    REQUIRE_FALSE(sols.empty());
    for (const auto& sol : sols) {
        CHECK(qq_residual_relative(a2, sol) < 1e-9);
        CHECK(check_nondegenerate(a2, sol, a2.twist_window, 1e-7).pass);
        CHECK(check_miura_plucker(a2, sol, 12).pass);
    }
}

TEST_CASE("reconstruction works for C and D types too") {
    Rng rng(4242);
    for (const auto& [type, rank] : {std::pair{LieType::C, 3}, {LieType::D, 4}}) {
        const QQInstance inst = random_instance(rng, type, rank, 2);
        std::vector<int> degrees(rank, 0);
        degrees[0] = 1;
        const auto sols = solved_solutions(inst, degrees, 5);
        for (const auto& sol : sols) {
            CHECK(qq_residual_relative(inst, sol) < 1e-9);
            CHECK(check_miura_plucker(inst, sol, 10).pass);
        }
    }
}

TEST_CASE("randomized reconstruction property over five types") {
    Rng rng(2026);
    const std::pair<LieType, int> types[] = {
        {LieType::A, 1}, {LieType::A, 2}, {LieType::A, 3}, {LieType::B, 2}, {LieType::G, 2}};
    int produced = 0;
    for (const auto& [type, rank] : types) {
        const QQInstance inst = random_instance(rng, type, rank, 3);
        const auto degrees = random_feasible_degrees(rng, inst, 2);
        const auto sols = solved_solutions(inst, degrees, 5);
        for (const auto& sol : sols) {
            ++produced;
            CHECK(qq_residual_relative(inst, sol) < 1e-9);
            const auto m_minus = qminus_degree(inst, degrees);
            for (int i = 0; i < rank; ++i) {
                CHECK(sol.q_minus[i].degree() == m_minus[i]);
                // relative primality of Q+ and Q-
                if (sol.q_plus[i].degree() >= 1)
                    for (const cplx& w : roots(sol.q_plus[i]))
                        CHECK(std::abs(sol.q_minus[i].eval(w)) >
                              1e-7 * std::max(1.0, sol.q_minus[i].max_abs_coeff()));
            }
        }
    }
    CHECK(produced > 0);
}
