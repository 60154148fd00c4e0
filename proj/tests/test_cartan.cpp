#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

using namespace qoper;

TEST_CASE("cartan matrix tables") {
    const CartanData a1 = cartan_matrix(LieType::A, 1);
    CHECK(a1.aij(1, 1) == 2);

    const CartanData a2 = cartan_matrix(LieType::A, 2);
    CHECK(a2.aij(1, 2) == -1);
    CHECK(a2.aij(2, 1) == -1);

    // a_ij = <alpha_j, alpha_i^vee>; with alpha_1 short in G2 the -3 sits at a_12
    const CartanData g2 = cartan_matrix(LieType::G, 2);
    CHECK(g2.aij(1, 2) == -3);
    CHECK(g2.aij(2, 1) == -1);

    const CartanData b2 = cartan_matrix(LieType::B, 2);
    CHECK(b2.aij(1, 2) == -1);
    CHECK(b2.aij(2, 1) == -2);
    const CartanData c3 = cartan_matrix(LieType::C, 3);
    CHECK(c3.aij(2, 3) == -2);
    CHECK(c3.aij(3, 2) == -1);

    CHECK_THROWS_AS(cartan_matrix(LieType::G, 3), std::invalid_argument);
    CHECK_THROWS_AS(cartan_matrix(LieType::E, 5), std::invalid_argument);
    CHECK_THROWS_AS(cartan_matrix(LieType::B, 1), std::invalid_argument);
}

TEST_CASE("every table is finite type with the right root count") {
    struct Expect {
        LieType t;
        int rank;
        int npos;
    };
    const Expect table[] = {
        {LieType::A, 1, 1},  {LieType::A, 2, 3},  {LieType::A, 3, 6},  {LieType::A, 4, 10},
        {LieType::B, 2, 4},  {LieType::B, 3, 9},  {LieType::C, 2, 4},  {LieType::C, 3, 9},
        {LieType::D, 3, 6},  {LieType::D, 4, 12}, {LieType::E, 6, 36}, {LieType::E, 7, 63},
        {LieType::E, 8, 120}, {LieType::F, 4, 24}, {LieType::G, 2, 6},
    };
    for (const auto& e : table) {
        const CartanData cd = cartan_matrix(e.t, e.rank);
        cd.validate();  // symmetrizable + positive definite
        CHECK(positive_root_count(cd) == e.npos);
    }
}

TEST_CASE("weyl reflection on twists") {
    const CartanData a1 = cartan_matrix(LieType::A, 1);
    Twist t{{cplx(0.6, 0.0)}};
    const Twist r = weyl_reflect_twist(t, 1, a1);
    CHECK(std::abs(r.zetas[0] - cplx(1.0 / 0.6, 0.0)) < 1e-15);

    const CartanData a2 = cartan_matrix(LieType::A, 2);
    Twist t2{{cplx(2.0, 0.0), cplx(3.0, 0.0)}};
    const Twist r2 = weyl_reflect_twist(t2, 1, a2);
    CHECK(std::abs(r2.zetas[0] - cplx(1.5, 0.0)) < 1e-14);
    CHECK(std::abs(r2.zetas[1] - cplx(3.0, 0.0)) < 1e-15);

    SUBCASE("involution at a fixed node") {
        Rng rng(3);
        for (const auto& [type, rank] : {std::pair{LieType::A, 3}, {LieType::B, 2},
                                         {LieType::G, 2}, {LieType::D, 4}}) {
            const CartanData cd = cartan_matrix(type, rank);
            for (int trial = 0; trial < 10; ++trial) {
                Twist tw;
                for (int i = 0; i < rank; ++i) tw.zetas.push_back(rng.annulus(0.3, 3.0));
                for (int i = 1; i <= rank; ++i) {
                    const Twist back = weyl_reflect_twist(weyl_reflect_twist(tw, i, cd), i, cd);
                    for (int j = 0; j < rank; ++j)
                        CHECK(std::abs(back.zetas[j] - tw.zetas[j]) <
                              1e-14 * std::abs(tw.zetas[j]));
                }
            }
        }
    }
}

TEST_CASE("twist assumption scan") {
    const CartanData a1 = cartan_matrix(LieType::A, 1);
    const cplx q3(3.0, 0.0);
    CHECK(check_twist_assumption({{cplx(2.0, 0.0)}}, q3, a1, 10).all_pass);

    // zeta^2 = q^3 violates at n = 3
    const cplx zeta = std::sqrt(cplx(27.0, 0.0));
    const auto rep = check_twist_assumption({{zeta}}, q3, a1, 5);
    CHECK_FALSE(rep.all_pass);
    CHECK(rep.entries[0].worst_n == 3);

    const CartanData a2 = cartan_matrix(LieType::A, 2);
    CHECK(check_twist_assumption({{cplx(2.0, 0.0), cplx(3.0, 0.0)}}, cplx(1.7, 0.0), a2, 20)
              .all_pass);

    CHECK_THROWS_AS(check_twist_assumption({{cplx(2.0, 0.0)}}, q3, a1, 0), std::invalid_argument);
    // roots of unity are rejected outright
    CHECK_THROWS_AS(check_twist_assumption({{cplx(2.0, 0.0)}}, cplx(-1.0, 0.0), a1, 5),
                    std::invalid_argument);
}

TEST_CASE("xi pairs") {
    const CartanData a1 = cartan_matrix(LieType::A, 1);
    const cplx zeta(0.6, 0.2);
    const XiPair xs = compute_xi({{zeta}}, a1);
    CHECK(std::abs(xs.xi_tilde[0] - zeta) < 1e-15);
    CHECK(std::abs(xs.xi[0] - cplx(1.0, 0.0) / zeta) < 1e-15);

    const CartanData a2 = cartan_matrix(LieType::A, 2);
    const cplx z1(2.0, 0.0), z2(3.0, 0.0);
    const XiPair x2 = compute_xi({{z1, z2}}, a2);
    CHECK(std::abs(x2.xi_tilde[0] - z1 / z2) < 1e-14);
    CHECK(std::abs(x2.xi[0] - cplx(0.5, 0.0)) < 1e-15);
    CHECK(std::abs(x2.xi_tilde[1] - z2) < 1e-15);
    CHECK(std::abs(x2.xi[1] - z1 / z2) < 1e-14);

    SUBCASE("ratio identity for random twists, all types") {
        Rng rng(9);
        for (const auto& [type, rank] : {std::pair{LieType::A, 3}, {LieType::B, 3},
                                         {LieType::C, 2}, {LieType::D, 4}, {LieType::F, 4},
                                         {LieType::G, 2}, {LieType::E, 6}}) {
            const CartanData cd = cartan_matrix(type, rank);
            for (int trial = 0; trial < 6; ++trial) {
                Twist tw;
                for (int i = 0; i < rank; ++i) tw.zetas.push_back(rng.annulus(0.4, 2.4));
                const XiPair xs = compute_xi(tw, cd);
                for (int i = 1; i <= rank; ++i) {
                    cplx prod(1.0, 0.0);
                    for (int j = 1; j <= rank; ++j)
                        prod *= int_pow(tw.zetas[j - 1], cd.aij(j, i));
                    const cplx ratio = xs.xi_tilde[i - 1] / xs.xi[i - 1];
                    CHECK(std::abs(ratio - prod) < 1e-12 * std::abs(prod));
                }
            }
        }
    }
}

TEST_CASE("reduced word for w0") {
    const CartanData a1 = cartan_matrix(LieType::A, 1);
    CHECK(reduced_word_w0(a1) == std::vector<int>{1});

    const CartanData a2 = cartan_matrix(LieType::A, 2);
    CHECK(reduced_word_w0(a2) == std::vector<int>{1, 2, 1});

    const CartanData b2 = cartan_matrix(LieType::B, 2);
    const auto wb2 = reduced_word_w0(b2);
    CHECK(wb2.size() == 4);
    CHECK(is_reduced_word(b2, wb2));

    for (const auto& [type, rank] : {std::pair{LieType::A, 3}, {LieType::G, 2},
                                     {LieType::D, 4}, {LieType::C, 3}}) {
        const CartanData cd = cartan_matrix(type, rank);
        const auto w = reduced_word_w0(cd);
        CHECK(static_cast<int>(w.size()) == positive_root_count(cd));
        CHECK(is_reduced_word(cd, w));
    }

    CHECK(is_reduced_word(a2, {1, 2}));
    CHECK_FALSE(is_reduced_word(a2, {1, 1}));
    CHECK_FALSE(is_reduced_word(a2, {1, 2, 1, 2}));
}
