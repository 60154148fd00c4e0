#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "test_support.hpp"

using namespace qoper;

namespace {

Poly P(std::initializer_list<cplx> cs) { return Poly(std::vector<cplx>(cs)); }

}  // namespace

TEST_CASE("polynomial arithmetic basics") {
    const Poly zp1 = P({1.0, 1.0});   // z + 1
    const Poly zm1 = P({-1.0, 1.0});  // z - 1
    const Poly prod = zp1 * zm1;
    CHECK(prod.near_equal(P({-1.0, 0.0, 1.0}), 1e-15));  // z^2 - 1

    CHECK(prod.eval(cplx(2.0, 0.0)) == cplx(3.0, 0.0));

    const Poly scaled = Poly::variable().scaled(cplx(0.0, 0.0));
    CHECK(scaled.is_zero());
    CHECK(scaled.degree() == -1);

    CHECK(P({1.0, 2.0, 3.0}).derivative().near_equal(P({2.0, 6.0}), 1e-15));
}

TEST_CASE("qshift") {
    const cplx q(2.0, 0.0);
    CHECK(Poly::variable().qshift(q, 1).near_equal(P({0.0, 2.0}), 1e-15));
    CHECK(P({1.0, 0.0, 1.0}).qshift(q, -1).near_equal(P({1.0, 0.0, 0.25}), 1e-15));

    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<cplx> c1(4), c2(3);
        for (auto& v : c1) v = rng.gaussian_like();
        for (auto& v : c2) v = rng.gaussian_like();
        const Poly a(c1), b(c2);
        const cplx qq = rng.annulus(0.5, 2.0);
        // inverse shifts cancel
        CHECK(a.qshift(qq, 1).qshift(qq, -1).near_equal(a, 1e-12));
        // ring homomorphism
        CHECK((a * b).qshift(qq, 1).near_equal(a.qshift(qq, 1) * b.qshift(qq, 1), 1e-12));
    }
}

TEST_CASE("roots: examples") {
    const auto r1 = roots(P({-1.0, 0.0, 1.0}));
    REQUIRE(r1.size() == 2);
    CHECK(std::abs(r1[0] - cplx(-1.0, 0.0)) < 1e-12);
    CHECK(std::abs(r1[1] - cplx(1.0, 0.0)) < 1e-12);

    const auto r2 = roots(Poly::from_roots({cplx(3.0, 0.0), cplx(3.0, 0.0)}));
    REQUIRE(r2.size() == 2);
    for (const auto& w : r2) CHECK(std::abs(w - cplx(3.0, 0.0)) < 1e-6);

    CHECK_THROWS(roots(Poly::zero()));
    CHECK_THROWS(roots(Poly::one()));
}

TEST_CASE("roots: reconstruction oracle") {
    Rng rng(7);
    SUBCASE("random monic degree 8") {
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<cplx> coeffs(9);
            for (int k = 0; k < 8; ++k) coeffs[k] = rng.gaussian_like();
            coeffs[8] = cplx(1.0, 0.0);
            const Poly p(coeffs);
            const auto rts = roots(p);
            const Poly re_expanded = Poly::from_roots(rts);
            CHECK(re_expanded.near_equal(p, 1e-9));
        }
    }
    SUBCASE("separated roots up to degree 12 round-trip as multisets") {
        for (int trial = 0; trial < 10; ++trial) {
            const int deg = 3 + static_cast<int>(rng.uniform() * 10) % 10;
            std::vector<cplx> rts;
            while (static_cast<int>(rts.size()) < deg) {
                const cplx w = rng.annulus(0.5, 2.0);
                bool far = true;
                for (const cplx& u : rts)
                    if (std::abs(u - w) < 0.15) far = false;
                if (far) rts.push_back(w);
            }
            auto recovered = roots(Poly::from_roots(rts));
            std::sort(rts.begin(), rts.end(), [](cplx a, cplx b) {
                return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
            });
            REQUIRE(recovered.size() == rts.size());
            for (std::size_t k = 0; k < rts.size(); ++k)
                CHECK(std::abs(recovered[k] - rts[k]) < 1e-9 * std::max(1.0, std::abs(rts[k])));
        }
    }
}

TEST_CASE("q_distinct") {
    const cplx q2(2.0, 0.0), q3(3.0, 0.0);
    CHECK_FALSE(q_distinct(cplx(8.0, 0.0), cplx(1.0, 0.0), q2, 5, 1e-9));
    CHECK(q_distinct(cplx(1.0, 0.0), cplx(5.0, 0.0), q3, 10, 1e-9));
    CHECK_FALSE(q_distinct(cplx(5.0, 0.0), cplx(5.0, 0.0), q3, 10, 1e-9));
    const auto w = q_distinct_witness(cplx(8.0, 0.0), cplx(1.0, 0.0), q2, 5, 1e-9);
    CHECK(w.n == 3);
}

TEST_CASE("partial fractions: textbook and division cases") {
    // 1/(z^2 - 1)
    const RationalFn f1(Poly::one(), P({-1.0, 0.0, 1.0}));
    const auto pf1 = partial_fractions_simple(f1, {{cplx(1.0, 0.0), cplx(-1.0, 0.0)}});
    CHECK(pf1.poly_part.is_zero());
    CHECK(std::abs(pf1.residues[0][0] - cplx(0.5, 0.0)) < 1e-12);
    CHECK(std::abs(pf1.residues[0][1] - cplx(-0.5, 0.0)) < 1e-12);

    // z^2/(z - 1) = (z + 1) + 1/(z-1)
    const RationalFn f2(P({0.0, 0.0, 1.0}), P({-1.0, 1.0}));
    const auto pf2 = partial_fractions_simple(f2, {{cplx(1.0, 0.0)}});
    CHECK(pf2.poly_part.near_equal(P({1.0, 1.0}), 1e-12));
    CHECK(std::abs(pf2.residues[0][0] - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("partial fractions: sampling oracle on random 5-pole functions") {
    Rng rng(21);
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<cplx> poles;
        while (poles.size() < 5) {
            const cplx p = rng.annulus(0.5, 2.0);
            bool far = true;
            for (const cplx& u : poles)
                if (std::abs(u - p) < 0.2) far = false;
            if (far) poles.push_back(p);
        }
        std::vector<cplx> num_coeffs(5);
        for (auto& v : num_coeffs) v = rng.gaussian_like();
        const RationalFn f(Poly(num_coeffs), Poly::from_roots(poles));
        // throws if the reconstruction residual exceeds 1e-9; reaching
        // here means the oracle passed
        const auto pf = partial_fractions_simple(f, {poles});
        CHECK(pf.residues[0].size() == 5);
    }
}

TEST_CASE("partial fractions: clustered poles rejected") {
    const std::vector<cplx> poles = {cplx(1.0, 0.0), cplx(1.0 + 1e-12, 0.0)};
    const RationalFn f(Poly::one(), Poly::from_roots(poles));
    CHECK_THROWS_AS(partial_fractions_simple(f, {poles}), std::invalid_argument);
}

TEST_CASE("rational function identity test") {
    // (z^2-1)/(z-1) == z+1 as functions
    const RationalFn a(P({-1.0, 0.0, 1.0}), P({-1.0, 1.0}));
    const RationalFn b = RationalFn::from_poly(P({1.0, 1.0}));
    CHECK(a.same_function(b));
    CHECK_FALSE(a.same_function(RationalFn::from_poly(P({1.0, 1.1}))));
    const RationalFn s = a.simplified();
    CHECK(s.den.degree() == 0);
}
