#ifndef QOPER_TEST_SUPPORT_HPP
#define QOPER_TEST_SUPPORT_HPP

#include "qoper/backlund.hpp"
#include "qoper/bethe.hpp"

namespace qoper::testing {

// assemble an instance, validating it
QQInstance make_instance(LieType type, int rank, cplx q, std::vector<cplx> zetas,
                         std::vector<Poly> lambdas);

// A1 fixture from the SL(2) closed form: Lambda = z - z1
QQInstance a1_instance(cplx q, cplx zeta, cplx z1);

// the closed form Bethe root for A1, deg Lambda = 1, m = 1:
// w = z1 (1 - zeta^2 q) / (1 - zeta^2)
cplx a1_closed_form_root(cplx q, cplx zeta, cplx z1);

// random instance of the given type whose twist passes the
// assumption; Lambda degrees drawn in [1, max_lambda_deg]
QQInstance random_instance(Rng& rng, LieType type, int rank, int max_lambda_deg);

// random feasible degree vector with m+_i <= max_m (qminus_degree >= 0)
std::vector<int> random_feasible_degrees(Rng& rng, const QQInstance& inst, int max_m);

// solve and return fully reconstructed solutions (q_plus + q_minus)
std::vector<QQSolution> solved_solutions(const QQInstance& inst, const std::vector<int>& degrees,
                                         std::uint64_t seed = 11);

}  // namespace qoper::testing

#endif
