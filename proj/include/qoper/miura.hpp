#ifndef QOPER_MIURA_HPP
#define QOPER_MIURA_HPP

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "qoper/qqsystem.hpp"

namespace qoper {

// Chevalley generators of sl(n) in the defining representation plus the
// t_i = 1 liftings S_i = exp(E_i) exp(-F_i) exp(E_i), whose 2x2 block is
// [[0,1],[-1,0]].
struct SLnRep {
    int n = 2;
    std::vector<Eigen::MatrixXcd> E, F, Hcheck, S;

    static SLnRep make(int n);
    // bracket + Serre relation checks; returns the worst deviation
    double serre_residual() const;
};

struct RationalMatrix {
    int rows = 0, cols = 0;
    std::vector<RationalFn> entries;

    RationalMatrix() = default;
    RationalMatrix(int r, int c);
    static RationalMatrix identity(int n);

    RationalFn& at(int r, int c) { return entries[r * cols + c]; }
    const RationalFn& at(int r, int c) const { return entries[r * cols + c]; }

    Eigen::MatrixXcd eval(cplx z) const;
    RationalMatrix qshift(cplx q, int k) const;
    friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b);
    RationalMatrix simplified(double tol = 1e-9) const;
};

// exp(c f_i) etc. as rational matrices (X strictly triangular nilpotent)
RationalMatrix rational_exp_nilpotent(const Eigen::MatrixXcd& X, const RationalFn& coeff);
// inverse of a unipotent (I + strictly triangular) rational matrix
RationalMatrix inverse_unipotent(const RationalMatrix& m);

struct SampleReport {
    bool pass = true;
    int samples = 0;
    double max_rel_err = 0.0;
    std::string detail;
};

// deterministic annulus sampler that retries away from given poles
class SamplePlan {
public:
    SamplePlan(std::uint64_t seed, double rlo, double rhi) : rng_(seed), rlo_(rlo), rhi_(rhi) {}
    // next sample keeping |den_k(z)| above a relative floor; throws
    // budget_error after too many rejected draws
    cplx next(const std::vector<const Poly*>& denominators);

private:
    Rng rng_;
    double rlo_, rhi_;
};

// A(z) = prod_i [zeta_i Q+_i(qz)/Q+_i(z)]^{alpha_i^vee}
//               exp(Lambda_i Q+_i /(zeta_i Q+_i(qz)) e_i)
// in the Coxeter ordering; upper triangular with det 1.  Type A only,
// rep.n must equal rank+1.
RationalMatrix build_miura_connection(const QQInstance& inst, const std::vector<Poly>& q_plus,
                                      const SLnRep& rep);

// the three 2x2 frames attached to node i
struct AssociatedGL2 {
    RationalMatrix plucker;       // raw rank-2 reduction, pairs with v_i in the Miura-Plucker check
    RationalMatrix constant_det;  // constant-determinant frame, det = prod_{j!=i} zeta_j^{-a_{ji}}
    RationalMatrix sl2;           // SL(2) frame, det = 1
    Poly rho;                     // upper entry of the constant-det frame (errors if not polynomial)
    cplx det_value;               // prod_{j!=i} zeta_j^{-a_{ji}}
};

AssociatedGL2 associated_gl2(const QQInstance& inst, const QQSolution& sol, int i);

// verifies A_i(z) = v_i(qz) Z_i v_i(z)^{-1} entrywise at sample points,
// v_i built from the solution data (works for every simple type)
SampleReport check_miura_plucker(const QQInstance& inst, const QQSolution& sol, int samples,
                                 std::uint64_t seed = 2024, double tol = 1e-9);

// U(z) = [[Q+, -Q-],[0, Q+^{-1}]]; verifies U(qz) Z U(z)^{-1} equals the
// Miura connection and that the (1,2) entry is the q-Wronskian Lambda.
// Requires zeta != +-1.
std::pair<RationalMatrix, SampleReport> sl2_gauge_to_Z(const QQInstance& inst,
                                                       const std::vector<Poly>& q_plus,
                                                       const std::vector<Poly>& q_minus,
                                                       int samples = 20);

// T(z) = zeta Q+(q^2 z)/(Lambda(qz) Q+(qz)) + zeta^{-1} Q+(z)/(Lambda(z) Q+(qz));
// also verifies the defining gauge identity at sample points
RationalFn canonical_tq_sl2(const QQInstance& inst, const std::vector<Poly>& q_plus,
                            SampleReport* gauge_check = nullptr, int samples = 12);

// residues of T at the poles z = w_k/q coming from the shifted Baxter
// factor Q+(qz); they vanish exactly on Bethe solutions
std::vector<cplx> tq_residues_at_roots(const QQInstance& inst, const std::vector<Poly>& q_plus);

struct CanonicalForm {
    RationalMatrix uprime;       // lower unipotent gauge
    std::vector<RationalFn> T;   // canonical coordinates, normal-form normalization
    SampleReport shape_check;
};

// q-Drinfeld-Sokolov reduction of an SL(n) oper connection in the
// Bruhat cell: row-by-row elimination producing the unique u'(z) with
// u'(qz) A(z) u'(z)^{-1} = prod_i [Lambda_i^{alpha_i^vee} s_i e^{-T_i e_i}].
// Standard ordering, n <= 4.  For n = 2, T_1(z) = Lambda(z)^2 * T_{TQ}(z)
// with T_TQ from canonical_tq_sl2 (the documented normalization bridge).
CanonicalForm canonical_form_sln(const RationalMatrix& A, const QQInstance& inst,
                                 const SLnRep& rep, int samples = 16);

// the canonical-shape matrix prod_i [Lambda_i^{alpha_i^vee} S_i (I - T_i E_i)]
// evaluated numerically at z (standard ordering)
Eigen::MatrixXcd canonical_shape_eval(const QQInstance& inst, const SLnRep& rep,
                                      const std::vector<RationalFn>& T, cplx z);

// twist as a diagonal matrix prod_i zeta_i^{Hcheck_i}
Eigen::MatrixXcd twist_matrix(const Twist& twist, const SLnRep& rep);

// q-orbit-closed candidate pool for reduce_with_candidate_roots: the
// roots of every entry denominator of m and of the Lambda's, multiplied
// by q^t for |t| <= shift_range
std::vector<cplx> denominator_root_candidates(const RationalMatrix& m, const QQInstance& inst,
                                              int shift_range = 4);

}  // namespace qoper

#endif
