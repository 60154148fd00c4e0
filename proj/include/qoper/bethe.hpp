#ifndef QOPER_BETHE_HPP
#define QOPER_BETHE_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "qoper/qqsystem.hpp"

namespace qoper {

// Bethe root collections; roots[i] lists the roots of the monic Q+_i.
struct BetheRoots {
    std::vector<std::vector<cplx>> roots;

    std::vector<Poly> to_q_plus() const;
    static BetheRoots from_q_plus(const std::vector<Poly>& q_plus);
    void sort_canonical();
};

struct SolverConfig {
    std::uint64_t seed = 1;
    int starts_per_degree = 64;
    int max_iter = 80;
    double damping = 1.0;
    double residual_tol = kResidualTol;
    double dedupe_tol = 1e-6;
};

struct BetheResidualReport {
    std::vector<std::vector<cplx>> values;  // per (i,k), LHS - RHS of the root-wise equation
    double max_abs = 0.0;
};

// LHS = prod_j zeta_j^{a_{ji}} Q+_i(q w)/Q+_i(q^{-1} w), RHS the
// Lambda/Q+ ratio with the minus sign, evaluated at each Bethe root.
// Denominator factors closer than tolerance to zero raise an error.
BetheResidualReport bethe_residual(const QQInstance& inst, const BetheRoots& roots);

// Lambda(z) = prod_p prod_{j=0}^{r_p-1} (z - q^{-j} z_p) with the z_p
// mutually q-distinct and nonzero; throws if Lambda has no such shape
std::pair<std::vector<cplx>, std::vector<int>> factor_lambda_qstrings(const Poly& lambda, cplx q,
                                                                      double tol = 1e-8);

// XXZ-style residuals: q^r prod_p (w_k - q^{1-r_p} z_p)/(w_k - q z_p)
//                      + zeta^2 q^m prod_j (q w_k - w_j)/(w_k - q w_j)
// vanishes simultaneously with bethe_residual (rank 1 instances only)
std::vector<cplx> sl2_familiar_residual(const QQInstance& inst, const BetheRoots& roots,
                                        const std::vector<cplx>& z_p, const std::vector<int>& r_p);

struct SolveStats {
    int starts = 0;
    int converged = 0;
    int rejected_degenerate = 0;
    int rejected_residual = 0;
    int rejected_nondeg = 0;
};

// Multi-start damped Newton in log-root coordinates (branch tracked by
// continuity), polished in root coordinates on the cleared-denominator
// polynomial system.  Every returned solution satisfies
// bethe_residual < residual_tol, reconstructs, and is nondegenerate.
// Deterministic for fixed (instance, degrees, config).
std::vector<BetheRoots> solve_bethe(const QQInstance& inst, const std::vector<int>& degrees,
                                    const SolverConfig& config, SolveStats* stats = nullptr);

// Coefficient-matching oracle on the QQ-system itself: dense multi-start
// Newton over all unknown coefficients (Q+ monic, Q- degrees from
// qminus_degree).  Unknown count above 8 raises budget_error.
std::vector<QQSolution> solve_qq_bruteforce(const QQInstance& inst, const std::vector<int>& degrees,
                                            const SolverConfig& config);

// root-multiset match within tolerance, node by node (both sorted)
bool same_bethe_roots(const BetheRoots& a, const BetheRoots& b, double tol);

// The poles of the partial-fraction step must be simple and pairwise
// separated: within each node the roots are pairwise distinct and no
// root equals q times another (which also excludes roots at 0).
// Solutions violating this are degenerate and rejected, not merged.
bool bethe_roots_admissible(const BetheRoots& br, cplx q, double tol);

}  // namespace qoper

#endif
