#ifndef QOPER_QQSYSTEM_HPP
#define QOPER_QQSYSTEM_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qoper/cartan.hpp"
#include "qoper/poly.hpp"

namespace qoper {

// Fixed tolerance ladder: residual acceptance is relative 1e-9; the
// Bethe consistency check (which compounds root-finding error) runs
// one order looser per composed stage.
inline constexpr double kResidualTol = 1e-9;
inline constexpr double kConsistencyTol = 1e-7;
inline constexpr int kDefaultWindow = 20;

struct QQInstance {
    CartanData cartan;
    cplx q;
    std::vector<Poly> lambdas;  // monic, nonconstant
    Twist twist;
    int twist_window = kDefaultWindow;

    void validate() const;
    QQInstance with_twist(Twist t) const {
        QQInstance out = *this;
        out.twist = std::move(t);
        return out;
    }
};

struct QQSolution {
    std::vector<Poly> q_plus;
    std::vector<Poly> q_minus;
};

// residual_i(z) = xi~_i Q-_i(z) Q+_i(qz) - xi_i Q-_i(qz) Q+_i(z) - f_i(z),
// f_i(z) = Lambda_i(z) prod_{j after i} [Q+_j(qz)]^{-a_{ji}}
//                       prod_{j before i} [Q+_j(z)]^{-a_{ji}}
std::vector<Poly> qq_residual(const QQInstance& inst, const QQSolution& sol);

// the right-hand side f_i of the i-th QQ equation (1-based node index)
Poly qq_rhs(const QQInstance& inst, const std::vector<Poly>& q_plus, int i);

// max_i maxcoeff(residual_i) / maxcoeff(f_i)
double qq_residual_relative(const QQInstance& inst, const QQSolution& sol);

struct NondegEntry {
    std::string kind;  // "twist", "monic", "qdistinct"
    int i = 0, j = 0, k = 0;
    bool pass = true;
    std::string detail;     // witness description when failing
    cplx witness_u, witness_v;
    int witness_n = 0;
};

struct NondegReport {
    std::vector<NondegEntry> entries;
    bool pass = true;
    void add(NondegEntry e) {
        pass = pass && e.pass;
        entries.push_back(std::move(e));
    }
};

// (a) twist assumption; (b) for all i != j, k with a_{ik},a_{jk} != 0:
// roots of Q+_i, Q+_j, Q-_j pairwise q-distinct and q-distinct from
// the roots of Lambda_k;
// (c) every Q+_i monic.  Rank 1 uses the SL(2) rule (Q+ vs Lambda, Q+ vs Q-).
NondegReport check_nondegenerate(const QQInstance& inst, const QQSolution& sol, int window,
                                 double tol);

// Degree bookkeeping: m-_i = deg Lambda_i - m+_i - sum_{j != i} a_{ji} m+_j.
// Throws if any predicted degree is negative.
std::vector<int> qminus_degree(const QQInstance& inst, const std::vector<int>& m_plus);

// Q- reconstruction from monic Q+ via partial fractions and the
// twist-resonance-free linear system for the polynomial part.  The
// returned polynomials make qq_residual vanish (below kResidualTol)
// exactly when q_plus satisfies the Bethe equations; the per-pole
// consistency residue mismatch is checked against consistency_tol.
std::vector<Poly> reconstruct_qminus(const QQInstance& inst, const std::vector<Poly>& q_plus,
                                     double consistency_tol = kConsistencyTol);

// gauge map between orderings (same Coxeter ordering set, q-power shifts
// D^i along Dynkin-tree paths with node 1 as basepoint); residual
// vanishing is preserved
std::pair<QQInstance, QQSolution> reorder_gauge(const QQInstance& inst, const QQSolution& sol,
                                                const std::vector<int>& new_ordering);

// rotate the ordering (i1,...,ir) -> (i2,...,ir,i1) and q^{-1}-shift the
// data at node i1
std::pair<QQInstance, QQSolution> cyclic_coxeter_shift(const QQInstance& inst,
                                                       const QQSolution& sol);

}  // namespace qoper

#endif
