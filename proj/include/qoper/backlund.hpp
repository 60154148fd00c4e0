#ifndef QOPER_BACKLUND_HPP
#define QOPER_BACKLUND_HPP

#include "qoper/miura.hpp"

namespace qoper {

struct BacklundStep {
    int node = 0;
    RationalFn mu;              // gauge function mu_i built from the pre-data
    QQSolution pre_solution, post_solution;
    Twist pre_twist, post_twist;
    cplx monic_scale;           // leading coefficient absorbed when Q- becomes the new Q+
    NondegReport nondeg;        // node-swap admissibility report
};

struct BacklundChain {
    std::vector<int> word;            // consumed right to left
    std::vector<BacklundStep> steps;  // steps[0] corresponds to the last letter
    Twist final_twist;
    QQSolution final_solution;
    bool has_bminus = false;
    RationalMatrix b_minus;
    SampleReport hw_check;            // intertwining identity on highest-weight vectors
};

// Admissibility hypotheses for a transform at node i: the roots of
// Q-_i must be q-distinct from the Lambda roots of neighbouring nodes
// and from the other Q+_j (report style)
NondegReport check_backlund_hypotheses(const QQInstance& inst, const QQSolution& sol, int i,
                                       int window, double tol);

// Swap (Q+_i <- Q-_i , Z <- s_i(Z)), renormalize monic, rebuild all Q-,
// verify the new residual.  Throws on hypothesis violation or
// reconstruction failure.
BacklundStep backlund_transform(const QQInstance& inst, const QQSolution& sol, int i);

// exp(mu_i(qz) f_i) A(z) exp(-mu_i(z) f_i) must equal the connection of
// the swapped data (type A rep); the underlying torus-unipotent
// commutation identities are unit-tested standalone
SampleReport verify_backlund_gauge(const BacklundStep& step, const QQInstance& pre_instance,
                                   const SLnRep& rep, int samples = 20);

// Applies the word right to left; aborts with a genericity report on a
// failed step.  With a type A rep, assembles
// b_-(z) = e^{-mu_{i1} f_{i1}} ... e^{-mu_{ik} f_{ik}} prod_j [Qbar+_j]^{alpha_j^vee}
// and verifies b_-(qz) w(Z) v = A(z) b_-(z) v on the highest-weight
// vectors of the fundamental representations (compound matrices).
BacklundChain backlund_chain(const QQInstance& inst, const QQSolution& sol,
                             const std::vector<int>& word, const SLnRep* rep = nullptr,
                             int samples = 12);

struct ZtwistCertificate {
    RationalMatrix b_plus;
    SampleReport report;
};

// Bruhat factorization b_- = b_+ w0 n_+ (fraction-aware elimination on
// the rational entries) followed by the entrywise check
// A(z) = b_+(qz) Z b_+(z)^{-1} at sample points.
ZtwistCertificate certify_full_ztwist(const BacklundChain& chain, const QQInstance& inst,
                                      const SLnRep& rep, int samples = 20, double tol = 1e-7);

// k-th compound matrix (action on the k-th exterior power, lex-ordered basis)
Eigen::MatrixXcd compound_matrix(const Eigen::MatrixXcd& m, int k);

}  // namespace qoper

#endif
