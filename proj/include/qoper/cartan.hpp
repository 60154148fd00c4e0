#ifndef QOPER_CARTAN_HPP
#define QOPER_CARTAN_HPP

#include <string>
#include <vector>

#include "qoper/poly.hpp"

namespace qoper {

enum class LieType : char { A = 'A', B = 'B', C = 'C', D = 'D', E = 'E', F = 'F', G = 'G' };

LieType lie_type_from_string(const std::string& s);
std::string to_string(LieType t);

// Cartan matrix a_ij = <alpha_j, alpha_i^vee> together with the
// ordering of simple roots fixing the Coxeter element c = w_{i1}...w_{ir}.
// Indices are 1-based throughout, matching the usual Dynkin labels
// (Bourbaki numbering for D/E/F types).
struct CartanData {
    LieType lie_type = LieType::A;
    int rank = 1;
    std::vector<int> a;         // row-major rank x rank
    std::vector<int> ordering;  // permutation of 1..rank

    int aij(int i, int j) const { return a[(i - 1) * rank + (j - 1)]; }
    // position of node i in the ordering (1-based)
    int pos(int i) const;
    bool adjacent(int i, int j) const { return i != j && aij(i, j) != 0; }

    void validate() const;  // invariants: diagonal 2, signs, symmetrizable positive definite
};

// Cartan matrix tables for the simple types; default ordering (1,...,r).
CartanData cartan_matrix(LieType type, int rank);

// number of positive roots, computed by closing the simple roots under
// reflections (not a lookup table)
int positive_root_count(const CartanData& cd);

// all positive roots in the simple-root basis
std::vector<std::vector<int>> positive_roots(const CartanData& cd);

struct Twist {
    std::vector<cplx> zetas;
};

// zeta_i -> zeta_i^{-1} prod_{j != i} zeta_j^{-a_{ji}}, others fixed
Twist weyl_reflect_twist(const Twist& twist, int i, const CartanData& cd);

// rejects q = 0 and q with |q^n - 1| < 1e-9 for some 1 <= n <= 64
void reject_root_of_unity(cplx q);

struct TwistAssumptionEntry {
    int j = 0;
    bool pass = false;
    cplx value;          // prod_i zeta_i^{a_{ij}}
    int worst_n = 0;     // power of q achieving the minimum
    double worst_rel = 0.0;
};

struct TwistAssumptionReport {
    std::vector<TwistAssumptionEntry> entries;
    bool all_pass = true;
};

// prod_i zeta_i^{a_{ij}} must stay away from q^n for |n| <= window
TwistAssumptionReport check_twist_assumption(const Twist& twist, cplx q, const CartanData& cd,
                                             int window, double tol = 1e-9);

struct XiPair {
    std::vector<cplx> xi;
    std::vector<cplx> xi_tilde;
};

// xi~_i = zeta_i prod_{j after i} zeta_j^{a_{ji}},
// xi_i  = zeta_i^{-1} prod_{j before i} zeta_j^{-a_{ji}},
// "before"/"after" relative to cd.ordering; xi~_i/xi_i = prod_j zeta_j^{a_{ji}}
XiPair compute_xi(const Twist& twist, const CartanData& cd);

// action of s_i on root coordinates: s_i(alpha_j) = alpha_j - a_{ij} alpha_i
std::vector<int> reflect_root(const CartanData& cd, int i, const std::vector<int>& root);

// reduced word for the longest Weyl element; lexicographically least,
// built by greedy smallest-index extension.  Length equals the number
// of positive roots and the word maps every positive root to a
// negative one (both checked).
std::vector<int> reduced_word_w0(const CartanData& cd);

// a word is reduced iff its inversion count equals its length
bool is_reduced_word(const CartanData& cd, const std::vector<int>& word);

cplx int_pow(cplx base, int e);

}  // namespace qoper

#endif
