#include "qoper/cartan.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace qoper {

LieType lie_type_from_string(const std::string& s) {
    if (s.size() != 1) throw std::invalid_argument("unknown Lie type: " + s);
    switch (s[0]) {
        case 'A': return LieType::A;
        case 'B': return LieType::B;
        case 'C': return LieType::C;
        case 'D': return LieType::D;
        case 'E': return LieType::E;
        case 'F': return LieType::F;
        case 'G': return LieType::G;
        default: throw std::invalid_argument("unknown Lie type: " + s);
    }
}

std::string to_string(LieType t) { return std::string(1, static_cast<char>(t)); }

int CartanData::pos(int i) const {
    for (int p = 0; p < rank; ++p)
        if (ordering[p] == i) return p + 1;
    throw std::invalid_argument("node index not in ordering");
}

void CartanData::validate() const {
    if (rank < 1 || static_cast<int>(a.size()) != rank * rank)
        throw std::invalid_argument("CartanData: bad dimensions");
    for (int i = 1; i <= rank; ++i) {
        if (aij(i, i) != 2) throw std::invalid_argument("CartanData: diagonal must be 2");
        for (int j = 1; j <= rank; ++j) {
            if (i == j) continue;
            if (aij(i, j) > 0) throw std::invalid_argument("CartanData: off-diagonal must be <= 0");
            if ((aij(i, j) == 0) != (aij(j, i) == 0))
                throw std::invalid_argument("CartanData: zero pattern must be symmetric");
        }
    }
    std::vector<int> seen(rank + 1, 0);
    if (static_cast<int>(ordering.size()) != rank)
        throw std::invalid_argument("CartanData: ordering size mismatch");
    for (int i : ordering) {
        if (i < 1 || i > rank || seen[i]++) throw std::invalid_argument("CartanData: ordering not a permutation");
    }
    // symmetrizability + positive definiteness pins the finite-type tables
    // (equivalent to the Serre presentation defining a finite-dimensional algebra)
    std::vector<double> d(rank, 1.0);
    for (int pass = 0; pass < rank; ++pass)
        for (int i = 1; i <= rank; ++i)
            for (int j = 1; j <= rank; ++j)
                if (i != j && aij(i, j) != 0)
                    d[j - 1] = d[i - 1] * aij(i, j) / aij(j, i);
    Eigen::MatrixXd sym(rank, rank);
    for (int i = 1; i <= rank; ++i)
        for (int j = 1; j <= rank; ++j) sym(i - 1, j - 1) = d[i - 1] * aij(i, j);
    sym = 0.5 * (sym + sym.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-9)
        throw std::invalid_argument("CartanData: matrix is not of finite type");
}

namespace {

void set_edge(std::vector<int>& a, int r, int i, int j, int aij_val, int aji_val) {
    a[(i - 1) * r + (j - 1)] = aij_val;
    a[(j - 1) * r + (i - 1)] = aji_val;
}

}  // namespace

CartanData cartan_matrix(LieType type, int rank) {
    auto bad = [&] {
        return std::invalid_argument("unsupported type/rank: " + to_string(type) + std::to_string(rank));
    };
    switch (type) {
        case LieType::A: if (rank < 1) throw bad(); break;
        case LieType::B: if (rank < 2) throw bad(); break;
        case LieType::C: if (rank < 2) throw bad(); break;
        case LieType::D: if (rank < 3) throw bad(); break;
        case LieType::E: if (rank < 6 || rank > 8) throw bad(); break;
        case LieType::F: if (rank != 4) throw bad(); break;
        case LieType::G: if (rank != 2) throw bad(); break;
    }

    CartanData cd;
    cd.lie_type = type;
    cd.rank = rank;
    cd.a.assign(rank * rank, 0);
    for (int i = 1; i <= rank; ++i) cd.a[(i - 1) * rank + (i - 1)] = 2;
    cd.ordering.resize(rank);
    for (int i = 0; i < rank; ++i) cd.ordering[i] = i + 1;

    auto chain = [&](int from, int to) {
        for (int i = from; i < to; ++i) set_edge(cd.a, rank, i, i + 1, -1, -1);
    };

    switch (type) {
        case LieType::A:
            chain(1, rank);
            break;
        case LieType::B:
            // alpha_rank short: a_{r,r-1} = -2
            chain(1, rank - 1);
            set_edge(cd.a, rank, rank - 1, rank, -1, -2);
            break;
        case LieType::C:
            // alpha_rank long: a_{r-1,r} = -2
            chain(1, rank - 1);
            set_edge(cd.a, rank, rank - 1, rank, -2, -1);
            break;
        case LieType::D:
            chain(1, rank - 1);
            set_edge(cd.a, rank, rank - 2, rank, -1, -1);
            break;
        case LieType::E:
            // Bourbaki: chain 1-3-4-5-...-rank, node 2 attached to 4
            set_edge(cd.a, rank, 1, 3, -1, -1);
            set_edge(cd.a, rank, 2, 4, -1, -1);
            chain(3, rank);
            break;
        case LieType::F:
            // alpha_1, alpha_2 long; a_{32} = -2
            set_edge(cd.a, rank, 1, 2, -1, -1);
            set_edge(cd.a, rank, 2, 3, -1, -2);
            set_edge(cd.a, rank, 3, 4, -1, -1);
            break;
        case LieType::G:
            // alpha_1 short: a_{12} = <alpha_2, alpha_1^vee> = -3
            set_edge(cd.a, rank, 1, 2, -3, -1);
            break;
    }
    cd.validate();
    return cd;
}

std::vector<std::vector<int>> positive_roots(const CartanData& cd) {
    cd.validate();  // the reflection closure below terminates only for finite type
    const int r = cd.rank;
    std::set<std::vector<int>> all;
    std::vector<std::vector<int>> frontier;
    for (int i = 1; i <= r; ++i) {
        std::vector<int> e(r, 0);
        e[i - 1] = 1;
        all.insert(e);
        frontier.push_back(e);
    }
    while (!frontier.empty()) {
        std::vector<std::vector<int>> next;
        for (const auto& root : frontier) {
            for (int i = 1; i <= r; ++i) {
                std::vector<int> img = reflect_root(cd, i, root);
                if (all.insert(img).second) next.push_back(img);
            }
        }
        frontier = std::move(next);
    }
    std::vector<std::vector<int>> pos;
    for (const auto& root : all) {
        bool nonneg = true, nonpos = true;
        for (int c : root) {
            if (c < 0) nonneg = false;
            if (c > 0) nonpos = false;
        }
        if (nonneg && !nonpos) pos.push_back(root);
    }
    return pos;
}

int positive_root_count(const CartanData& cd) { return static_cast<int>(positive_roots(cd).size()); }

cplx int_pow(cplx base, int e) {
    if (e == 0) return {1.0, 0.0};
    cplx b = (e > 0) ? base : cplx(1.0, 0.0) / base;
    int n = std::abs(e);
    cplx acc(1.0, 0.0);
    while (n > 0) {
        if (n & 1) acc *= b;
        b *= b;
        n >>= 1;
    }
    return acc;
}

Twist weyl_reflect_twist(const Twist& twist, int i, const CartanData& cd) {
    if (i < 1 || i > cd.rank) throw std::invalid_argument("weyl_reflect_twist: index out of range");
    if (static_cast<int>(twist.zetas.size()) != cd.rank)
        throw std::invalid_argument("weyl_reflect_twist: twist size mismatch");
    Twist out = twist;
    cplx v = cplx(1.0, 0.0) / twist.zetas[i - 1];
    for (int j = 1; j <= cd.rank; ++j)
        if (j != i) v *= int_pow(twist.zetas[j - 1], -cd.aij(j, i));
    out.zetas[i - 1] = v;
    return out;
}

void reject_root_of_unity(cplx q) {
    if (std::abs(q) == 0.0) throw std::invalid_argument("q must be nonzero");
    cplx qn(1.0, 0.0);
    for (int n = 1; n <= 64; ++n) {
        qn *= q;
        if (std::abs(qn - cplx(1.0, 0.0)) < 1e-9)
            throw std::invalid_argument("q is (numerically) a root of unity: |q^" + std::to_string(n) +
                                        " - 1| < 1e-9");
    }
}

TwistAssumptionReport check_twist_assumption(const Twist& twist, cplx q, const CartanData& cd,
                                             int window, double tol) {
    if (window < 1) throw std::invalid_argument("check_twist_assumption: window must be >= 1");
    reject_root_of_unity(q);
    TwistAssumptionReport rep;
    for (int j = 1; j <= cd.rank; ++j) {
        cplx v(1.0, 0.0);
        for (int i = 1; i <= cd.rank; ++i) v *= int_pow(twist.zetas[i - 1], cd.aij(i, j));
        TwistAssumptionEntry e;
        e.j = j;
        e.value = v;
        double best = 1e300;
        for (int n = -window; n <= window; ++n) {
            const cplx qn = int_pow(q, n);
            const double rel = std::abs(v - qn) / std::max(std::abs(v), std::abs(qn));
            if (rel < best) {
                best = rel;
                e.worst_n = n;
            }
        }
        e.worst_rel = best;
        e.pass = best > tol;
        rep.all_pass = rep.all_pass && e.pass;
        rep.entries.push_back(e);
    }
    return rep;
}

XiPair compute_xi(const Twist& twist, const CartanData& cd) {
    XiPair out;
    out.xi.resize(cd.rank);
    out.xi_tilde.resize(cd.rank);
    for (int i = 1; i <= cd.rank; ++i) {
        cplx xt = twist.zetas[i - 1];
        cplx xi = cplx(1.0, 0.0) / twist.zetas[i - 1];
        for (int j = 1; j <= cd.rank; ++j) {
            if (j == i) continue;
            if (cd.pos(j) > cd.pos(i)) xt *= int_pow(twist.zetas[j - 1], cd.aij(j, i));
            else xi *= int_pow(twist.zetas[j - 1], -cd.aij(j, i));
        }
        out.xi_tilde[i - 1] = xt;
        out.xi[i - 1] = xi;
    }
    return out;
}

std::vector<int> reflect_root(const CartanData& cd, int i, const std::vector<int>& root) {
    std::vector<int> out = root;
    int pairing = 0;  // <root, alpha_i^vee> = sum_j c_j a_{ij}
    for (int j = 1; j <= cd.rank; ++j) pairing += root[j - 1] * cd.aij(i, j);
    out[i - 1] -= pairing;
    return out;
}

namespace {

// apply word (left to right = leftmost reflection applied last) to a root:
// w = s_{w1} ... s_{wk} acting as w(root)
std::vector<int> apply_word(const CartanData& cd, const std::vector<int>& word,
                            std::vector<int> root) {
    for (auto it = word.rbegin(); it != word.rend(); ++it) root = reflect_root(cd, *it, root);
    return root;
}

bool is_negative(const std::vector<int>& root) {
    for (int c : root)
        if (c > 0) return false;
    return true;
}

}  // namespace

std::vector<int> reduced_word_w0(const CartanData& cd) {
    const int r = cd.rank;
    std::vector<int> word;
    const int npos = positive_root_count(cd);
    for (int step = 0; step < npos; ++step) {
        bool extended = false;
        for (int i = 1; i <= r && !extended; ++i) {
            // extending on the right stays reduced iff w(alpha_i) > 0
            std::vector<int> e(r, 0);
            e[i - 1] = 1;
            if (!is_negative(apply_word(cd, word, e))) {
                word.push_back(i);
                extended = true;
            }
        }
        if (!extended) throw std::runtime_error("reduced_word_w0: premature dead end");
    }
    // certificates
    if (static_cast<int>(word.size()) != npos)
        throw std::runtime_error("reduced_word_w0: wrong length");
    for (const auto& root : positive_roots(cd))
        if (!is_negative(apply_word(cd, word, root)))
            throw std::runtime_error("reduced_word_w0: some positive root stays positive");
    return word;
}

bool is_reduced_word(const CartanData& cd, const std::vector<int>& word) {
    for (int i : word)
        if (i < 1 || i > cd.rank) throw std::invalid_argument("word contains invalid index");
    int inversions = 0;
    for (const auto& root : positive_roots(cd))
        if (is_negative(apply_word(cd, word, root))) ++inversions;
    return inversions == static_cast<int>(word.size());
}

}  // namespace qoper
