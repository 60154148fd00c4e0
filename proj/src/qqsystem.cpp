#include "qoper/qqsystem.hpp"

#include <algorithm>
#include <cmath>

namespace qoper {

void QQInstance::validate() const {
    cartan.validate();
    if (static_cast<int>(lambdas.size()) != cartan.rank)
        throw std::invalid_argument("QQInstance: need one Lambda per node");
    if (static_cast<int>(twist.zetas.size()) != cartan.rank)
        throw std::invalid_argument("QQInstance: need one zeta per node");
    for (const auto& z : twist.zetas)
        if (std::abs(z) == 0.0) throw std::invalid_argument("QQInstance: zeta must be nonzero");
    for (const Poly& lam : lambdas) {
        if (lam.degree() < 1) throw std::invalid_argument("QQInstance: Lambda_i must be nonconstant");
        if (std::abs(lam.lead() - cplx(1.0, 0.0)) > 1e-9)
            throw std::invalid_argument("QQInstance: Lambda_i must be monic");
    }
    reject_root_of_unity(q);
    const auto rep = check_twist_assumption(twist, q, cartan, twist_window);
    if (!rep.all_pass) throw std::invalid_argument("QQInstance: twist assumption fails");
}

Poly qq_rhs(const QQInstance& inst, const std::vector<Poly>& q_plus, int i) {
    const CartanData& cd = inst.cartan;
    Poly rhs = inst.lambdas[i - 1];
    for (int j = 1; j <= cd.rank; ++j) {
        if (j == i || cd.aij(j, i) == 0) continue;
        const int e = -cd.aij(j, i);
        const Poly factor = (cd.pos(j) > cd.pos(i)) ? q_plus[j - 1].qshift(inst.q, 1) : q_plus[j - 1];
        for (int t = 0; t < e; ++t) rhs = rhs * factor;
    }
    return rhs;
}

std::vector<Poly> qq_residual(const QQInstance& inst, const QQSolution& sol) {
    const CartanData& cd = inst.cartan;
    if (static_cast<int>(sol.q_plus.size()) != cd.rank ||
        static_cast<int>(sol.q_minus.size()) != cd.rank)
        throw std::invalid_argument("qq_residual: solution size mismatch");
    const XiPair xi = compute_xi(inst.twist, cd);
    std::vector<Poly> res;
    res.reserve(cd.rank);
    for (int i = 1; i <= cd.rank; ++i) {
        const Poly& qp = sol.q_plus[i - 1];
        const Poly& qm = sol.q_minus[i - 1];
        Poly lhs = xi.xi_tilde[i - 1] * (qm * qp.qshift(inst.q, 1)) -
                   xi.xi[i - 1] * (qm.qshift(inst.q, 1) * qp);
        res.push_back(lhs - qq_rhs(inst, sol.q_plus, i));
    }
    return res;
}

double qq_residual_relative(const QQInstance& inst, const QQSolution& sol) {
    const auto res = qq_residual(inst, sol);
    double worst = 0.0;
    for (int i = 1; i <= inst.cartan.rank; ++i) {
        const double scale = std::max(qq_rhs(inst, sol.q_plus, i).max_abs_coeff(), 1e-300);
        worst = std::max(worst, res[i - 1].max_abs_coeff() / scale);
    }
    return worst;
}

namespace {

std::vector<cplx> safe_roots(const Poly& p) {
    if (p.degree() < 1) return {};
    return roots(p);
}

void qdistinct_pairs(NondegReport& rep, const QQInstance& inst, const std::string& what, int i,
                     int j, int k, const std::vector<cplx>& us, const std::vector<cplx>& vs,
                     int window, double tol, bool skip_equal_index) {
    NondegEntry e;
    e.kind = "qdistinct";
    e.i = i;
    e.j = j;
    e.k = k;
    e.detail = what;
    e.pass = true;
    for (std::size_t a = 0; a < us.size() && e.pass; ++a) {
        for (std::size_t b = 0; b < vs.size() && e.pass; ++b) {
            if (skip_equal_index && a == b) continue;
            const auto w = q_distinct_witness(us[a], vs[b], inst.q, window, tol);
            if (!w.distinct) {
                e.pass = false;
                e.witness_u = us[a];
                e.witness_v = vs[b];
                e.witness_n = w.n;
                e.detail = what + ": " + format_cplx(us[a]) + " ~ q^" + std::to_string(w.n) +
                           " * " + format_cplx(vs[b]);
            }
        }
    }
    rep.add(std::move(e));
}

}  // namespace

NondegReport check_nondegenerate(const QQInstance& inst, const QQSolution& sol, int window,
                                 double tol) {
    const CartanData& cd = inst.cartan;
    NondegReport rep;

    const auto twist_rep = check_twist_assumption(inst.twist, inst.q, cd, window);
    for (const auto& te : twist_rep.entries) {
        NondegEntry e;
        e.kind = "twist";
        e.j = te.j;
        e.pass = te.pass;
        if (!te.pass)
            e.detail = "twist assumption fails at node " + std::to_string(te.j) + " (n=" +
                       std::to_string(te.worst_n) + ")";
        rep.add(std::move(e));
    }

    for (int i = 1; i <= cd.rank; ++i) {
        NondegEntry e;
        e.kind = "monic";
        e.i = i;
        e.pass = !sol.q_plus[i - 1].is_zero() &&
                 std::abs(sol.q_plus[i - 1].lead() - cplx(1.0, 0.0)) <= 1e-8;
        if (!e.pass) e.detail = "Q+_" + std::to_string(i) + " is not monic";
        rep.add(std::move(e));
    }

    std::vector<std::vector<cplx>> rp(cd.rank), rm(cd.rank), rl(cd.rank);
    for (int i = 1; i <= cd.rank; ++i) {
        rp[i - 1] = safe_roots(sol.q_plus[i - 1]);
        rm[i - 1] = safe_roots(sol.q_minus[i - 1]);
        rl[i - 1] = safe_roots(inst.lambdas[i - 1]);
    }

    if (cd.rank == 1) {
        // SL(2) rule: roots of Q+ q-distinct from roots of Lambda; Q+ vs Q- relatively prime
        qdistinct_pairs(rep, inst, "Q+_1 vs Lambda_1", 1, 1, 1, rp[0], rl[0], window, tol, false);
        qdistinct_pairs(rep, inst, "Q+_1 vs Q-_1", 1, 1, 1, rp[0], rm[0], window, tol, false);
        return rep;
    }

    for (int i = 1; i <= cd.rank; ++i) {
        for (int j = 1; j <= cd.rank; ++j) {
            if (i == j) continue;
            for (int k = 1; k <= cd.rank; ++k) {
                if (cd.aij(i, k) == 0 || cd.aij(j, k) == 0) continue;
                const std::string tag = "(i,j,k)=(" + std::to_string(i) + "," + std::to_string(j) +
                                        "," + std::to_string(k) + ")";
                qdistinct_pairs(rep, inst, tag + " Q+_i vs Q+_j", i, j, k, rp[i - 1], rp[j - 1],
                                window, tol, false);
                qdistinct_pairs(rep, inst, tag + " Q+_i vs Lambda_k", i, j, k, rp[i - 1], rl[k - 1],
                                window, tol, false);
                qdistinct_pairs(rep, inst, tag + " Q+_j vs Q-_j", i, j, k, rp[j - 1], rm[j - 1],
                                window, tol, false);
                qdistinct_pairs(rep, inst, tag + " Q-_j vs Lambda_k", i, j, k, rm[j - 1], rl[k - 1],
                                window, tol, false);
            }
        }
    }
    return rep;
}

std::vector<int> qminus_degree(const QQInstance& inst, const std::vector<int>& m_plus) {
    const CartanData& cd = inst.cartan;
    if (static_cast<int>(m_plus.size()) != cd.rank)
        throw std::invalid_argument("qminus_degree: degree list size mismatch");
    std::vector<int> m_minus(cd.rank);
    for (int i = 1; i <= cd.rank; ++i) {
        int m = inst.lambdas[i - 1].degree() - m_plus[i - 1];
        for (int j = 1; j <= cd.rank; ++j)
            if (j != i) m -= cd.aij(j, i) * m_plus[j - 1];
        if (m < 0)
            throw std::runtime_error("qminus_degree: infeasible degrees, m-_" + std::to_string(i) +
                                     " = " + std::to_string(m) + " < 0");
        m_minus[i - 1] = m;
    }
    return m_minus;
}

std::vector<Poly> reconstruct_qminus(const QQInstance& inst, const std::vector<Poly>& q_plus,
                                     double consistency_tol) {
    const CartanData& cd = inst.cartan;
    if (static_cast<int>(q_plus.size()) != cd.rank)
        throw std::invalid_argument("reconstruct_qminus: q_plus size mismatch");
    const XiPair xis = compute_xi(inst.twist, cd);
    const cplx q = inst.q;

    std::vector<Poly> q_minus(cd.rank);
    for (int i = 1; i <= cd.rank; ++i) {
        const Poly& qp = q_plus[i - 1];
        const cplx xi = xis.xi[i - 1];
        const cplx xit = xis.xi_tilde[i - 1];
        const Poly f = qq_rhs(inst, q_plus, i);
        const Poly qp_shift = qp.qshift(q, 1);

        std::vector<cplx> w = (qp.degree() >= 1) ? roots(qp) : std::vector<cplx>{};
        std::vector<cplx> w_shift;  // poles of 1/Q+(qz): z = q^{-1} w_k
        w_shift.reserve(w.size());
        for (const cplx& wk : w) w_shift.push_back(wk / q);

        Poly h;                      // polynomial part of f/(Q+ Q+(qz))
        std::vector<cplx> b, c, d;   // pole residues of f/(Q+ Q+(qz)) and of phi
        if (!w.empty()) {
            const RationalFn frac(f, qp * qp_shift);
            const auto pf = partial_fractions_simple(frac, {w, w_shift});
            h = pf.poly_part;
            b = pf.residues[0];
            c.reserve(w.size());
            // c_k multiplies 1/(qz - w_k) = (1/q)/(z - w_k/q)
            for (const cplx& res : pf.residues[1]) c.push_back(res * q);
            d.resize(w.size());
            const double fscale = std::max(1.0, f.max_abs_coeff());
            for (std::size_t k = 0; k < w.size(); ++k) {
                // matching residues at z=w_k and z=w_k/q forces
                // d_k = b_k/xi~ = -c_k/xi; mismatch means the Bethe
                // equation at w_k is not satisfied
                const cplx mismatch = b[k] / xit + c[k] / xi;
                const double dscale = std::max({std::abs(b[k] / xit), std::abs(c[k] / xi), fscale});
                if (std::abs(mismatch) > consistency_tol * dscale)
                    throw std::runtime_error(
                        "reconstruct_qminus: Bethe consistency fails at node " + std::to_string(i) +
                        ", root " + format_cplx(w[k]) + " (|b/xi~ + c/xi| = " +
                        std::to_string(std::abs(mismatch)) + ")");
                d[k] = b[k] / xit;
            }
        } else {
            auto [quot, rem] = Poly::divmod(f, qp * qp_shift);
            if (rem.max_abs_coeff() > 1e-9 * std::max(1.0, f.max_abs_coeff()))
                throw std::runtime_error("reconstruct_qminus: unexpected remainder for constant Q+");
            h = quot;
        }

        // polynomial part: r_m (xi~ - xi q^m) = s_m
        Poly phi_poly;
        {
            std::vector<cplx> r(std::max(0, h.degree()) + 1, cplx(0.0, 0.0));
            for (int m = 0; m <= h.degree(); ++m) {
                const cplx denom = xit - xi * int_pow(q, m);
                if (std::abs(denom) < 1e-9 * (std::abs(xit) + std::abs(xi * int_pow(q, m))))
                    throw std::runtime_error(
                        "reconstruct_qminus: twist resonance xi~ = xi q^m at m=" + std::to_string(m));
                r[m] = h.coeff(m) / denom;
            }
            phi_poly = Poly(std::move(r));
        }

        // Q- = phi * Q+ = phi_poly Q+ + sum_k d_k Q+/(z - w_k)
        Poly qm = phi_poly * qp;
        for (std::size_t k = 0; k < w.size(); ++k) qm += d[k] * qp.deflate_root(w[k]);
        q_minus[i - 1] = qm;
    }
    return q_minus;
}

namespace {

// shift exponent of Q+_j inside equation i: 1 if j comes after i
int order_indicator(const CartanData& cd, int i, int j) { return cd.pos(j) > cd.pos(i) ? 1 : 0; }

// per-node integer k_i with D^i = q^{k_i}, determined along Dynkin-tree
// paths by q^{s_ij} D^i = q^{s'_ij} D^j on every edge, anchored by the
// supplied value at the basepoint
std::vector<int> node_shifts(const CartanData& cd, const CartanData& cd_new, int base_node,
                             int base_exp) {
    const int r = cd.rank;
    std::vector<int> k(r + 1, 0);
    std::vector<bool> known(r + 1, false);
    k[base_node] = base_exp;
    known[base_node] = true;
    std::vector<int> stack = {base_node};
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int j = 1; j <= r; ++j) {
            if (!cd.adjacent(i, j) || known[j]) continue;
            // D^j = D^i q^{s_ij - s'_ij}
            k[j] = k[i] + order_indicator(cd, i, j) - order_indicator(cd_new, i, j);
            known[j] = true;
            stack.push_back(j);
        }
    }
    for (int j = 1; j <= r; ++j)
        if (!known[j]) throw std::runtime_error("node_shifts: Dynkin diagram disconnected");
    return k;
}

std::pair<QQInstance, QQSolution> apply_order_gauge(const QQInstance& inst, const QQSolution& sol,
                                                    const std::vector<int>& new_ordering,
                                                    const std::vector<int>& shift_exp) {
    const CartanData& cd = inst.cartan;
    const cplx q = inst.q;

    QQInstance out_inst = inst;
    out_inst.cartan.ordering = new_ordering;
    out_inst.cartan.validate();

    const XiPair xi_old = compute_xi(inst.twist, cd);
    const XiPair xi_new = compute_xi(inst.twist, out_inst.cartan);

    QQSolution out_sol;
    out_sol.q_plus.resize(cd.rank);
    out_sol.q_minus.resize(cd.rank);

    std::vector<int> mp(cd.rank);
    for (int i = 1; i <= cd.rank; ++i) mp[i - 1] = std::max(0, sol.q_plus[i - 1].degree());

    for (int i = 1; i <= cd.rank; ++i) {
        const cplx Di = int_pow(q, shift_exp[i]);
        const int li = inst.lambdas[i - 1].degree();
        out_inst.lambdas[i - 1] =
            inst.lambdas[i - 1].qshift(Di, 1).scaled(int_pow(Di, -li));
        out_sol.q_plus[i - 1] =
            sol.q_plus[i - 1].qshift(Di, 1).scaled(int_pow(Di, -mp[i - 1]));

        // beta_i = D_i^{m+_i - deg Lambda_i} prod_{j != i} D_j^{a_{ji} m+_j} / alpha_i,
        // alpha_i = xi_new/xi_old (equal to the xi~ ratio)
        const cplx alpha = xi_new.xi[i - 1] / xi_old.xi[i - 1];
        cplx beta = int_pow(Di, mp[i - 1] - li) / alpha;
        for (int j = 1; j <= cd.rank; ++j)
            if (j != i) beta *= int_pow(int_pow(q, shift_exp[j]), cd.aij(j, i) * mp[j - 1]);
        out_sol.q_minus[i - 1] = sol.q_minus[i - 1].qshift(Di, 1).scaled(beta);
    }
    return {out_inst, out_sol};
}

}  // namespace

std::pair<QQInstance, QQSolution> reorder_gauge(const QQInstance& inst, const QQSolution& sol,
                                                const std::vector<int>& new_ordering) {
    CartanData cd_new = inst.cartan;
    cd_new.ordering = new_ordering;
    cd_new.validate();
    std::vector<int> shifts(inst.cartan.rank + 1, 0);
    if (inst.cartan.rank >= 1) {
        // basepoint = node 1, D^1 = 1
        shifts = node_shifts(inst.cartan, cd_new, 1, 0);
    }
    return apply_order_gauge(inst, sol, new_ordering, shifts);
}

std::pair<QQInstance, QQSolution> cyclic_coxeter_shift(const QQInstance& inst,
                                                       const QQSolution& sol) {
    const int r = inst.cartan.rank;
    std::vector<int> rotated(inst.cartan.ordering.begin() + 1, inst.cartan.ordering.end());
    const int head = inst.cartan.ordering.front();
    rotated.push_back(head);

    // D = q^{-1} at the rotated head, 1 elsewhere; this satisfies the edge
    // relations for the rotated ordering (all other order indicators agree)
    std::vector<int> shifts(r + 1, 0);
    shifts[head] = -1;
    return apply_order_gauge(inst, sol, rotated, shifts);
}

}  // namespace qoper
