#include "qoper/backlund.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace qoper {

namespace {

double rel_err(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1.0});
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

std::vector<cplx> roots_or_empty(const Poly& p) {
    return p.degree() >= 1 ? roots(p) : std::vector<cplx>{};
}

void add_pair_check(NondegReport& rep, const std::string& what, int i, int j,
                    const std::vector<cplx>& us, const std::vector<cplx>& vs, cplx q, int window,
                    double tol) {
    NondegEntry e;
    e.kind = "qdistinct";
    e.i = i;
    e.j = j;
    e.detail = what;
    for (const cplx& u : us) {
        for (const cplx& v : vs) {
            const auto w = q_distinct_witness(u, v, q, window, tol);
            if (!w.distinct) {
                e.pass = false;
                e.witness_u = u;
                e.witness_v = v;
                e.witness_n = w.n;
                e.detail = what + ": " + format_cplx(u) + " ~ q^" + std::to_string(w.n) + " * " +
                           format_cplx(v);
                rep.add(std::move(e));
                return;
            }
        }
    }
    rep.add(std::move(e));
}

}  // namespace

NondegReport check_backlund_hypotheses(const QQInstance& inst, const QQSolution& sol, int i,
                                       int window, double tol) {
    const CartanData& cd = inst.cartan;
    NondegReport rep;
    const auto qm_roots = roots_or_empty(sol.q_minus[i - 1]);
    for (int k = 1; k <= cd.rank; ++k) {
        if (cd.aij(i, k) == 0) continue;
        add_pair_check(rep, "Q-_" + std::to_string(i) + " vs Lambda_" + std::to_string(k), i, k,
                       qm_roots, roots_or_empty(inst.lambdas[k - 1]), inst.q, window, tol);
    }
    for (int j = 1; j <= cd.rank; ++j) {
        if (j == i || cd.aij(j, i) == 0) continue;
        add_pair_check(rep, "Q-_" + std::to_string(i) + " vs Q+_" + std::to_string(j), i, j,
                       qm_roots, roots_or_empty(sol.q_plus[j - 1]), inst.q, window, tol);
    }
    return rep;
}

BacklundStep backlund_transform(const QQInstance& inst, const QQSolution& sol, int i) {
    const CartanData& cd = inst.cartan;
    if (i < 1 || i > cd.rank) throw std::invalid_argument("backlund_transform: bad node index");
    if (qq_residual_relative(inst, sol) > kResidualTol)
        throw std::invalid_argument("backlund_transform: input solution does not verify");

    BacklundStep step;
    step.node = i;
    step.pre_solution = sol;
    step.pre_twist = inst.twist;
    step.nondeg = check_backlund_hypotheses(inst, sol, i, inst.twist_window, 1e-7);
    if (!step.nondeg.pass) {
        std::string why = "backlund_transform: admissibility hypotheses fail at node " +
                          std::to_string(i);
        for (const auto& e : step.nondeg.entries)
            if (!e.pass) why += "; " + e.detail;
        throw std::runtime_error(why);
    }
    if (sol.q_minus[i - 1].is_zero())
        throw std::runtime_error("backlund_transform: Q-_i vanishes identically");

    // gauge function mu_i from the pre-data
    Poly mu_num = Poly::one();
    for (int j = 1; j <= cd.rank; ++j) {
        if (j == i || cd.aij(j, i) == 0) continue;
        for (int t = 0; t < -cd.aij(j, i); ++t) mu_num = mu_num * sol.q_plus[j - 1];
    }
    step.mu = RationalFn(mu_num, sol.q_plus[i - 1] * sol.q_minus[i - 1]);

    step.post_twist = weyl_reflect_twist(inst.twist, i, cd);
    const auto twist_rep = check_twist_assumption(step.post_twist, inst.q, cd, inst.twist_window);
    if (!twist_rep.all_pass)
        throw std::runtime_error(
            "backlund_transform: reflected twist violates the twist assumption (genericity)");

    QQInstance post_inst = inst.with_twist(step.post_twist);
    step.monic_scale = sol.q_minus[i - 1].lead();
    std::vector<Poly> new_q_plus = sol.q_plus;
    new_q_plus[i - 1] = sol.q_minus[i - 1].monic();

    QQSolution post;
    post.q_plus = std::move(new_q_plus);
    post.q_minus = reconstruct_qminus(post_inst, post.q_plus);
    const double resid = qq_residual_relative(post_inst, post);
    if (resid > kResidualTol)
        throw std::runtime_error("backlund_transform: post residual " + std::to_string(resid) +
                                 " exceeds tolerance");
    step.post_solution = std::move(post);
    return step;
}

SampleReport verify_backlund_gauge(const BacklundStep& step, const QQInstance& pre_instance,
                                   const SLnRep& rep, int samples) {
    const CartanData& cd = pre_instance.cartan;
    if (cd.lie_type != LieType::A)
        throw std::invalid_argument("verify_backlund_gauge: type A rep required");
    const RationalMatrix A_pre = build_miura_connection(pre_instance, step.pre_solution.q_plus, rep);
    const QQInstance post_inst = pre_instance.with_twist(step.post_twist);
    const RationalMatrix A_post = build_miura_connection(post_inst, step.post_solution.q_plus, rep);

    SampleReport out;
    out.samples = samples;
    std::vector<Poly> dens;
    for (const Poly& p : step.pre_solution.q_plus) {
        dens.push_back(p);
        dens.push_back(p.qshift(pre_instance.q, 1));
    }
    for (const Poly& p : step.post_solution.q_plus) {
        dens.push_back(p);
        dens.push_back(p.qshift(pre_instance.q, 1));
    }
    dens.push_back(step.mu.den);
    dens.push_back(step.mu.den.qshift(pre_instance.q, 1));
    std::vector<const Poly*> dptr;
    for (const Poly& p : dens)
        if (!p.is_zero()) dptr.push_back(&p);

    const Eigen::MatrixXcd& Fi = rep.F[step.node - 1];
    SamplePlan plan(57, 0.4, 2.4);
    for (int s = 0; s < samples; ++s) {
        const cplx z = plan.next(dptr);
        const Eigen::MatrixXcd left =
            (Eigen::MatrixXcd::Identity(rep.n, rep.n) + step.mu.eval(pre_instance.q * z) * Fi) *
            A_pre.eval(z) *
            (Eigen::MatrixXcd::Identity(rep.n, rep.n) - step.mu.eval(z) * Fi);
        const double err = rel_err(left, A_post.eval(z));
        out.max_rel_err = std::max(out.max_rel_err, err);
        if (err > 1e-8) {
            out.pass = false;
            out.detail = "gauge identity fails at z = " + format_cplx(z);
        }
    }
    return out;
}

Eigen::MatrixXcd compound_matrix(const Eigen::MatrixXcd& m, int k) {
    const int n = static_cast<int>(m.rows());
    std::vector<std::vector<int>> subsets;
    std::vector<int> cur(k);
    // lex enumeration of k-subsets
    std::function<void(int, int)> gen = [&](int start, int depth) {
        if (depth == k) {
            subsets.push_back(cur);
            return;
        }
        for (int v = start; v < n; ++v) {
            cur[depth] = v;
            gen(v + 1, depth + 1);
        }
    };
    gen(0, 0);
    const int dim = static_cast<int>(subsets.size());
    Eigen::MatrixXcd out(dim, dim);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
            Eigen::MatrixXcd sub(k, k);
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < k; ++c) sub(r, c) = m(subsets[a][r], subsets[b][c]);
            out(a, b) = sub.determinant();
        }
    return out;
}

BacklundChain backlund_chain(const QQInstance& inst, const QQSolution& sol,
                             const std::vector<int>& word, const SLnRep* rep, int samples) {
    const CartanData& cd = inst.cartan;
    if (!is_reduced_word(cd, word))
        throw std::invalid_argument("backlund_chain: word is not reduced");

    BacklundChain chain;
    chain.word = word;
    QQInstance cur_inst = inst;
    QQSolution cur_sol = sol;
    // the word is consumed right to left: i = i_k, ..., i_1
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        BacklundStep step;
        try {
            step = backlund_transform(cur_inst, cur_sol, *it);
        } catch (const std::exception& ex) {
            const int stepno = static_cast<int>(chain.steps.size()) + 1;
            throw std::runtime_error("backlund_chain: genericity failure at step " +
                                     std::to_string(stepno) + " (node " + std::to_string(*it) +
                                     "): " + ex.what());
        }
        cur_inst = cur_inst.with_twist(step.post_twist);
        cur_sol = step.post_solution;
        chain.steps.push_back(std::move(step));
    }
    chain.final_twist = cur_inst.twist;
    chain.final_solution = cur_sol;

    if (rep && cd.lie_type == LieType::A && !word.empty()) {
        const int n = rep->n;
        // b_-(z) = G(z)^{-1} prod_j [Qbar+_j]^{alpha_j^vee} with
        // G = e^{mu_{i1} f_{i1}} ... e^{mu_{ik} f_{ik}} the accumulated gauge,
        // so the exponentials appear in step-application order: the first
        // applied step (last letter of the word) is leftmost
        RationalMatrix b = RationalMatrix::identity(n);
        const int k = static_cast<int>(word.size());
        for (int j = 0; j < k; ++j) {
            const BacklundStep& st = chain.steps[j];
            b = b * rational_exp_nilpotent(rep->F[word[k - 1 - j] - 1], -st.mu);
        }
        RationalMatrix H(n, n);
        for (int m = 0; m < n; ++m) {
            Poly numer = (m < n - 1) ? chain.final_solution.q_plus[m] : Poly::one();
            Poly denom = (m > 0) ? chain.final_solution.q_plus[m - 1] : Poly::one();
            H.at(m, m) = RationalFn(numer, denom);
        }
        b = b * H;
        {
            const QQInstance final_inst = inst.with_twist(chain.final_twist);
            const auto cands = denominator_root_candidates(b, final_inst, 3);
            for (auto& e : b.entries) e = reduce_with_candidate_roots(e, cands, 1e-9).simplified();
        }
        chain.b_minus = b;
        chain.has_bminus = true;

        // intertwining identity on highest-weight vectors of the fundamental reps
        const RationalMatrix A = build_miura_connection(inst, sol.q_plus, *rep);
        const Eigen::MatrixXcd wZ = twist_matrix(chain.final_twist, *rep);
        SampleReport hw;
        hw.samples = samples;
        std::vector<Poly> dens;
        for (const auto& e : chain.b_minus.entries)
            if (!e.den.is_zero()) {
                dens.push_back(e.den);
                dens.push_back(e.den.qshift(inst.q, 1));
            }
        for (const auto& e : A.entries)
            if (!e.den.is_zero()) dens.push_back(e.den);
        std::vector<const Poly*> dptr;
        for (const Poly& p : dens) dptr.push_back(&p);
        SamplePlan plan(61, 0.45, 2.2);
        for (int s = 0; s < samples; ++s) {
            const cplx z = plan.next(dptr);
            const Eigen::MatrixXcd lhs_full = chain.b_minus.eval(inst.q * z) * wZ;
            const Eigen::MatrixXcd rhs_full = A.eval(z) * chain.b_minus.eval(z);
            for (int wedge = 1; wedge <= n - 1; ++wedge) {
                const Eigen::MatrixXcd lc = compound_matrix(lhs_full, wedge);
                const Eigen::MatrixXcd rc = compound_matrix(rhs_full, wedge);
                // highest-weight line of the k-th fundamental rep is the
                // first lex basis vector e_1 ^ ... ^ e_k
                const auto lv = lc.col(0);
                const auto rv = rc.col(0);
                const double scale = std::max({lv.cwiseAbs().maxCoeff(), rv.cwiseAbs().maxCoeff(), 1.0});
                const double err = (lv - rv).cwiseAbs().maxCoeff() / scale;
                hw.max_rel_err = std::max(hw.max_rel_err, err);
                if (err > 1e-7) {
                    hw.pass = false;
                    hw.detail = "highest-weight identity fails on wedge " + std::to_string(wedge) + " at z = " +
                                format_cplx(z);
                }
            }
        }
        chain.hw_check = hw;
    }
    return chain;
}

namespace {

// solve the square RationalFn system  M x = rhs  by fraction-aware
// Gaussian elimination; pivots chosen by magnitude at a probe point
std::vector<RationalFn> solve_rational_system(std::vector<std::vector<RationalFn>> M,
                                              std::vector<RationalFn> rhs,
                                              const std::vector<cplx>& candidates) {
    const int n = static_cast<int>(M.size());
    auto reduce = [&](const RationalFn& f) {
        return reduce_with_candidate_roots(f, candidates, 1e-9).simplified();
    };
    const cplx probe(0.7312, 0.4181);
    std::vector<int> order(n);
    for (int c = 0; c < n; ++c) {
        int best = -1;
        double best_mag = 0.0;
        for (int r = 0; r < n; ++r) {
            bool taken = false;
            for (int cc = 0; cc < c; ++cc)
                if (order[cc] == r) taken = true;
            if (taken || M[r][c].num.is_zero()) continue;
            const double mag = std::abs(M[r][c].eval(probe));
            if (mag > best_mag) {
                best_mag = mag;
                best = r;
            }
        }
        if (best < 0)
            throw std::runtime_error("Bruhat factorization: singular minor (wrong cell)");
        order[c] = best;
        for (int r = 0; r < n; ++r) {
            bool taken = false;
            for (int cc = 0; cc <= c; ++cc)
                if (order[cc] == r) taken = true;
            if (taken || M[r][c].num.is_zero()) continue;
            const RationalFn factor = reduce(M[r][c] / M[best][c]);
            for (int cc = c + 1; cc < n; ++cc)
                M[r][cc] = reduce(M[r][cc] - factor * M[best][cc]);
            rhs[r] = reduce(rhs[r] - factor * rhs[best]);
            M[r][c] = RationalFn::constant(cplx(0.0, 0.0));
        }
    }
    std::vector<RationalFn> x(n, RationalFn::constant(cplx(0.0, 0.0)));
    for (int c = n - 1; c >= 0; --c) {
        const int r = order[c];
        RationalFn acc = rhs[r];
        for (int cc = c + 1; cc < n; ++cc) acc = acc - M[r][cc] * x[cc];
        x[c] = reduce(acc / M[r][c]);
    }
    return x;
}

}  // namespace

ZtwistCertificate certify_full_ztwist(const BacklundChain& chain, const QQInstance& inst,
                                      const SLnRep& rep, int samples, double tol) {
    const CartanData& cd = inst.cartan;
    if (!chain.has_bminus)
        throw std::invalid_argument("certify_full_ztwist: chain carries no b_-(z) (need type A rep)");
    if (static_cast<int>(chain.word.size()) != positive_root_count(cd) ||
        !is_reduced_word(cd, chain.word))
        throw std::invalid_argument("certify_full_ztwist: word is not a reduced word for w0");
    const int n = rep.n;

    // X = n_+^{-1}: column by column, rows below the antidiagonal of M X must vanish
    const RationalMatrix& M = chain.b_minus;
    const std::vector<cplx> candidates = denominator_root_candidates(M, inst, 3);
    RationalMatrix X = RationalMatrix::identity(n);
    for (int c = 1; c < n; ++c) {
        const int nconstraints = c;  // rows n-c .. n-1
        std::vector<std::vector<RationalFn>> sys(nconstraints,
                                                 std::vector<RationalFn>(nconstraints));
        std::vector<RationalFn> rhs(nconstraints);
        for (int t = 0; t < nconstraints; ++t) {
            const int r = n - c + t;
            for (int i = 0; i < nconstraints; ++i) sys[t][i] = M.at(r, i);
            rhs[t] = -M.at(r, c);
        }
        const auto sol = solve_rational_system(sys, rhs, candidates);
        for (int i = 0; i < nconstraints; ++i) X.at(i, c) = sol[i];
    }
    RationalMatrix N = M * X;
    for (auto& e : N.entries) e = reduce_with_candidate_roots(e, candidates, 1e-9).simplified();

    // w0 lifting from the chain's own reduced word
    Eigen::MatrixXcd w0 = Eigen::MatrixXcd::Identity(n, n);
    for (int i : chain.word) w0 = w0 * rep.S[i - 1];
    const Eigen::MatrixXcd w0inv = w0.inverse();

    // b_+ = N w0^{-1}
    RationalMatrix b_plus(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            RationalFn acc = RationalFn::constant(cplx(0.0, 0.0));
            for (int k = 0; k < n; ++k) {
                if (std::abs(w0inv(k, c)) < 0.5) continue;  // signed permutation matrix
                acc = acc + N.at(r, k).scale_by(w0inv(k, c));
            }
            b_plus.at(r, c) = acc;
        }

    ZtwistCertificate cert;
    cert.b_plus = b_plus;
    SampleReport repchk;
    repchk.samples = samples;

    const QQSolution& original = chain.steps.front().pre_solution;
    const RationalMatrix A = build_miura_connection(inst, original.q_plus, rep);
    const Eigen::MatrixXcd Z = twist_matrix(inst.twist, rep);

    std::vector<Poly> dens;
    for (const auto& e : b_plus.entries)
        if (!e.den.is_zero()) {
            dens.push_back(e.den);
            dens.push_back(e.den.qshift(inst.q, 1));
        }
    for (const auto& e : A.entries)
        if (!e.den.is_zero()) dens.push_back(e.den);
    std::vector<const Poly*> dptr;
    for (const Poly& p : dens) dptr.push_back(&p);
    SamplePlan plan(97, 0.5, 2.1);
    for (int s = 0; s < samples; ++s) {
        const cplx z = plan.next(dptr);
        const Eigen::MatrixXcd bp = b_plus.eval(z);
        // cell sanity: b_+ must be upper triangular
        for (int r = 1; r < n; ++r)
            for (int c = 0; c < r; ++c)
                if (std::abs(bp(r, c)) > 1e-6 * std::max(1.0, bp.cwiseAbs().maxCoeff())) {
                    repchk.pass = false;
                    repchk.detail = "b_+ not upper triangular (factorization left the w0 cell)";
                }
        const Eigen::MatrixXcd lhs = b_plus.eval(inst.q * z) * Z * bp.inverse();
        const double err = rel_err(lhs, A.eval(z));
        repchk.max_rel_err = std::max(repchk.max_rel_err, err);
        if (err > tol) {
            repchk.pass = false;
            repchk.detail = "A != b_+(qz) Z b_+(z)^{-1} at z = " + format_cplx(z);
        }
    }
    cert.report = repchk;
    return cert;
}

}  // namespace qoper
