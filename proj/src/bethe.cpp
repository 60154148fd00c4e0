#include "qoper/bethe.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace qoper {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool root_less(const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

}  // namespace

std::vector<Poly> BetheRoots::to_q_plus() const {
    std::vector<Poly> out;
    out.reserve(roots.size());
    for (const auto& node : roots) out.push_back(Poly::from_roots(node));
    return out;
}

BetheRoots BetheRoots::from_q_plus(const std::vector<Poly>& q_plus) {
    BetheRoots br;
    br.roots.reserve(q_plus.size());
    for (const Poly& p : q_plus)
        br.roots.push_back(p.degree() >= 1 ? qoper::roots(p) : std::vector<cplx>{});
    return br;
}

void BetheRoots::sort_canonical() {
    for (auto& node : roots) std::sort(node.begin(), node.end(), root_less);
}

bool same_bethe_roots(const BetheRoots& a, const BetheRoots& b, double tol) {
    if (a.roots.size() != b.roots.size()) return false;
    BetheRoots x = a, y = b;
    x.sort_canonical();
    y.sort_canonical();
    for (std::size_t i = 0; i < x.roots.size(); ++i) {
        if (x.roots[i].size() != y.roots[i].size()) return false;
        for (std::size_t k = 0; k < x.roots[i].size(); ++k) {
            const double scale = std::max({std::abs(x.roots[i][k]), std::abs(y.roots[i][k]), 1.0});
            if (std::abs(x.roots[i][k] - y.roots[i][k]) > tol * scale) return false;
        }
    }
    return true;
}

BetheResidualReport bethe_residual(const QQInstance& inst, const BetheRoots& br) {
    const CartanData& cd = inst.cartan;
    if (static_cast<int>(br.roots.size()) != cd.rank)
        throw std::invalid_argument("bethe_residual: root list size mismatch");
    const cplx q = inst.q;
    const auto q_plus = br.to_q_plus();

    BetheResidualReport rep;
    rep.values.resize(cd.rank);
    double max_raw = 0.0;
    for (int i = 1; i <= cd.rank; ++i) {
        cplx zeta_prod(1.0, 0.0);
        for (int j = 1; j <= cd.rank; ++j)
            zeta_prod *= int_pow(inst.twist.zetas[j - 1], cd.aij(j, i));
        for (const cplx& w : br.roots[i - 1]) {
            const cplx wq = q * w;
            const cplx wqi = w / q;
            auto guarded = [&](cplx v, const char* what) {
                if (std::abs(v) < 1e-12)
                    throw std::runtime_error(std::string("bethe_residual: vanishing denominator (") +
                                             what + ") at root " + format_cplx(w));
                return v;
            };
            const cplx lhs = zeta_prod * q_plus[i - 1].eval(wq) /
                             guarded(q_plus[i - 1].eval(wqi), "Q+_i(w/q)");
            cplx num = inst.lambdas[i - 1].eval(w);
            cplx den = guarded(inst.lambdas[i - 1].eval(wqi), "Lambda_i(w/q)");
            for (int j = 1; j <= cd.rank; ++j) {
                if (j == i || cd.aij(j, i) == 0) continue;
                const int e = -cd.aij(j, i);
                const bool after = cd.pos(j) > cd.pos(i);
                const cplx top = q_plus[j - 1].eval(after ? wq : w);
                const cplx bot = guarded(q_plus[j - 1].eval(after ? w : wqi), "shifted Q+_j");
                num *= int_pow(top, e);
                den *= int_pow(bot, e);
            }
            const cplx rhs = -num / den;
            rep.values[i - 1].push_back(lhs - rhs);
            max_raw = std::max(max_raw, std::abs(lhs - rhs) /
                                            std::max({std::abs(lhs), std::abs(rhs), 1.0}));
        }
    }
    rep.max_abs = max_raw;
    return rep;
}

std::pair<std::vector<cplx>, std::vector<int>> factor_lambda_qstrings(const Poly& lambda, cplx q,
                                                                      double tol) {
    if (lambda.degree() < 1) throw std::invalid_argument("factor_lambda_qstrings: constant Lambda");
    std::vector<cplx> r = roots(lambda);
    auto near = [&](cplx a, cplx b) {
        return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1.0});
    };
    for (const cplx& x : r)
        if (std::abs(x) <= tol)
            throw std::invalid_argument("factor_lambda_qstrings: Lambda has a root at 0");
    for (std::size_t a = 0; a < r.size(); ++a)
        for (std::size_t bi = a + 1; bi < r.size(); ++bi)
            if (near(r[a], r[bi]))
                throw std::invalid_argument("factor_lambda_qstrings: repeated root");

    std::vector<bool> used(r.size(), false);
    auto find_unused = [&](cplx target) -> int {
        for (std::size_t k = 0; k < r.size(); ++k)
            if (!used[k] && near(r[k], target)) return static_cast<int>(k);
        return -1;
    };

    std::vector<cplx> heads;
    std::vector<int> lens;
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (used[k]) continue;
        bool is_head = true;  // q * x must not be a root
        for (std::size_t l = 0; l < r.size(); ++l)
            if (l != k && near(q * r[k], r[l])) is_head = false;
        if (!is_head) continue;
        used[k] = true;
        int len = 1;
        cplx cur = r[k];
        while (true) {
            const int idx = find_unused(cur / q);
            if (idx < 0) break;
            used[idx] = true;
            cur = r[idx];
            ++len;
        }
        heads.push_back(r[k]);
        lens.push_back(len);
    }
    for (bool u : used)
        if (!u) throw std::invalid_argument("factor_lambda_qstrings: roots do not form q-strings");
    const int window = lambda.degree() + 2;
    for (std::size_t a = 0; a < heads.size(); ++a)
        for (std::size_t bi = a + 1; bi < heads.size(); ++bi)
            if (!q_distinct(heads[a], heads[bi], q, window, tol))
                throw std::invalid_argument("factor_lambda_qstrings: string heads not q-distinct");
    return {heads, lens};
}

std::vector<cplx> sl2_familiar_residual(const QQInstance& inst, const BetheRoots& br,
                                        const std::vector<cplx>& z_p, const std::vector<int>& r_p) {
    if (inst.cartan.rank != 1)
        throw std::invalid_argument("sl2_familiar_residual: rank-1 instances only");
    if (z_p.size() != r_p.size())
        throw std::invalid_argument("sl2_familiar_residual: z_p/r_p size mismatch");
    // the factored Lambda must reproduce the instance's Lambda
    {
        std::vector<cplx> strings;
        for (std::size_t p = 0; p < z_p.size(); ++p)
            for (int j = 0; j < r_p[p]; ++j) strings.push_back(z_p[p] / int_pow(inst.q, j));
        const Poly rebuilt = Poly::from_roots(strings);
        if (!rebuilt.near_equal(inst.lambdas[0], 1e-7))
            throw std::invalid_argument("sl2_familiar_residual: factorization does not match Lambda");
    }
    const cplx q = inst.q;
    const cplx zeta = inst.twist.zetas[0];
    const auto& w = br.roots[0];
    const int m = static_cast<int>(w.size());
    int rdeg = 0;
    for (int rp : r_p) rdeg += rp;

    std::vector<cplx> out;
    out.reserve(m);
    for (int k = 0; k < m; ++k) {
        if (std::abs(w[k]) < 1e-12)
            throw std::invalid_argument("sl2_familiar_residual: Bethe root at 0");
        cplx lhs = int_pow(q, rdeg);
        for (std::size_t p = 0; p < z_p.size(); ++p) {
            const cplx den = w[k] - q * z_p[p];
            if (std::abs(den) < 1e-12)
                throw std::runtime_error("sl2_familiar_residual: w_k collides with q z_p");
            lhs *= (w[k] - int_pow(q, 1 - r_p[p]) * z_p[p]) / den;
        }
        cplx rhs = -zeta * zeta * int_pow(q, m);
        for (int j = 0; j < m; ++j) {
            const cplx den = w[k] - q * w[j];
            if (std::abs(den) < 1e-12)
                throw std::runtime_error("sl2_familiar_residual: w_k collides with q w_j");
            rhs *= (q * w[k] - w[j]) / den;
        }
        out.push_back(lhs - rhs);
    }
    return out;
}

// ------------------------------------------------------------- solver

namespace {

struct Flat {
    const CartanData* cd;
    std::vector<int> degrees;
    std::vector<std::pair<int, int>> slots;  // (node i, k) per unknown

    int size() const { return static_cast<int>(slots.size()); }
    BetheRoots unflatten(const std::vector<cplx>& w) const {
        BetheRoots br;
        br.roots.resize(degrees.size());
        for (std::size_t s = 0; s < slots.size(); ++s)
            br.roots[slots[s].first - 1].push_back(w[s]);
        return br;
    }
};

Flat make_flat(const CartanData& cd, const std::vector<int>& degrees) {
    Flat f;
    f.cd = &cd;
    f.degrees = degrees;
    for (int i = 1; i <= cd.rank; ++i)
        for (int k = 0; k < degrees[i - 1]; ++k) f.slots.emplace_back(i, k);
    return f;
}

// cleared-denominator polynomial system:
// P_{ik} = xi_i f_i(w) Q+_i(w/q) + xi~_i f_i(w/q) Q+_i(q w) = 0
struct ClearedSystem {
    const QQInstance* inst;
    const Flat* flat;
    XiPair xi;

    std::vector<cplx> eval(const std::vector<cplx>& w, double* rel_residual = nullptr) const {
        const BetheRoots br = flat->unflatten(w);
        const auto q_plus = br.to_q_plus();
        const cplx q = inst->q;
        std::vector<cplx> out(flat->size());
        double rel = 0.0;
        int s = 0;
        for (int i = 1; i <= inst->cartan.rank; ++i) {
            const Poly f = qq_rhs(*inst, q_plus, i);
            for (std::size_t k = 0; k < br.roots[i - 1].size(); ++k, ++s) {
                const cplx wk = br.roots[i - 1][k];
                const cplx t1 = xi.xi[i - 1] * f.eval(wk) * q_plus[i - 1].eval(wk / q);
                const cplx t2 = xi.xi_tilde[i - 1] * f.eval(wk / q) * q_plus[i - 1].eval(q * wk);
                out[s] = t1 + t2;
                rel = std::max(rel, std::abs(out[s]) /
                                        std::max({std::abs(t1), std::abs(t2), 1e-280}));
            }
        }
        if (rel_residual) *rel_residual = rel;
        return out;
    }
};

// log-ratio residual in u = log w coordinates, principal branch
struct LogSystem {
    const QQInstance* inst;
    const Flat* flat;

    bool eval(const std::vector<cplx>& u, std::vector<cplx>& out) const {
        std::vector<cplx> w(u.size());
        for (std::size_t s = 0; s < u.size(); ++s) w[s] = std::exp(u[s]);
        const BetheRoots br = flat->unflatten(w);
        const auto q_plus = br.to_q_plus();
        const CartanData& cd = inst->cartan;
        const cplx q = inst->q;
        out.assign(u.size(), cplx(0.0, 0.0));
        int s = 0;
        for (int i = 1; i <= cd.rank; ++i) {
            cplx zeta_prod(1.0, 0.0);
            for (int j = 1; j <= cd.rank; ++j)
                zeta_prod *= int_pow(inst->twist.zetas[j - 1], cd.aij(j, i));
            for (std::size_t k = 0; k < br.roots[i - 1].size(); ++k, ++s) {
                const cplx wk = br.roots[i - 1][k];
                cplx num = zeta_prod * q_plus[i - 1].eval(q * wk) * inst->lambdas[i - 1].eval(wk / q);
                cplx den = q_plus[i - 1].eval(wk / q) * inst->lambdas[i - 1].eval(wk);
                for (int j = 1; j <= cd.rank; ++j) {
                    if (j == i || cd.aij(j, i) == 0) continue;
                    const int e = -cd.aij(j, i);
                    const bool after = cd.pos(j) > cd.pos(i);
                    num *= int_pow(q_plus[j - 1].eval(after ? wk : wk / q), e);
                    den *= int_pow(q_plus[j - 1].eval(after ? q * wk : wk), e);
                }
                den = -den;  // ratio must equal 1 with the Bethe minus sign
                if (std::abs(num) < 1e-280 || std::abs(den) < 1e-280 || !std::isfinite(std::abs(num)) ||
                    !std::isfinite(std::abs(den)))
                    return false;
                out[s] = std::log(num / den);
            }
        }
        return true;
    }
};

cplx unwrap_near(cplx v, cplx ref) {
    const double k = std::round((ref.imag() - v.imag()) / kTwoPi);
    return v + cplx(0.0, kTwoPi * k);
}

// distance of v to the lattice 2 pi i Z
cplx lattice_defect(cplx v) {
    const double k = std::round(v.imag() / kTwoPi);
    return v - cplx(0.0, kTwoPi * k);
}

bool newton_log(const LogSystem& sys, std::vector<cplx>& u, const SolverConfig& cfg) {
    const int n = static_cast<int>(u.size());
    std::vector<cplx> r, rp, rm;
    if (!sys.eval(u, r)) return false;
    Eigen::MatrixXcd J(n, n);
    Eigen::VectorXcd rhs(n);
    for (int it = 0; it < cfg.max_iter; ++it) {
        double defect = 0.0;
        for (int s = 0; s < n; ++s) defect = std::max(defect, std::abs(lattice_defect(r[s])));
        if (defect < 1e-11) return true;
        for (int col = 0; col < n; ++col) {
            const double h = 1e-7 * (1.0 + std::abs(u[col]));
            std::vector<cplx> up = u, um = u;
            up[col] += h;
            um[col] -= h;
            if (!sys.eval(up, rp) || !sys.eval(um, rm)) return false;
            for (int s = 0; s < n; ++s)
                J(s, col) = (unwrap_near(rp[s], r[s]) - unwrap_near(rm[s], r[s])) / (2.0 * h);
        }
        for (int s = 0; s < n; ++s) rhs(s) = -lattice_defect(r[s]);
        Eigen::VectorXcd delta = J.fullPivLu().solve(rhs);
        if (!delta.allFinite()) return false;
        double step_norm = 0.0;
        for (int s = 0; s < n; ++s) step_norm = std::max(step_norm, std::abs(delta(s)));
        const double damp = cfg.damping * std::min(1.0, 2.0 / std::max(1.0, step_norm));
        for (int s = 0; s < n; ++s) u[s] += damp * delta(s);
        if (!sys.eval(u, r)) return false;
    }
    double defect = 0.0;
    for (int s = 0; s < n; ++s) defect = std::max(defect, std::abs(lattice_defect(r[s])));
    return defect < 1e-9;
}

bool newton_cleared(const ClearedSystem& sys, std::vector<cplx>& w, int max_iter,
                    double damping) {
    const int n = static_cast<int>(w.size());
    Eigen::MatrixXcd J(n, n);
    Eigen::VectorXcd rhs(n);
    for (int it = 0; it < max_iter; ++it) {
        double rel = 0.0;
        const std::vector<cplx> r = sys.eval(w, &rel);
        if (rel < 1e-14) return true;
        for (int col = 0; col < n; ++col) {
            const double h = 1e-7 * (1.0 + std::abs(w[col]));
            std::vector<cplx> wp = w, wm = w;
            wp[col] += h;
            wm[col] -= h;
            const auto rp = sys.eval(wp);
            const auto rm = sys.eval(wm);
            for (int s = 0; s < n; ++s) J(s, col) = (rp[s] - rm[s]) / (2.0 * h);
        }
        for (int s = 0; s < n; ++s) rhs(s) = -r[s];
        Eigen::VectorXcd delta = J.fullPivLu().solve(rhs);
        if (!delta.allFinite()) return false;
        double step = 0.0;
        for (int s = 0; s < n; ++s) step = std::max(step, std::abs(delta(s)));
        const double damp = damping * std::min(1.0, 3.0 / std::max(1.0, step));
        for (int s = 0; s < n; ++s) w[s] += damp * delta(s);
        if (step < 1e-14) break;
    }
    double rel = 0.0;
    sys.eval(w, &rel);
    return rel < 1e-10;
}

}  // namespace

bool bethe_roots_admissible(const BetheRoots& br, cplx q, double tol) {
    for (const auto& node : br.roots) {
        for (std::size_t a = 0; a < node.size(); ++a) {
            for (std::size_t b = 0; b < node.size(); ++b) {
                const double scale = std::max({std::abs(node[a]), std::abs(node[b]), 1.0});
                if (a != b && std::abs(node[a] - node[b]) <= tol * scale) return false;
                if (std::abs(node[a] - q * node[b]) <= tol * scale) return false;
            }
        }
    }
    return true;
}

namespace {

std::pair<double, double> lambda_annulus(const QQInstance& inst) {
    double rmin = 1e300, rmax = 0.0;
    for (const Poly& lam : inst.lambdas) {
        for (const cplx& z : roots(lam)) {
            const double a = std::abs(z);
            if (a > 1e-9) {
                rmin = std::min(rmin, a);
                rmax = std::max(rmax, a);
            }
        }
    }
    if (rmax == 0.0) return {0.5, 2.0};
    return {0.5 * rmin, 2.0 * rmax};
}

// full QQ system in coefficient space (Q+ monic, Q- free); also used to
// polish solver output so the emitted coefficients satisfy the QQ
// equations at machine precision, not just the root-wise ones
struct CoeffSystem {
    const QQInstance* inst;
    std::vector<int> m_plus, m_minus;
    int unknowns = 0;

    static CoeffSystem make(const QQInstance& inst, const std::vector<int>& degrees) {
        CoeffSystem sys;
        sys.inst = &inst;
        sys.m_plus = degrees;
        sys.m_minus = qminus_degree(inst, degrees);
        sys.unknowns = 0;
        for (int i = 0; i < inst.cartan.rank; ++i)
            sys.unknowns += sys.m_plus[i] + sys.m_minus[i] + 1;
        return sys;
    }

    QQSolution unpack(const std::vector<cplx>& x) const {
        QQSolution sol;
        const int r = inst->cartan.rank;
        sol.q_plus.resize(r);
        sol.q_minus.resize(r);
        std::size_t at = 0;
        for (int i = 0; i < r; ++i) {
            std::vector<cplx> cp(m_plus[i] + 1);
            for (int k = 0; k < m_plus[i]; ++k) cp[k] = x[at++];
            cp[m_plus[i]] = cplx(1.0, 0.0);
            sol.q_plus[i] = Poly(std::move(cp));
            std::vector<cplx> cm(m_minus[i] + 1);
            for (int k = 0; k <= m_minus[i]; ++k) cm[k] = x[at++];
            sol.q_minus[i] = Poly(std::move(cm));
        }
        return sol;
    }

    std::vector<cplx> pack(const QQSolution& sol) const {
        std::vector<cplx> x;
        x.reserve(unknowns);
        for (int i = 0; i < inst->cartan.rank; ++i) {
            for (int k = 0; k < m_plus[i]; ++k) x.push_back(sol.q_plus[i].coeff(k));
            for (int k = 0; k <= m_minus[i]; ++k) x.push_back(sol.q_minus[i].coeff(k));
        }
        return x;
    }

    std::vector<cplx> eval(const std::vector<cplx>& x) const {
        const QQSolution sol = unpack(x);
        const auto res = qq_residual(*inst, sol);
        std::vector<cplx> out;
        out.reserve(unknowns);
        for (int i = 0; i < inst->cartan.rank; ++i) {
            const int len = m_plus[i] + m_minus[i] + 1;
            for (int k = 0; k < len; ++k) out.push_back(res[i].coeff(k));
        }
        return out;
    }
};

bool newton_coeff(const CoeffSystem& sys, std::vector<cplx>& x, int max_iter, double target) {
    const int n = sys.unknowns;
    Eigen::MatrixXcd J(n, n);
    Eigen::VectorXcd rhs(n);
    for (int it = 0; it < max_iter; ++it) {
        const auto r = sys.eval(x);
        double rn = 0.0;
        for (const cplx& v : r) rn = std::max(rn, std::abs(v));
        if (rn < target) return true;
        if (!std::isfinite(rn) || rn > 1e14) return false;
        for (int col = 0; col < n; ++col) {
            const double h = 1e-7 * (1.0 + std::abs(x[col]));
            std::vector<cplx> xp = x, xm = x;
            xp[col] += h;
            xm[col] -= h;
            const auto rp = sys.eval(xp);
            const auto rm = sys.eval(xm);
            for (int s = 0; s < n; ++s) J(s, col) = (rp[s] - rm[s]) / (2.0 * h);
        }
        for (int s = 0; s < n; ++s) rhs(s) = -r[s];
        Eigen::VectorXcd delta = J.fullPivLu().solve(rhs);
        if (!delta.allFinite()) return false;
        double step = 0.0;
        for (int s = 0; s < n; ++s) step = std::max(step, std::abs(delta(s)));
        const double damp = std::min(1.0, 8.0 / std::max(1.0, step));
        for (int s = 0; s < n; ++s) x[s] += damp * delta(s);
    }
    const auto r = sys.eval(x);
    double rn = 0.0;
    for (const cplx& v : r) rn = std::max(rn, std::abs(v));
    return rn < target;
}

}  // namespace

std::vector<BetheRoots> solve_bethe(const QQInstance& inst, const std::vector<int>& degrees,
                                    const SolverConfig& cfg, SolveStats* stats) {
    const CartanData& cd = inst.cartan;
    if (cfg.starts_per_degree <= 0 || cfg.max_iter <= 0 || cfg.damping <= 0.0 ||
        cfg.residual_tol <= 0.0 || cfg.dedupe_tol <= cfg.residual_tol)
        throw std::invalid_argument(
            "solve_bethe: config fields must be positive and dedupe_tol > residual_tol");
    if (static_cast<int>(degrees.size()) != cd.rank)
        throw std::invalid_argument("solve_bethe: degree list size mismatch");
    for (int m : degrees)
        if (m < 0) throw std::invalid_argument("solve_bethe: negative degree");
    qminus_degree(inst, degrees);  // reject infeasible degree vectors up front

    SolveStats local;
    SolveStats& st = stats ? *stats : local;

    int total = 0;
    for (int m : degrees) total += m;
    if (total == 0) {
        BetheRoots empty;
        empty.roots.assign(cd.rank, {});
        return {empty};
    }

    const Flat flat = make_flat(cd, degrees);
    const LogSystem logsys{&inst, &flat};
    const ClearedSystem cleared{&inst, &flat, compute_xi(inst.twist, cd)};
    const auto [rlo, rhi] = lambda_annulus(inst);
    std::vector<cplx> lambda_roots;
    for (const Poly& lam : inst.lambdas)
        for (const cplx& w : roots(lam))
            if (std::abs(w) > 1e-9) lambda_roots.push_back(w);

    Rng rng(cfg.seed);
    std::vector<BetheRoots> found;
    const int nstarts = cfg.starts_per_degree * total;
    st.starts = nstarts;
    for (int startno = 0; startno < nstarts; ++startno) {
        // start styles: annulus sweeps, starts clustered near the Lambda
        // roots (small Newton basins hide there), and direct Newton on the
        // cleared polynomial system, which has no log singularity at the
        // Lambda roots
        const int style = startno % 4;
        const bool targeted = (style == 3) && !lambda_roots.empty();
        std::vector<cplx> w(flat.size());
        for (int s = 0; s < flat.size(); ++s) {
            if (targeted) {
                const cplx base = lambda_roots[rng.next_u64() % lambda_roots.size()];
                w[s] = base * (cplx(1.0, 0.0) + 0.35 * rng.gaussian_like());
            } else {
                w[s] = rng.annulus(rlo, rhi);
            }
        }
        if (style == 1) {
            if (!newton_cleared(cleared, w, cfg.max_iter, cfg.damping)) continue;
        } else {
            std::vector<cplx> u(flat.size());
            for (int s = 0; s < flat.size(); ++s) u[s] = std::log(w[s]);
            if (!newton_log(logsys, u, cfg)) continue;
            for (int s = 0; s < flat.size(); ++s) w[s] = std::exp(u[s]);
            if (!newton_cleared(cleared, w, 8, 1.0)) continue;
        }
        ++st.converged;

        BetheRoots br = flat.unflatten(w);
        br.sort_canonical();
        if (!bethe_roots_admissible(br, inst.q, cfg.dedupe_tol)) {
            ++st.rejected_degenerate;
            continue;
        }
        bool dup = false;
        for (const auto& prev : found)
            if (same_bethe_roots(prev, br, cfg.dedupe_tol)) dup = true;
        if (dup) continue;

        try {
            QQSolution sol;
            sol.q_plus = br.to_q_plus();
            sol.q_minus = reconstruct_qminus(inst, sol.q_plus);
            // coefficient-space polish moves the roots so the full QQ
            // system holds at machine precision, not just the root-wise
            // equations
            const CoeffSystem csys = CoeffSystem::make(inst, degrees);
            std::vector<cplx> x = csys.pack(sol);
            double cscale = 1.0;
            for (const Poly& lam : inst.lambdas) cscale = std::max(cscale, lam.max_abs_coeff());
            if (newton_coeff(csys, x, 4, 1e-13 * cscale)) {
                BetheRoots br2 = BetheRoots::from_q_plus(csys.unpack(x).q_plus);
                br2.sort_canonical();
                if (same_bethe_roots(br, br2, cfg.dedupe_tol)) br = br2;
            }
            // final gate replays the consumer pipeline: monic Q+ from the
            // emitted roots, reconstructed Q-, both residual notions
            sol.q_plus = br.to_q_plus();
            sol.q_minus = reconstruct_qminus(inst, sol.q_plus);
            if (bethe_residual(inst, br).max_abs >= cfg.residual_tol ||
                qq_residual_relative(inst, sol) >= cfg.residual_tol) {
                ++st.rejected_residual;
                continue;
            }
            if (!check_nondegenerate(inst, sol, inst.twist_window, 1e-6).pass) {
                ++st.rejected_nondeg;
                continue;
            }
        } catch (const budget_error&) {
            throw;
        } catch (const std::exception&) {
            ++st.rejected_degenerate;
            continue;
        }
        found.push_back(std::move(br));
    }

    // canonical output order, independent of discovery order
    std::sort(found.begin(), found.end(), [](const BetheRoots& a, const BetheRoots& b) {
        for (std::size_t i = 0; i < a.roots.size(); ++i) {
            if (a.roots[i].size() != b.roots[i].size()) return a.roots[i].size() < b.roots[i].size();
            for (std::size_t k = 0; k < a.roots[i].size(); ++k) {
                if (a.roots[i][k].real() != b.roots[i][k].real())
                    return a.roots[i][k].real() < b.roots[i][k].real();
                if (a.roots[i][k].imag() != b.roots[i][k].imag())
                    return a.roots[i][k].imag() < b.roots[i][k].imag();
            }
        }
        return false;
    });
    return found;
}

// --------------------------------------------------------- bruteforce

std::vector<QQSolution> solve_qq_bruteforce(const QQInstance& inst, const std::vector<int>& degrees,
                                            const SolverConfig& cfg) {
    const CoeffSystem sys = CoeffSystem::make(inst, degrees);
    const int n = sys.unknowns;
    if (n > 8)
        throw budget_error("solve_qq_bruteforce: " + std::to_string(n) + " unknowns exceeds budget of 8");

    double scale = 1.0;
    for (const Poly& lam : inst.lambdas) scale = std::max(scale, lam.max_abs_coeff());

    Rng rng(cfg.seed ^ 0xb10c8a5eULL);
    const int nstarts = std::max(240, 160 * n);

    std::vector<QQSolution> found;
    for (int startno = 0; startno < nstarts; ++startno) {
        std::vector<cplx> x(n);
        for (int s = 0; s < n; ++s) x[s] = 2.0 * scale * rng.gaussian_like();
        if (!newton_coeff(sys, x, cfg.max_iter, 1e-11 * std::max(1.0, scale))) continue;
        QQSolution sol = sys.unpack(x);
        if (qq_residual_relative(inst, sol) >= cfg.residual_tol) continue;
        const BetheRoots br = BetheRoots::from_q_plus(sol.q_plus);
        bool dup = false;
        for (const auto& prev : found)
            if (same_bethe_roots(BetheRoots::from_q_plus(prev.q_plus), br, cfg.dedupe_tol)) dup = true;
        if (!dup) found.push_back(std::move(sol));
    }

    std::sort(found.begin(), found.end(), [](const QQSolution& a, const QQSolution& b) {
        BetheRoots x = BetheRoots::from_q_plus(a.q_plus);
        BetheRoots y = BetheRoots::from_q_plus(b.q_plus);
        x.sort_canonical();
        y.sort_canonical();
        for (std::size_t i = 0; i < x.roots.size(); ++i) {
            if (x.roots[i].size() != y.roots[i].size()) return x.roots[i].size() < y.roots[i].size();
            for (std::size_t k = 0; k < x.roots[i].size(); ++k) {
                if (x.roots[i][k].real() != y.roots[i][k].real())
                    return x.roots[i][k].real() < y.roots[i][k].real();
                if (x.roots[i][k].imag() != y.roots[i][k].imag())
                    return x.roots[i][k].imag() < y.roots[i][k].imag();
            }
        }
        return false;
    });
    return found;
}

}  // namespace qoper
