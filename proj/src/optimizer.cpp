#include "heatopt/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace heatopt {

namespace {

double dot(const Direction& a, const Direction& b) { return a.dnu * b.dnu + (a.dq.array() * b.dq.array()).sum(); }

/// Metric weights k_m l_c; l is the control mass diagonal, lumped for non-diagonal masses.
Mat metric_weights(const ProblemData& pd) {
    const auto& map = *pd.space.map;
    const Vec l = map.diagonal_mass ? map.mc_diag : Vec(map.Mc * Vec::Ones(map.size()));
    Mat w(l.size(), pd.grid.M());
    for (int m = 0; m < pd.grid.M(); ++m) w.col(m) = pd.grid.k[m] * l;
    return w;
}

struct AugEval {
    double f = 0.0;
    double g = 0.0;
    double mu_t = 0.0;  ///< max(0, mu + rho g)
    Direction grad;     ///< raw
    Direction grad_g;   ///< raw
};

double shifted_multiplier(double mu, double rho, double g) { return std::max(0.0, mu + rho * g); }

AugEval evaluate(const ProblemData& pd, Iterate& it, double mu, double rho, bool with_gradient) {
    AugEval e;
    e.g = eval_g(pd, it);
    e.mu_t = shifted_multiplier(mu, rho, e.g);
    e.f = eval_j(pd, it.nu(), it.q()) + (e.mu_t * e.mu_t - mu * mu) / (2.0 * rho);
    if (with_gradient) {
        e.grad_g = grad_g_raw(pd, it);
        e.grad = grad_j_raw(pd, it) + e.mu_t * e.grad_g;
    }
    return e;
}

Direction aug_hess_apply(const ProblemData& pd, Iterate& it, double rho, const AugEval& e, const Direction& d) {
    Direction h = hess_L_apply_raw(pd, it, e.mu_t, d);
    if (e.mu_t > 0.0) h = h + (rho * dot(e.grad_g, d)) * e.grad_g;
    return h;
}

/// Projected gradient residual in the metric W: |q - P(q - theta G / W)|_W.
double projected_residual(const Mat& q, const Mat& G, const Mat& w, double theta, const std::optional<Bounds>& b) {
    Mat y = q - theta * G.cwiseQuotient(w);
    clamp_coefficients(y, b);
    const Mat d = q - y;
    return std::sqrt((d.array().square() * w.array()).sum());
}

enum ActiveFlag : signed char { Free = 0, AtLower = -1, AtUpper = 1 };
using ActiveSet = Eigen::Array<signed char, Eigen::Dynamic, Eigen::Dynamic>;

/// Semismooth active set: coordinates whose gradient step lands outside the box.
ActiveSet active_set(const Mat& q, const Mat& G, const Mat& w, double theta, const std::optional<Bounds>& b) {
    ActiveSet a = ActiveSet::Zero(q.rows(), q.cols());
    if (!b) return a;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        const double y = q.data()[i] - theta * G.data()[i] / w.data()[i];
        if (y <= b->lower) a.data()[i] = AtLower;
        else if (y >= b->upper) a.data()[i] = AtUpper;
    }
    return a;
}

void mask_free(Direction& d, const ActiveSet& a, bool nu_free = true) {
    if (!nu_free) d.dnu = 0.0;
    for (Eigen::Index i = 0; i < d.dq.size(); ++i)
        if (a.data()[i] != Free) d.dq.data()[i] = 0.0;
}

/// Diagonal part D plus the penalty term rho v v^T, restricted to the free variables.
struct Preconditioner {
    double p_nu = 1.0;  ///< zero when nu is fixed
    Mat p_q;            ///< alpha nu W, zero on fixed coordinates
    double rho = 0.0;
    Direction v;         ///< constraint gradient, zero on fixed coordinates
    double dv_dv = 0.0;  ///< v.D^{-1}v

    Direction diag_inverse(const Direction& r) const {
        Direction z{p_nu > 0.0 ? r.dnu / p_nu : 0.0, Mat::Zero(r.dq.rows(), r.dq.cols())};
        for (Eigen::Index i = 0; i < r.dq.size(); ++i)
            if (p_q.data()[i] > 0.0) z.dq.data()[i] = r.dq.data()[i] / p_q.data()[i];
        return z;
    }
    Direction inverse(const Direction& r) const {
        Direction z = diag_inverse(r);
        if (rho <= 0.0) return z;
        const Direction dv = diag_inverse(v);
        return z + (-rho * dot(dv, r) / (1.0 + rho * dv_dv)) * dv;
    }
    double inner(const Direction& a, const Direction& b) const {
        double r = p_nu * a.dnu * b.dnu + (a.dq.array() * p_q.array() * b.dq.array()).sum();
        if (rho > 0.0) r += rho * dot(v, a) * dot(v, b);
        return r;
    }
    double norm(const Direction& a) const { return std::sqrt(std::max(inner(a, a), 0.0)); }
};

/// Data shared by all preconditioners of one iterate.
struct Scaling {
    double d_nu = 1.0;
    Mat d_q;
    double rho = 0.0;
    Direction grad_g;

    Preconditioner restricted(const ActiveSet& act, bool nu_free) const {
        Preconditioner P;
        P.p_nu = nu_free ? d_nu : 0.0;
        P.p_q = d_q;
        for (Eigen::Index i = 0; i < act.size(); ++i)
            if (act.data()[i] != Free) P.p_q.data()[i] = 0.0;
        P.v = grad_g;
        mask_free(P.v, act, nu_free);
        P.rho = rho;
        P.dv_dv = rho > 0.0 ? dot(P.v, P.diag_inverse(P.v)) : 0.0;
        return P;
    }
};

/// Distance tau >= 0 along p to the sphere |s + tau p|_N = radius.
double to_boundary(const Preconditioner& N, const Direction& s, const Direction& p, double radius) {
    const double a = N.inner(p, p), b = 2.0 * N.inner(s, p), c = N.inner(s, s) - radius * radius;
    if (a <= 0.0) return 0.0;
    return std::max(0.0, (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a));
}

struct CgResult {
    Direction s;
    int iterations = 0;
    bool hit_boundary = false;
};

/// Steihaug CG on the free variables for min b.s + s.Hs/2 subject to |base + s|_N <= radius.
template <class HessFree>
CgResult steihaug(const HessFree& hess_free, const Direction& b, const Preconditioner& P, const Preconditioner& N,
                  const Direction& base, double radius, int max_cg) {
    CgResult out;
    out.s = Direction{0.0, Mat::Zero(b.dq.rows(), b.dq.cols())};
    Direction r = b;
    Direction z = P.inverse(r);
    Direction p = -1.0 * z;
    double rz = dot(r, z);
    const double r0 = std::sqrt(std::max(rz, 0.0));
    if (r0 == 0.0) return out;
    const double eta = std::min(0.1, std::sqrt(r0));
    for (int i = 0; i < max_cg; ++i) {
        ++out.iterations;
        const Direction Hp = hess_free(p);
        const double kappa = dot(p, Hp);
        if (kappa <= 0.0) {
            out.s = out.s + to_boundary(N, base + out.s, p, radius) * p;
            out.hit_boundary = true;
            break;
        }
        const double a = rz / kappa;
        const Direction s_new = out.s + a * p;
        if (N.norm(base + s_new) >= radius) {
            out.s = out.s + to_boundary(N, base + out.s, p, radius) * p;
            out.hit_boundary = true;
            break;
        }
        out.s = s_new;
        r = r + a * Hp;
        z = P.inverse(r);
        const double rz_new = dot(r, z);
        if (std::sqrt(std::max(rz_new, 0.0)) <= eta * r0) break;
        p = -1.0 * z + (rz_new / rz) * p;
        rz = rz_new;
    }
    return out;
}

/// Point x + s projected onto nu >= nu_min and the control box, with its face.
struct Projected {
    double nu = 0.0;
    Mat q;
    Direction s;  ///< projected point minus x
    ActiveSet act;
    bool nu_free = true;
    bool clipped = false;  ///< projection changed x + d
};

Projected project(double nu, const Mat& q, const Direction& d, double nu_min, const std::optional<Bounds>& b) {
    Projected p;
    p.nu = std::max(nu + d.dnu, nu_min);
    p.nu_free = p.nu > nu_min;
    p.clipped = p.nu != nu + d.dnu;
    p.q = q + d.dq;
    p.act = ActiveSet::Zero(q.rows(), q.cols());
    if (b) {
        const double slack = 1e-13 * (1.0 + std::max(std::abs(b->lower), std::abs(b->upper)));
        for (Eigen::Index i = 0; i < p.q.size(); ++i) {
            double& y = p.q.data()[i];
            if (y <= b->lower) {
                p.clipped = p.clipped || y < b->lower - slack;
                y = b->lower;
                p.act.data()[i] = AtLower;
            } else if (y >= b->upper) {
                p.clipped = p.clipped || y > b->upper + slack;
                y = b->upper;
                p.act.data()[i] = AtUpper;
            }
        }
    }
    p.s = Direction{p.nu - nu, p.q - q};
    return p;
}

ControlFunction with_coeffs(const ControlFunction& q, Mat c) {
    ControlFunction r = q;
    r.coeffs = std::move(c);
    return r;
}

void check_bounds(const ControlFunction& q) {
    if (!q.bounds || q.kind == ControlKind::Variational) return;
    const double lo = q.bounds->lower, hi = q.bounds->upper;
    if (q.coeffs.size() > 0 && (q.coeffs.minCoeff() < lo || q.coeffs.maxCoeff() > hi))
        throw std::logic_error("iterate left the admissible set");
}

}  // namespace

double augmented_value(const ProblemData& pd, Iterate& it, double mu, double rho) {
    return evaluate(pd, it, mu, rho, false).f;
}

double augmented_stationarity(const ProblemData& pd, Iterate& it, double mu, double rho) {
    const AugEval e = evaluate(pd, it, mu, rho, true);
    const Mat w = metric_weights(pd);
    return std::abs(e.grad.dnu) +
           projected_residual(it.q().coeffs, e.grad.dq, w, 1.0 / (pd.alpha * it.nu()), pd.space.bounds);
}

AugLagState auglag_update(AugLagState state, double g_val, const SolverOptions& opts) {
    state.mu = shifted_multiplier(state.mu, state.rho, g_val);
    const double ag = std::abs(g_val);
    if (ag > opts.g_decrease * state.last_abs_g) state.rho *= opts.rho_factor;
    state.last_abs_g = ag;
    state.tol_inner = std::max(opts.tol_s, 0.1 * ag);
    return state;
}

Iterate inner_solve(const ProblemData& pd, Iterate it, double mu, double rho, double tol, const SolverOptions& opts,
                    InnerStats* stats) {
    InnerStats local;
    InnerStats& st = stats ? *stats : local;
    st = InnerStats{};
    const Mat w = metric_weights(pd);
    const auto& bounds = pd.space.bounds;
    const double mu0 = 0.01;  // sufficient model decrease on projected paths
    const Direction zero{0.0, Mat::Zero(w.rows(), w.cols())};
    double radius = opts.tr_radius0;
    double t_cauchy = 1.0;

    AugEval e = evaluate(pd, it, mu, rho, true);
    for (;;) {
        const double nu = it.nu();
        const Mat q = it.q().coeffs;
        const double theta = 1.0 / (pd.alpha * nu);
        const bool nu_var = !opts.fix_nu;
        st.stationarity = (nu_var ? std::abs(e.grad.dnu) : 0.0) + projected_residual(q, e.grad.dq, w, theta, bounds);
        if (st.stationarity <= tol || st.iterations >= opts.max_inner) break;
        ++st.iterations;

        auto hess = [&](const Direction& d) { return aug_hess_apply(pd, it, rho, e, d); };
        auto model = [&](const Direction& s, const Direction& Hs) { return dot(e.grad, s) + 0.5 * dot(s, Hs); };

        // Penalty curvature rho v v^T goes into the metric; D keeps the remainder.
        Scaling sc;
        sc.rho = e.mu_t > 0.0 ? rho : 0.0;
        sc.grad_g = e.grad_g;
        const double hnn = hess(Direction{1.0, zero.dq}).dnu;
        sc.d_nu = std::max(std::abs(hnn - sc.rho * e.grad_g.dnu * e.grad_g.dnu), 1e-3 * std::abs(hnn));
        if (sc.d_nu < 1e-12) sc.d_nu = 1.0;
        sc.d_q = (pd.alpha * nu) * w;
        const Preconditioner full = sc.restricted(ActiveSet::Zero(w.rows(), w.cols()), true);

        bool floor_limited = false;
        // Ratio test and radius update; moves the iterate on acceptance.
        auto attempt = [&](const Projected& y, double pred) {
            floor_limited = !y.nu_free;
            if (!(pred > 0.0)) return false;
            Iterate trial(y.nu, with_coeffs(it.q(), y.q));
            const double noise = 1e-11 * (1.0 + std::abs(e.f));
            const double snorm = full.norm(y.s);
            if (pred <= noise) {
                // Values are at rounding level; require a smaller stationarity measure instead.
                const AugEval et = evaluate(pd, trial, mu, rho, true);
                if (et.f > e.f + noise) return false;
                const double th = 1.0 / (pd.alpha * y.nu);
                const double stat =
                    (nu_var ? std::abs(et.grad.dnu) : 0.0) + projected_residual(y.q, et.grad.dq, w, th, bounds);
                if (!(stat < st.stationarity)) return false;
            } else {
                const AugEval et = evaluate(pd, trial, mu, rho, false);
                const double ratio = (e.f - et.f) / pred;
                if (ratio < opts.tr_accept) return false;
                if (ratio < 0.25) radius = opts.tr_shrink * std::min(radius, snorm);
                else if (ratio > 0.75 && snorm >= 0.99 * radius) radius = std::min(opts.tr_grow * radius, 1e8);
            }
            it = std::move(trial);
            return true;
        };

        // Semismooth step: active coordinates go to their bounds, the free part compensates.
        ActiveSet act = active_set(q, e.grad.dq, w, theta, bounds);
        Direction dA = zero;
        for (Eigen::Index i = 0; i < act.size(); ++i) {
            if (act.data()[i] == Free) continue;
            dA.dq.data()[i] = (act.data()[i] == AtLower ? bounds->lower : bounds->upper) - q.data()[i];
        }
        Direction b = e.grad;
        if (dA.dq.size() > 0 && dA.dq.cwiseAbs().maxCoeff() > 0.0) b = b + hess(dA);
        mask_free(b, act, nu_var);
        const Preconditioner P = sc.restricted(act, nu_var);
        auto hess_free = [&](const Direction& p) {
            Direction h = hess(p);
            mask_free(h, act, nu_var);
            return h;
        };
        CgResult cg = steihaug(hess_free, b, P, P, zero, radius, opts.max_cg);
        st.cg_iterations += cg.iterations;
        Direction step = cg.s + dA;
        const double snorm = full.norm(step);
        if (snorm > radius) step = (radius / snorm) * step;
        {
            const Projected y = project(nu, q, step, opts.nu_min, bounds);
            if (attempt(y, -model(y.s, hess(y.s)))) {
                check_bounds(it.q());
                e = evaluate(pd, it, mu, rho, true);
                continue;
            }
        }

        // Projected-path step: Cauchy point, then CG on the faces it reaches.
        ++st.gradient_steps;
        Direction dg = full.diag_inverse(e.grad);
        if (!nu_var) dg.dnu = 0.0;
        for (;;) {
            if (radius < opts.tr_min_radius) {
                std::ostringstream os;
                os << "trust region collapsed at nu=" << nu << " stationarity=" << st.stationarity << " f=" << e.f;
                if (floor_limited) throw DegenerateProblemError("nu driven to the floor: " + os.str());
                throw StagnationError(os.str());
            }
            auto cauchy_at = [&](double t) { return project(nu, q, (-t) * dg, opts.nu_min, bounds); };
            auto sufficient = [&](const Projected& y, const Direction& Hs) {
                return model(y.s, Hs) <= mu0 * dot(e.grad, y.s);
            };
            double t = t_cauchy;
            Projected ys = cauchy_at(t);
            Direction Hs = hess(ys.s);
            if (full.norm(ys.s) <= radius && sufficient(ys, Hs)) {
                for (int k = 0; k < 10; ++k) {
                    Projected y2 = cauchy_at(2.0 * t);
                    if (full.norm(y2.s) > radius || full.norm(y2.s + (-1.0) * ys.s) <= 1e-12 * full.norm(ys.s)) break;
                    Direction H2 = hess(y2.s);
                    if (!sufficient(y2, H2)) break;
                    t *= 2.0;
                    ys = std::move(y2);
                    Hs = std::move(H2);
                }
            } else {
                for (int k = 0; k < 60; ++k) {
                    t *= 0.5;
                    ys = cauchy_at(t);
                    if (full.norm(ys.s) > radius) continue;
                    Hs = hess(ys.s);
                    if (sufficient(ys, Hs)) break;
                }
            }
            t_cauchy = t;

            double psi = model(ys.s, Hs);
            for (int face = 0; face < 10; ++face) {
                const Direction r = e.grad + Hs;
                Direction rf = r;
                const bool nu_face = ys.nu_free && nu_var;
                mask_free(rf, ys.act, nu_face);
                const Preconditioner Pf = sc.restricted(ys.act, nu_face);
                auto hess_face = [&](const Direction& p) {
                    Direction h = hess(p);
                    mask_free(h, ys.act, nu_face);
                    return h;
                };
                const CgResult c = steihaug(hess_face, rf, Pf, full, ys.s, radius, opts.max_cg);
                st.cg_iterations += c.iterations;
                if (full.norm(c.s) == 0.0) break;
                const Direction Hw = hess(c.s);
                bool moved = false;
                Projected yn;
                Direction Hn;
                double psin = 0.0;
                double beta = 1.0;
                for (int k = 0; k < 20 && !moved; ++k, beta *= 0.5) {
                    yn = project(nu, q, ys.s + beta * c.s, opts.nu_min, bounds);
                    Hn = yn.clipped ? hess(yn.s) : Hs + beta * Hw;
                    psin = model(yn.s, Hn);
                    moved = psin <= psi + mu0 * std::min(0.0, dot(r, yn.s + (-1.0) * ys.s));
                }
                if (!moved) break;
                const bool new_face = yn.clipped;
                ys = std::move(yn);
                Hs = std::move(Hn);
                psi = psin;
                if (c.hit_boundary || !new_face) break;
            }
            if (attempt(ys, -psi)) break;
            ++st.rejected;
            radius = opts.tr_shrink * std::min(radius, std::max(full.norm(ys.s), 0.5 * opts.tr_min_radius));
        }
        check_bounds(it.q());
        e = evaluate(pd, it, mu, rho, true);
    }
    return it;
}

Iterate default_start(const ProblemData& pd) {
    return Iterate(1.0, zero_control(pd.space, pd.grid));
}

SolveReport solve(const ProblemData& pd, const SolverOptions& opts) { return solve(pd, default_start(pd), opts); }

SolveReport solve(const ProblemData& pd, Iterate it, const SolverOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    pd.validate();
    if (pd.space.kind == ControlKind::Variational && pd.space.bounds)
        throw ConfigError("variational distributed controls with bounds are not supported by the optimizer; use p0 or p1");
    if (!(it.nu() > 0.0)) throw ConfigError("initial time scaling must be positive");
    {
        ControlFunction c = it.q();
        if (!(c.grid == pd.grid) || c.coeffs.rows() != pd.space.size())
            throw ConfigError("initial control does not match the problem");
        clamp_coefficients(c.coeffs, pd.space.bounds);
        if (c.coeffs != it.q().coeffs) throw ConfigError("initial control is not admissible");
    }

    SolveReport rep;
    rep.options = opts;
    AugLagState state;
    state.rho = opts.rho0;
    double g = eval_g(pd, it);
    state.last_abs_g = std::abs(g);
    state.tol_inner = std::max(opts.tol_s, 0.1 * std::abs(g));
    double stationarity = std::numeric_limits<double>::infinity();

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        InnerStats ist;
        try {
            it = inner_solve(pd, it, state.mu, state.rho, state.tol_inner, opts, &ist);
        } catch (const StagnationError& ex) {
            rep.message = std::string("inner solver stagnated: ") + ex.what();
            rep.outer_iterations = outer;
            break;
        }
        rep.newton_iterations += ist.iterations;
        rep.cg_iterations += ist.cg_iterations;
        rep.gradient_steps += ist.gradient_steps;
        stationarity = ist.stationarity;
        g = eval_g(pd, it);
        state = auglag_update(std::move(state), g, opts);
        state.history.push_back({outer, g, state.mu, state.rho, it.nu(), ist.iterations, stationarity});
        rep.outer_iterations = outer;
        if (opts.log) {
            *opts.log << "outer=" << outer << " g=" << std::scientific << std::setprecision(3) << g
                      << " mu=" << state.mu << " rho=" << state.rho << " nu=" << std::setprecision(10) << it.nu()
                      << std::setprecision(3) << " inner=" << ist.iterations << " cg=" << ist.cg_iterations
                      << " stat=" << stationarity << std::defaultfloat << "\n";
        }
        if (std::abs(g) < opts.tol_g && stationarity <= opts.tol_s) {
            rep.converged = true;
            break;
        }
    }
    if (!rep.converged && rep.message.empty()) rep.message = "maximum number of outer iterations reached";

    rep.nu = it.nu();
    rep.q = it.q();
    rep.mu = state.mu;
    rep.rho = state.rho;
    rep.g = g;
    rep.history = state.history;
    {
        const Direction gj = grad_j_raw(pd, it);
        const Direction gg = grad_g_raw(pd, it);
        const Direction gl = gj + rep.mu * gg;
        const Mat w = metric_weights(pd);
        rep.hamiltonian_residual = std::abs(gl.dnu);
        rep.projection_residual =
            projected_residual(it.q().coeffs, gl.dq, w, 1.0 / (pd.alpha * it.nu()), pd.space.bounds);
        rep.stationarity = rep.hamiltonian_residual + rep.projection_residual;
        rep.multiplier_identity = gg.dnu != 0.0 ? gj.dnu / (-gg.dnu) : std::numeric_limits<double>::quiet_NaN();
    }
    if (rep.converged && rep.mu < 1e-8) {
        rep.converged = false;
        rep.message = "converged point has a vanishing multiplier";
    }
    if (rep.converged) rep.message = "converged";
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

void write_report(std::ostream& os, const SolveReport& r) {
    const auto& o = r.options;
    os << std::setprecision(15);
    os << "converged = " << (r.converged ? "true" : "false") << "\n";
    os << "message = " << r.message << "\n";
    os << "nu = " << r.nu << "\n";
    os << "mu = " << r.mu << "\n";
    os << "rho = " << r.rho << "\n";
    os << "g = " << r.g << "\n";
    os << "stationarity = " << r.stationarity << "\n";
    os << "hamiltonian_residual = " << r.hamiltonian_residual << "\n";
    os << "projection_residual = " << r.projection_residual << "\n";
    os << "multiplier_identity = " << r.multiplier_identity << "\n";
    os << "control_norm = " << (r.q.coeffs.size() ? r.q.coeffs.norm() : 0.0) << "\n";
    os << "control_kind = " << to_string(r.q.kind) << "\n";
    os << "M = " << r.q.M() << "\n";
    os << "outer_iterations = " << r.outer_iterations << "\n";
    os << "newton_iterations = " << r.newton_iterations << "\n";
    os << "cg_iterations = " << r.cg_iterations << "\n";
    os << "gradient_steps = " << r.gradient_steps << "\n";
    os << "seconds = " << r.seconds << "\n";
    os << "tol_g = " << o.tol_g << "\n";
    os << "tol_s = " << o.tol_s << "\n";
    os << "rho0 = " << o.rho0 << "\n";
    os << "rho_factor = " << o.rho_factor << "\n";
    os << "g_decrease = " << o.g_decrease << "\n";
    os << "nu_min = " << o.nu_min << "\n";
    os << "tr_radius0 = " << o.tr_radius0 << "\n";
    os << "tr_shrink = " << o.tr_shrink << "\n";
    os << "tr_grow = " << o.tr_grow << "\n";
    os << "tr_accept = " << o.tr_accept << "\n";
}

void write_history_csv(std::ostream& os, const SolveReport& r) {
    os << "outer,g,mu,rho,nu,inner,stationarity\n" << std::setprecision(15);
    for (const auto& h : r.history)
        os << h.outer << "," << h.g << "," << h.mu << "," << h.rho << "," << h.nu << "," << h.inner_iterations << ","
           << h.stationarity << "\n";
}

}  // namespace heatopt
