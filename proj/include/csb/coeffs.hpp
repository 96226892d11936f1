#pragma once
// Loop coefficients of the unperturbed orbit (divergence and adjoint
// integrals), the per-case unfolding coefficients derived from them, the
// chord/fold correction functions, and measured unfolding coordinates.

#include <cmath>
#include <limits>
#include <vector>

#include "csb/maps.hpp"
#include "csb/rootfind.hpp"

namespace csb {

struct CoefficientReport {
    CaseTag case_tag = CaseTag::Codim1;
    SectionSpec section;

    double tau0 = 0;          // time of the unperturbed half loop
    double lambda0 = 1;       // exp of the divergence integral over it
    double tau_plus = 0, tau_minus = 0;
    double lambda_plus0 = 1, lambda_minus0 = 1;
    std::vector<double> kappa, kappa_plus, kappa_minus;
    std::vector<double> kappa_err;   // |co-integrated - quadrature cross-check|

    // Case-specific leading coefficients (NaN when not applicable).
    std::vector<double> theta;       // codim1: slope of the offset function
    std::vector<double> zeta, eta;   // cusp: slopes of the two unfoldings
    std::vector<double> mu;          // foldfold: slope of the first unfolding
    double Delta = std::numeric_limits<double>::quiet_NaN();
    double r = std::numeric_limits<double>::quiet_NaN();
    double vt3 = 0, vt4 = 0, vt5 = 0, vt6 = 0, vt7 = 0;  // quadratic-curve
                                                         // coefficients at 0
};

namespace detail {

// Piecewise cubic Hermite interpolation of an augmented forward upper arc,
// used as an independent quadrature route for the adjoint integrals.
struct ArcChart {
    const FilippovModel* mod;
    const Arc* arc;
    const double* alpha;

    void locate(double u, std::size_t& seg, double& th) const {
        const auto& ss = arc->samples;
        std::size_t lo = 0, hi = ss.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (ss[mid].u <= u) lo = mid;
            else hi = mid;
        }
        seg = lo;
        double du = ss[hi].u - ss[lo].u;
        th = du > 0 ? (u - ss[lo].u) / du : 0.0;
    }

    // Hermite value of component k (0=x, 1=y, 2=z0) at arc time u.
    double value(double u, int k) const {
        std::size_t i;
        double th;
        locate(u, i, th);
        const auto& s0 = arc->samples[i];
        const auto& s1 = arc->samples[i + 1];
        double h = s1.u - s0.u;
        auto deriv = [&](const ArcSample& s) {
            double fval = mod->eval(mod->f, s.state[0], s.state[1], alpha);
            double gval = mod->eval(mod->g, s.state[0], s.state[1], alpha);
            if (k == 0) return fval;
            if (k == 1) return gval;
            return mod->eval(mod->div, s.state[0], s.state[1], alpha);
        };
        double p0 = s0.state[k], p1 = s1.state[k];
        double d0 = deriv(s0), d1 = deriv(s1);
        double t2 = th * th, t3 = t2 * th;
        return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + th) * h * d0 +
               (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * h * d1;
    }
};

}  // namespace detail

// Adjoint integral over a recorded forward upper arc via adaptive
// quadrature on a Hermite reconstruction (independent of the co-integrated
// value carried in the arc state).
inline double kappa_quadrature(const FilippovModel& mod, const Arc& arc, int i,
                               const double* alpha) {
    detail::ArcChart chart{&mod, &arc, alpha};
    double zT = arc.z0_end();
    auto integrand = [&](double u) {
        double x = chart.value(u, 0);
        double y = chart.value(u, 1);
        double z = chart.value(u, 2);
        return std::exp(zT - z) * mod.eval(mod.B[i], x, y, alpha);
    };
    return quad_adaptive(integrand, 0.0, arc.u_end, 1e-11).value;
}

inline CoefficientReport coefficient_report(const FilippovModel& mod,
                                            CaseTag tag,
                                            const IntegratorOptions& opts = {}) {
    static const double zeros[32] = {0};
    const double* al = zeros;
    const int m = mod.m;
    const double a = mod.a;

    CoefficientReport rep;
    rep.case_tag = tag;
    rep.section = reference_section(mod, opts);

    IntegratorOptions o = opts;
    o.samples_per_step = 6;

    // Full half loop from (-a,0) to (+a,0).
    Arc loop = integrate_arc(mod, Side::Upper, {-a, 0.0}, al, Direction::Forward,
                             StopCondition::boundary_window(0.5 * a, 1.5 * a), o);
    if (loop.end != ArcEnd::BoundaryHit)
        throw NumericalError("coefficient_report: unperturbed loop does not close");
    rep.tau0 = loop.u_end;
    rep.lambda0 = std::exp(loop.z0_end());
    rep.kappa.resize(m);
    rep.kappa_err.resize(m);
    for (int i = 0; i < m; ++i) {
        rep.kappa[i] = rep.lambda0 * loop.w_end(i);
        rep.kappa_err[i] =
            std::abs(rep.kappa[i] - kappa_quadrature(mod, loop, i, al));
    }

    // Partial arcs to the reference section.
    Arc up = integrate_arc(mod, Side::Upper, {-a, 0.0}, al, Direction::Forward,
                           StopCondition::section(rep.section.c), opts);
    Arc dn = integrate_arc(mod, Side::Upper, {a, 0.0}, al, Direction::Backward,
                           StopCondition::section(rep.section.c), opts);
    if (up.end != ArcEnd::SectionHit || dn.end != ArcEnd::SectionHit)
        throw NumericalError("coefficient_report: section arcs failed");
    rep.tau_plus = up.tau();
    rep.tau_minus = dn.tau();
    rep.lambda_plus0 = std::exp(up.z0_end());
    rep.lambda_minus0 = std::exp(dn.z0_end());
    rep.kappa_plus.resize(m);
    rep.kappa_minus.resize(m);
    for (int i = 0; i < m; ++i) {
        rep.kappa_plus[i] = rep.lambda_plus0 * up.w_end(i);
        rep.kappa_minus[i] = rep.lambda_minus0 * dn.w_end(i);
    }

    // Pointwise data at the tangency abscissas.
    auto gxm = mod.eval(mod.gx, -a, 0.0, al);
    auto gxp = mod.eval(mod.gx, a, 0.0, al);
    auto gxxm = mod.eval(mod.gxx, -a, 0.0, al);
    auto ga = mod.eval(mod.g, a, 0.0, al);
    auto fm = mod.eval(mod.f, -a, 0.0, al);
    auto fp = mod.eval(mod.f, a, 0.0, al);

    rep.theta.assign(m, std::numeric_limits<double>::quiet_NaN());
    rep.zeta = rep.theta;
    rep.eta = rep.theta;
    rep.mu = rep.theta;

    if (tag == CaseTag::Codim1) {
        for (int i = 0; i < m; ++i) {
            double gai = mod.eval(mod.g_al[i], -a, 0.0, al);
            rep.theta[i] = -rep.kappa[i] / ga - gai / gxm;
        }
    } else if (tag == CaseTag::Cusp) {
        for (int i = 0; i < m; ++i) {
            double gai = mod.eval(mod.g_al[i], -a, 0.0, al);
            double gxai = mod.eval(mod.gx_al[i], -a, 0.0, al);
            rep.zeta[i] = -2.0 * gai / gxxm;
            rep.eta[i] = -rep.kappa[i] / ga - gxai / gxxm;
        }
    } else {
        for (int i = 0; i < m; ++i) {
            double gam = mod.eval(mod.g_al[i], -a, 0.0, al);
            double gap = mod.eval(mod.g_al[i], a, 0.0, al);
            rep.mu[i] = -gam / gxm - gap / gxp;
        }
        rep.Delta = gxm * rep.lambda0 - gxp;
        rep.r = -fm * gxp / (gxm * fp + gxp * fm);
        double q = gxp / rep.Delta;
        rep.vt3 = (1.0 + q) * (1.0 + q);
        rep.vt4 = q * q;
        rep.vt5 = rep.vt4 + q;
        rep.vt6 = rep.vt4 + (1.0 - (1.0 + rep.r) * (1.0 + rep.r)) * q;
        rep.vt7 = rep.vt3 +
                  (rep.r * rep.r - 1.0) * rep.lambda0 * gxm / rep.Delta;
    }
    return rep;
}

// --- fold roots and measured unfolding coordinates ----------------------

// Zeros of g(x,0;alpha) inside |x - center| <= w, polished by safeguarded
// Newton on the analytic derivative.
inline std::vector<double> fold_roots(const FilippovModel& mod, double center,
                                      double w, const double* alpha) {
    auto gfun = [&](double x) { return mod.eval(mod.g, x, 0.0, alpha); };
    auto roots = scan_roots(gfun, center - w, center + w, 300, 1e-14);
    for (double& r : roots) {
        auto fdf = [&](double x, double& f, double& df) {
            f = gfun(x);
            df = mod.eval(mod.gx, x, 0.0, alpha);
        };
        double lo = r - w / 100, hi = r + w / 100;
        double flo = gfun(lo), fhi = gfun(hi);
        if ((flo > 0) != (fhi > 0))
            r = newton_safeguarded(fdf, lo, hi, r).x;
    }
    return roots;
}

struct MeasuredUnfolding {
    CaseTag case_tag = CaseTag::Codim1;
    double b1 = 0, b2 = 0;
    // Auxiliary measured quantities.
    double rho1_fold = 0;    // codim1: fold offset near -a
    double rho2_return = 0;  // codim1: zero of T1 near -a
    double xi1 = 0;          // cusp: midpoint offset of the fold pair
    double theta1m = 0, theta1p = 0, theta2 = 0;  // foldfold
    bool fold_pair = false;  // cusp: the pair of fold roots exists (b1 > 0)
};

inline MeasuredUnfolding measured_unfolding(const FilippovModel& mod,
                                            const SectionSpec& sec, CaseTag tag,
                                            const double* alpha,
                                            const IntegratorOptions& opts = {}) {
    const double a = mod.a;
    MeasuredUnfolding out;
    out.case_tag = tag;

    if (tag == CaseTag::Codim1) {
        auto roots = fold_roots(mod, -a, 0.12 * a, alpha);
        if (roots.size() != 1)
            throw NumericalError("measured_unfolding: expected one fold near -a");
        out.rho1_fold = -roots[0];  // = a + O(alpha)
        auto T1 = [&](double x) { return map_T1(mod, x, alpha, opts); };
        out.rho2_return = brent(T1, -a - 0.1 * a, -a + 0.1 * a).x;
        out.b1 = -out.rho1_fold - out.rho2_return;
        out.b2 = 0.0;
        return out;
    }

    if (tag == CaseTag::Cusp) {
        auto roots = fold_roots(mod, -a, 0.12 * a, alpha);
        if (roots.size() >= 2) {
            double xm = roots.front(), xp = roots.back();
            out.fold_pair = true;
            out.b1 = 0.25 * (xp - xm) * (xp - xm);
            out.xi1 = -0.5 * (xp + xm);
        } else {
            // No fold pair: quantify the defect by the quadratic model at
            // the minimum of g along the boundary.
            double xm = golden_minimize(
                [&](double x) { return mod.eval(mod.g, x, 0.0, alpha); },
                -a - 0.12 * a, -a + 0.12 * a, 1e-12);
            double gmin = mod.eval(mod.g, xm, 0.0, alpha);
            double gxx = mod.eval(mod.gxx, xm, 0.0, alpha);
            out.b1 = -2.0 * gmin / gxx;
            out.xi1 = -xm;
            out.fold_pair = false;
        }
        out.b2 = map_T1(mod, -out.xi1, alpha, opts);
        return out;
    }

    // Fold-fold: fold offsets on both sides plus the critical value of the
    // section mismatch, normalized by its curvature.
    auto rm = fold_roots(mod, -a, 0.12 * a, alpha);
    auto rp = fold_roots(mod, a, 0.12 * a, alpha);
    if (rm.size() != 1 || rp.size() != 1)
        throw NumericalError("measured_unfolding: expected one fold near each end");
    out.theta1m = -rm[0];
    out.theta1p = rp[0];
    out.b1 = -out.theta1m + out.theta1p;

    auto T2 = [&](double x) { return map_T2(mod, sec, x, alpha, opts); };
    const double hx = 1e-5 * a;
    auto dT2 = [&](double x) { return (T2(x + hx) - T2(x - hx)) / (2 * hx); };
    double w = 0.08 * a;
    double xs = brent(dT2, -a - w, -a + w, 1e-10).x;  // critical point of T2
    out.theta2 = -xs;
    double t2s = T2(xs);
    double t2xx = (T2(xs + 100 * hx) - 2.0 * t2s + T2(xs - 100 * hx)) /
                  (100 * hx * 100 * hx);
    if (!(t2xx < 0))
        throw NumericalError("measured_unfolding: T2 not concave at its critical point");
    out.b2 = -2.0 * t2s / t2xx;
    return out;
}

// Chord and fold-map correction functions entering the cusp-case boundary
// curves: xi2 averages sigma_x along the chord between the tangency pair,
// xi3 corrects the outer curve through the local fold map.
struct XiFunctions {
    double xi2 = 0;
    double xi3 = 0;
    double xi3_tilde = 0;
    double varsigma = 0;  // landing abscissa magnitude of the local fold map
};

inline XiFunctions xi_functions(const FilippovModel& mod, const SectionSpec& sec,
                                double z, const double* alpha,
                                const IntegratorOptions& opts = {}) {
    (void)sec;
    if (!(z > 0))
        throw NumericalError("xi_functions: requires z > 0");
    // Recover xi1 from the fold pair.
    auto roots = fold_roots(mod, -mod.a, 0.12 * mod.a, alpha);
    if (roots.size() < 2)
        throw NumericalError("xi_functions: fold pair absent");
    double xi1 = -0.5 * (roots.front() + roots.back());

    // 8-point Gauss-Legendre on [0,1] for the chord average of sigma_x.
    static const double gl_x[4] = {0.1834346424956498, 0.5255324099163290,
                                   0.7966664774136267, 0.9602898564975363};
    static const double gl_w[4] = {0.3626837833783620, 0.3137066458778873,
                                   0.2223810344533745, 0.1012285362903763};
    XiFunctions out;
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
        for (double sgn : {-1.0, 1.0}) {
            double t = 0.5 + sgn * 0.5 * gl_x[k];
            double x = t * z - xi1;
            MapPoint p = sigma_full(mod, x, alpha, opts);
            acc += 0.5 * gl_w[k] * sigma_x_from_arc(mod, p.arc, x, alpha);
        }
    }
    out.xi2 = acc;

    // Local fold map from the outer tangency of the pair.
    double land =
        fold_pair_transition(mod, roots.back(), roots.front(), alpha, opts).value;
    out.varsigma = -land;
    out.xi3_tilde = (out.varsigma - xi1) / z - 3.0;
    out.xi3 = out.xi3_tilde - out.xi2;
    return out;
}

}  // namespace csb
