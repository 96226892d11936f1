#pragma once
// Bracketed scalar root finding and minimization, plus a small adaptive
// Gauss-Kronrod quadrature used for cross-checking path integrals.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace csb {

struct RootResult {
    double x = 0.0;
    double f = 0.0;
    int iters = 0;
    bool converged = false;
};

// Brent's method on a sign-changing bracket [a,b].
template <class F>
RootResult brent(F&& f, double a, double b, double xtol = 1e-13, int maxit = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return {a, 0.0, 0, true};
    if (fb == 0.0) return {b, 0.0, 0, true};
    if ((fa > 0.0) == (fb > 0.0))
        throw std::invalid_argument("brent: root not bracketed");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 1; it <= maxit; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; d = b - a; e = d; }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return {b, fb, it, true};
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                double r = fb / fc;
                q = fa / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    return {b, fb, maxit, false};
}

// Newton iteration confined to a bracket; falls back to bisection whenever
// the Newton step leaves the bracket or fails to shrink the residual.
template <class FDF>
RootResult newton_safeguarded(FDF&& f_df, double lo, double hi, double x0,
                              double xtol = 1e-13, int maxit = 100) {
    double flo, fhi, dummy;
    f_df(lo, flo, dummy);
    f_df(hi, fhi, dummy);
    if (flo == 0.0) return {lo, 0.0, 0, true};
    if (fhi == 0.0) return {hi, 0.0, 0, true};
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("newton_safeguarded: root not bracketed");
    double x = std::clamp(x0, lo, hi);
    for (int it = 1; it <= maxit; ++it) {
        double fx, dfx;
        f_df(x, fx, dfx);
        if (fx == 0.0) return {x, 0.0, it, true};
        if ((fx > 0.0) == (flo > 0.0)) { lo = x; flo = fx; }
        else { hi = x; fhi = fx; }
        double step = dfx != 0.0 ? fx / dfx : std::numeric_limits<double>::infinity();
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= xtol * (1.0 + std::abs(xn))) return {xn, fx, it, true};
        x = xn;
    }
    return {x, 0.0, maxit, false};
}

// Golden-section minimization (unimodal f on [a,b]).
template <class F>
double golden_minimize(F&& f, double a, double b, double xtol = 1e-10) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (std::abs(b - a) > xtol) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Scan [lo,hi] on n subintervals and polish every sign change with Brent.
template <class F>
std::vector<double> scan_roots(F&& f, double lo, double hi, int n = 400,
                               double xtol = 1e-13) {
    std::vector<double> roots;
    double prev_x = lo, prev_f = f(lo);
    for (int i = 1; i <= n; ++i) {
        double x = lo + (hi - lo) * i / n;
        double fx = f(x);
        if (prev_f == 0.0) {
            roots.push_back(prev_x);
        } else if (fx != 0.0 && (prev_f > 0.0) != (fx > 0.0)) {
            roots.push_back(brent(f, prev_x, x, xtol).x);
        }
        prev_x = x;
        prev_f = fx;
    }
    if (prev_f == 0.0) roots.push_back(prev_x);
    return roots;
}

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1,1].
inline const double gk_xk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline const double gk_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline const double gk_wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
QuadResult gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double kron = gk_wk[7] * fc;
    double gauss = gk_wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        double dx = h * gk_xk[i];
        double fsum = f(c - dx) + f(c + dx);
        kron += gk_wk[i] * fsum;
        if (i % 2 == 1) gauss += gk_wg[i / 2] * fsum;
    }
    kron *= h;
    gauss *= h;
    double err = std::abs(kron - gauss);
    err = 200.0 * err * std::sqrt(err);  // standard QUADPACK sharpening
    return {kron, err, 15};
}

}  // namespace detail

template <class F>
QuadResult quad_adaptive(F&& f, double a, double b, double abstol = 1e-11,
                         int max_depth = 18) {
    struct Frame { double a, b; int depth; };
    std::vector<Frame> stack{{a, b, 0}};
    QuadResult total;
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        QuadResult r = detail::gk15(f, fr.a, fr.b);
        total.evaluations += r.evaluations;
        double local_tol = abstol * (fr.b - fr.a) / (b - a);
        if (r.error <= std::max(local_tol, 1e-16) || fr.depth >= max_depth) {
            total.value += r.value;
            total.error += r.error;
        } else {
            double m = 0.5 * (fr.a + fr.b);
            stack.push_back({fr.a, m, fr.depth + 1});
            stack.push_back({m, fr.b, fr.depth + 1});
        }
    }
    return total;
}

}  // namespace csb
