#pragma once
// Time integration of the piecewise-smooth system: a Dormand-Prince 5(4)
// stepper with dense output and event localization, augmented states for
// path integrals (divergence integral, adjoint parameter integrals,
// fundamental matrix, parameter sensitivities), a series step for leaving
// tangency points, scalar sliding arcs, and the concatenated flow.

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "csb/boundary.hpp"
#include "csb/model.hpp"
#include "csb/rootfind.hpp"

namespace csb {

enum class Direction { Forward, Backward };
enum class StopKind { Boundary, Section, Time };
enum class ArcEnd { BoundaryHit, SectionHit, SlidingExit, TimeOut };

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double hmax = 0.25;
    double h_init = 1e-3;
    long max_steps = 2000000;
    bool variational = false;     // carry the 2x2 fundamental matrix and the
                                  // per-parameter sensitivity columns
    bool second_order = false;    // additionally carry the divergence-gradient
                                  // integral along the first matrix column
    double event_tol = 1e-12;     // residual of the event function at events
    double t_min = 1e-9;          // events earlier than this are ignored
    double graze_tol = 1e-10;     // tangential boundary approach threshold
    double liftoff_h = 1e-4;      // series step length off a tangency
    int samples_per_step = 4;     // dense samples recorded per accepted step
};

struct StopCondition {
    StopKind kind = StopKind::Time;
    double t_max = 100.0;          // always honored, as internal arc time
    double section_c = 0.0;        // Section: y = c, hit with g(x,y) < 0
    double window_lo = -1e300;     // Boundary events outside [lo,hi] in x
    double window_hi = 1e300;      // are skipped (continuation past a dip)

    static StopCondition boundary(double tmax = 100.0) {
        StopCondition s;
        s.kind = StopKind::Boundary;
        s.t_max = tmax;
        return s;
    }
    static StopCondition boundary_window(double lo, double hi, double tmax = 100.0) {
        StopCondition s = boundary(tmax);
        s.window_lo = lo;
        s.window_hi = hi;
        return s;
    }
    static StopCondition section(double c, double tmax = 100.0) {
        StopCondition s;
        s.kind = StopKind::Section;
        s.section_c = c;
        s.t_max = tmax;
        return s;
    }
    static StopCondition time(double tmax) {
        StopCondition s;
        s.t_max = tmax;
        return s;
    }
};

struct ArcSample {
    double u = 0;                 // internal (non-negative) arc time
    std::vector<double> state;    // full augmented state
};

// One smooth arc of the upper or lower field, possibly time-reversed.
struct Arc {
    Side side = Side::Upper;
    Direction dir = Direction::Forward;
    ArcEnd end = ArcEnd::TimeOut;
    int m = 0;
    bool variational = false;
    bool second_order = false;
    double u_end = 0;                  // internal duration (>= 0)
    std::vector<double> state_end;
    std::vector<ArcSample> samples;

    double tau() const {               // signed physical duration
        return dir == Direction::Forward ? u_end : -u_end;
    }
    double x_end() const { return state_end[0]; }
    double y_end() const { return state_end[1]; }
    double z0_end() const { return state_end[2]; }
    double w_end(int i) const { return state_end[3 + i]; }
    // Fundamental matrix entries (column-major: d(x,y)/d(x0,y0)).
    double phi(int r, int c) const { return state_end[3 + m + 2 * c + r]; }
    double sens(int i, int r) const { return state_end[3 + m + 4 + 2 * i + r]; }
    double qdiv() const { return state_end[3 + m + 4 + 2 * m]; }
};

namespace detail {

// Right-hand side of the augmented smooth system in internal time u.
// For the lower field everything is evaluated at the reflected point;
// the divergence and the adjoint integrand are reflection-invariant while
// the field and the parameter derivatives pick up a sign.
struct SmoothRhs {
    const FilippovModel* mod;
    Side side;
    double dsign;          // +1 forward, -1 backward (dt/du)
    const double* alpha;
    bool variational;
    bool second_order;

    int dim() const {
        int m = mod->m;
        return 3 + m + (variational ? 4 + 2 * m : 0) + (second_order ? 1 : 0);
    }

    void operator()(const double* s, double* ds) const {
        const int m = mod->m;
        double vars[2 + 32];
        const double sgn = side == Side::Upper ? 1.0 : -1.0;
        vars[0] = sgn * s[0];
        vars[1] = sgn * s[1];
        for (int i = 0; i < m; ++i) vars[2 + i] = alpha ? alpha[i] : 0.0;

        const double fval = sgn * mod->f.eval(vars);
        const double gval = sgn * mod->g.eval(vars);
        const double dv = mod->div.eval(vars);
        ds[0] = dsign * fval;
        ds[1] = dsign * gval;
        ds[2] = dsign * dv;
        const double damp = dsign * std::exp(-s[2]);
        for (int i = 0; i < m; ++i) ds[3 + i] = damp * mod->B[i].eval(vars);

        if (variational) {
            const double a11 = mod->fx.eval(vars);
            const double a12 = mod->fy.eval(vars);
            const double a21 = mod->gx.eval(vars);
            const double a22 = mod->gy.eval(vars);
            const int base = 3 + m;
            for (int c = 0; c < 2; ++c) {
                double p1 = s[base + 2 * c], p2 = s[base + 2 * c + 1];
                ds[base + 2 * c] = dsign * (a11 * p1 + a12 * p2);
                ds[base + 2 * c + 1] = dsign * (a21 * p1 + a22 * p2);
            }
            for (int i = 0; i < m; ++i) {
                double b1 = sgn * mod->f_al[i].eval(vars);
                double b2 = sgn * mod->g_al[i].eval(vars);
                double s1 = s[base + 4 + 2 * i], s2 = s[base + 4 + 2 * i + 1];
                ds[base + 4 + 2 * i] = dsign * (a11 * s1 + a12 * s2 + b1);
                ds[base + 4 + 2 * i + 1] = dsign * (a21 * s1 + a22 * s2 + b2);
            }
            if (second_order) {
                double dx = sgn * mod->divx.eval(vars);
                double dy = sgn * mod->divy.eval(vars);
                ds[base + 4 + 2 * m] =
                    dsign * (dx * s[base] + dy * s[base + 1]);
            }
        }
    }
};

constexpr int kMaxDim = 80;

// Dormand-Prince 5(4) tableau.
constexpr double dp_c2 = 1.0 / 5, dp_c3 = 3.0 / 10, dp_c4 = 4.0 / 5,
                 dp_c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

struct DenseStep {
    int n = 0;
    double h = 0;
    double r1[kMaxDim], r2[kMaxDim], r3[kMaxDim], r4[kMaxDim], r5[kMaxDim];

    void eval(double theta, double* out) const {
        const double th1 = 1.0 - theta;
        for (int i = 0; i < n; ++i)
            out[i] = r1[i] +
                     theta * (r2[i] + th1 * (r3[i] + theta * (r4[i] + th1 * r5[i])));
    }
};

}  // namespace detail

// Series step used to leave a point where the normal component of the
// field (nearly) vanishes: the orbit is advanced by third-order Taylor
// expansion in time, including the augmented quantities to second order.
inline void liftoff_series(const FilippovModel& mod, Side side, Direction dir,
                           const double* alpha, double h0, std::vector<double>& s,
                           bool variational, bool second_order) {
    const int m = mod.m;
    const double sgn = side == Side::Upper ? 1.0 : -1.0;
    double vars[2 + 32];
    vars[0] = sgn * s[0];
    vars[1] = sgn * s[1];
    for (int i = 0; i < m; ++i) vars[2 + i] = alpha ? alpha[i] : 0.0;

    const double F1 = sgn * mod.f.eval(vars);
    const double F2 = sgn * mod.g.eval(vars);
    const double L2 = sgn * mod.lie2.eval(vars);
    const double L3 = sgn * mod.lie3.eval(vars);
    const double a11 = mod.fx.eval(vars), a12 = mod.fy.eval(vars);
    const double a21v = mod.gx.eval(vars), a22 = mod.gy.eval(vars);
    const double dv = mod.div.eval(vars);
    const double Dx = sgn * mod.divx.eval(vars);
    const double Dy = sgn * mod.divy.eval(vars);

    const double t = dir == Direction::Forward ? h0 : -h0;
    const double xacc = a11 * F1 + a12 * F2;
    s[0] += F1 * t + 0.5 * xacc * t * t;
    // y'' = d/dt g = L2 on y=0 up to O(y); y''' = L3 likewise.
    s[1] += F2 * t + 0.5 * L2 * t * t + (1.0 / 6.0) * L3 * t * t * t;
    const double dvdot = Dx * F1 + Dy * F2;
    s[2] += dv * t + 0.5 * dvdot * t * t;
    for (int i = 0; i < m; ++i) {
        const double Bi = mod.B[i].eval(vars);
        const double Bdot = sgn * (mod.Bx[i].eval(vars) * F1 + mod.By[i].eval(vars) * F2);
        s[3 + i] += Bi * t + 0.5 * (Bdot - Bi * dv) * t * t;
    }
    if (variational) {
        const int base = 3 + m;
        // Phi(t) ~ exp(A t) applied to the current columns (first order).
        for (int c = 0; c < 2; ++c) {
            double p1 = s[base + 2 * c], p2 = s[base + 2 * c + 1];
            s[base + 2 * c] += t * (a11 * p1 + a12 * p2);
            s[base + 2 * c + 1] += t * (a21v * p1 + a22 * p2);
        }
        for (int i = 0; i < m; ++i) {
            double bx = sgn * mod.f_al[i].eval(vars);
            double by = sgn * mod.g_al[i].eval(vars);
            double s1 = s[base + 4 + 2 * i], s2 = s[base + 4 + 2 * i + 1];
            s[base + 4 + 2 * i] += t * (a11 * s1 + a12 * s2 + bx);
            s[base + 4 + 2 * i + 1] += t * (a21v * s1 + a22 * s2 + by);
        }
        if (second_order)
            s[base + 4 + 2 * m] += t * (Dx * s[base] + Dy * s[base + 1]);
    }
}

// Integrates one smooth arc of the chosen side, forward or backward in
// time, stopping at the requested section/boundary event or at t_max.
inline Arc integrate_arc(const FilippovModel& mod, Side side, Vec2 start,
                         const double* alpha, Direction dir,
                         const StopCondition& stop,
                         const IntegratorOptions& opts = {}) {
    using namespace detail;
    const int m = mod.m;
    SmoothRhs rhs{&mod, side, dir == Direction::Forward ? 1.0 : -1.0, alpha,
                  opts.variational, opts.variational && opts.second_order};
    const int n = rhs.dim();
    if (n > kMaxDim) throw NumericalError("augmented state dimension too large");

    Arc arc;
    arc.side = side;
    arc.dir = dir;
    arc.m = m;
    arc.variational = opts.variational;
    arc.second_order = opts.variational && opts.second_order;

    std::vector<double> s(n, 0.0);
    s[0] = start.x;
    s[1] = start.y;
    if (opts.variational) {
        s[3 + m + 0] = 1.0;  // Phi = identity
        s[3 + m + 3] = 1.0;
    }
    arc.samples.push_back({0.0, s});

    // Leave a tangency by series when starting on the boundary with a
    // (nearly) vanishing normal component.
    const double sgn = side == Side::Upper ? 1.0 : -1.0;
    double g_at = sgn * mod.eval(mod.g, sgn * start.x, sgn * start.y, alpha);
    double u = 0.0;
    if (std::abs(start.y) < 1e-10 && std::abs(g_at) < 1e-6) {
        liftoff_series(mod, side, dir, alpha, opts.liftoff_h, s,
                       opts.variational, arc.second_order);
        u = opts.liftoff_h;
        arc.samples.push_back({u, s});
    }

    auto event_value = [&](const double* st) {
        return stop.kind == StopKind::Section ? st[1] - stop.section_c : st[1];
    };

    bool armed = std::abs(event_value(s.data())) > 10.0 * opts.event_tol;
    int last_sign = armed ? (event_value(s.data()) > 0 ? 1 : -1) : 0;

    double k[7][kMaxDim];
    double snew[kMaxDim], serr[kMaxDim], stmp[kMaxDim];
    rhs(s.data(), k[0]);

    double h = std::min(opts.h_init, opts.hmax);
    const double u_max = stop.t_max;
    long steps = 0;
    DenseStep dense;
    dense.n = n;

    auto finish = [&](ArcEnd end, double u_end, const double* st) {
        arc.end = end;
        arc.u_end = u_end;
        arc.state_end.assign(st, st + n);
        if (arc.samples.empty() || arc.samples.back().u < u_end)
            arc.samples.push_back({u_end, arc.state_end});
        return arc;
    };

    while (u < u_max) {
        if (++steps > opts.max_steps)
            throw NumericalError("integrate_arc: step limit exceeded");
        h = std::min({h, opts.hmax, u_max - u});
        if (h < 1e-14) {
            // Remaining interval is at round-off level; declare time end.
            return finish(ArcEnd::TimeOut, u_max, s.data());
        }

        // Stage evaluations.
        for (int i = 0; i < n; ++i) stmp[i] = s[i] + h * a21 * k[0][i];
        rhs(stmp, k[1]);
        for (int i = 0; i < n; ++i)
            stmp[i] = s[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
        rhs(stmp, k[2]);
        for (int i = 0; i < n; ++i)
            stmp[i] = s[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
        rhs(stmp, k[3]);
        for (int i = 0; i < n; ++i)
            stmp[i] = s[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] +
                                  a54 * k[3][i]);
        rhs(stmp, k[4]);
        for (int i = 0; i < n; ++i)
            stmp[i] = s[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] +
                                  a64 * k[3][i] + a65 * k[4][i]);
        rhs(stmp, k[5]);
        for (int i = 0; i < n; ++i)
            snew[i] = s[i] + h * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] +
                                  b5 * k[4][i] + b6 * k[5][i]);
        rhs(snew, k[6]);

        // Error estimate.
        double err = 0.0;
        bool finite = true;
        for (int i = 0; i < n; ++i) {
            serr[i] = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] +
                           e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
            double sc = opts.atol +
                        opts.rtol * std::max(std::abs(s[i]), std::abs(snew[i]));
            double q = serr[i] / sc;
            err += q * q;
            if (!std::isfinite(snew[i])) finite = false;
        }
        err = std::sqrt(err / n);
        if (!finite) {
            h *= 0.25;
            if (h < 1e-14)
                throw NumericalError("integrate_arc: non-finite state");
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        // Accepted: build the dense-output polynomial for this step.
        dense.h = h;
        for (int i = 0; i < n; ++i) {
            double dy = snew[i] - s[i];
            dense.r1[i] = s[i];
            dense.r2[i] = dy;
            dense.r3[i] = h * k[0][i] - dy;
            dense.r4[i] = dy - h * k[6][i] - dense.r3[i];
            dense.r5[i] = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] +
                               d5 * k[4][i] + d6 * k[5][i] + d7 * k[6][i]);
        }
        auto dense_state = [&](double th, double* out) { dense.eval(th, out); };
        auto dense_E = [&](double th) {
            double tmpv[kMaxDim];
            dense.eval(th, tmpv);
            return event_value(tmpv);
        };

        // Event detection on the accepted step.
        if (stop.kind != StopKind::Time) {
            const int K = 8;
            double prev_th = 0.0, prev_E = dense_E(0.0);
            double min_y = std::abs(prev_E);
            for (int j = 1; j <= K; ++j) {
                double th = double(j) / K;
                double E = dense_E(th);
                min_y = std::min(min_y, std::abs(E));
                int sgn_now = std::abs(E) <= opts.event_tol ? 0 : (E > 0 ? 1 : -1);
                if (!armed) {
                    if (sgn_now != 0) {
                        armed = true;
                        last_sign = sgn_now;
                    }
                } else if (sgn_now != 0 && sgn_now != last_sign &&
                           u + th * h > opts.t_min) {
                    // Transversal crossing: localize on the interpolant.
                    // The previous sample may itself lie within event_tol of
                    // the zero (its sign was recorded as 0); it is then the
                    // event point and the bracket would not straddle.
                    double th_star;
                    if ((prev_E > 0) == (E > 0) || prev_E == 0.0)
                        th_star = prev_th;
                    else
                        th_star = brent([&](double t) { return dense_E(t); },
                                        prev_th, th, 1e-15)
                                      .x;
                    double sev[kMaxDim];
                    dense_state(th_star, sev);
                    bool ok = true;
                    if (stop.kind == StopKind::Section) {
                        // Require a descending-branch hit of the upper field.
                        ok = mod.eval(mod.g, sev[0], sev[1], alpha) < 0.0;
                    } else {
                        ok = sev[0] >= stop.window_lo && sev[0] <= stop.window_hi;
                    }
                    if (ok) {
                        sev[1] = stop.kind == StopKind::Section ? stop.section_c
                                                                : 0.0;
                        return finish(stop.kind == StopKind::Section
                                          ? ArcEnd::SectionHit
                                          : ArcEnd::BoundaryHit,
                                      u + th_star * h, sev);
                    }
                    last_sign = sgn_now;
                } else if (sgn_now != 0) {
                    last_sign = sgn_now;
                }
                prev_th = th;
                prev_E = E;
            }

            // Grazing detection: a boundary stop also fires on tangential
            // contact, where |E| dips to round-off without a sign change.
            if (stop.kind == StopKind::Boundary && armed && min_y < 1e-3) {
                double sign_ref = last_sign >= 0 ? 1.0 : -1.0;
                double th_star = golden_minimize(
                    [&](double t) { return sign_ref * dense_E(t); }, 0.0, 1.0,
                    1e-12);
                double Emin = sign_ref * dense_E(th_star);
                if (th_star > 1e-6 && th_star < 1.0 - 1e-6 &&
                    Emin < sign_ref * dense_E(0.0) && Emin < sign_ref * dense_E(1.0) &&
                    u + th_star * h > opts.t_min) {
                    if (Emin <= opts.graze_tol) {
                        double sev[kMaxDim];
                        dense_state(th_star, sev);
                        if (sev[0] >= stop.window_lo && sev[0] <= stop.window_hi) {
                            sev[1] = 0.0;
                            return finish(ArcEnd::BoundaryHit, u + th_star * h,
                                          sev);
                        }
                    }
                }
            }
        }

        // Record dense samples and advance.
        for (int j = 1; j <= opts.samples_per_step; ++j) {
            double th = double(j) / opts.samples_per_step;
            ArcSample smp;
            smp.u = u + th * h;
            smp.state.resize(n);
            dense.eval(th, smp.state.data());
            arc.samples.push_back(std::move(smp));
        }
        u += h;
        for (int i = 0; i < n; ++i) s[i] = snew[i];
        for (int i = 0; i < n; ++i) k[0][i] = k[6][i];  // FSAL
        double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
    }
    return finish(ArcEnd::TimeOut, u_max, s.data());
}

// --- sliding arcs -------------------------------------------------------

struct SlidingArc {
    ArcEnd end = ArcEnd::TimeOut;
    double u_end = 0;
    double x_end = 0;
    int exit_index = 0;  // 0: lower stop, 1: upper stop (when end==SlidingExit)
    std::vector<std::array<double, 2>> samples;  // (u, x)
};

// Integrates the scalar sliding dynamics until x reaches one of the two
// stop abscissas or until t_max.  Direction is forward physical time.
inline SlidingArc integrate_sliding_arc(const FilippovModel& mod, double x0,
                                        const double* alpha, double x_stop_lo,
                                        double x_stop_hi, double t_max,
                                        const IntegratorOptions& opts = {}) {
    SlidingArc arc;
    double u = 0.0, x = x0;
    arc.samples.push_back({u, x});
    auto vel = [&](double xx) { return sliding_velocity(mod, xx, alpha); };
    double h = std::min(opts.h_init, opts.hmax);
    long steps = 0;
    while (u < t_max) {
        if (++steps > opts.max_steps)
            throw NumericalError("sliding arc: step limit exceeded");
        h = std::min({h, opts.hmax, t_max - u});
        if (h < 1e-14) break;
        // Classical RK4 with step doubling for the scalar equation.
        auto rk4 = [&](double xx, double hh) {
            double k1 = vel(xx);
            double k2 = vel(xx + 0.5 * hh * k1);
            double k3 = vel(xx + 0.5 * hh * k2);
            double k4 = vel(xx + hh * k3);
            return xx + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        };
        double xfull, xhalf;
        try {
            xfull = rk4(x, h);
            xhalf = rk4(rk4(x, 0.5 * h), 0.5 * h);
        } catch (const NumericalError&) {
            // Stepped over a tangency endpoint; shrink toward it.
            h *= 0.25;
            if (h < 1e-14) break;
            continue;
        }
        double err = std::abs(xfull - xhalf);
        double sc = opts.atol + opts.rtol * std::abs(x);
        if (err > sc && h > 1e-12) {
            h *= std::max(0.2, 0.9 * std::pow(sc / (err + 1e-300), 0.25));
            continue;
        }
        double xn = xhalf;
        // Stop-abscissa crossing inside the step (linear localization, then
        // refinement against the stop value itself).
        for (int which = 0; which < 2; ++which) {
            double xs = which == 0 ? x_stop_lo : x_stop_hi;
            if ((x - xs) == 0.0 || ((x - xs) > 0) != ((xn - xs) > 0)) {
                double frac = std::abs(xn - x) > 0 ? (xs - x) / (xn - x) : 0.0;
                arc.end = ArcEnd::SlidingExit;
                arc.exit_index = which;
                arc.u_end = u + frac * h;
                arc.x_end = xs;
                arc.samples.push_back({arc.u_end, xs});
                return arc;
            }
        }
        u += h;
        x = xn;
        arc.samples.push_back({u, x});
        if (err > 0) h *= std::clamp(0.9 * std::pow(sc / err, 0.25), 0.2, 5.0);
        else h *= 5.0;
        // Near a pseudo-equilibrium the velocity collapses; once motion is
        // below resolution, report a time end early.
        if (std::abs(vel(x)) * (t_max - u) < 1e-14) {
            arc.u_end = u;
            arc.x_end = x;
            arc.end = ArcEnd::TimeOut;
            return arc;
        }
    }
    arc.u_end = u;
    arc.x_end = x;
    arc.end = ArcEnd::TimeOut;
    return arc;
}

// --- concatenated piecewise flow ---------------------------------------

enum class Regime { Upper, Lower, Sliding };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::Upper: return "upper";
        case Regime::Lower: return "lower";
        case Regime::Sliding: return "sliding";
    }
    return "?";
}

struct FlowEvent {
    std::string type;
    double t = 0, x = 0, y = 0;
};

struct TrajectoryPiece {
    Regime regime = Regime::Upper;
    std::vector<std::array<double, 3>> points;  // (t, x, y)
};

struct Trajectory {
    std::vector<TrajectoryPiece> pieces;
    std::vector<FlowEvent> events;
    double t_end = 0;
    std::string status = "ok";  // ok | timeout | ambiguous | degenerate
};

namespace detail {

// Decides which regime a forward orbit enters from a boundary point.
inline bool regime_from_boundary(const FilippovModel& mod, double x,
                                 const double* alpha, Regime& out,
                                 std::string& status) {
    LieData d = lie_data(mod, x, alpha);
    switch (classify_point(mod, x, alpha)) {
        case PointClass::CrossingUp: out = Regime::Upper; return true;
        case PointClass::CrossingDown: out = Regime::Lower; return true;
        case PointClass::SlidingStable: out = Regime::Sliding; return true;
        case PointClass::SlidingUnstable:
            status = "ambiguous";
            return false;
        case PointClass::FoldVisibleUpper: out = Regime::Upper; return true;
        case PointClass::FoldVisibleLower: out = Regime::Lower; return true;
        case PointClass::FoldInvisibleUpper:
            out = d.Zm > 0 ? Regime::Sliding : Regime::Lower;
            return true;
        case PointClass::FoldInvisibleLower:
            out = d.Zp < 0 ? Regime::Sliding : Regime::Upper;
            return true;
        case PointClass::CuspUpper:
            if (d.Z3p > 0) out = Regime::Upper;
            else out = d.Zm > 0 ? Regime::Sliding : Regime::Lower;
            return true;
        case PointClass::CuspLower:
            if (d.Z3m < 0) out = Regime::Lower;
            else out = d.Zp < 0 ? Regime::Sliding : Regime::Upper;
            return true;
        case PointClass::FoldFoldPoint:
            if (d.Z2p > 0) { out = Regime::Upper; return true; }
            if (d.Z2m < 0) { out = Regime::Lower; return true; }
            status = "degenerate";
            return false;
        default:
            status = "degenerate";
            return false;
    }
}

}  // namespace detail

// Forward flow of the full piecewise system from an arbitrary initial
// point, concatenating smooth arcs and sliding arcs until t_max.
inline Trajectory flow_filippov(const FilippovModel& mod, double x0, double y0,
                                const double* alpha, double t_max,
                                const IntegratorOptions& opts = {}) {
    Trajectory traj;
    double t = 0.0, x = x0, y = y0;
    Regime regime;
    std::string status;
    if (y0 > 1e-12) regime = Regime::Upper;
    else if (y0 < -1e-12) regime = Regime::Lower;
    else if (!detail::regime_from_boundary(mod, x0, alpha, regime, status)) {
        traj.status = status;
        return traj;
    }

    int guard = 0;
    while (t < t_max && ++guard < 10000) {
        if (regime == Regime::Sliding) {
            // Locate the tangency endpoints bracketing x.
            auto tangency = [&](double xx) {
                double gp = mod.eval(mod.g, xx, 0.0, alpha);
                double gm = mod.eval(mod.g, -xx, 0.0, alpha);
                return std::abs(gp) < std::abs(gm) ? gp : gm;
            };
            double span = 2.0 * mod.a;
            auto gproots = scan_roots(
                [&](double xx) { return mod.eval(mod.g, xx, 0.0, alpha); },
                x - span, x + span, 800);
            auto gmroots = scan_roots(
                [&](double xx) { return mod.eval(mod.g, -xx, 0.0, alpha); },
                x - span, x + span, 800);
            (void)tangency;
            double lo = x - span, hi = x + span;
            for (double r : gproots) {
                if (r < x && r > lo) lo = r;
                if (r > x && r < hi) hi = r;
            }
            for (double r : gmroots) {
                if (r < x && r > lo) lo = r;
                if (r > x && r < hi) hi = r;
            }
            SlidingArc sa =
                integrate_sliding_arc(mod, x, alpha, lo, hi, t_max - t, opts);
            TrajectoryPiece piece;
            piece.regime = Regime::Sliding;
            for (auto& p : sa.samples) piece.points.push_back({t + p[0], p[1], 0.0});
            traj.pieces.push_back(std::move(piece));
            t += sa.u_end;
            x = sa.x_end;
            y = 0.0;
            if (sa.end == ArcEnd::TimeOut) {
                traj.status = t < t_max - 1e-9 ? "timeout" : "ok";
                break;
            }
            traj.events.push_back({"sliding_exit", t, x, 0.0});
            if (!detail::regime_from_boundary(mod, x, alpha, regime, status)) {
                traj.status = status;
                break;
            }
            if (regime == Regime::Sliding) {
                traj.status = "degenerate";  // exited into another sliding set
                break;
            }
            continue;
        }

        Side side = regime == Regime::Upper ? Side::Upper : Side::Lower;
        Arc arc = integrate_arc(mod, side, {x, y}, alpha, Direction::Forward,
                                StopCondition::boundary(t_max - t), opts);
        TrajectoryPiece piece;
        piece.regime = regime;
        for (auto& smp : arc.samples)
            piece.points.push_back({t + smp.u, smp.state[0], smp.state[1]});
        traj.pieces.push_back(std::move(piece));
        t += arc.u_end;
        x = arc.x_end();
        y = arc.y_end();
        if (arc.end == ArcEnd::TimeOut) break;
        y = 0.0;
        Regime next;
        if (!detail::regime_from_boundary(mod, x, alpha, next, status)) {
            traj.status = status;
            break;
        }
        traj.events.push_back(
            {next == Regime::Sliding ? "sliding_entry" : "boundary_crossing", t,
             x, 0.0});
        if (next == regime) {
            // Tangential graze: continue in the same regime past the contact.
            traj.events.back().type = "graze";
        }
        regime = next;
    }
    traj.t_end = t;
    return traj;
}

// CSV emission: one `t,x,y,regime` row per sample plus comment rows for
// events, in time order.
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << "t,x,y,regime\n";
    std::size_t ev = 0;
    char buf[160];
    for (const auto& piece : traj.pieces) {
        for (const auto& p : piece.points) {
            while (ev < traj.events.size() && traj.events[ev].t <= p[0]) {
                const auto& e = traj.events[ev++];
                std::snprintf(buf, sizeof(buf), "# event,%s,%.12g,%.12g,%.12g\n",
                              e.type.c_str(), e.t, e.x, e.y);
                out << buf;
            }
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%s\n", p[0], p[1],
                          p[2], to_string(piece.regime).c_str());
            out << buf;
        }
    }
    while (ev < traj.events.size()) {
        const auto& e = traj.events[ev++];
        std::snprintf(buf, sizeof(buf), "# event,%s,%.12g,%.12g,%.12g\n",
                      e.type.c_str(), e.t, e.x, e.y);
        out << buf;
    }
}

}  // namespace csb
