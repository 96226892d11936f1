#pragma once
// Half-return and full-return maps between the switching line and a
// transversal reference section, plus their first and second derivatives
// computed from the augmented path integrals of the flow.

#include <cmath>
#include <string>

#include "csb/flow.hpp"
#include "csb/model.hpp"

namespace csb {

// Transversal section y = c placed on the descending branch of the
// unperturbed loop, at half its height; the admissible window in x is
// |x - b| <= delta.
struct SectionSpec {
    double b = 0, c = 0, delta = 0;
};

inline SectionSpec reference_section(const FilippovModel& mod,
                                     const IntegratorOptions& opts = {}) {
    static const double zero2[32] = {0};
    IntegratorOptions o = opts;
    o.samples_per_step = 8;
    Arc arc = integrate_arc(mod, Side::Upper, {-mod.a, 0.0}, zero2,
                            Direction::Forward, StopCondition::boundary(), o);
    if (arc.end != ArcEnd::BoundaryHit)
        throw NumericalError("reference_section: unperturbed orbit does not return");
    double ymax = 0.0;
    for (const auto& s : arc.samples) ymax = std::max(ymax, s.state[1]);
    if (!(ymax > 0.0))
        throw NumericalError("reference_section: loop has no interior");
    double c = 0.5 * ymax;
    // Re-integrate with a section stop to land exactly on y = c with g < 0.
    Arc hit = integrate_arc(mod, Side::Upper, {-mod.a, 0.0}, zero2,
                            Direction::Forward, StopCondition::section(c), opts);
    if (hit.end != ArcEnd::SectionHit)
        throw NumericalError("reference_section: section placement failed");
    SectionSpec sec;
    sec.b = hit.x_end();
    sec.c = c;
    sec.delta = 0.2 * mod.a;
    if (mod.eval(mod.g, sec.b, sec.c, zero2) >= 0.0)
        throw NumericalError("reference_section: section not on descending branch");
    return sec;
}

enum class HalfMap { Plus, Minus };  // forward from near -a / backward from near +a

struct MapPoint {
    double value = 0;   // x-coordinate of the image point
    Arc arc;            // the underlying smooth arc (carries path integrals)
};

// Default admissible half-map window around the tangency abscissa.
inline void check_half_window(const FilippovModel& mod, HalfMap which, double x) {
    double center = which == HalfMap::Plus ? -mod.a : mod.a;
    if (std::abs(x - center) > 0.15 * mod.a)
        throw NumericalError("half map evaluated outside its window");
}

// sigma^+ (forward orbit of the upper field from (x,0) to the section) and
// sigma^- (backward orbit of the upper field from (x,0) to the section).
inline MapPoint sigma_half(const FilippovModel& mod, const SectionSpec& sec,
                           HalfMap which, double x, const double* alpha,
                           const IntegratorOptions& opts = {}) {
    check_half_window(mod, which, x);
    Direction dir =
        which == HalfMap::Plus ? Direction::Forward : Direction::Backward;
    Arc arc = integrate_arc(mod, Side::Upper, {x, 0.0}, alpha, dir,
                            StopCondition::section(sec.c), opts);
    if (arc.end != ArcEnd::SectionHit)
        throw NumericalError("sigma_half: orbit failed to reach the section");
    if (std::abs(arc.x_end() - sec.b) > sec.delta)
        throw NumericalError("sigma_half: section hit outside admissible window");
    return {arc.x_end(), std::move(arc)};
}

// Full continuation map sigma: forward orbit of the upper field from (x,0)
// near -a to its next descending boundary contact near +a.  An initial dip
// into y < 0 (when g(x,0) < 0) is part of the smooth continuation and is
// skipped via the landing window.
inline MapPoint sigma_full(const FilippovModel& mod, double x,
                           const double* alpha,
                           const IntegratorOptions& opts = {}) {
    check_half_window(mod, HalfMap::Plus, x);
    StopCondition stop = StopCondition::boundary_window(0.5 * mod.a, 1.5 * mod.a);
    Arc arc = integrate_arc(mod, Side::Upper, {x, 0.0}, alpha,
                            Direction::Forward, stop, opts);
    if (arc.end != ArcEnd::BoundaryHit)
        throw NumericalError("sigma_full: orbit failed to return to the boundary");
    return {arc.x_end(), std::move(arc)};
}

// T1(x) = sigma(x) + x: zeros are symmetric crossing cycles through (x,0).
inline double map_T1(const FilippovModel& mod, double x, const double* alpha,
                     const IntegratorOptions& opts = {}) {
    return sigma_full(mod, x, alpha, opts).value + x;
}

// T2(x) = sigma^+(x) - sigma^-(-x): zeros are symmetric crossing cycles in
// the double-tangency geometry, detected on the section.
inline double map_T2(const FilippovModel& mod, const SectionSpec& sec, double x,
                     const double* alpha, const IntegratorOptions& opts = {}) {
    double sp = sigma_half(mod, sec, HalfMap::Plus, x, alpha, opts).value;
    double sm = sigma_half(mod, sec, HalfMap::Minus, -x, alpha, opts).value;
    return sp - sm;
}

// Local fold map around an upper-field tangency: pairs boundary points
// joined by a small upper arc.  For g(x,0) < 0 the pairing arc runs
// backward in time, for g(x,0) > 0 forward; the map is an involution.
inline MapPoint backward_fold_map(const FilippovModel& mod, double x,
                                  const double* alpha,
                                  const IntegratorOptions& opts = {}) {
    double g0 = mod.eval(mod.g, x, 0.0, alpha);
    Direction dir = g0 <= 0.0 ? Direction::Backward : Direction::Forward;
    IntegratorOptions o = opts;
    o.hmax = std::min(o.hmax, 0.05);  // the pairing arc is short and shallow
    Arc arc = integrate_arc(mod, Side::Upper, {x, 0.0}, alpha, dir,
                            StopCondition::boundary(10.0), o);
    if (arc.end != ArcEnd::BoundaryHit)
        throw NumericalError("backward_fold_map: no boundary return");
    return {arc.x_end(), std::move(arc)};
}

// Transition map of the backward upper flow from the visible fold of a
// tangency pair to the boundary point left of the invisible fold (the
// start of the orbit that grazes the visible fold from above).  Direction
// and landing window are fixed explicitly: near the fold g changes sign
// and the generic pairing dispatch is unreliable there.
inline MapPoint fold_pair_transition(const FilippovModel& mod, double x_plus,
                                     double x_minus, const double* alpha,
                                     const IntegratorOptions& opts = {}) {
    double half = 0.5 * (x_plus - x_minus);
    if (!(half > 0))
        throw NumericalError("fold_pair_transition: fold pair not ordered");
    IntegratorOptions o = opts;
    o.hmax = std::min(o.hmax, 0.05);
    StopCondition stop =
        StopCondition::boundary_window(x_minus - 1.0 * mod.a,
                                       x_minus - 0.05 * half, 10.0);
    Arc arc = integrate_arc(mod, Side::Upper, {x_plus, 0.0}, alpha,
                            Direction::Backward, stop, o);
    if (arc.end != ArcEnd::BoundaryHit)
        throw NumericalError("fold_pair_transition: no boundary return");
    return {arc.x_end(), std::move(arc)};
}

// --- derivatives of the maps -------------------------------------------
//
// For an arc from (x,0) to (x1,y1) in time tau, with z0 = int div dt and
// w_i = int exp(-z0) B_i dt along the arc:
//   sigma_x    = g(x,0) / g(x1,y1) * exp(z0)
//   sigma_ai   = -w_i * exp(z0) / g(x1,y1)
// These hold verbatim for forward and backward arcs.

enum class DerivMethod { Analytic, FiniteDifference };

inline double sigma_x_from_arc(const FilippovModel& mod, const Arc& arc,
                               double x_start, const double* alpha) {
    double g0 = mod.eval(mod.g, x_start, 0.0, alpha);
    double g1 = mod.eval(mod.g, arc.x_end(), arc.y_end(), alpha);
    if (g1 == 0.0) throw NumericalError("sigma_x: tangential arrival");
    return g0 / g1 * std::exp(arc.z0_end());
}

inline double sigma_alpha_from_arc(const FilippovModel& mod, const Arc& arc,
                                   int i, const double* alpha) {
    double g1 = mod.eval(mod.g, arc.x_end(), arc.y_end(), alpha);
    if (g1 == 0.0) throw NumericalError("sigma_alpha: tangential arrival");
    return -arc.w_end(i) * std::exp(arc.z0_end()) / g1;
}

struct SigmaDerivatives {
    double value = 0;
    double dx = 0;
    std::vector<double> dalpha;
    double dxx = 0;
    std::vector<double> dxalpha;
};

namespace detail {

template <class MapFn>
double fd_central(MapFn&& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Fourth-order central difference: the return maps can carry very large
// higher derivatives (exponentially amplified through the loop), so the
// plain central stencil is not accurate enough at a step that still beats
// the integrator noise floor.
template <class MapFn>
double fd_central4(MapFn&& f, double x, double h) {
    return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) /
           (12.0 * h);
}

}  // namespace detail

// First and second derivatives of sigma^+/sigma^-/sigma at (x,0;alpha).
// First derivatives come from the augmented integrals; second derivatives
// default to finite differences of the analytic first derivative.  The
// fully analytic d2/dx2 route (variational column plus the divergence-
// gradient integral) is available via `analytic_second`.
inline SigmaDerivatives sigma_derivatives(
    const FilippovModel& mod, const SectionSpec& sec, const std::string& which,
    double x, const double* alpha, DerivMethod method = DerivMethod::Analytic,
    bool analytic_second = false, const IntegratorOptions& opts = {}) {
    auto eval_map = [&](double xx, const double* al, IntegratorOptions o) {
        if (which == "plus") return sigma_half(mod, sec, HalfMap::Plus, xx, al, o);
        if (which == "minus") return sigma_half(mod, sec, HalfMap::Minus, xx, al, o);
        if (which == "full") return sigma_full(mod, xx, al, o);
        throw NumericalError("sigma_derivatives: unknown map '" + which + "'");
    };

    SigmaDerivatives out;
    const int m = mod.m;
    out.dalpha.assign(m, 0.0);
    out.dxalpha.assign(m, 0.0);
    const double hx = 1e-5 * std::max(1.0, mod.a);

    MapPoint base = eval_map(x, alpha, opts);
    out.value = base.value;

    if (method == DerivMethod::FiniteDifference) {
        out.dx = detail::fd_central4(
            [&](double xx) { return eval_map(xx, alpha, opts).value; }, x, hx);
        for (int i = 0; i < m; ++i) {
            out.dalpha[i] = detail::fd_central4(
                [&](double ai) {
                    std::vector<double> av(alpha, alpha + m);
                    av[i] = ai;
                    return eval_map(x, av.data(), opts).value;
                },
                alpha[i], hx);
        }
    } else {
        out.dx = sigma_x_from_arc(mod, base.arc, x, alpha);
        for (int i = 0; i < m; ++i)
            out.dalpha[i] = sigma_alpha_from_arc(mod, base.arc, i, alpha);
    }

    // Second derivatives.
    const double h2 = 1e-4 * std::max(1.0, mod.a);
    auto sx_at = [&](double xx, const double* al) {
        MapPoint p = eval_map(xx, al, opts);
        return sigma_x_from_arc(mod, p.arc, xx, al);
    };
    if (analytic_second) {
        IntegratorOptions vo = opts;
        vo.variational = true;
        vo.second_order = true;
        MapPoint p = eval_map(x, alpha, vo);
        const Arc& arc = p.arc;
        double x1 = arc.x_end(), y1 = arc.y_end();
        double g0 = mod.eval(mod.g, x, 0.0, alpha);
        double g0x = mod.eval(mod.gx, x, 0.0, alpha);
        double g1 = mod.eval(mod.g, x1, y1, alpha);
        double g1x = mod.eval(mod.gx, x1, y1, alpha);
        double E = std::exp(arc.z0_end());
        double sx = g0 / g1 * E;
        // d/dx of the Liouville expression for sigma_x: endpoint terms plus
        // the derivative of the divergence integral along the arc, which is
        // carried as the extra augmented state (qdiv), with the variational
        // column supplying y_x at arrival.
        double dydx0 = arc.phi(1, 0);
        out.dxx = (g0x * g1 - g0 * g1x * sx) / (g1 * g1) * E +
                  sx * (-mod.eval(mod.div, x1, y1, alpha) / g1 * dydx0 +
                        arc.qdiv());
        out.dx = sx;
        for (int i = 0; i < m; ++i)
            out.dalpha[i] = sigma_alpha_from_arc(mod, arc, i, alpha);
    } else {
        out.dxx = detail::fd_central([&](double xx) { return sx_at(xx, alpha); },
                                     x, h2);
    }
    for (int i = 0; i < m; ++i) {
        std::vector<double> ap(alpha, alpha + m), am(alpha, alpha + m);
        ap[i] += h2;
        am[i] -= h2;
        out.dxalpha[i] =
            (sx_at(x, ap.data()) - sx_at(x, am.data())) / (2.0 * h2);
    }
    return out;
}

}  // namespace csb
