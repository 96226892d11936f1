#pragma once
// Detection and classification of the invariant objects near the
// unperturbed loop: symmetric crossing cycles (zeros of the return
// mismatch maps), sliding cycles (by shooting from visible tangencies),
// critical cycles and connections (by exact tangency-hit conditions).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "csb/boundary.hpp"
#include "csb/coeffs.hpp"
#include "csb/maps.hpp"

namespace csb {

enum class CycleKind { Crossing, CriticalCrossing, Sliding };
enum class Stability { Stable, Unstable, Nonhyperbolic };

inline std::string to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::Nonhyperbolic: return "nonhyperbolic";
    }
    return "?";
}

struct CycleRecord {
    CycleKind kind = CycleKind::Crossing;
    Stability stability = Stability::Stable;
    double x_cross = 0;   // crossing abscissa near -a (crossing cycles)
    double rprime = 0;    // derivative of the full return map (crossing cycles)
    double x_exit = 0;    // visible-fold departure (sliding cycles)
    double x_land = 0;    // landing abscissa near +a (sliding cycles)
    std::string detail;
};

// Derivative of the full symmetric return map R(x) = -sigma(-sigma(x)) at
// x, by centered differences of the composed continuation half-maps.
inline double return_map_derivative(const FilippovModel& mod, double x,
                                    const double* alpha,
                                    const IntegratorOptions& opts = {}) {
    auto R = [&](double xx) {
        double s1 = sigma_full(mod, xx, alpha, opts).value;
        return -sigma_full(mod, -s1, alpha, opts).value;
    };
    const double h = 1e-6 * mod.a;
    return (R(x + h) - R(x - h)) / (2.0 * h);
}

struct RegionLabel {
    std::string label;               // compact region tag for sweeps
    int n_crossing = 0;
    std::vector<std::string> stabilities;
    std::string sliding = "none";    // none | stable | unstable
    std::string critical = "none";
    std::vector<std::string> connections;
    int pseudo_eq = 0;
    bool resolved = true;
};

namespace detail {

inline Stability stability_from_rprime(double rp) {
    if (std::abs(std::abs(rp) - 1.0) < 1e-5) return Stability::Nonhyperbolic;
    return std::abs(rp) < 1.0 ? Stability::Stable : Stability::Unstable;
}

}  // namespace detail

// --- regular-tangency geometry (single fold near -a) --------------------

struct Codim1Analysis {
    double fold_x = 0;     // visible upper fold abscissa near -a
    double t1_zero = 0;    // zero of the return mismatch T1
    double rho1 = 0;       // measured offset between the two
    RegionLabel label;
    std::vector<CycleRecord> cycles;
};

inline Codim1Analysis analyze_codim1(const FilippovModel& mod,
                                     const double* alpha,
                                     const IntegratorOptions& opts = {},
                                     bool locate_stability = true) {
    const double a = mod.a;
    const double ctol = 1e-9 * a;
    Codim1Analysis out;
    auto roots = fold_roots(mod, -a, 0.12 * a, alpha);
    if (roots.size() != 1)
        throw NumericalError("analyze_codim1: fold structure not regular");
    out.fold_x = roots[0];
    auto T1 = [&](double x) { return map_T1(mod, x, alpha, opts); };
    out.t1_zero = brent(T1, -a - 0.1 * a, -a + 0.1 * a).x;
    out.rho1 = -(-out.fold_x) - out.t1_zero;  // offset of the two organizing points

    double d = out.t1_zero - out.fold_x;  // crossing requires g > 0, i.e. d > 0
    if (d > ctol) {
        CycleRecord c;
        c.kind = CycleKind::Crossing;
        c.x_cross = out.t1_zero;
        if (locate_stability) {
            c.rprime = return_map_derivative(mod, out.t1_zero, alpha, opts);
            c.stability = detail::stability_from_rprime(c.rprime);
        } else {
            c.stability = Stability::Stable;
        }
        out.cycles.push_back(c);
        out.label.label = "crossing";
    } else if (d >= -ctol) {
        CycleRecord c;
        c.kind = CycleKind::CriticalCrossing;
        c.x_cross = out.t1_zero;
        c.stability = Stability::Nonhyperbolic;
        c.detail = "grazes the visible fold";
        out.cycles.push_back(c);
        out.label.label = "critical";
        out.label.critical = "fold_graze";
    } else {
        // Fold lies right of the return zero: shoot from it and test the
        // symmetric sliding segment near +a.
        double land = sigma_full(mod, out.fold_x, alpha, opts).value;
        bool slides = classify_point(mod, land, alpha) == PointClass::SlidingStable &&
                      land > -out.fold_x + ctol;
        if (slides) {
            CycleRecord c;
            c.kind = CycleKind::Sliding;
            c.stability = Stability::Stable;
            c.x_exit = out.fold_x;
            c.x_land = land;
            out.cycles.push_back(c);
            out.label.label = "sliding";
            out.label.sliding = "stable";
        } else {
            out.label.label = "unresolved";
            out.label.resolved = false;
        }
    }
    out.label.n_crossing = 0;
    for (const auto& c : out.cycles)
        if (c.kind == CycleKind::Crossing) {
            ++out.label.n_crossing;
            out.label.stabilities.push_back(to_string(c.stability));
        }
    return out;
}

// --- degenerate-tangency geometry (cusp-like pair near -a) --------------

struct CuspAnalysis {
    bool fold_pair = false;
    double x_minus = 0, x_plus = 0;  // invisible / visible fold of the pair
    double xi1 = 0;
    double phi1 = 0, phi2 = 0;
    double t1_visible = 0;           // T1 at the visible fold
    double varsigma = 0;             // landing magnitude of the local fold map
    double t1_landing = 0;           // T1 at the far image point
    RegionLabel label;
    std::vector<CycleRecord> cycles;
};

inline CuspAnalysis analyze_cusp(const FilippovModel& mod, const SectionSpec& sec,
                                 const double* alpha,
                                 const IntegratorOptions& opts = {},
                                 bool locate_cycles = true) {
    const double a = mod.a;
    const double ctol = 1e-9 * a;
    CuspAnalysis out;
    MeasuredUnfolding mu = measured_unfolding(mod, sec, CaseTag::Cusp, alpha, opts);
    out.fold_pair = mu.fold_pair;
    out.xi1 = mu.xi1;
    out.phi1 = mu.b1;
    out.phi2 = mu.b2;

    auto add_crossing = [&](double window_lo, double window_hi) {
        auto T1 = [&](double x) { return map_T1(mod, x, alpha, opts); };
        CycleRecord c;
        c.kind = CycleKind::Crossing;
        if (locate_cycles) {
            c.x_cross = brent(T1, window_lo, window_hi).x;
            c.rprime = return_map_derivative(mod, c.x_cross, alpha, opts);
            c.stability = detail::stability_from_rprime(c.rprime);
        } else {
            c.stability = Stability::Stable;
        }
        out.cycles.push_back(c);
        out.label.n_crossing = 1;
        out.label.stabilities.push_back(to_string(c.stability));
    };

    if (!out.fold_pair) {
        // No tangency pair: the boundary near -a is pure crossing and a
        // single stable crossing cycle persists.
        out.label.label = "crossing";
        if (locate_cycles) add_crossing(-a - 0.1 * a, -a + 0.1 * a);
        else out.label.n_crossing = 1;
        return out;
    }

    out.x_minus = -std::sqrt(out.phi1) - out.xi1;
    out.x_plus = std::sqrt(out.phi1) - out.xi1;
    double z = std::sqrt(out.phi1);

    out.t1_visible = map_T1(mod, out.x_plus, alpha, opts);
    if (out.t1_visible < -ctol) {
        // Return zero lies right of the visible fold: small crossing cycle.
        out.label.label = "crossing";
        if (locate_cycles) add_crossing(out.x_plus + ctol, -a + 0.12 * a);
        else out.label.n_crossing = 1;
        return out;
    }
    if (out.t1_visible <= ctol) {
        out.label.label = "cs";
        out.label.critical = "fold_graze";
        CycleRecord c;
        c.kind = CycleKind::CriticalCrossing;
        c.x_cross = out.x_plus;
        c.stability = Stability::Nonhyperbolic;
        c.detail = "passes through the visible fold of the pair";
        out.cycles.push_back(c);
        return out;
    }

    // Shoot from the visible fold; the mirrored sliding segment near +a is
    // (-x_plus, -x_minus).
    double land = sigma_full(mod, out.x_plus, alpha, opts).value;
    double t1_tangent = out.t1_visible - 2.0 * z;  // sign of land - (-x_minus)
    if (t1_tangent < -ctol) {
        out.label.label = "sliding_above";
        out.label.sliding = "stable";
        CycleRecord c;
        c.kind = CycleKind::Sliding;
        c.stability = Stability::Stable;
        c.x_exit = out.x_plus;
        c.x_land = land;
        c.detail = "arrives from above";
        out.cycles.push_back(c);
        return out;
    }
    if (t1_tangent <= ctol) {
        out.label.label = "ss";
        out.label.sliding = "stable";
        out.label.critical = "tangent_arrival";
        CycleRecord c;
        c.kind = CycleKind::Sliding;
        c.stability = Stability::Stable;
        c.x_exit = out.x_plus;
        c.x_land = land;
        c.detail = "arrives through the mirrored invisible fold";
        out.cycles.push_back(c);
        return out;
    }

    // Landing beyond the mirrored invisible fold: decide between a sliding
    // cycle reached from below and an enclosing crossing cycle, via the
    // local fold map image of the visible fold.
    // For a vanishing half-gap the pairing arc degenerates (its length and
    // clearance go to zero with z); the landing is then taken at its exact
    // leading order: in the quadratic normal form the return integral
    // factors as (u-z)^2 (u+2z), placing it one half-gap left of the
    // invisible fold.
    if (z < 1e-4 * a)
        out.varsigma = -(out.x_minus - z);
    else
        out.varsigma =
            -fold_pair_transition(mod, out.x_plus, out.x_minus, alpha, opts).value;
    out.t1_landing = map_T1(mod, -out.varsigma, alpha, opts);
    if (out.t1_landing < -ctol) {
        out.label.label = "sliding_below";
        out.label.sliding = "stable";
        CycleRecord c;
        c.kind = CycleKind::Sliding;
        c.stability = Stability::Stable;
        c.x_exit = out.x_plus;
        c.x_land = land;
        c.detail = "arrives from below";
        out.cycles.push_back(c);
        return out;
    }
    if (out.t1_landing <= ctol) {
        out.label.label = "gs";
        out.label.critical = "backward_fold_graze";
        CycleRecord c;
        c.kind = CycleKind::CriticalCrossing;
        c.x_cross = -out.varsigma;
        c.stability = Stability::Nonhyperbolic;
        c.detail = "passes through the image of the visible fold";
        out.cycles.push_back(c);
        return out;
    }
    out.label.label = "crossing_enclosing";
    if (locate_cycles) add_crossing(-a - 0.12 * a, -out.varsigma - ctol);
    else out.label.n_crossing = 1;
    return out;
}

// --- double-tangency geometry (folds near both ends) --------------------

struct FoldFoldAnalysis {
    double theta1m = 0, theta1p = 0;  // fold offsets (folds at -theta1m, +theta1p)
    double varpi = 0;                 // pseudo-equilibrium offset
    double phi1 = 0;
    double t2_crit_x = 0, t2_crit = 0;
    double t2_at_lower_minus = 0;     // T2(-theta1m): critical-cycle function (phi1>0)
    double t2_at_lower_plus = 0;      // T2(-theta1p): critical-cycle function (phi1<0)
    double land_forward = 0;          // landing of the forward orbit from the
                                      // visible fold near -a (quiet NaN if none)
    double land_backward = 0;         // landing of the backward orbit from the
                                      // visible fold near +a (quiet NaN if none)
    RegionLabel label;
    std::vector<CycleRecord> cycles;
};

inline FoldFoldAnalysis analyze_foldfold(const FilippovModel& mod,
                                         const SectionSpec& sec,
                                         const double* alpha,
                                         const IntegratorOptions& opts = {},
                                         bool locate_stability = true) {
    const double a = mod.a;
    const double ctol = 1e-9 * a;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    FoldFoldAnalysis out;
    out.land_forward = nan;
    out.land_backward = nan;

    auto rm = fold_roots(mod, -a, 0.12 * a, alpha);
    auto rp = fold_roots(mod, a, 0.12 * a, alpha);
    if (rm.size() != 1 || rp.size() != 1)
        throw NumericalError("analyze_foldfold: fold structure not regular");
    out.theta1m = -rm[0];
    out.theta1p = rp[0];
    out.phi1 = out.theta1p - out.theta1m;

    // Pseudo-equilibrium between the mirrored folds near +a.
    {
        double lo = std::min(out.theta1m, out.theta1p);
        double hi = std::max(out.theta1m, out.theta1p);
        auto fs = [&](double x) { return sliding_numerator(mod, x, alpha); };
        double pad = 1e-12;
        if (hi - lo > 4 * pad && (fs(lo + pad) > 0) != (fs(hi - pad) > 0)) {
            out.varpi = brent(fs, lo + pad, hi - pad).x;
            out.label.pseudo_eq = 2;  // the pair at +-varpi
        } else {
            out.varpi = 0.5 * (lo + hi);
            out.label.pseudo_eq = std::abs(out.phi1) > 4 * pad ? 2 : 0;
        }
    }

    auto T2 = [&](double x) { return map_T2(mod, sec, x, alpha, opts); };
    const double xmax = std::max(-out.theta1m, -out.theta1p);

    // Critical point and admissible zeros of the concave mismatch T2.
    const double w = 0.05 * a;
    const double hx = 1e-5 * a;
    auto dT2 = [&](double x) { return (T2(x + hx) - T2(x - hx)) / (2 * hx); };
    out.t2_crit_x = brent(dT2, -a - w, -a + w, 1e-10).x;
    out.t2_crit = T2(out.t2_crit_x);
    out.t2_at_lower_minus = T2(-out.theta1m);
    out.t2_at_lower_plus = T2(-out.theta1p);

    // Derivative of the full symmetric return map at a mismatch zero,
    // assembled from the analytic section-arc derivatives: the orbit of a
    // cycle here skims a tangency, so differencing the direct continuation
    // map is ill-conditioned while the two section arcs stay transversal.
    auto rprime_at_zero = [&](double zx) {
        MapPoint up = sigma_half(mod, sec, HalfMap::Plus, zx, alpha, opts);
        MapPoint dn = sigma_half(mod, sec, HalfMap::Minus, -zx, alpha, opts);
        double sp = sigma_x_from_arc(mod, up.arc, zx, alpha);
        double sm = sigma_x_from_arc(mod, dn.arc, -zx, alpha);
        double r = sp / sm;
        return r * r;
    };

    std::vector<double> zeros;
    if (out.t2_crit > 0) {
        double lo = -a - 0.06 * a, hi = -a + 0.06 * a;
        if (T2(lo) < 0) zeros.push_back(brent(T2, lo, out.t2_crit_x).x);
        if (T2(hi) < 0) zeros.push_back(brent(T2, out.t2_crit_x, hi).x);
    }
    int n_adm = 0;
    bool critical_at_fold = false;
    for (double zx : zeros) {
        if (zx > xmax + ctol) {
            CycleRecord c;
            c.kind = CycleKind::Crossing;
            c.x_cross = zx;
            if (locate_stability) {
                c.rprime = rprime_at_zero(zx);
                c.stability = detail::stability_from_rprime(c.rprime);
            } else {
                // Concavity of T2: the right (inner) zero repels, the left
                // (outer) zero attracts.
                c.stability = (zx > out.t2_crit_x) ? Stability::Unstable
                                                   : Stability::Stable;
            }
            out.cycles.push_back(c);
            ++n_adm;
        } else if (zx >= xmax - ctol) {
            critical_at_fold = true;
        }
    }
    if (std::abs(out.t2_crit) <= 1e-10 && out.t2_crit_x > xmax + ctol) {
        // Double zero at the critical point: multiplicity-two cycle.
        CycleRecord c;
        c.kind = CycleKind::Crossing;
        c.x_cross = out.t2_crit_x;
        c.stability = Stability::Nonhyperbolic;
        c.detail = "multiplicity two";
        out.cycles = {c};
        n_adm = 1;
    }
    if (critical_at_fold) {
        CycleRecord c;
        c.kind = CycleKind::CriticalCrossing;
        c.x_cross = xmax;
        c.stability = Stability::Nonhyperbolic;
        c.detail = "passes through a tangency";
        out.cycles.push_back(c);
        out.label.critical = out.phi1 > 0 ? "fold_graze_plus" : "fold_graze_minus";
    }
    out.label.n_crossing = n_adm;
    for (const auto& c : out.cycles)
        if (c.kind == CycleKind::Crossing)
            out.label.stabilities.push_back(to_string(c.stability));

    // Connections and sliding cycles.  The orbit leaving a visible fold
    // skims the opposite tangency, so its landing is recovered on the
    // section: the landing abscissa solves sigma_minus(xi) = s_star with
    // s_star the fold orbit's section trace (sigma_minus is monotone near
    // the tangency), instead of integrating the grazing orbit itself.
    auto sigma_plus = [&](double x) {
        return sigma_half(mod, sec, HalfMap::Plus, x, alpha, opts).value;
    };
    auto sigma_minus = [&](double x) {
        return sigma_half(mod, sec, HalfMap::Minus, x, alpha, opts).value;
    };
    auto classify_landing = [&](double land, double seg_lo, double seg_mid,
                                double seg_hi, bool forward) {
        // seg_lo/seg_hi: sliding segment endpoints; seg_mid: pseudo-saddle.
        std::string side = forward ? "plus" : "minus";
        if (std::abs(land - seg_hi) <= ctol) {
            out.label.connections.push_back("tangent_tangent_" + side);
        } else if (land > seg_mid + ctol && land < seg_hi - ctol) {
            out.label.connections.push_back("tangent_tangent_sliding_outer_" + side);
        } else if (std::abs(land - seg_mid) <= ctol) {
            out.label.connections.push_back("tangent_equilibrium_" + side);
        } else if (land > seg_lo + ctol && land < seg_mid - ctol) {
            out.label.connections.push_back("tangent_tangent_sliding_inner_" + side);
            CycleRecord c;
            c.kind = CycleKind::Sliding;
            c.stability = forward ? Stability::Stable : Stability::Unstable;
            c.x_exit = forward ? -out.theta1m : out.theta1p;
            c.x_land = forward ? land : -land;
            out.cycles.push_back(c);
            out.label.sliding = forward ? "stable" : "unstable";
        } else if (std::abs(land - seg_lo) <= ctol) {
            out.label.connections.push_back("tangent_tangent_critical_" + side);
        }
    };
    // Invert a monotone section map for the landing abscissa; returns NaN
    // when the target trace lies outside the bracket (orbit does not land
    // on the examined boundary stretch).
    auto invert_map = [&](auto&& smap, double lo, double hi, double target) {
        double flo = smap(lo) - target, fhi = smap(hi) - target;
        if (flo == 0) return lo;
        if (fhi == 0) return hi;
        if ((flo > 0) == (fhi > 0))
            return std::numeric_limits<double>::quiet_NaN();
        return brent([&](double x) { return smap(x) - target; }, lo, hi).x;
    };

    const double reach = 0.05 * a;  // examined stretch beyond the fold pair
    if (out.phi1 > ctol) {
        // Forward orbit from the visible fold near -a; mirrored sliding
        // segment near +a is (theta1m, theta1p), split at varpi.
        double s_star = sigma_plus(-out.theta1m);
        out.land_forward =
            invert_map(sigma_minus, out.theta1m - reach, out.theta1p, s_star);
        if (std::isfinite(out.land_forward))
            classify_landing(out.land_forward, out.theta1m, out.varpi,
                             out.theta1p, true);
    } else if (out.phi1 < -ctol) {
        // Backward orbit from the visible fold near +a; landing compared on
        // the segment (-theta1m, -theta1p) near -a, split at -varpi.
        double s_star = sigma_minus(out.theta1p);
        out.land_backward = invert_map(sigma_plus, -out.theta1p + reach,
                                       -out.theta1m, s_star);
        if (std::isfinite(out.land_backward)) {
            // Reuse the mirrored classifier: map the landing near -a to its
            // mirror near +a; the segment order near +a is
            // (theta1p, varpi, theta1m) for phi1 < 0.
            classify_landing(-out.land_backward, out.theta1p, out.varpi,
                             out.theta1m, false);
        }
    } else {
        double s_star = sigma_plus(-out.theta1m);
        out.land_forward =
            invert_map(sigma_minus, out.theta1m - reach, out.theta1p, s_star);
        if (std::isfinite(out.land_forward) &&
            std::abs(out.land_forward - out.theta1p) <= ctol)
            out.label.connections.push_back("tangent_tangent_axis");
    }

    // Compact label.
    if (out.label.sliding != "none")
        out.label.label = "sliding_" + out.label.sliding;
    else if (!out.label.critical.empty() && out.label.critical != "none")
        out.label.label = "critical";
    else
        out.label.label = std::to_string(n_adm) + "_crossing";
    return out;
}

// --- unified entry points ----------------------------------------------

inline std::vector<CycleRecord> find_cycles(const FilippovModel& mod,
                                            const SectionSpec& sec, CaseTag tag,
                                            const double* alpha,
                                            const IntegratorOptions& opts = {}) {
    switch (tag) {
        case CaseTag::Codim1: return analyze_codim1(mod, alpha, opts).cycles;
        case CaseTag::Cusp: return analyze_cusp(mod, sec, alpha, opts).cycles;
        case CaseTag::FoldFold:
            return analyze_foldfold(mod, sec, alpha, opts).cycles;
    }
    return {};
}

inline RegionLabel classify_dynamics(const FilippovModel& mod,
                                     const SectionSpec& sec, CaseTag tag,
                                     const double* alpha,
                                     const IntegratorOptions& opts = {},
                                     bool locate_cycles = false) {
    RegionLabel lbl;
    switch (tag) {
        case CaseTag::Codim1:
            lbl = analyze_codim1(mod, alpha, opts, locate_cycles).label;
            break;
        case CaseTag::Cusp:
            lbl = analyze_cusp(mod, sec, alpha, opts, locate_cycles).label;
            break;
        case CaseTag::FoldFold:
            lbl = analyze_foldfold(mod, sec, alpha, opts, locate_cycles).label;
            break;
    }
    // Pseudo-equilibrium count from the boundary portrait when not already
    // known (codim1/cusp sliding regions).
    if (tag != CaseTag::FoldFold) {
        BoundaryPortrait bp =
            boundary_portrait(mod, -1.3 * mod.a, 1.3 * mod.a, alpha);
        lbl.pseudo_eq = static_cast<int>(bp.pseudo.size());
        if (!bp.resolved) lbl.resolved = false;
    }
    return lbl;
}

}  // namespace csb
