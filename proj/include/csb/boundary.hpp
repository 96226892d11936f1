#pragma once
// Pointwise and interval-wide analysis of the switching line y = 0:
// Lie derivatives of the switching function, crossing/sliding/tangency
// classification, the sliding vector field, and boundary portraits.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "csb/model.hpp"
#include "csb/rootfind.hpp"

namespace csb {

// Lie derivatives of h = y along the upper (p) and lower (m) fields,
// evaluated at (x, 0).  The lower values follow from the symmetry:
// (Z-)^k h (x, 0) = -(Z+)^k h (-x, 0).
struct LieData {
    double Zp = 0, Z2p = 0, Z3p = 0;   // upper: g, f g_x + g g_y, next Lie step
    double Zm = 0, Z2m = 0, Z3m = 0;   // lower, via reflection
};

inline LieData lie_data(const FilippovModel& mod, double x, const double* alpha) {
    LieData d;
    d.Zp = mod.eval(mod.g, x, 0.0, alpha);
    d.Z2p = mod.eval(mod.lie2, x, 0.0, alpha);
    d.Z3p = mod.eval(mod.lie3, x, 0.0, alpha);
    d.Zm = -mod.eval(mod.g, -x, 0.0, alpha);
    d.Z2m = -mod.eval(mod.lie2, -x, 0.0, alpha);
    d.Z3m = -mod.eval(mod.lie3, -x, 0.0, alpha);
    return d;
}

enum class PointClass {
    CrossingUp,        // both fields point into y > 0
    CrossingDown,      // both fields point into y < 0
    SlidingStable,     // both fields point toward the boundary
    SlidingUnstable,   // both fields point away from the boundary
    FoldVisibleUpper,
    FoldInvisibleUpper,
    FoldVisibleLower,
    FoldInvisibleLower,
    CuspUpper,
    CuspLower,
    FoldFoldPoint,     // simultaneous tangency of both fields
    BoundaryEquilibrium,
    Degenerate
};

inline std::string to_string(PointClass c) {
    switch (c) {
        case PointClass::CrossingUp: return "crossing_up";
        case PointClass::CrossingDown: return "crossing_down";
        case PointClass::SlidingStable: return "sliding_stable";
        case PointClass::SlidingUnstable: return "sliding_unstable";
        case PointClass::FoldVisibleUpper: return "fold_visible_upper";
        case PointClass::FoldInvisibleUpper: return "fold_invisible_upper";
        case PointClass::FoldVisibleLower: return "fold_visible_lower";
        case PointClass::FoldInvisibleLower: return "fold_invisible_lower";
        case PointClass::CuspUpper: return "cusp_upper";
        case PointClass::CuspLower: return "cusp_lower";
        case PointClass::FoldFoldPoint: return "fold_fold";
        case PointClass::BoundaryEquilibrium: return "boundary_equilibrium";
        case PointClass::Degenerate: return "degenerate";
    }
    return "?";
}

struct BoundaryTols {
    double tangency = 1e-11;      // |Z h| below this counts as tangency
    double fold = 1e-8;           // |Z^2 h| below this escalates to cusp test
    double cusp = 1e-8;           // |Z^3 h| below this is reported degenerate
    double equilibrium = 1e-11;   // field magnitude for boundary equilibria
};

inline bool is_field_zero(const FilippovModel& mod, Side side, double x,
                          const double* alpha, double tol) {
    Vec2 v = eval_field(mod, side, x, 0.0, alpha);
    return std::hypot(v.x, v.y) < tol;
}

inline PointClass classify_point(const FilippovModel& mod, double x,
                                 const double* alpha,
                                 const BoundaryTols& tols = {}) {
    LieData d = lie_data(mod, x, alpha);
    bool tp = std::abs(d.Zp) < tols.tangency;
    bool tm = std::abs(d.Zm) < tols.tangency;
    if (tp && is_field_zero(mod, Side::Upper, x, alpha, tols.equilibrium))
        return PointClass::BoundaryEquilibrium;
    if (tm && is_field_zero(mod, Side::Lower, x, alpha, tols.equilibrium))
        return PointClass::BoundaryEquilibrium;
    if (tp && tm) return PointClass::FoldFoldPoint;
    if (tp) {
        if (std::abs(d.Z2p) > tols.fold)
            return d.Z2p > 0 ? PointClass::FoldVisibleUpper
                             : PointClass::FoldInvisibleUpper;
        if (std::abs(d.Z3p) > tols.cusp) return PointClass::CuspUpper;
        return PointClass::Degenerate;
    }
    if (tm) {
        // The lower tangency is visible when the orbit stays in y < 0,
        // i.e. (Z-)^2 h < 0.
        if (std::abs(d.Z2m) > tols.fold)
            return d.Z2m < 0 ? PointClass::FoldVisibleLower
                             : PointClass::FoldInvisibleLower;
        if (std::abs(d.Z3m) > tols.cusp) return PointClass::CuspLower;
        return PointClass::Degenerate;
    }
    if (d.Zp * d.Zm > 0)
        return d.Zp > 0 ? PointClass::CrossingUp : PointClass::CrossingDown;
    return d.Zp < 0 ? PointClass::SlidingStable : PointClass::SlidingUnstable;
}

// Filippov sliding velocity on y = 0 (defined where the two normal
// components have opposite signs).  Denominators vanish exactly at the
// tangency endpoints of a sliding segment.
inline double sliding_velocity(const FilippovModel& mod, double x,
                               const double* alpha) {
    double gp = mod.eval(mod.g, x, 0.0, alpha);
    double gm = mod.eval(mod.g, -x, 0.0, alpha);
    double fp = mod.eval(mod.f, x, 0.0, alpha);
    double fm = mod.eval(mod.f, -x, 0.0, alpha);
    double denom = gp + gm;
    if (std::abs(denom) < 1e-13)
        throw NumericalError("sliding velocity undefined: tangency endpoint");
    double fs = gp * fm - gm * fp;  // antisymmetric combination
    return -fs / denom;
}

// d/dx of the antisymmetric numerator f^s (used to type pseudo-equilibria).
inline double sliding_numerator(const FilippovModel& mod, double x,
                                const double* alpha) {
    double gp = mod.eval(mod.g, x, 0.0, alpha);
    double gm = mod.eval(mod.g, -x, 0.0, alpha);
    double fp = mod.eval(mod.f, x, 0.0, alpha);
    double fm = mod.eval(mod.f, -x, 0.0, alpha);
    return gp * fm - gm * fp;
}

struct TangentPoint {
    double x = 0;
    PointClass cls = PointClass::Degenerate;
};

struct SegmentInfo {
    double lo = 0, hi = 0;
    PointClass cls = PointClass::CrossingUp;  // from the midpoint
};

struct PseudoEquilibrium {
    double x = 0;
    bool saddle = false;  // repelling along the sliding segment
    double fs_x = 0;      // slope of the antisymmetric numerator
};

struct BoundaryPortrait {
    double lo = 0, hi = 0;
    std::vector<TangentPoint> tangents;
    std::vector<SegmentInfo> segments;
    std::vector<PseudoEquilibrium> pseudo;
    bool resolved = true;   // false when tangencies collide within resolution
};

inline BoundaryPortrait boundary_portrait(const FilippovModel& mod, double lo,
                                          double hi, const double* alpha,
                                          const BoundaryTols& tols = {},
                                          int scan_n = 600) {
    BoundaryPortrait bp;
    bp.lo = lo;
    bp.hi = hi;

    // Tangencies of the upper field: zeros of g(x,0); of the lower field:
    // zeros of g(-x,0).
    auto gup = [&](double x) { return mod.eval(mod.g, x, 0.0, alpha); };
    auto glo = [&](double x) { return mod.eval(mod.g, -x, 0.0, alpha); };
    std::vector<double> xs;
    for (double r : scan_roots(gup, lo, hi, scan_n)) xs.push_back(r);
    for (double r : scan_roots(glo, lo, hi, scan_n)) xs.push_back(r);
    std::sort(xs.begin(), xs.end());

    const double merge_tol = 1e-9 * std::max(1.0, std::abs(hi - lo));
    std::vector<double> merged;
    for (double x : xs) {
        if (!merged.empty() && std::abs(x - merged.back()) < merge_tol) {
            // Coincident upper/lower tangency; keep one representative.
            merged.back() = 0.5 * (merged.back() + x);
        } else {
            merged.push_back(x);
        }
    }
    for (double x : merged) {
        PointClass c = classify_point(mod, x, alpha, tols);
        if (c == PointClass::Degenerate) bp.resolved = false;
        bp.tangents.push_back({x, c});
    }

    // Segments between consecutive tangencies, classified at midpoints.
    std::vector<double> cuts{lo};
    for (const auto& t : bp.tangents) cuts.push_back(t.x);
    cuts.push_back(hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] < merge_tol) continue;
        SegmentInfo seg;
        seg.lo = cuts[i];
        seg.hi = cuts[i + 1];
        seg.cls = classify_point(mod, 0.5 * (seg.lo + seg.hi), alpha, tols);
        bp.segments.push_back(seg);
    }

    // Pseudo-equilibria: zeros of f^s inside sliding segments.
    for (const auto& seg : bp.segments) {
        if (seg.cls != PointClass::SlidingStable &&
            seg.cls != PointClass::SlidingUnstable)
            continue;
        double pad = 10.0 * merge_tol;
        double slo = seg.lo + pad, shi = seg.hi - pad;
        if (shi <= slo) continue;
        auto fs = [&](double x) { return sliding_numerator(mod, x, alpha); };
        for (double r : scan_roots(fs, slo, shi, 200)) {
            PseudoEquilibrium pe;
            pe.x = r;
            double h = 1e-6 * std::max(1.0, std::abs(r));
            pe.fs_x = (fs(r + h) - fs(r - h)) / (2.0 * h);
            // With D = g(x)+g(-x) the sliding velocity is -f^s/D; the
            // equilibrium repels along the segment (pseudo-saddle) exactly
            // when f^s_x > 0, on stable and unstable segments alike.
            pe.saddle = pe.fs_x > 0.0;
            bp.pseudo.push_back(pe);
        }
    }
    return bp;
}

}  // namespace csb
