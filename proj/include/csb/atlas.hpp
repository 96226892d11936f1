#pragma once
// Two-parameter sweeps in measured unfolding coordinates, bifurcation-curve
// extraction by ray root-finding of the exact event functions, asymptotic
// fits of the curves, and deterministic JSON emission.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "csb/cycles.hpp"

namespace csb {

struct GridSpec {
    double b1_lo = 0, b1_hi = 0;
    int n1 = 0;
    double b2_lo = 0, b2_hi = 0;
    int n2 = 1;
};

struct Cell {
    int i = 0, j = 0;          // grid indices along b1 / b2
    double b1 = 0, b2 = 0;     // measured-coordinate targets
    double a1 = 0, a2 = 0;     // inverted parameter values
    bool inverted = false;     // Newton on the measured coordinates converged
    RegionLabel label;
};

struct CurvePoint {
    double b1 = 0, b2 = 0;     // measured coordinates on the curve
    double a1 = 0, a2 = 0;     // parameter values at the root
};

struct Provenance {
    std::string model_hash;
    double rtol = 0, atol = 0, event_tol = 0, graze_tol = 0;
    unsigned seed = 0;
    int schema_version = 1;
};

struct Diagram {
    CaseTag tag = CaseTag::Codim1;
    GridSpec grid;
    std::vector<Cell> cells;   // row-major: index = i * n2 + j
    std::map<std::string, std::vector<CurvePoint>> curves;
    Provenance prov;
};

struct CurveFit {
    std::string name;
    std::string form;          // "sqrt" (b2 = C sqrt(b1)) or "square" (C b1^2)
    double C = 0;
    double C_stderr = 0;
    double predicted = 0;
    double exponent = 0;       // log-log slope of |b2| vs b1
    double cutoff = 0;         // only points with b1 <= cutoff used
    int n_used = 0;
    double max_residual = 0;   // in units of the model form
    bool ok = false;
};

inline Provenance make_provenance(const FilippovModel& mod,
                                  const IntegratorOptions& opts = {}) {
    Provenance p;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(model_hash(mod)));
    p.model_hash = buf;
    p.rtol = opts.rtol;
    p.atol = opts.atol;
    p.event_tol = opts.event_tol;
    p.graze_tol = opts.graze_tol;
    return p;
}

// --- inversion of the measured unfolding coordinates --------------------

// Frozen first-order Jacobian of the measured coordinates with respect to
// (alpha1, alpha2), from the coefficient report of the unperturbed model.
struct BetaJacobian {
    double m[2][2] = {{0, 0}, {0, 0}};
    double det = 0;
};

inline BetaJacobian beta_jacobian(const CoefficientReport& co, CaseTag tag) {
    BetaJacobian J;
    switch (tag) {
        case CaseTag::Codim1:
            J.m[0][0] = co.theta[0];
            J.m[0][1] = co.theta.size() > 1 ? co.theta[1] : 0.0;
            J.m[1][0] = 0;
            J.m[1][1] = 1;  // second coordinate unused in the scalar case
            break;
        case CaseTag::Cusp:
            J.m[0][0] = co.zeta[0];
            J.m[0][1] = co.zeta[1];
            J.m[1][0] = co.eta[0];
            J.m[1][1] = co.eta[1];
            break;
        case CaseTag::FoldFold:
            J.m[0][0] = co.mu[0];
            J.m[0][1] = co.mu[1];
            J.m[1][0] = 2.0 * co.kappa[0] / co.Delta;
            J.m[1][1] = 2.0 * co.kappa[1] / co.Delta;
            break;
    }
    J.det = J.m[0][0] * J.m[1][1] - J.m[0][1] * J.m[1][0];
    return J;
}

// Newton iteration on the measured unfolding values with the frozen
// Jacobian: the b2-scale targets are O(b1^2) or O(sqrt(b1)) and a single
// linear solve cannot reach them, but the frozen-Jacobian iteration
// contracts by O(|alpha|) per step.
inline bool invert_beta(const FilippovModel& mod, const SectionSpec& sec,
                        CaseTag tag, const BetaJacobian& J, double b1,
                        double b2, double alpha_out[2],
                        const IntegratorOptions& opts = {}) {
    alpha_out[0] = (J.m[1][1] * b1 - J.m[0][1] * b2) / J.det;
    alpha_out[1] = (-J.m[1][0] * b1 + J.m[0][0] * b2) / J.det;
    // The absolute floor reflects the measurement noise of the unfolding
    // values through the integrator (~1e-10 on the second coordinate).
    const double tol1 = 2e-9 + 1e-7 * std::abs(b1);
    const double tol2 = 2e-9 + 1e-7 * std::abs(b2);
    for (int it = 0; it < 10; ++it) {
        double m1, m2;
        try {
            MeasuredUnfolding mu =
                measured_unfolding(mod, sec, tag, alpha_out, opts);
            m1 = mu.b1;
            m2 = tag == CaseTag::Codim1 ? 0.0 : mu.b2;
        } catch (const std::exception&) {
            return false;
        }
        double r1 = m1 - b1;
        double r2 = tag == CaseTag::Codim1 ? 0.0 : m2 - b2;
        if (std::abs(r1) < tol1 && std::abs(r2) < tol2) return true;
        alpha_out[0] -= (J.m[1][1] * r1 - J.m[0][1] * r2) / J.det;
        alpha_out[1] -= (-J.m[1][0] * r1 + J.m[0][0] * r2) / J.det;
    }
    return false;
}

// --- parameter sweep ----------------------------------------------------

inline int atlas_thread_count(int requested) {
    if (const char* env = std::getenv("ATLAS_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

inline Diagram run_sweep(const FilippovModel& mod, const SectionSpec& sec,
                         CaseTag tag, const GridSpec& grid, int threads = 0,
                         const IntegratorOptions& opts = {},
                         bool locate_cycles = false) {
    Diagram dia;
    dia.tag = tag;
    dia.grid = grid;
    dia.prov = make_provenance(mod, opts);
    const int n1 = std::max(grid.n1, 1), n2 = std::max(grid.n2, 1);
    dia.cells.assign(static_cast<std::size_t>(n1) * n2, Cell{});

    CoefficientReport co = coefficient_report(mod, tag, opts);
    BetaJacobian J = beta_jacobian(co, tag);

    auto work = [&](int i, int j) {
        Cell& c = dia.cells[static_cast<std::size_t>(i) * n2 + j];
        c.i = i;
        c.j = j;
        c.b1 = n1 == 1 ? grid.b1_lo
                       : grid.b1_lo + (grid.b1_hi - grid.b1_lo) * i / (n1 - 1);
        c.b2 = n2 == 1 ? grid.b2_lo
                       : grid.b2_lo + (grid.b2_hi - grid.b2_lo) * j / (n2 - 1);
        double al[2];
        c.inverted = invert_beta(mod, sec, tag, J, c.b1, c.b2, al, opts);
        c.a1 = al[0];
        c.a2 = al[1];
        if (!c.inverted) {
            c.label.label = "unresolved";
            c.label.resolved = false;
            return;
        }
        try {
            c.label = classify_dynamics(mod, sec, tag, al, opts, locate_cycles);
        } catch (const std::exception& e) {
            c.label.label = "unresolved";
            c.label.resolved = false;
            c.label.connections = {std::string("error: ") + e.what()};
        }
    };

    int nthreads = atlas_thread_count(threads);
    const long total = static_cast<long>(n1) * n2;
    if (nthreads <= 1) {
        for (long k = 0; k < total; ++k) work(static_cast<int>(k / n2),
                                             static_cast<int>(k % n2));
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&, t] {
                for (long k = t; k < total; k += nthreads)
                    work(static_cast<int>(k / n2), static_cast<int>(k % n2));
            });
        for (auto& th : pool) th.join();
    }
    return dia;
}

// --- curve extraction ---------------------------------------------------

namespace detail {

// Measured tangency geometry of the double-fold case at one parameter
// point, shared by its event functions.
struct FoldFoldGeometry {
    double theta1m = 0, theta1p = 0, varpi = 0;
};

inline FoldFoldGeometry foldfold_geometry(const FilippovModel& mod,
                                          const double* alpha) {
    FoldFoldGeometry g;
    auto rm = fold_roots(mod, -mod.a, 0.12 * mod.a, alpha);
    auto rp = fold_roots(mod, mod.a, 0.12 * mod.a, alpha);
    if (rm.size() != 1 || rp.size() != 1)
        throw NumericalError("foldfold_geometry: fold structure not regular");
    g.theta1m = -rm[0];
    g.theta1p = rp[0];
    double lo = std::min(g.theta1m, g.theta1p);
    double hi = std::max(g.theta1m, g.theta1p);
    auto fs = [&](double x) { return sliding_numerator(mod, x, alpha); };
    double pad = 1e-12;
    if (hi - lo > 4 * pad && (fs(lo + pad) > 0) != (fs(hi - pad) > 0))
        g.varpi = brent(fs, lo + pad, hi - pad).x;
    else
        g.varpi = 0.5 * (lo + hi);
    return g;
}

}  // namespace detail

// Case-dependent exact event functions, evaluated at a parameter point.
// Curve names follow the case tables: CS/SS/GS for the cusp-like case and
// CS+/SH+/TC+/TC-/SH-/CS-/F0 for the double-fold case.
inline double curve_event(const FilippovModel& mod, const SectionSpec& sec,
                          CaseTag tag, const std::string& name,
                          const double* alpha,
                          const IntegratorOptions& opts = {}) {
    if (tag == CaseTag::Cusp) {
        auto roots = fold_roots(mod, -mod.a, 0.12 * mod.a, alpha);
        if (roots.size() < 2)
            throw NumericalError("curve_event: fold pair absent");
        double x_minus = roots.front(), x_plus = roots.back();
        double z = 0.5 * (x_plus - x_minus);
        if (name == "CS") return map_T1(mod, x_plus, alpha, opts);
        if (name == "SS") return map_T1(mod, x_plus, alpha, opts) - 2.0 * z;
        if (name == "GS") {
            double land =
                fold_pair_transition(mod, x_plus, x_minus, alpha, opts).value;
            return map_T1(mod, land, alpha, opts);
        }
        throw NumericalError("curve_event: unknown cusp curve '" + name + "'");
    }
    if (tag == CaseTag::FoldFold) {
        if (name == "F0") {
            MeasuredUnfolding mu =
                measured_unfolding(mod, sec, CaseTag::FoldFold, alpha, opts);
            return mu.b2;
        }
        detail::FoldFoldGeometry g = detail::foldfold_geometry(mod, alpha);
        auto sp = [&](double x) {
            return sigma_half(mod, sec, HalfMap::Plus, x, alpha, opts).value;
        };
        auto sm = [&](double x) {
            return sigma_half(mod, sec, HalfMap::Minus, x, alpha, opts).value;
        };
        if (name == "CS+")
            return map_T2(mod, sec, -g.theta1m, alpha, opts);
        if (name == "CS-")
            return map_T2(mod, sec, -g.theta1p, alpha, opts);
        if (name == "TC+" || name == "TC-")
            return sp(-g.theta1m) - sm(g.theta1p);
        if (name == "SH+")
            return sp(-g.theta1m) - sm(g.varpi);
        if (name == "SH-")
            return sp(-g.varpi) - sm(g.theta1p);
        throw NumericalError("curve_event: unknown fold-fold curve '" + name +
                             "'");
    }
    throw NumericalError("curve_event: no curves in the scalar case");
}

struct CurveSpecEntry {
    std::string name;
    double sign_b1 = 1;         // which half-plane the curve lives in
    std::string form;           // "sqrt" or "square"
    double predicted = 0;       // leading constant for bracketing and fits
};

// Curve inventory per case, with the leading constants used both as fit
// references and to center the root brackets.
inline std::vector<CurveSpecEntry> curve_inventory(CaseTag tag,
                                                   const CoefficientReport& co) {
    if (tag == CaseTag::Cusp) {
        // Outer-curve constant: the backward transition from the visible
        // fold lands at twice the half-gap (exact in the local model), so
        // the grazing curve behaves like 2*sqrt(b1), not 3*sqrt(b1).
        return {{"CS", +1, "sqrt", -1.0},
                {"SS", +1, "sqrt", +1.0},
                {"GS", +1, "sqrt", +2.0}};
    }
    if (tag == CaseTag::FoldFold) {
        return {{"F0", +1, "square", 0.0},
                {"CS+", +1, "square", co.vt4},
                {"SH+", +1, "square", co.vt6},
                {"TC+", +1, "square", co.vt5},
                {"TC-", -1, "square", co.vt5},
                {"SH-", -1, "square", co.vt7},
                {"CS-", -1, "square", co.vt3}};
    }
    return {};
}

// Root-find each curve's event function in b2 along a fan of vertical rays
// b1 = const; b1 values are geometrically spaced in (b1_min, b1_max].
inline std::map<std::string, std::vector<CurvePoint>> extract_curves(
    const FilippovModel& mod, const SectionSpec& sec, CaseTag tag, int rays,
    double b1_max, double b1_min = 0, const IntegratorOptions& opts = {}) {
    if (tag == CaseTag::Codim1)
        throw NumericalError("extract_curves: no curves in the scalar case");
    if (b1_min <= 0) b1_min = tag == CaseTag::Cusp ? 1e-6 : 1e-4;
    CoefficientReport co = coefficient_report(mod, tag, opts);
    BetaJacobian J = beta_jacobian(co, tag);
    auto inventory = curve_inventory(tag, co);

    std::map<std::string, std::vector<CurvePoint>> out;
    for (const auto& cs : inventory) out[cs.name] = {};

    double ratio = rays > 1 ? std::pow(b1_min / b1_max, 1.0 / (rays - 1)) : 1.0;
    for (int k = 0; k < rays; ++k) {
        double b1 = b1_max * std::pow(ratio, k);
        for (const auto& cs : inventory) {
            double b1s = cs.sign_b1 * b1;
            double scale =
                cs.form == "sqrt" ? std::sqrt(b1) : b1 * b1;
            // Bracket in b2 around the predicted constant; F0 sits at
            // b2 ~ 0 between the adjacent curves.
            double lo, hi;
            if (cs.name == "F0") {
                lo = -0.5 * co.vt4 * scale;
                hi = 0.5 * co.vt4 * scale;
            } else {
                double w = std::max(0.6 * std::abs(cs.predicted), 0.4);
                lo = (cs.predicted - w) * scale;
                hi = (cs.predicted + w) * scale;
            }
            auto F = [&](double b2) {
                double al[2];
                if (!invert_beta(mod, sec, tag, J, b1s, b2, al, opts))
                    throw NumericalError("extract_curves: inversion failed");
                return curve_event(mod, sec, tag, cs.name, al, opts);
            };
            try {
                double flo = F(lo), fhi = F(hi);
                if (flo == 0 || fhi == 0 || (flo > 0) != (fhi > 0)) {
                    double b2r =
                        brent(F, lo, hi, 1e-14 + 1e-10 * std::abs(scale)).x;
                    double al[2];
                    invert_beta(mod, sec, tag, J, b1s, b2r, al, opts);
                    out[cs.name].push_back({b1s, b2r, al[0], al[1]});
                }
                // No sign change: recorded as an absent point (ray skipped).
            } catch (const std::exception&) {
                // Geometry absent on this ray for this curve: skip.
            }
        }
    }
    if (tag == CaseTag::FoldFold) {
        // The b2-axis itself (b1 = 0) separates the two half-planes; in
        // measured coordinates it needs no root-finding.
        auto& ax = out["AX"];
        for (int k = 0; k < rays; ++k) {
            double b2 = co.vt5 * b1_max * b1_max * std::pow(ratio, 2 * k);
            for (double s : {+1.0, -1.0}) {
                double al[2];
                if (invert_beta(mod, sec, tag, J, 0.0, s * b2, al, opts))
                    ax.push_back({0.0, s * b2, al[0], al[1]});
            }
        }
    }
    return out;
}

// --- asymptotic fits ----------------------------------------------------

inline CurveFit fit_asymptotics(const std::string& name,
                                const std::vector<CurvePoint>& pts,
                                const std::string& form, double cutoff,
                                double predicted = 0) {
    CurveFit fit;
    fit.name = name;
    fit.form = form;
    fit.cutoff = cutoff;
    fit.predicted = predicted;

    // Least squares of b2 on the model basis, plus a log-log slope.
    double sw = 0, swc = 0, swc2 = 0;
    std::vector<double> cs;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int nlog = 0;
    for (const auto& p : pts) {
        double b1 = std::abs(p.b1);
        if (b1 > cutoff || b1 <= 0) continue;
        double basis = form == "sqrt" ? std::sqrt(b1) : b1 * b1;
        double c = p.b2 / basis;
        cs.push_back(c);
        sw += 1;
        swc += c;
        swc2 += c * c;
        if (std::abs(p.b2) > 0) {
            double lx = std::log(b1), ly = std::log(std::abs(p.b2));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++nlog;
        }
    }
    fit.n_used = static_cast<int>(sw);
    if (fit.n_used < 3) return fit;
    fit.C = swc / sw;
    double var = std::max(0.0, swc2 / sw - fit.C * fit.C);
    fit.C_stderr = std::sqrt(var / sw);
    for (double c : cs)
        fit.max_residual = std::max(fit.max_residual, std::abs(c - fit.C));
    if (nlog >= 3) {
        double den = nlog * sxx - sx * sx;
        if (std::abs(den) > 0) fit.exponent = (nlog * sxy - sx * sy) / den;
    }
    fit.ok = true;
    return fit;
}

}  // namespace csb
