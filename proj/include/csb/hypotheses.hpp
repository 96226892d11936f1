#pragma once
// Verifies that a model satisfies the standing assumptions of the chosen
// analysis case: existence of the closed unperturbed loop (by shooting),
// the tangency structure at (-a,0) and (+a,0), and nondegeneracy of the
// leading coefficient vectors.

#include <cmath>
#include <string>
#include <vector>

#include "csb/coeffs.hpp"

namespace csb {

struct HypothesisCheck {
    std::string name;
    bool pass = false;
    double value = 0;
    std::string detail;
};

struct HypothesisReport {
    bool ok = true;
    double tau0 = 0;
    double landing_error = 0;
    double min_interior_y = 0;
    std::vector<HypothesisCheck> checks;

    void add(const std::string& name, bool pass, double value,
             const std::string& detail = "") {
        checks.push_back({name, pass, value, detail});
        ok = ok && pass;
    }
};

inline HypothesisReport check_hypotheses(const FilippovModel& mod, CaseTag tag,
                                         const IntegratorOptions& opts = {}) {
    static const double zeros[32] = {0};
    const double* al = zeros;
    const double a = mod.a;
    HypothesisReport rep;

    // --- closed loop by shooting, with dense interior sampling ---
    IntegratorOptions o = opts;
    o.samples_per_step = 128;
    bool loop_ok = false;
    try {
        Arc loop = integrate_arc(mod, Side::Upper, {-a, 0.0}, al,
                                 Direction::Forward,
                                 StopCondition::boundary_window(0.5 * a, 1.5 * a), o);
        loop_ok = loop.end == ArcEnd::BoundaryHit;
        if (loop_ok) {
            rep.tau0 = loop.u_end;
            rep.landing_error = std::abs(loop.x_end() - a);
            double min_y = 1e300;
            long counted = 0;
            for (const auto& s : loop.samples) {
                double x = s.state[0], y = s.state[1];
                if (std::hypot(x + a, y) < 1e-3 || std::hypot(x - a, y) < 1e-3)
                    continue;  // endpoint exemption
                min_y = std::min(min_y, y);
                ++counted;
            }
            rep.min_interior_y = min_y;
            rep.add("loop_closes", rep.landing_error < 1e-8, rep.landing_error,
                    "landing offset of the shot orbit at (+a,0)");
            rep.add("loop_interior", counted >= 1000 && min_y > 0.0, min_y,
                    "minimum interior height over " + std::to_string(counted) +
                        " samples");
        }
    } catch (const NumericalError& e) {
        rep.add("loop_closes", false, 0.0, e.what());
    }
    if (!loop_ok && rep.checks.empty())
        rep.add("loop_closes", false, 0.0, "orbit failed to return to the boundary");

    // --- tangency structure ---
    double gm = mod.eval(mod.g, -a, 0.0, al);
    double ga = mod.eval(mod.g, a, 0.0, al);
    double gxm = mod.eval(mod.gx, -a, 0.0, al);
    double gxp = mod.eval(mod.gx, a, 0.0, al);
    double gxxm = mod.eval(mod.gxx, -a, 0.0, al);
    double fm = mod.eval(mod.f, -a, 0.0, al);
    double L2m = mod.eval(mod.lie2, -a, 0.0, al);
    double L2p = mod.eval(mod.lie2, a, 0.0, al);
    double L3m = mod.eval(mod.lie3, -a, 0.0, al);

    rep.add("tangency_at_minus_a", std::abs(gm) < 1e-11, gm,
            "g(-a,0;0) must vanish");
    rep.add("transversal_f", std::abs(fm) > 1e-10, fm,
            "f(-a,0;0) must not vanish");

    switch (tag) {
        case CaseTag::Codim1:
            rep.add("visible_fold", L2m > 1e-10, L2m,
                    "second Lie derivative at (-a,0) must be positive");
            rep.add("regular_fold", std::abs(gxm) > 1e-10, gxm,
                    "g_x(-a,0;0) must not vanish");
            rep.add("transversal_arrival", ga < -1e-10, ga,
                    "g(+a,0;0) must be negative");
            break;
        case CaseTag::Cusp:
            rep.add("degenerate_fold", std::abs(gxm) < 1e-11, gxm,
                    "g_x(-a,0;0) must vanish");
            rep.add("cusp_order", std::abs(L3m) > 1e-10, L3m,
                    "third Lie derivative at (-a,0) must not vanish");
            rep.add("cusp_curvature", std::abs(gxxm) > 1e-10, gxxm,
                    "g_xx(-a,0;0) must not vanish");
            rep.add("transversal_arrival", ga < -1e-10, ga,
                    "g(+a,0;0) must be negative");
            break;
        case CaseTag::FoldFold:
            rep.add("tangency_at_plus_a", std::abs(ga) < 1e-11, ga,
                    "g(+a,0;0) must vanish");
            rep.add("visible_fold_minus", L2m > 1e-10, L2m,
                    "second Lie derivative at (-a,0) must be positive");
            rep.add("visible_fold_plus", L2p > 1e-10, L2p,
                    "second Lie derivative at (+a,0) must be positive");
            rep.add("regular_fold_minus", std::abs(gxm) > 1e-10, gxm, "");
            rep.add("regular_fold_plus", std::abs(gxp) > 1e-10, gxp, "");
            break;
    }

    // --- nondegeneracy of the unfolding coefficients ---
    if (rep.ok) {
        CoefficientReport co = coefficient_report(mod, tag, opts);
        auto max_minor = [&](const std::vector<double>& r1,
                             const std::vector<double>& r2) {
            double best = 0.0;
            for (std::size_t i = 0; i < r1.size(); ++i)
                for (std::size_t j = i + 1; j < r1.size(); ++j)
                    best = std::max(best,
                                    std::abs(r1[i] * r2[j] - r1[j] * r2[i]));
            return best;
        };
        switch (tag) {
            case CaseTag::Codim1: {
                double tn = 0.0;
                for (double t : co.theta) tn = std::max(tn, std::abs(t));
                rep.add("unfolding_nondegenerate", tn > 1e-10, tn,
                        "leading offset slope must not vanish");
                break;
            }
            case CaseTag::Cusp: {
                double d = max_minor(co.zeta, co.eta);
                rep.add("unfolding_nondegenerate", d > 1e-10, d,
                        "the two unfolding slopes must be independent");
                break;
            }
            case CaseTag::FoldFold: {
                std::vector<double> row2(co.kappa.size());
                for (std::size_t i = 0; i < row2.size(); ++i)
                    row2[i] = 2.0 * co.kappa[i] / co.Delta;
                double d = max_minor(co.mu, row2);
                rep.add("unfolding_nondegenerate", d > 1e-10, d,
                        "the two unfolding slopes must be independent");
                rep.add("return_expansion", co.Delta > 1e-10, co.Delta,
                        "the loop multiplier gap must be positive");
                rep.add("contraction_ratio",
                        co.r > -1.0 + 1e-10 && co.r < -1e-10, co.r,
                        "the sliding contraction ratio must lie in (-1,0)");
                break;
            }
        }
    }
    return rep;
}

}  // namespace csb
