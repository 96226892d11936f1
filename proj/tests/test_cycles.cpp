// Region classification and invariant-object detection in all three
// unfolding geometries.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "csb/atlas.hpp"

using namespace csb;

TEST_CASE("scalar unfolding: crossing, critical and sliding regions") {
    FilippovModel mod = load_scenario("s1");
    double alm[2] = {-2e-3, 0.0};
    Codim1Analysis an = analyze_codim1(mod, alm);
    CHECK(an.label.label == "crossing");
    REQUIRE(an.cycles.size() == 1);
    CHECK(an.cycles[0].kind == CycleKind::Crossing);
    CHECK(an.cycles[0].stability == Stability::Stable);
    CHECK(std::abs(an.cycles[0].rprime) < 1.0);

    double al0[2] = {0.0, 0.0};
    CHECK(analyze_codim1(mod, al0).label.label == "critical");

    double alp[2] = {2e-3, 0.0};
    Codim1Analysis sl = analyze_codim1(mod, alp);
    CHECK(sl.label.label == "sliding");
    REQUIRE(sl.cycles.size() == 1);
    CHECK(sl.cycles[0].kind == CycleKind::Sliding);
    CHECK(sl.cycles[0].stability == Stability::Stable);
    // The sliding cycle lands on the mirrored stable segment beyond the fold.
    CHECK(sl.cycles[0].x_land > -sl.cycles[0].x_exit);
}

TEST_CASE("scalar unfolding: measured offset slope") {
    FilippovModel mod = load_scenario("s1");
    const double h = 1e-3;
    double alp[2] = {h, 0.0}, alm[2] = {-h, 0.0};
    double slope =
        (analyze_codim1(mod, alp, {}, false).rho1 -
         analyze_codim1(mod, alm, {}, false).rho1) / (2.0 * h);
    CHECK(slope == Catch::Approx(0.75).epsilon(1e-2));
}

TEST_CASE("degenerate-tangency unfolding: the four regions") {
    FilippovModel mod = load_scenario("s2");
    SectionSpec sec = reference_section(mod);
    CoefficientReport co = coefficient_report(mod, CaseTag::Cusp);
    BetaJacobian J = beta_jacobian(co, CaseTag::Cusp);
    const double b1 = 2e-5, rb = std::sqrt(b1);

    auto label_at = [&](double ratio) {
        double al[2];
        REQUIRE(invert_beta(mod, sec, CaseTag::Cusp, J, b1, ratio * rb, al));
        return analyze_cusp(mod, sec, al);
    };

    // The three separating curves behave like -sqrt(b1), +sqrt(b1) and
    // +2 sqrt(b1); probe the middle of each band.
    CuspAnalysis r1 = label_at(-2.0);
    CHECK(r1.label.label == "crossing");
    CHECK(r1.label.n_crossing == 1);

    CuspAnalysis r2 = label_at(0.0);
    CHECK(r2.label.label == "sliding_above");
    CHECK(r2.label.sliding == "stable");
    REQUIRE(r2.cycles.size() == 1);
    CHECK(r2.cycles[0].kind == CycleKind::Sliding);

    CuspAnalysis r3 = label_at(1.5);
    CHECK(r3.label.label == "sliding_below");
    CHECK(r3.label.sliding == "stable");

    CuspAnalysis r4 = label_at(6.0);
    CHECK(r4.label.label == "crossing_enclosing");
    CHECK(r4.label.n_crossing == 1);
    // The enclosing cycle crosses left of the image of the visible fold.
    REQUIRE(r4.cycles.size() == 1);
    CHECK(r4.cycles[0].x_cross < -r4.varsigma);

    // Far below the pair the fold structure disappears entirely.
    double al[2];
    REQUIRE(invert_beta(mod, sec, CaseTag::Cusp, J, -2e-5, 0.0, al));
    CuspAnalysis r0 = analyze_cusp(mod, sec, al);
    CHECK_FALSE(r0.fold_pair);
    CHECK(r0.label.label == "crossing");
}

TEST_CASE("double-tangency unfolding: bands of the right half-plane") {
    FilippovModel mod = load_scenario("s3");
    SectionSpec sec = reference_section(mod);
    CoefficientReport co = coefficient_report(mod, CaseTag::FoldFold);
    BetaJacobian J = beta_jacobian(co, CaseTag::FoldFold);
    const double b1 = 1.5e-3, s = b1 * b1;

    auto at = [&](double b1v, double b2v) {
        double al[2];
        REQUIRE(invert_beta(mod, sec, CaseTag::FoldFold, J, b1v, b2v, al));
        return analyze_foldfold(mod, sec, al);
    };

    // Below the fold-graze axis: no admissible cycles.
    CHECK(at(b1, -0.06 * s).label.label == "0_crossing");

    // Between the axis and the first quadratic curve: a stable/unstable
    // pair whose return-map derivatives straddle 1.
    FoldFoldAnalysis two = at(b1, 0.5 * co.vt4 * s);
    CHECK(two.label.label == "2_crossing");
    REQUIRE(two.label.n_crossing == 2);
    double rlo = std::min(two.cycles[0].rprime, two.cycles[1].rprime);
    double rhi = std::max(two.cycles[0].rprime, two.cycles[1].rprime);
    CHECK(rlo < 1.0);
    CHECK(rhi > 1.0);

    // Next band: a stable sliding cycle plus the surviving unstable cycle.
    FoldFoldAnalysis slid = at(b1, 0.5 * (co.vt4 + co.vt6) * s);
    CHECK(slid.label.label == "sliding_stable");
    CHECK(slid.label.sliding == "stable");
    CHECK(slid.label.n_crossing == 1);
    REQUIRE(slid.label.connections.size() == 1);
    CHECK(slid.label.connections[0] == "tangent_tangent_sliding_inner_plus");

    // Between the sliding band and the tangency connection curve the
    // landing moves outside the stable sliding segment.
    FoldFoldAnalysis outer = at(b1, 0.5 * (co.vt6 + co.vt5) * s);
    CHECK(outer.label.label == "1_crossing");
    REQUIRE(outer.label.connections.size() == 1);
    CHECK(outer.label.connections[0] == "tangent_tangent_sliding_outer_plus");

    // Above the last curve only the unstable cycle remains.
    FoldFoldAnalysis top = at(b1, 1.3 * co.vt5 * s);
    CHECK(top.label.label == "1_crossing");
    CHECK(top.label.connections.empty());
    CHECK(top.label.pseudo_eq == 2);
}

TEST_CASE("double-tangency unfolding: bands of the left half-plane") {
    FilippovModel mod = load_scenario("s3");
    SectionSpec sec = reference_section(mod);
    CoefficientReport co = coefficient_report(mod, CaseTag::FoldFold);
    BetaJacobian J = beta_jacobian(co, CaseTag::FoldFold);
    const double b1 = -1.5e-3, s = b1 * b1;

    auto at = [&](double b2v) {
        double al[2];
        REQUIRE(invert_beta(mod, sec, CaseTag::FoldFold, J, b1, b2v, al));
        return analyze_foldfold(mod, sec, al);
    };

    CHECK(at(0.4 * co.vt5 * s).label.label == "0_crossing");

    FoldFoldAnalysis outer = at(0.5 * (co.vt5 + co.vt7) * s);
    CHECK(outer.label.label == "0_crossing");
    REQUIRE(outer.label.connections.size() == 1);
    CHECK(outer.label.connections[0] == "tangent_tangent_sliding_outer_minus");

    FoldFoldAnalysis slid = at(0.5 * (co.vt7 + co.vt3) * s);
    CHECK(slid.label.label == "sliding_unstable");
    CHECK(slid.label.sliding == "unstable");
    REQUIRE(slid.label.connections.size() == 1);
    CHECK(slid.label.connections[0] == "tangent_tangent_sliding_inner_minus");

    FoldFoldAnalysis top = at(1.4 * co.vt3 * s);
    CHECK(top.label.label == "1_crossing");
    CHECK(top.label.n_crossing == 1);
    CHECK(top.label.stabilities == std::vector<std::string>{"unstable"});
}

TEST_CASE("unified classification adds the pseudo-equilibrium count") {
    FilippovModel mod = load_scenario("s1");
    SectionSpec sec = reference_section(mod);
    double al[2] = {2e-3, 0.0};
    RegionLabel lbl = classify_dynamics(mod, sec, CaseTag::Codim1, al);
    CHECK(lbl.label == "sliding");
    CHECK(lbl.pseudo_eq == 1);
    CHECK(lbl.resolved);
}
