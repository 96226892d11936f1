// Leading coefficients of the three unfoldings: loop integrals, pointwise
// slopes, the quadratic-curve coefficients, measured unfolding coordinates
// and the chord/fold-map correction functions.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "csb/coeffs.hpp"

using namespace csb;

TEST_CASE("loop integrals of the regular-tangency scenario") {
    FilippovModel mod = load_scenario("s1");
    CoefficientReport rep = coefficient_report(mod, CaseTag::Codim1);
    CHECK(rep.tau0 == Catch::Approx(2.0).epsilon(1e-9));
    CHECK(rep.lambda0 == Catch::Approx(1.0).epsilon(1e-9));
    REQUIRE(rep.kappa.size() == 2);
    CHECK(rep.kappa[0] == Catch::Approx(2.0).epsilon(1e-8));
    CHECK(rep.kappa[1] == Catch::Approx(2.0).epsilon(1e-8));
    CHECK(rep.kappa_err[0] < 1e-6);
    CHECK(rep.kappa_err[1] < 1e-6);
    // theta_i = -kappa_i / g(a,0) - g_ai(-a,0) / gx(-a,0), with
    // g(a,0) = -4/3, gx(-a,0) = 4/3, g_a1 = 1, g_a2 = 0 at x = -a.
    CHECK(rep.theta[0] == Catch::Approx(0.75).epsilon(1e-8));
    CHECK(rep.theta[1] == Catch::Approx(1.5).epsilon(1e-8));
    // Partial arcs multiply back to the full loop.
    CHECK(rep.lambda_plus0 * rep.lambda_minus0 ==
          Catch::Approx(rep.lambda0).epsilon(1e-9));
}

TEST_CASE("slopes of the degenerate-tangency unfolding") {
    FilippovModel mod = load_scenario("s2");
    CoefficientReport rep = coefficient_report(mod, CaseTag::Cusp);
    CHECK(rep.tau0 == Catch::Approx(2.0).epsilon(1e-9));
    CHECK(rep.lambda0 == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(rep.kappa[0] == Catch::Approx(2.0).epsilon(1e-8));
    CHECK(rep.kappa[1] == Catch::Approx(2.0).epsilon(1e-8));
    // zeta_i = -2 g_ai / gxx and eta_i = -kappa_i / g(a,0) - gx_ai / gxx
    // at x = -a, with gxx(-a,0) = 3, g(a,0) = -2.
    CHECK(rep.zeta[0] == Catch::Approx(-2.0 / 3.0).epsilon(1e-8));
    CHECK(rep.zeta[1] == Catch::Approx(0.0).margin(1e-10));
    CHECK(rep.eta[0] == Catch::Approx(1.0).epsilon(1e-8));
    CHECK(rep.eta[1] == Catch::Approx(2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("coefficients of the double-tangency unfolding") {
    FilippovModel mod = load_scenario("s3");
    CoefficientReport rep = coefficient_report(mod, CaseTag::FoldFold);
    double e2 = std::exp(2.0);
    CHECK(rep.tau0 == Catch::Approx(2.0).epsilon(1e-9));
    CHECK(rep.lambda0 == Catch::Approx(e2).epsilon(1e-9));
    CHECK(rep.kappa[0] == Catch::Approx(e2 - 1.0).epsilon(1e-8));
    CHECK(rep.kappa[1] == Catch::Approx(-2.0).epsilon(1e-8));
    // Pointwise data: gx(-a,0) = 9 - e^2, gx(a,0) = e^2 - 5.
    double gxm = 9.0 - e2, gxp = e2 - 5.0;
    CHECK(rep.Delta == Catch::Approx(gxm * e2 - gxp).epsilon(1e-9));
    CHECK(rep.Delta == Catch::Approx(9.51429876072).margin(1e-9));
    CHECK(rep.r == Catch::Approx(-(e2 - 5.0) / 4.0).epsilon(1e-9));
    CHECK(rep.mu[0] == Catch::Approx(-1.0 / gxm - 1.0 / gxp).epsilon(1e-9));
    CHECK(rep.mu[1] == Catch::Approx(1.0 / gxm - 1.0 / gxp).epsilon(1e-9));

    // Frozen quadratic-curve coefficients and their strict ordering.
    CHECK(rep.vt3 == Catch::Approx(1.56525533377).margin(1e-9));
    CHECK(rep.vt4 == Catch::Approx(0.0630520376574).margin(1e-9));
    CHECK(rep.vt5 == Catch::Approx(0.314153685715).margin(1e-9));
    CHECK(rep.vt6 == Catch::Approx(0.27342593607).margin(1e-9));
    CHECK(rep.vt7 == Catch::Approx(0.760452064414).margin(1e-9));
    CHECK(rep.vt4 < rep.vt6);
    CHECK(rep.vt6 < rep.vt5);
    CHECK(rep.vt5 < rep.vt7);
    CHECK(rep.vt7 < rep.vt3);

    // Multiplier identity tying the two fold slopes together.
    CHECK(rep.lambda0 * gxm / rep.Delta ==
          Catch::Approx(1.0 + gxp / rep.Delta).epsilon(1e-12));
}

TEST_CASE("measured unfolding coordinates follow the predicted slopes") {
    IntegratorOptions opts;

    FilippovModel s1 = load_scenario("s1");
    SectionSpec sec1 = reference_section(s1);
    double al1[2] = {1e-3, 0.0};
    MeasuredUnfolding m1 = measured_unfolding(s1, sec1, CaseTag::Codim1, al1, opts);
    CHECK(m1.b1 == Catch::Approx(0.75e-3).epsilon(5e-3));

    FilippovModel s2 = load_scenario("s2");
    SectionSpec sec2 = reference_section(s2);
    double al2[2] = {-1.5e-6, 0.0};
    MeasuredUnfolding m2 = measured_unfolding(s2, sec2, CaseTag::Cusp, al2, opts);
    CHECK(m2.fold_pair);
    CHECK(m2.b1 == Catch::Approx(1e-6).epsilon(5e-3));
    // The second coordinate carries an O(b1) correction, so probe it along
    // the parameter direction that leaves the first coordinate at zero.
    double al2b[2] = {0.0, 1e-4};
    MeasuredUnfolding m2b = measured_unfolding(s2, sec2, CaseTag::Cusp, al2b, opts);
    CHECK(m2b.b2 == Catch::Approx(2.0 / 3.0 * 1e-4).epsilon(5e-3));

    FilippovModel s3 = load_scenario("s3");
    SectionSpec sec3 = reference_section(s3);
    double al3[2] = {1e-4, 0.0};
    MeasuredUnfolding m3 = measured_unfolding(s3, sec3, CaseTag::FoldFold, al3, opts);
    double e2 = std::exp(2.0);
    double mu1 = -1.0 / (9.0 - e2) - 1.0 / (e2 - 5.0);
    CHECK(m3.b1 == Catch::Approx(mu1 * 1e-4).epsilon(5e-3));
}

TEST_CASE("chord and fold-map corrections near the degenerate tangency") {
    FilippovModel mod = load_scenario("s2");
    SectionSpec sec = reference_section(mod);
    double al[2] = {-1.5e-6, 0.0};
    MeasuredUnfolding mu = measured_unfolding(mod, sec, CaseTag::Cusp, al);
    double z = std::sqrt(mu.b1);
    XiFunctions xi = xi_functions(mod, sec, z, al);
    // The local fold map lands one half-gap outside the invisible fold, so
    // the normalized correction tends to -1 as the pair collapses.
    CHECK(xi.xi3_tilde == Catch::Approx(-1.0).margin(2e-2));
    CHECK(std::abs(xi.xi2) < 0.05);
    CHECK(xi.varsigma == Catch::Approx(mu.xi1 + 2.0 * z).margin(0.1 * z));
}
