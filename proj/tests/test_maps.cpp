// Half-return and full-return maps, their analytic derivatives against
// finite differences, and the local fold maps.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "csb/maps.hpp"
#include "csb/rootfind.hpp"

using namespace csb;

TEST_CASE("reference section sits on the descending branch at half height") {
    FilippovModel mod = load_scenario("s3");
    SectionSpec sec = reference_section(mod);
    CHECK(sec.c > 0.0);
    CHECK(sec.b > 0.0);
    CHECK(sec.b < mod.a);
    CHECK(mod.eval(mod.g, sec.b, sec.c, nullptr) < 0.0);
    // The loop apex of this scenario is just below 0.25.
    CHECK(sec.c == Catch::Approx(0.1216).margin(2e-3));
}

TEST_CASE("analytic first derivatives match finite differences") {
    double al[2] = {1e-3, -5e-4};
    const double tol = 1e-5;

    FilippovModel s1 = load_scenario("s1");
    SectionSpec sec1 = reference_section(s1);
    FilippovModel s3 = load_scenario("s3");
    SectionSpec sec3 = reference_section(s3);

    struct Probe {
        const FilippovModel* mod;
        const SectionSpec* sec;
        const char* which;
        double x;
    } probes[] = {
        {&s1, &sec1, "full", -0.97},
        {&s3, &sec3, "full", -0.96},
        {&s3, &sec3, "plus", -1.04},
        {&s3, &sec3, "minus", 0.95},
    };
    for (const auto& p : probes) {
        SigmaDerivatives an = sigma_derivatives(*p.mod, *p.sec, p.which, p.x,
                                                al, DerivMethod::Analytic);
        SigmaDerivatives fd = sigma_derivatives(*p.mod, *p.sec, p.which, p.x,
                                                al, DerivMethod::FiniteDifference);
        INFO(p.which << " at x=" << p.x);
        double sc = 1.0 + std::abs(fd.dx);
        CHECK(std::abs(an.dx - fd.dx) < tol * sc);
        for (int i = 0; i < 2; ++i) {
            double sa = 1.0 + std::abs(fd.dalpha[i]);
            CHECK(std::abs(an.dalpha[i] - fd.dalpha[i]) < tol * sa);
        }
    }
}

TEST_CASE("full-map derivatives at the tangency have closed forms") {
    // At the tangency (-a, 0) of the first scenario, with g(a,0) = -4/3,
    // gx(-a,0) = 4/3 and unit multiplier:
    //   sigma_x = 0,  sigma_ai = -kappa_i / g(a,0) = 3/2,
    //   sigma_xx = gx(-a,0) / g(a,0) = -1.
    FilippovModel mod = load_scenario("s1");
    SectionSpec sec = reference_section(mod);
    double al[2] = {0.0, 0.0};
    SigmaDerivatives d = sigma_derivatives(mod, sec, "full", -1.0, al,
                                           DerivMethod::Analytic, true);
    CHECK(d.value == Catch::Approx(1.0).margin(1e-8));
    CHECK(std::abs(d.dx) < 1e-9);
    CHECK(d.dalpha[0] == Catch::Approx(1.5).epsilon(1e-6));
    CHECK(d.dalpha[1] == Catch::Approx(1.5).epsilon(1e-6));
    CHECK(d.dxx == Catch::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("section composition reproduces the cycle condition") {
    FilippovModel mod = load_scenario("s3");
    SectionSpec sec = reference_section(mod);
    double al[2] = {0.0, 0.0};
    // The unperturbed loop through (-a,0) closes, so both half maps hit the
    // section at the same abscissa.
    double t2 = map_T2(mod, sec, -1.0, al);
    CHECK(std::abs(t2) < 1e-8);
    // Composition identity at a generic point.
    double x = -1.03;
    double sp = sigma_half(mod, sec, HalfMap::Plus, x, al).value;
    double sm = sigma_half(mod, sec, HalfMap::Minus, -x, al).value;
    CHECK(map_T2(mod, sec, x, al) == Catch::Approx(sp - sm).margin(1e-13));
}

TEST_CASE("half maps reject points outside their windows") {
    FilippovModel mod = load_scenario("s3");
    SectionSpec sec = reference_section(mod);
    CHECK_THROWS_AS(sigma_half(mod, sec, HalfMap::Plus, -0.5, nullptr),
                    NumericalError);
    CHECK_THROWS_AS(sigma_half(mod, sec, HalfMap::Minus, 0.2, nullptr),
                    NumericalError);
    CHECK_THROWS_AS(sigma_full(mod, 0.0, nullptr), NumericalError);
}

TEST_CASE("local fold map is an involution") {
    // Around the invisible tangency at x = 1/3 of the first scenario the
    // pairing arc is a shallow upper-field hop from one side to the other.
    FilippovModel mod = load_scenario("s1");
    double x = 0.27;
    MapPoint img = backward_fold_map(mod, x, nullptr);
    CHECK(img.value > 1.0 / 3.0);  // paired point on the other side
    MapPoint back = backward_fold_map(mod, img.value, nullptr);
    CHECK(back.value == Catch::Approx(x).margin(1e-9));
}

TEST_CASE("transition past a split tangency lands at leading order") {
    // Perturbing the degenerate tangency of the cusp scenario downward
    // splits it into a visible/invisible fold pair with half-gap z; in the
    // quadratic normal form the return integral of the backward orbit from
    // the visible fold factors as (u-z)^2 (u+2z), so it lands one half-gap
    // left of the invisible fold.
    FilippovModel mod = load_scenario("s2");
    double al[2] = {-1.5e-6, 0.0};
    auto roots = scan_roots(
        [&](double xx) { return mod.eval(mod.g, xx, 0.0, al); }, -1.2, -0.8,
        4000);
    REQUIRE(roots.size() == 2);
    double x_minus = roots[0], x_plus = roots[1];
    double z = 0.5 * (x_plus - x_minus);
    CHECK(z == Catch::Approx(1e-3).epsilon(0.05));
    MapPoint t = fold_pair_transition(mod, x_plus, x_minus, al);
    CHECK(t.value == Catch::Approx(x_minus - z).margin(5e-3 * z));
}
