// Boundary point classification, sliding quantities and boundary
// portraits.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "csb/boundary.hpp"

using namespace csb;

TEST_CASE("pointwise classification on the regular-tangency scenario") {
    FilippovModel mod = load_scenario("s1");
    auto cls = [&](double x) { return classify_point(mod, x, nullptr); };
    CHECK(cls(-0.7) == PointClass::CrossingUp);
    CHECK(cls(0.7) == PointClass::CrossingDown);
    CHECK(cls(0.0) == PointClass::SlidingUnstable);
    CHECK(cls(-1.15) == PointClass::SlidingStable);
    CHECK(cls(1.15) == PointClass::SlidingStable);
    CHECK(cls(-1.0) == PointClass::FoldVisibleUpper);
    CHECK(cls(1.0 / 3.0) == PointClass::FoldInvisibleUpper);
    CHECK(cls(1.0) == PointClass::FoldVisibleLower);
    CHECK(cls(-1.0 / 3.0) == PointClass::FoldInvisibleLower);
}

TEST_CASE("higher tangencies classify as cusp and fold-fold points") {
    FilippovModel s2 = load_scenario("s2");
    CHECK(classify_point(s2, -1.0, nullptr) == PointClass::CuspUpper);
    CHECK(classify_point(s2, 1.0, nullptr) == PointClass::CuspLower);
    FilippovModel s3 = load_scenario("s3");
    CHECK(classify_point(s3, -1.0, nullptr) == PointClass::FoldFoldPoint);
    CHECK(classify_point(s3, 1.0, nullptr) == PointClass::FoldFoldPoint);
}

TEST_CASE("classification is Z2-covariant") {
    // Reflecting a point swaps the roles of the two fields: crossings swap
    // orientation, folds swap upper/lower, sliding types are invariant.
    auto mirror = [](PointClass c) {
        switch (c) {
            case PointClass::CrossingUp: return PointClass::CrossingDown;
            case PointClass::CrossingDown: return PointClass::CrossingUp;
            case PointClass::FoldVisibleUpper: return PointClass::FoldVisibleLower;
            case PointClass::FoldVisibleLower: return PointClass::FoldVisibleUpper;
            case PointClass::FoldInvisibleUpper: return PointClass::FoldInvisibleLower;
            case PointClass::FoldInvisibleLower: return PointClass::FoldInvisibleUpper;
            case PointClass::CuspUpper: return PointClass::CuspLower;
            case PointClass::CuspLower: return PointClass::CuspUpper;
            default: return c;
        }
    };
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> X(-1.25, 1.25), A(-5e-3, 5e-3);
    for (const char* name : {"s1", "s2", "s3"}) {
        FilippovModel mod = load_scenario(name);
        for (int k = 0; k < 40; ++k) {
            double x = X(rng);
            double al[2] = {A(rng), A(rng)};
            CHECK(classify_point(mod, -x, al) ==
                  mirror(classify_point(mod, x, al)));
        }
    }
}

TEST_CASE("sliding velocity is antisymmetric") {
    std::mt19937 rng(11u);
    std::uniform_real_distribution<double> A(-5e-3, 5e-3);
    for (const char* name : {"s1", "s3"}) {
        FilippovModel mod = load_scenario(name);
        for (int k = 0; k < 25; ++k) {
            double al[2] = {A(rng), A(rng)};
            for (double x : {0.05, 0.17, 1.12, 1.21}) {
                double vp = sliding_velocity(mod, x, al);
                double vm = sliding_velocity(mod, -x, al);
                CHECK(vm == Catch::Approx(-vp).margin(1e-13));
                CHECK(sliding_numerator(mod, -x, al) ==
                      Catch::Approx(-sliding_numerator(mod, x, al))
                          .margin(1e-15));
            }
        }
    }
}

TEST_CASE("sliding velocity oracle on the regular-tangency scenario") {
    // With f = 1 the numerator reduces to g(x) - g(-x) = -4x/3 and the
    // denominator to g(x) + g(-x).
    FilippovModel mod = load_scenario("s1");
    double x = 0.2;
    double gp = mod.gv(x, 0.0, nullptr), gm = mod.gv(-x, 0.0, nullptr);
    CHECK(sliding_velocity(mod, x, nullptr) ==
          Catch::Approx((4.0 * x / 3.0) / (gp + gm)));
    // The denominator g(x) + g(-x) = -2 x^2 + 2/3 vanishes at 1/sqrt(3).
    CHECK_THROWS_AS(sliding_velocity(mod, 1.0 / std::sqrt(3.0), nullptr),
                    NumericalError);
}

TEST_CASE("boundary portrait of the unperturbed regular tangency") {
    FilippovModel mod = load_scenario("s1");
    BoundaryPortrait bp = boundary_portrait(mod, -1.3, 1.3, nullptr);
    CHECK(bp.resolved);
    REQUIRE(bp.tangents.size() == 4);
    CHECK(bp.tangents[0].x == Catch::Approx(-1.0));
    CHECK(bp.tangents[0].cls == PointClass::FoldVisibleUpper);
    CHECK(bp.tangents[1].x == Catch::Approx(-1.0 / 3.0));
    CHECK(bp.tangents[1].cls == PointClass::FoldInvisibleLower);
    CHECK(bp.tangents[2].x == Catch::Approx(1.0 / 3.0));
    CHECK(bp.tangents[2].cls == PointClass::FoldInvisibleUpper);
    CHECK(bp.tangents[3].x == Catch::Approx(1.0));
    CHECK(bp.tangents[3].cls == PointClass::FoldVisibleLower);
    REQUIRE(bp.segments.size() == 5);
    CHECK(bp.segments[0].cls == PointClass::SlidingStable);
    CHECK(bp.segments[1].cls == PointClass::CrossingUp);
    CHECK(bp.segments[2].cls == PointClass::SlidingUnstable);
    CHECK(bp.segments[3].cls == PointClass::CrossingDown);
    CHECK(bp.segments[4].cls == PointClass::SlidingStable);
    REQUIRE(bp.pseudo.size() == 1);
    CHECK(bp.pseudo[0].x == Catch::Approx(0.0).margin(1e-10));
    CHECK_FALSE(bp.pseudo[0].saddle);  // f^s_x = -4/3 < 0
    CHECK(bp.pseudo[0].fs_x == Catch::Approx(-4.0 / 3.0));
}

TEST_CASE("perturbation splits the double tangency into fold pairs") {
    FilippovModel mod = load_scenario("s3");
    double al[2] = {1e-3, 0.0};
    BoundaryPortrait bp = boundary_portrait(mod, -1.2, 1.2, al);
    CHECK(bp.resolved);
    int upper = 0, lower = 0;
    for (const auto& t : bp.tangents) {
        if (t.cls == PointClass::FoldVisibleUpper ||
            t.cls == PointClass::FoldInvisibleUpper)
            ++upper;
        if (t.cls == PointClass::FoldVisibleLower ||
            t.cls == PointClass::FoldInvisibleLower)
            ++lower;
    }
    CHECK(upper >= 1);
    CHECK(lower >= 1);
    // Mirror symmetry of the tangency set.
    for (const auto& t : bp.tangents) {
        bool found = false;
        for (const auto& u : bp.tangents)
            if (std::abs(u.x + t.x) < 1e-8) found = true;
        CHECK(found);
    }
}
