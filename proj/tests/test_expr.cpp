// Expression parsing, evaluation, symbolic differentiation and error
// handling.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "csb/expr.hpp"

using csb::DomainError;
using csb::Expr;
using csb::ExprError;

TEST_CASE("parse and evaluate basic arithmetic") {
    Expr e = Expr::parse("2*x + y^2 - 3", 0);
    CHECK(e.eval(1.0, 2.0, nullptr) == Catch::Approx(2.0 + 4.0 - 3.0));
    CHECK(e.eval(-0.5, 0.0, nullptr) == Catch::Approx(-4.0));

    Expr p = Expr::parse("a1 + 2*a2*x", 2);
    double al[2] = {0.25, -1.5};
    CHECK(p.eval(2.0, 0.0, al) == Catch::Approx(0.25 - 6.0));
}

TEST_CASE("precedence, unary minus and powers") {
    Expr e = Expr::parse("-x^2", 0);
    CHECK(e.eval(3.0, 0.0, nullptr) == Catch::Approx(-9.0));
    Expr f = Expr::parse("2 - -3", 0);
    CHECK(f.eval(0, 0, nullptr) == Catch::Approx(5.0));
    Expr g = Expr::parse("(x+1)^3/(1/2-x)", 0);
    CHECK(g.eval(0.0, 0.0, nullptr) == Catch::Approx(2.0));
    Expr h = Expr::parse("x^-2", 0);  // integer exponents, negative allowed
    CHECK(h.eval(2.0, 0.0, nullptr) == Catch::Approx(0.25));
}

TEST_CASE("elementary functions") {
    Expr e = Expr::parse("exp(x) + ln(y) + sin(x)*cos(y) + sqrt(y)", 0);
    double x = 0.7, y = 2.3;
    CHECK(e.eval(x, y, nullptr) ==
          Catch::Approx(std::exp(x) + std::log(y) +
                        std::sin(x) * std::cos(y) + std::sqrt(y)));
}

TEST_CASE("print-parse round trip is exact") {
    const char* sources[] = {
        "2*x + y^2 - 3",
        "-(x+1)*(x-1/3) + a1 + a2*(x+1)",
        "x^3 - x + ((exp(2)-7)/2)*(x^2-1) + y + a1 + a2*x",
        "sin(x*y) / (1 + cos(x)^2) + sqrt(1 + y^2)",
    };
    for (const char* src : sources) {
        Expr e = Expr::parse(src, 2);
        std::string printed = e.to_string();
        Expr r = Expr::parse(printed, 2);
        CHECK(r.to_string() == printed);
        CHECK(r.equals(e));
        double al[2] = {0.3, -0.8};
        CHECK(r.eval(0.37, 1.21, al) == Catch::Approx(e.eval(0.37, 1.21, al)));
    }
}

TEST_CASE("symbolic derivatives agree with finite differences at 100 points") {
    const char* sources[] = {
        "-(x+1)*(x-1/3) + a1 + a2*(x+1)",
        "(x+1)^2*(1/2-x) + a1 + a2*(x+1)",
        "x^3 - x + ((exp(2)-7)/2)*(x^2-1) + y + a1 + a2*x",
        "sin(x)*exp(y/4) + a1*cos(x*y) + a2^2*x",
    };
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    const double h = 1e-6;
    for (const char* src : sources) {
        Expr e = Expr::parse(src, 2);
        Expr dx = e.diff(0), dy = e.diff(1), d1 = e.diff(2), d2 = e.diff(3);
        for (int k = 0; k < 25; ++k) {
            double x = U(rng), y = U(rng);
            double al[2] = {0.5 * U(rng), 0.5 * U(rng)};
            double fdx = (e.eval(x + h, y, al) - e.eval(x - h, y, al)) / (2 * h);
            double fdy = (e.eval(x, y + h, al) - e.eval(x, y - h, al)) / (2 * h);
            double ap[2] = {al[0] + h, al[1]}, am[2] = {al[0] - h, al[1]};
            double fd1 = (e.eval(x, y, ap) - e.eval(x, y, am)) / (2 * h);
            double bp[2] = {al[0], al[1] + h}, bm[2] = {al[0], al[1] - h};
            double fd2 = (e.eval(x, y, bp) - e.eval(x, y, bm)) / (2 * h);
            double scale = 1.0 + std::abs(fdx) + std::abs(fdy);
            CHECK(std::abs(dx.eval(x, y, al) - fdx) < 1e-6 * scale);
            CHECK(std::abs(dy.eval(x, y, al) - fdy) < 1e-6 * scale);
            CHECK(std::abs(d1.eval(x, y, al) - fd1) < 1e-6 * scale);
            CHECK(std::abs(d2.eval(x, y, al) - fd2) < 1e-6 * scale);
        }
    }
}

TEST_CASE("second derivatives via repeated diff") {
    Expr e = Expr::parse("x^3*y + sin(x)", 1);
    Expr exx = e.diff(0).diff(0);
    double v = exx.eval(0.5, 2.0, nullptr);
    CHECK(v == Catch::Approx(6.0 * 0.5 * 2.0 - std::sin(0.5)));
}

TEST_CASE("parse errors carry a byte offset") {
    CHECK_THROWS_AS(Expr::parse("x +", 0), ExprError);
    CHECK_THROWS_AS(Expr::parse("2*)x", 0), ExprError);
    CHECK_THROWS_AS(Expr::parse("foo(x)", 0), ExprError);
    CHECK_THROWS_AS(Expr::parse("a1", 0), ExprError);  // arity 0 forbids a1
    CHECK_THROWS_AS(Expr::parse("a3 + x", 2), ExprError);
    try {
        Expr::parse("x + * y", 0);
        FAIL("expected a parse error");
    } catch (const ExprError& err) {
        CHECK(err.offset >= 4);
    }
}

TEST_CASE("domain errors on evaluation") {
    Expr e = Expr::parse("ln(x)", 0);
    CHECK_THROWS_AS(e.eval(-1.0, 0.0, nullptr), DomainError);
    CHECK_THROWS_AS(e.eval(0.0, 0.0, nullptr), DomainError);
    Expr s = Expr::parse("sqrt(x)", 0);
    CHECK_THROWS_AS(s.eval(-1.0, 0.0, nullptr), DomainError);
}
