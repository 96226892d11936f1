// Measured-coordinate targeting, parameter sweeps, curve extraction,
// asymptotic fits and deterministic serialization.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <set>

#include "csb/atlas.hpp"
#include "csb/io.hpp"

using namespace csb;

TEST_CASE("measured-coordinate targeting converges and round-trips") {
    FilippovModel mod = load_scenario("s2");
    SectionSpec sec = reference_section(mod);
    CoefficientReport co = coefficient_report(mod, CaseTag::Cusp);
    BetaJacobian J = beta_jacobian(co, CaseTag::Cusp);

    double b1 = 1e-5, b2 = 3e-3;
    double al[2];
    REQUIRE(invert_beta(mod, sec, CaseTag::Cusp, J, b1, b2, al));
    MeasuredUnfolding mu = measured_unfolding(mod, sec, CaseTag::Cusp, al);
    CHECK(mu.b1 == Catch::Approx(b1).margin(2e-9 + 1e-7 * b1));
    CHECK(mu.b2 == Catch::Approx(b2).margin(2e-9 + 1e-7 * b2));
}

TEST_CASE("sweeps are deterministic across worker counts") {
    FilippovModel mod = load_scenario("s2");
    SectionSpec sec = reference_section(mod);
    GridSpec grid{-4e-5, 4e-5, 5, -1.2e-2, 1.2e-2, 5};
    Diagram one = run_sweep(mod, sec, CaseTag::Cusp, grid, 1);
    Diagram four = run_sweep(mod, sec, CaseTag::Cusp, grid, 4);
    std::string ja = dump_json(to_json(one));
    std::string jb = dump_json(to_json(four));
    CHECK(ja == jb);

    // Every cell resolves and all four regions appear on this window.
    int resolved = 0;
    std::set<std::string> labels;
    for (const auto& c : one.cells) {
        if (c.label.resolved) ++resolved;
        labels.insert(c.label.label);
    }
    CHECK(resolved == 25);
    CHECK(labels.count("crossing") == 1);
    CHECK(labels.count("crossing_enclosing") == 1);
    CHECK(labels.count("sliding_above") == 1);
}

TEST_CASE("environment override of the worker count") {
    setenv("ATLAS_THREADS", "3", 1);
    CHECK(atlas_thread_count(8) == 3);
    unsetenv("ATLAS_THREADS");
    CHECK(atlas_thread_count(8) == 8);
    CHECK(atlas_thread_count(0) >= 1);
}

TEST_CASE("curve extraction and asymptotic fits on the degenerate tangency") {
    FilippovModel mod = load_scenario("s2");
    SectionSpec sec = reference_section(mod);
    auto curves = extract_curves(mod, sec, CaseTag::Cusp, 5, 2e-3, 1e-5);
    REQUIRE(curves.count("CS") == 1);
    REQUIRE(curves.count("SS") == 1);
    REQUIRE(curves.count("GS") == 1);
    CHECK(curves["CS"].size() == 5);

    CoefficientReport co = coefficient_report(mod, CaseTag::Cusp);
    auto inv = curve_inventory(CaseTag::Cusp, co);
    for (const auto& cs : inv) {
        CurveFit fit = fit_asymptotics(cs.name, curves[cs.name], cs.form, 1e-2,
                                       cs.predicted);
        INFO(cs.name << " C=" << fit.C << " expected " << cs.predicted);
        CHECK(fit.ok);
        CHECK(fit.C == Catch::Approx(cs.predicted).epsilon(0.05));
        CHECK(fit.exponent == Catch::Approx(0.5).margin(0.02));
    }
}

TEST_CASE("diagram serialization is stable and carries provenance") {
    FilippovModel mod = load_scenario("s1");
    Diagram dia;
    dia.tag = CaseTag::Codim1;
    dia.grid = {-1e-3, 1e-3, 2, 0.0, 0.0, 1};
    dia.prov = make_provenance(mod);
    json j = to_json(dia);
    CHECK(j["provenance"]["schema_version"] == 1);
    CHECK(j["case"] == "codim1");
    CHECK(j["provenance"]["model_hash"].get<std::string>().size() == 16);
    CHECK(j["provenance"]["rtol"] == IntegratorOptions{}.rtol);
    // Identical input, identical bytes.
    CHECK(dump_json(j) == dump_json(to_json(dia)));
    // The hash tracks the model, not the object identity.
    FilippovModel again = load_scenario("s1");
    CHECK(make_provenance(again).model_hash == dia.prov.model_hash);
    CHECK(make_provenance(load_scenario("s3")).model_hash !=
          dia.prov.model_hash);
}
