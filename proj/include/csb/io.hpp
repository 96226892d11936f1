#pragma once
// Deterministic JSON serialization of reports, sweep diagrams, curves, and
// fits.  Uses an order-preserving JSON document and sorted containers so
// repeated runs produce byte-identical output.

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "../../vendor/json.hpp"
#include "csb/atlas.hpp"
#include "csb/hypotheses.hpp"

namespace csb {

using json = nlohmann::ordered_json;

inline json to_json(const Provenance& p) {
    json j;
    j["schema_version"] = p.schema_version;
    j["model_hash"] = p.model_hash;
    j["rtol"] = p.rtol;
    j["atol"] = p.atol;
    j["event_tol"] = p.event_tol;
    j["graze_tol"] = p.graze_tol;
    j["seed"] = p.seed;
    return j;
}

inline json to_json(const CoefficientReport& co) {
    json j;
    j["case"] = to_string(co.case_tag);
    j["tau0"] = co.tau0;
    j["lambda0"] = co.lambda0;
    j["tau_plus"] = co.tau_plus;
    j["tau_minus"] = co.tau_minus;
    j["lambda_plus0"] = co.lambda_plus0;
    j["lambda_minus0"] = co.lambda_minus0;
    j["kappa"] = co.kappa;
    j["kappa_plus"] = co.kappa_plus;
    j["kappa_minus"] = co.kappa_minus;
    j["kappa_err"] = co.kappa_err;
    switch (co.case_tag) {
        case CaseTag::Codim1:
            j["theta"] = co.theta;
            break;
        case CaseTag::Cusp:
            j["zeta"] = co.zeta;
            j["eta"] = co.eta;
            break;
        case CaseTag::FoldFold:
            j["mu"] = co.mu;
            j["Delta"] = co.Delta;
            j["r"] = co.r;
            j["vartheta"] = {{"vt3", co.vt3},
                             {"vt4", co.vt4},
                             {"vt5", co.vt5},
                             {"vt6", co.vt6},
                             {"vt7", co.vt7}};
            break;
    }
    j["section"] = {{"b", co.section.b}, {"c", co.section.c},
                    {"delta", co.section.delta}};
    return j;
}

inline json to_json(const HypothesisReport& rep) {
    json j;
    j["ok"] = rep.ok;
    j["tau0"] = rep.tau0;
    j["landing_error"] = rep.landing_error;
    j["min_interior_y"] = rep.min_interior_y;
    json checks = json::array();
    for (const auto& c : rep.checks) {
        json jc;
        jc["name"] = c.name;
        jc["pass"] = c.pass;
        jc["value"] = c.value;
        if (!c.detail.empty()) jc["detail"] = c.detail;
        checks.push_back(jc);
    }
    j["checks"] = checks;
    return j;
}

inline json to_json(const RegionLabel& rl) {
    json j;
    j["label"] = rl.label;
    j["n_crossing"] = rl.n_crossing;
    j["stabilities"] = rl.stabilities;
    j["sliding"] = rl.sliding;
    j["critical"] = rl.critical;
    j["connections"] = rl.connections;
    j["pseudo_eq"] = rl.pseudo_eq;
    j["resolved"] = rl.resolved;
    return j;
}

inline json to_json(const std::vector<CycleRecord>& cycles) {
    json arr = json::array();
    for (const auto& c : cycles) {
        json jc;
        switch (c.kind) {
            case CycleKind::Crossing: jc["kind"] = "crossing"; break;
            case CycleKind::CriticalCrossing: jc["kind"] = "critical"; break;
            case CycleKind::Sliding: jc["kind"] = "sliding"; break;
        }
        jc["stability"] = to_string(c.stability);
        if (c.kind == CycleKind::Sliding) {
            jc["x_exit"] = c.x_exit;
            jc["x_land"] = c.x_land;
        } else {
            jc["x_cross"] = c.x_cross;
            if (c.kind == CycleKind::Crossing) jc["rprime"] = c.rprime;
        }
        if (!c.detail.empty()) jc["detail"] = c.detail;
        arr.push_back(jc);
    }
    return arr;
}

inline json to_json(const BoundaryPortrait& bp) {
    json j;
    j["lo"] = bp.lo;
    j["hi"] = bp.hi;
    j["resolved"] = bp.resolved;
    json tg = json::array();
    for (const auto& t : bp.tangents)
        tg.push_back({{"x", t.x}, {"class", to_string(t.cls)}});
    j["tangents"] = tg;
    json sg = json::array();
    for (const auto& s : bp.segments)
        sg.push_back({{"lo", s.lo}, {"hi", s.hi}, {"class", to_string(s.cls)}});
    j["segments"] = sg;
    json pe = json::array();
    for (const auto& p : bp.pseudo)
        pe.push_back({{"x", p.x}, {"saddle", p.saddle}, {"fs_x", p.fs_x}});
    j["pseudo_equilibria"] = pe;
    return j;
}

inline json to_json(const std::map<std::string, std::vector<CurvePoint>>& curves) {
    json j;  // std::map iteration order is already sorted by name
    for (const auto& [name, pts] : curves) {
        json arr = json::array();
        for (const auto& p : pts)
            arr.push_back({{"b1", p.b1}, {"b2", p.b2},
                           {"a1", p.a1}, {"a2", p.a2}});
        j[name] = arr;
    }
    return j;
}

inline json to_json(const Diagram& dia) {
    json j;
    j["case"] = to_string(dia.tag);
    j["provenance"] = to_json(dia.prov);
    j["grid"] = {{"b1_lo", dia.grid.b1_lo}, {"b1_hi", dia.grid.b1_hi},
                 {"n1", dia.grid.n1},       {"b2_lo", dia.grid.b2_lo},
                 {"b2_hi", dia.grid.b2_hi}, {"n2", dia.grid.n2}};
    json cells = json::array();
    for (const auto& c : dia.cells) {  // stored row-major: already sorted
        json jc;
        jc["i"] = c.i;
        jc["j"] = c.j;
        jc["b1"] = c.b1;
        jc["b2"] = c.b2;
        jc["a1"] = c.a1;
        jc["a2"] = c.a2;
        jc["inverted"] = c.inverted;
        jc["label"] = to_json(c.label);
        cells.push_back(jc);
    }
    j["cells"] = cells;
    if (!dia.curves.empty()) j["curves"] = to_json(dia.curves);
    return j;
}

inline json to_json(const CurveFit& f) {
    json j;
    j["name"] = f.name;
    j["form"] = f.form;
    j["C"] = f.C;
    j["C_stderr"] = f.C_stderr;
    j["predicted"] = f.predicted;
    j["exponent"] = f.exponent;
    j["cutoff"] = f.cutoff;
    j["n_used"] = f.n_used;
    j["max_residual"] = f.max_residual;
    j["ok"] = f.ok;
    return j;
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalError("cannot open output file: " + path);
    out << content;
}

}  // namespace csb
