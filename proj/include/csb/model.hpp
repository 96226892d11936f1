#pragma once
// Planar piecewise-smooth model with switching line y = 0.  Only the upper
// vector field (f_plus, g_plus) is stored; the lower field is obtained from
// the symmetry (x,y) -> (-x,-y), under which the system is invariant.

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "csb/expr.hpp"

namespace csb {

class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Side { Upper, Lower };

struct Vec2 {
    double x = 0.0, y = 0.0;
};

// Which local geometry at (-a, 0) the analysis pipeline should assume.
enum class CaseTag { Codim1, Cusp, FoldFold };

inline std::string to_string(CaseTag c) {
    switch (c) {
        case CaseTag::Codim1: return "codim1";
        case CaseTag::Cusp: return "cusp";
        case CaseTag::FoldFold: return "foldfold";
    }
    return "?";
}

inline CaseTag case_from_string(const std::string& s) {
    if (s == "codim1") return CaseTag::Codim1;
    if (s == "cusp") return CaseTag::Cusp;
    if (s == "foldfold") return CaseTag::FoldFold;
    throw ModelError("unknown case tag '" + s + "'");
}

struct FilippovModel {
    Expr f_plus, g_plus;   // upper field components
    int m = 0;             // number of parameters
    double a = 1.0;        // tangency abscissa of the unperturbed loop
    std::string label;

    // Compiled tapes for the upper field and the derived quantities used
    // throughout the pipeline.  All are functions of (x, y, a1..am).
    Tape f, g;
    Tape fx, fy, gx, gy, gxx;
    Tape lie2, lie3;          // (Z+)^2 h and (Z+)^3 h as functions of (x,y)
    Tape div, divx, divy;     // divergence of the upper field and its gradient
    std::vector<Tape> f_al, g_al, gx_al;   // d/d a_i of f, g, g_x
    std::vector<Tape> B, Bx, By;           // B_i = f*g_{a_i} - g*f_{a_i}

    // --- direct evaluation helpers (upper field expressions) ---
    double eval(const Tape& t, double x, double y, const double* alpha) const {
        double v = t.eval(x, y, alpha);
        if (!std::isfinite(v)) throw NumericalError("expression evaluated to non-finite value");
        return v;
    }
    double fv(double x, double y, const double* al) const { return eval(f, x, y, al); }
    double gv(double x, double y, const double* al) const { return eval(g, x, y, al); }
};

// Builds all derivative tapes.  Throws ModelError on inconsistent arity.
inline FilippovModel build_model(const Expr& f_plus, const Expr& g_plus, int m,
                                 double a, const std::string& label) {
    if (m < 0 || m > 30) throw ModelError("parameter count m out of range");
    if (f_plus.arity() > m || g_plus.arity() > m)
        throw ModelError("expression uses more parameters than declared m");
    if (!(a > 0.0)) throw ModelError("tangency abscissa a must be positive");

    FilippovModel mod;
    mod.f_plus = f_plus;
    mod.g_plus = g_plus;
    mod.m = m;
    mod.a = a;
    mod.label = label;

    // Promote to common arity so variable slots line up.
    Expr F(f_plus.root(), m), G(g_plus.root(), m);
    Expr Fx = F.diff(0), Fy = F.diff(1);
    Expr Gx = G.diff(0), Gy = G.diff(1);
    Expr L2 = F * Gx + G * Gy;
    Expr L3 = F * L2.diff(0) + G * L2.diff(1);
    Expr Div = Fx + Gy;

    mod.f = Tape(F); mod.g = Tape(G);
    mod.fx = Tape(Fx); mod.fy = Tape(Fy);
    mod.gx = Tape(Gx); mod.gy = Tape(Gy);
    mod.gxx = Tape(Gx.diff(0));
    mod.lie2 = Tape(L2);
    mod.lie3 = Tape(L3);
    mod.div = Tape(Div);
    mod.divx = Tape(Div.diff(0));
    mod.divy = Tape(Div.diff(1));
    for (int i = 0; i < m; ++i) {
        Expr Fa = F.diff(2 + i), Ga = G.diff(2 + i);
        Expr Bi = F * Ga - G * Fa;
        mod.f_al.emplace_back(Fa);
        mod.g_al.emplace_back(Ga);
        mod.gx_al.emplace_back(Gx.diff(2 + i));
        mod.B.emplace_back(Bi);
        mod.Bx.emplace_back(Bi.diff(0));
        mod.By.emplace_back(Bi.diff(1));
    }
    return mod;
}

// Field evaluation on either side of the switching line.  The lower field
// is the image of the upper one under the central symmetry and is never
// stored separately.
inline Vec2 eval_field(const FilippovModel& mod, Side side, double x, double y,
                       const double* alpha) {
    if (side == Side::Upper)
        return {mod.fv(x, y, alpha), mod.gv(x, y, alpha)};
    return {-mod.fv(-x, -y, alpha), -mod.gv(-x, -y, alpha)};
}

inline Vec2 eval_field(const FilippovModel& mod, Side side, double x, double y,
                       const std::vector<double>& alpha) {
    if (static_cast<int>(alpha.size()) < mod.m)
        throw ModelError("parameter vector shorter than model arity");
    return eval_field(mod, side, x, y, alpha.data());
}

// --- built-in scenarios -------------------------------------------------

inline FilippovModel load_scenario(const std::string& name) {
    if (name == "s1") {
        // Regular tangency at (-1,0); both fold curves move under a1, a2.
        Expr f = Expr::parse("1", 2);
        Expr g = Expr::parse("-(x+1)*(x-1/3) + a1 + a2*(x+1)", 2);
        return build_model(f, g, 2, 1.0, "s1");
    }
    if (name == "s2") {
        // Degenerate (cubic) tangency at (-1,0).
        Expr f = Expr::parse("1", 2);
        Expr g = Expr::parse("(x+1)^2*(1/2-x) + a1 + a2*(x+1)", 2);
        return build_model(f, g, 2, 1.0, "s2");
    }
    if (name == "s3") {
        // Simultaneous tangencies at (-1,0) and (1,0); the constant below is
        // tuned in closed form so the unperturbed loop closes exactly.
        Expr f = Expr::parse("1", 2);
        Expr g = Expr::parse("x^3 - x + ((exp(2)-7)/2)*(x^2-1) + y + a1 + a2*x", 2);
        return build_model(f, g, 2, 1.0, "s3");
    }
    throw ModelError("unknown scenario '" + name + "' (expected s1, s2 or s3)");
}

inline CaseTag default_case(const std::string& scenario) {
    if (scenario == "s1") return CaseTag::Codim1;
    if (scenario == "s2") return CaseTag::Cusp;
    if (scenario == "s3") return CaseTag::FoldFold;
    throw ModelError("no default case for scenario '" + scenario + "'");
}

// --- model files --------------------------------------------------------
//
// Plain text, one `key = value` per line, '#' starts a comment.
// Required keys: a, m, f_plus, g_plus.  Optional: label.

inline FilippovModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    double a = 0.0;
    int m = -1;
    std::string fsrc, gsrc, label;
    bool have_a = false, have_f = false, have_g = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r\n") != std::string::npos)
                throw ModelError(path + ":" + std::to_string(lineno) +
                                 ": expected 'key = value'");
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r\n");
            auto e = s.find_last_not_of(" \t\r\n");
            if (b == std::string::npos) return std::string();
            s = s.substr(b, e - b + 1);
            if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
                s = s.substr(1, s.size() - 2);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "a") { a = std::stod(val); have_a = true; }
        else if (key == "m") { m = std::stoi(val); }
        else if (key == "f_plus") { fsrc = val; have_f = true; }
        else if (key == "g_plus") { gsrc = val; have_g = true; }
        else if (key == "label") { label = val; }
        else throw ModelError(path + ":" + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
    }
    if (!have_a || m < 0 || !have_f || !have_g)
        throw ModelError(path + ": model file requires keys a, m, f_plus, g_plus");
    try {
        Expr f = Expr::parse(fsrc, m);
        Expr g = Expr::parse(gsrc, m);
        return build_model(f, g, m, a, label.empty() ? path : label);
    } catch (const ExprError& e) {
        throw ModelError(path + ": " + e.what());
    }
}

inline void save_model_file(const FilippovModel& mod, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write model file '" + path + "'");
    out << "a = " << mod.a << "\n";
    out << "m = " << mod.m << "\n";
    out << "f_plus = \"" << mod.f_plus.to_string() << "\"\n";
    out << "g_plus = \"" << mod.g_plus.to_string() << "\"\n";
    if (!mod.label.empty()) out << "label = \"" << mod.label << "\"\n";
}

// Stable content hash of a model (used in output provenance blocks).
inline std::uint64_t model_hash(const FilippovModel& mod) {
    std::string s = mod.f_plus.to_string() + "|" + mod.g_plus.to_string() + "|" +
                    std::to_string(mod.m) + "|" + std::to_string(mod.a);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace csb
