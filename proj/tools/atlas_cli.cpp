// Command-line front end: scenario inspection, hypothesis checks,
// coefficient reports, pointwise classification, simulation, parameter
// sweeps and bifurcation-curve extraction.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../vendor/CLI11.hpp"
#include "csb/io.hpp"

namespace {

struct ModelArgs {
    std::string scenario;
    std::string model_file;
    std::string case_name;
};

void add_model_options(CLI::App* cmd, ModelArgs& ma) {
    auto* s = cmd->add_option("--scenario", ma.scenario,
                              "built-in scenario (s1, s2, s3)");
    auto* f = cmd->add_option("--model", ma.model_file, "model file path");
    s->excludes(f);
    cmd->add_option("--case", ma.case_name,
                    "analysis case: codim1, cusp or foldfold "
                    "(default: the scenario's own)");
}

csb::FilippovModel resolve_model(const ModelArgs& ma) {
    if (!ma.model_file.empty()) return csb::load_model_file(ma.model_file);
    if (!ma.scenario.empty()) return csb::load_scenario(ma.scenario);
    throw csb::ModelError("one of --scenario or --model is required");
}

csb::CaseTag resolve_case(const ModelArgs& ma) {
    if (ma.case_name.empty()) {
        if (!ma.scenario.empty()) return csb::default_case(ma.scenario);
        throw csb::ModelError("--case is required with --model");
    }
    if (ma.case_name == "codim1") return csb::CaseTag::Codim1;
    if (ma.case_name == "cusp") return csb::CaseTag::Cusp;
    if (ma.case_name == "foldfold") return csb::CaseTag::FoldFold;
    throw csb::ModelError("unknown case '" + ma.case_name + "'");
}

std::vector<double> parse_alpha(const std::string& s, int m) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    if (static_cast<int>(v.size()) != m)
        throw csb::ModelError("--alpha expects " + std::to_string(m) +
                              " comma-separated values");
    return v;
}

// "lo:hi:n" range syntax for sweep axes.
void parse_range(const std::string& s, double& lo, double& hi, int& n) {
    std::stringstream ss(s);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') ||
        !std::getline(ss, c, ':'))
        throw csb::ModelError("range must be lo:hi:n, got '" + s + "'");
    lo = std::stod(a);
    hi = std::stod(b);
    n = std::stoi(c);
    if (n < 1) throw csb::ModelError("range count must be >= 1");
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") std::cout << content;
    else csb::write_text(path, content);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bifurcation atlas for planar symmetric piecewise-smooth "
                 "systems"};
    app.require_subcommand(1);

    auto* sc = app.add_subcommand("scenario", "built-in scenario utilities");
    sc->require_subcommand(1);
    sc->add_subcommand("list", "list the built-in scenarios");

    ModelArgs ma_check, ma_coeffs, ma_classify, ma_sim, ma_sweep, ma_curves;

    auto* cmd_check =
        app.add_subcommand("check", "verify the standing hypotheses");
    add_model_options(cmd_check, ma_check);

    auto* cmd_coeffs =
        app.add_subcommand("coeffs", "loop and unfolding coefficients");
    add_model_options(cmd_coeffs, ma_coeffs);
    bool coeffs_json = false;
    cmd_coeffs->add_flag("--json", coeffs_json, "emit JSON");

    auto* cmd_classify = app.add_subcommand(
        "classify", "classify the dynamics at one parameter point");
    add_model_options(cmd_classify, ma_classify);
    std::string alpha_str;
    cmd_classify->add_option("--alpha", alpha_str,
                             "comma-separated parameter values")
        ->required();

    auto* cmd_sim = app.add_subcommand("simulate", "integrate one trajectory");
    add_model_options(cmd_sim, ma_sim);
    double x0 = 0, y0 = 0, t_max = 10;
    std::string sim_alpha, sim_out;
    cmd_sim->add_option("--x0", x0, "initial x")->required();
    cmd_sim->add_option("--y0", y0, "initial y")->required();
    cmd_sim->add_option("--t", t_max, "integration time")->required();
    cmd_sim->add_option("--alpha", sim_alpha, "parameter values (default 0)");
    cmd_sim->add_option("--out", sim_out, "output CSV path ('-' for stdout)");

    auto* cmd_sweep =
        app.add_subcommand("sweep", "two-parameter sweep in measured "
                                    "unfolding coordinates");
    add_model_options(cmd_sweep, ma_sweep);
    std::string b1_range = "-1e-2:1e-2:201", b2_range = "-1e-2:1e-2:201";
    int threads = 0;
    std::string sweep_out;
    cmd_sweep->add_option("--b1", b1_range, "first axis, lo:hi:n");
    cmd_sweep->add_option("--b2", b2_range, "second axis, lo:hi:n");
    cmd_sweep->add_option("--threads", threads,
                          "worker count (ATLAS_THREADS overrides)");
    cmd_sweep->add_option("--out", sweep_out, "output JSON path");

    auto* cmd_curves =
        app.add_subcommand("curves", "extract bifurcation curves");
    add_model_options(cmd_curves, ma_curves);
    int rays = 16;
    double b1_max = 1e-2;
    std::string curves_out;
    cmd_curves->add_option("--rays", rays, "number of rays per curve");
    cmd_curves->add_option("--b1-max", b1_max, "largest |b1| sampled");
    cmd_curves->add_option("--out", curves_out, "output JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sc->parsed()) {
            std::printf("s1  single regular tangency        (case codim1)\n");
            std::printf("s2  degenerate tangency            (case cusp)\n");
            std::printf("s3  double tangency                (case foldfold)\n");
            return 0;
        }
        if (cmd_check->parsed()) {
            csb::FilippovModel mod = resolve_model(ma_check);
            csb::CaseTag tag = resolve_case(ma_check);
            csb::HypothesisReport rep = csb::check_hypotheses(mod, tag);
            std::cout << csb::dump_json(csb::to_json(rep));
            return rep.ok ? 0 : 2;
        }
        if (cmd_coeffs->parsed()) {
            csb::FilippovModel mod = resolve_model(ma_coeffs);
            csb::CaseTag tag = resolve_case(ma_coeffs);
            csb::CoefficientReport co = csb::coefficient_report(mod, tag);
            if (coeffs_json) {
                std::cout << csb::dump_json(csb::to_json(co));
            } else {
                std::printf("case       %s\n", to_string(tag).c_str());
                std::printf("tau0       %.12g\n", co.tau0);
                std::printf("lambda0    %.12g\n", co.lambda0);
                auto row = [](const char* name, const std::vector<double>& v) {
                    if (v.empty() || std::isnan(v[0])) return;
                    std::printf("%-10s", name);
                    for (double x : v) std::printf(" %.12g", x);
                    std::printf("\n");
                };
                row("kappa", co.kappa);
                row("theta", co.theta);
                row("zeta", co.zeta);
                row("eta", co.eta);
                row("mu", co.mu);
                if (tag == csb::CaseTag::FoldFold) {
                    std::printf("Delta      %.12g\n", co.Delta);
                    std::printf("r          %.12g\n", co.r);
                    std::printf("vartheta   %.12g %.12g %.12g %.12g %.12g\n",
                                co.vt3, co.vt4, co.vt5, co.vt6, co.vt7);
                }
            }
            return 0;
        }
        if (cmd_classify->parsed()) {
            csb::FilippovModel mod = resolve_model(ma_classify);
            csb::CaseTag tag = resolve_case(ma_classify);
            std::vector<double> al = parse_alpha(alpha_str, mod.m);
            csb::SectionSpec sec = csb::reference_section(mod);
            csb::RegionLabel rl =
                csb::classify_dynamics(mod, sec, tag, al.data(), {}, true);
            csb::json j = csb::to_json(rl);
            j["alpha"] = al;
            std::cout << csb::dump_json(j);
            return 0;
        }
        if (cmd_sim->parsed()) {
            csb::FilippovModel mod = resolve_model(ma_sim);
            std::vector<double> al(mod.m, 0.0);
            if (!sim_alpha.empty()) al = parse_alpha(sim_alpha, mod.m);
            csb::Trajectory traj =
                csb::flow_filippov(mod, x0, y0, al.data(), t_max);
            std::ostringstream csv;
            csb::write_trajectory_csv(traj, csv);
            emit(sim_out, csv.str());
            std::fprintf(stderr, "status %s  t_end %.12g  events %zu\n",
                         traj.status.c_str(), traj.t_end, traj.events.size());
            return traj.status == "ok" || traj.status == "ambiguous" ? 0 : 3;
        }
        if (cmd_sweep->parsed()) {
            csb::FilippovModel mod = resolve_model(ma_sweep);
            csb::CaseTag tag = resolve_case(ma_sweep);
            csb::SectionSpec sec = csb::reference_section(mod);
            csb::GridSpec grid;
            parse_range(b1_range, grid.b1_lo, grid.b1_hi, grid.n1);
            parse_range(b2_range, grid.b2_lo, grid.b2_hi, grid.n2);
            csb::Diagram dia =
                csb::run_sweep(mod, sec, tag, grid, threads);
            emit(sweep_out, csb::dump_json(csb::to_json(dia)));
            return 0;
        }
        if (cmd_curves->parsed()) {
            csb::FilippovModel mod = resolve_model(ma_curves);
            csb::CaseTag tag = resolve_case(ma_curves);
            csb::SectionSpec sec = csb::reference_section(mod);
            auto curves = csb::extract_curves(mod, sec, tag, rays, b1_max);
            csb::CoefficientReport co = csb::coefficient_report(mod, tag);
            csb::json j;
            j["case"] = to_string(tag);
            j["provenance"] = csb::to_json(csb::make_provenance(mod));
            j["curves"] = csb::to_json(curves);
            csb::json fits = csb::json::array();
            for (const auto& entry : csb::curve_inventory(tag, co)) {
                auto it = curves.find(entry.name);
                if (it == curves.end()) continue;
                fits.push_back(csb::to_json(csb::fit_asymptotics(
                    entry.name, it->second, entry.form, 1e-2,
                    entry.predicted)));
            }
            j["fits"] = fits;
            emit(curves_out, csb::dump_json(j));
            return 0;
        }
    } catch (const csb::ModelError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const csb::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
