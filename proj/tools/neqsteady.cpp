// Command-line driver: loads a scenario JSON, runs one analysis, and emits
// the report as CSV or JSON. Exit codes: 0 success, 2 invalid input or
// violated precondition, 3 numerical failure.

#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "neqsteady/neqsteady.hpp"

namespace {

struct CommonOpts {
    std::string config;
    std::string out;
    std::string format = "csv";
    std::string lamb = "pv";
    double energy_offset = 0.0;
    unsigned seed = 12345;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-c,--config", o.config, "scenario JSON file")
        ->required();
    cmd->add_option("-o,--out", o.out,
                    "write the report to this file instead of stdout");
    cmd->add_option("--format", o.format, "report format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--lamb-shift", o.lamb,
                    "imaginary rate parts: principal-value integral or none")
        ->check(CLI::IsMember({"pv", "none"}))
        ->capture_default_str();
    cmd->add_option("--energy-offset", o.energy_offset,
                    "rigid shift added to every level before the analysis")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "seed for auxiliary sampling")
        ->capture_default_str();
}

int run_kind(const std::string& kind, const CommonOpts& o,
             const std::function<void(neqsteady::Scenario&)>& tweak) {
    neqsteady::log::debug("seed " + std::to_string(o.seed));
    neqsteady::Scenario sc = neqsteady::load_scenario(o.config);
    if (o.energy_offset != 0.0)
        neqsteady::apply_energy_offset(sc, o.energy_offset);
    if (tweak) tweak(sc);
    const neqsteady::LambShift shift = o.lamb == "pv"
                                           ? neqsteady::LambShift::pv
                                           : neqsteady::LambShift::none;
    const neqsteady::ReportDocument doc =
        neqsteady::run_analysis(sc, kind, shift);
    const std::string text = neqsteady::emit_report(doc, o.format);
    if (o.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(o.out);
        if (!f)
            neqsteady::fail_validation("IoError",
                                       "cannot write '" + o.out + "'");
        f << text;
    }
    return 0;
}

// Flag overrides land in the analysis block so config and CLI share one
// parameter path. A block typed for a different runner would be ignored
// by the requested one, so the first override replaces it outright; the
// flags dedicate the analysis to the requested kind.
void set_param(neqsteady::Scenario& sc, const std::string& kind,
               const std::string& key, const neqsteady::Json& value) {
    if (sc.analysis.is_object() && sc.analysis.contains("type") &&
        sc.analysis.at("type").is_string() &&
        sc.analysis.at("type").get<std::string>() != kind)
        sc.analysis = neqsteady::Json::object();
    if (!sc.analysis.is_object()) sc.analysis = neqsteady::Json::object();
    sc.analysis[key] = value;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "stationary states, micro-currents, and balance certificates for "
        "reservoir-driven level systems"};
    app.require_subcommand(1);

    CommonOpts o_validate, o_steady, o_evolve, o_currents, o_onsager, o_kms,
        o_ddb, o_sweep;

    CLI::App* c_validate = app.add_subcommand(
        "validate", "check the scenario and print the channel rate table");
    add_common(c_validate, o_validate);

    CLI::App* c_steady = app.add_subcommand(
        "steady", "stationary state and its level temperature profile");
    add_common(c_steady, o_steady);

    CLI::App* c_evolve =
        app.add_subcommand("evolve", "propagate an initial state for time t");
    add_common(c_evolve, o_evolve);
    double evolve_t = 1.0;
    std::string evolve_initial;
    CLI::Option* opt_t =
        c_evolve->add_option("--t", evolve_t, "evolution time");
    CLI::Option* opt_initial = c_evolve->add_option(
        "--initial", evolve_initial,
        "maximally_mixed, ground, or a density-matrix file");

    CLI::App* c_currents = app.add_subcommand(
        "currents", "stationary per-reservoir channel currents and balances");
    add_common(c_currents, o_currents);

    CLI::App* c_onsager = app.add_subcommand(
        "onsager", "linear transport coefficients about the bath midpoint");
    add_common(c_onsager, o_onsager);
    double onsager_step = 1e-4;
    CLI::Option* opt_step = c_onsager->add_option(
        "--step", onsager_step, "finite-difference bias step");

    CLI::App* c_kms = app.add_subcommand(
        "kms", "temperature profile and modular exchange residual");
    add_common(c_kms, o_kms);

    CLI::App* c_ddb = app.add_subcommand(
        "ddb", "forward/backward asymmetry and gauge-correction diagnostics");
    add_common(c_ddb, o_ddb);

    CLI::App* c_sweep = app.add_subcommand(
        "sweep", "stationary currents over a (delta_beta, delta_mu) grid");
    add_common(c_sweep, o_sweep);
    std::string sweep_dbeta, sweep_dmu;
    CLI::Option* opt_dbeta = c_sweep->add_option(
        "--delta-beta", sweep_dbeta, "grid as start:stop:npoints");
    CLI::Option* opt_dmu = c_sweep->add_option(
        "--delta-mu", sweep_dmu, "grid as start:stop:npoints");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (c_validate->parsed()) return run_kind("validate", o_validate, {});
        if (c_steady->parsed()) return run_kind("steady", o_steady, {});
        if (c_evolve->parsed())
            return run_kind("evolve", o_evolve, [&](neqsteady::Scenario& sc) {
                if (opt_t->count()) set_param(sc, "evolve", "t", evolve_t);
                if (opt_initial->count())
                    set_param(sc, "evolve", "initial", evolve_initial);
            });
        if (c_currents->parsed()) return run_kind("currents", o_currents, {});
        if (c_onsager->parsed())
            return run_kind("onsager", o_onsager, [&](neqsteady::Scenario& sc) {
                if (opt_step->count()) set_param(sc, "onsager", "step", onsager_step);
            });
        if (c_kms->parsed()) return run_kind("kms", o_kms, {});
        if (c_ddb->parsed()) return run_kind("ddb", o_ddb, {});
        if (c_sweep->parsed())
            return run_kind("sweep", o_sweep, [&](neqsteady::Scenario& sc) {
                if (opt_dbeta->count())
                    set_param(sc, "sweep", "delta_beta", sweep_dbeta);
                if (opt_dmu->count()) set_param(sc, "sweep", "delta_mu", sweep_dmu);
            });
        return 1;
    } catch (const neqsteady::ValidationError& e) {
        neqsteady::log::error(e.what());
        if (e.code() == "ZeroEnergyLevel")
            neqsteady::log::error(
                "hint: rerun with --energy-offset to move the spectrum off "
                "zero");
        return 2;
    } catch (const neqsteady::NumericalError& e) {
        neqsteady::log::error(e.what());
        return 3;
    } catch (const std::exception& e) {
        neqsteady::log::error(e.what());
        return 1;
    }
}
