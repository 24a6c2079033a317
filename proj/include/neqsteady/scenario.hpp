#pragma once

// JSON scenario loading and the analysis runners behind the command-line
// driver. Configs are rejected on any unknown key so a typo cannot
// silently change a run. All level indices in files are 0-based.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <future>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "neqsteady/currents.hpp"
#include "neqsteady/errors.hpp"
#include "neqsteady/format.hpp"
#include "neqsteady/generator.hpp"
#include "neqsteady/kms.hpp"
#include "neqsteady/linear_response.hpp"
#include "neqsteady/rates.hpp"
#include "neqsteady/reservoir.hpp"
#include "neqsteady/system.hpp"

namespace neqsteady {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline void check_keys(const Json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known =
            std::any_of(allowed.begin(), allowed.end(),
                        [&](const char* k) { return it.key() == k; });
        if (!known)
            fail_validation("ConfigError",
                            "unknown key '" + it.key() + "' at " + path);
    }
}

inline const Json& need(const Json& obj, const char* key,
                        const std::string& path) {
    if (!obj.is_object() || !obj.contains(key))
        fail_validation("ConfigError", "missing key '" + std::string(key) +
                                           "' at " + path);
    return obj.at(key);
}

inline double as_number(const Json& v, const std::string& path) {
    if (!v.is_number())
        fail_validation("ConfigError", path + " must be a number");
    return v.get<double>();
}

inline int as_int(const Json& v, const std::string& path) {
    if (!v.is_number_integer())
        fail_validation("ConfigError", path + " must be an integer");
    return v.get<int>();
}

inline std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string())
        fail_validation("ConfigError", path + " must be a string");
    return v.get<std::string>();
}

inline std::pair<std::vector<double>, std::vector<double>> as_points(
    const Json& v, const std::string& path) {
    if (!v.is_array() || v.empty())
        fail_validation("ConfigError", path + " must be a nonempty array");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Json& p = v[i];
        if (!p.is_array() || p.size() != 2)
            fail_validation("ConfigError",
                            path + "[" + std::to_string(i) + "] must be [x, y]");
        xs.push_back(as_number(p[0], path));
        ys.push_back(as_number(p[1], path));
    }
    return {std::move(xs), std::move(ys)};
}

}  // namespace detail

inline SpectralDensity parse_spectral_density(const Json& j,
                                              const std::string& path) {
    const std::string form = detail::as_string(detail::need(j, "form", path),
                                               path + ".form");
    if (form == "flat") {
        detail::check_keys(j, path, {"form", "eta"});
        return SpectralDensity::flat(
            detail::as_number(detail::need(j, "eta", path), path + ".eta"));
    }
    if (form == "ohmic") {
        detail::check_keys(j, path, {"form", "eta", "omega_c"});
        return SpectralDensity::ohmic(
            detail::as_number(detail::need(j, "eta", path), path + ".eta"),
            detail::as_number(detail::need(j, "omega_c", path),
                              path + ".omega_c"));
    }
    if (form == "tabulated") {
        detail::check_keys(j, path, {"form", "points"});
        auto [xs, ys] =
            detail::as_points(detail::need(j, "points", path), path + ".points");
        return SpectralDensity::tabulated(std::move(xs), std::move(ys));
    }
    fail_validation("ConfigError",
                    "unknown spectral density form '" + form + "' at " + path);
}

inline BetaProfile parse_beta_profile(const Json& j, const std::string& path) {
    const std::string form = detail::as_string(detail::need(j, "form", path),
                                               path + ".form");
    if (form == "constant") {
        detail::check_keys(j, path, {"form", "beta"});
        return BetaProfile::constant(
            detail::as_number(detail::need(j, "beta", path), path + ".beta"));
    }
    if (form == "inverse") {
        detail::check_keys(j, path, {"form", "scale"});
        const double scale =
            j.contains("scale")
                ? detail::as_number(j.at("scale"), path + ".scale")
                : 1.0;
        return BetaProfile::inverse(scale);
    }
    if (form == "affine") {
        detail::check_keys(j, path, {"form", "beta0", "slope"});
        return BetaProfile::affine(
            detail::as_number(detail::need(j, "beta0", path), path + ".beta0"),
            detail::as_number(detail::need(j, "slope", path), path + ".slope"));
    }
    if (form == "tabulated") {
        detail::check_keys(j, path, {"form", "points"});
        auto [xs, ys] =
            detail::as_points(detail::need(j, "points", path), path + ".points");
        return BetaProfile::tabulated(std::move(xs), std::move(ys));
    }
    fail_validation("ConfigError",
                    "unknown beta_fn form '" + form + "' at " + path);
}

inline ReservoirSpec parse_reservoir(const Json& j, const std::string& path) {
    const std::string kind = detail::as_string(detail::need(j, "kind", path),
                                               path + ".kind");
    const double pv_cutoff =
        j.contains("pv_cutoff")
            ? detail::as_number(j.at("pv_cutoff"), path + ".pv_cutoff")
            : 50.0;
    SpectralDensity sd = parse_spectral_density(
        detail::need(j, "spectral_density", path), path + ".spectral_density");
    if (kind == "equilibrium") {
        detail::check_keys(j, path,
                           {"kind", "beta", "mu", "spectral_density",
                            "pv_cutoff"});
        const double beta =
            detail::as_number(detail::need(j, "beta", path), path + ".beta");
        const double mu =
            j.contains("mu") ? detail::as_number(j.at("mu"), path + ".mu")
                             : 0.0;
        return ReservoirSpec::equilibrium(beta, mu, std::move(sd), pv_cutoff);
    }
    if (kind == "local_equilibrium") {
        detail::check_keys(j, path,
                           {"kind", "beta_fn", "spectral_density", "pv_cutoff"});
        return ReservoirSpec::local_equilibrium(
            parse_beta_profile(detail::need(j, "beta_fn", path),
                               path + ".beta_fn"),
            std::move(sd), pv_cutoff);
    }
    fail_validation("ConfigError",
                    "reservoir kind must be 'equilibrium' or "
                    "'local_equilibrium' at " +
                        path);
}

struct Scenario {
    SystemSpec spec;
    std::vector<ReservoirSpec> reservoirs;
    Json analysis;  // null when the config has no analysis block
};

inline Scenario parse_scenario(const Json& cfg) {
    if (!cfg.is_object())
        fail_validation("ConfigError", "config root must be an object");
    detail::check_keys(cfg, "config",
                       {"levels", "dipoles", "reservoirs", "analysis"});

    const Json& jl = detail::need(cfg, "levels", "config");
    if (!jl.is_array() || jl.size() < 2)
        fail_validation("ConfigError",
                        "config.levels must list at least two energies");
    Eigen::VectorXd levels(jl.size());
    for (std::size_t i = 0; i < jl.size(); ++i)
        levels(static_cast<Eigen::Index>(i)) =
            detail::as_number(jl[i], "config.levels[" + std::to_string(i) + "]");
    const int n = static_cast<int>(levels.size());

    const Json& jr = detail::need(cfg, "reservoirs", "config");
    if (!jr.is_array() || jr.empty())
        fail_validation("ConfigError",
                        "config.reservoirs must be a nonempty array");
    Scenario sc;
    for (std::size_t i = 0; i < jr.size(); ++i)
        sc.reservoirs.push_back(parse_reservoir(
            jr[i], "config.reservoirs[" + std::to_string(i) + "]"));

    const Json& jd = detail::need(cfg, "dipoles", "config");
    if (!jd.is_array())
        fail_validation("ConfigError", "config.dipoles must be an array");
    std::vector<Eigen::MatrixXcd> dipoles(
        sc.reservoirs.size(), Eigen::MatrixXcd::Zero(n, n));
    std::vector<bool> seen(sc.reservoirs.size(), false);
    for (std::size_t b = 0; b < jd.size(); ++b) {
        const std::string path = "config.dipoles[" + std::to_string(b) + "]";
        detail::check_keys(jd[b], path, {"reservoir", "entries"});
        const int res =
            detail::as_int(detail::need(jd[b], "reservoir", path),
                           path + ".reservoir");
        if (res < 0 || res >= static_cast<int>(sc.reservoirs.size()))
            fail_validation("ConfigError",
                            path + ".reservoir is out of range");
        if (seen[static_cast<std::size_t>(res)])
            fail_validation("ConfigError",
                            path + " duplicates a reservoir block");
        seen[static_cast<std::size_t>(res)] = true;
        const Json& je = detail::need(jd[b], "entries", path);
        if (!je.is_array())
            fail_validation("ConfigError", path + ".entries must be an array");
        for (std::size_t e = 0; e < je.size(); ++e) {
            const std::string ep = path + ".entries[" + std::to_string(e) + "]";
            const Json& row = je[e];
            if (!row.is_array() || row.size() != 4)
                fail_validation("ConfigError", ep + " must be [l, m, re, im]");
            const int l = detail::as_int(row[0], ep + "[0]");
            const int m = detail::as_int(row[1], ep + "[1]");
            if (l < 0 || m < 0 || l >= n || m >= n || l >= m)
                fail_validation("ConfigError",
                                ep + " needs level indices 0 <= l < m < " +
                                    std::to_string(n));
            dipoles[static_cast<std::size_t>(res)](l, m) =
                Cplx(detail::as_number(row[2], ep + "[2]"),
                     detail::as_number(row[3], ep + "[3]"));
        }
    }

    sc.spec = validate_system(levels, dipoles);
    sc.analysis = cfg.contains("analysis") ? cfg.at("analysis") : Json();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail_validation("IoError", "cannot open config file '" + path + "'");
    Json cfg;
    try {
        cfg = Json::parse(in);
    } catch (const Json::parse_error& e) {
        fail_validation("ConfigError",
                        "config is not valid JSON: " + std::string(e.what()));
    }
    return parse_scenario(cfg);
}

// Rigid shift of the whole spectrum. Gaps, rates, and dynamics are
// unchanged; only level-resolved quantities (beta_S, energy columns) move.
inline void apply_energy_offset(Scenario& sc, double offset) {
    sc.spec.levels.array() += offset;
}

// Density matrix file: n*n lines of "re im" in row-major order.
inline DensityMatrix read_state_file(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in)
        fail_validation("IoError", "cannot open state file '" + path + "'");
    DensityMatrix rho(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            double re, im;
            if (!(in >> re >> im))
                fail_validation("InconsistentDimensions",
                                "state file '" + path + "' does not hold " +
                                    std::to_string(n * n) + " complex entries");
            rho(r, c) = Cplx(re, im);
        }
    double extra;
    if (in >> extra)
        fail_validation("InconsistentDimensions",
                        "state file '" + path + "' holds trailing data");
    return rho;
}

inline std::string format_state(const Mat& rho) {
    std::string out;
    for (Eigen::Index r = 0; r < rho.rows(); ++r)
        for (Eigen::Index c = 0; c < rho.cols(); ++c) {
            out += fmt_g17(rho(r, c).real());
            out += ' ';
            out += fmt_g17(rho(r, c).imag());
            out += '\n';
        }
    return out;
}

// Inclusive sampling grid written as "start:stop:npoints".
struct Range {
    double start = 0.0;
    double stop = 0.0;
    int npoints = 1;

    std::vector<double> values() const {
        std::vector<double> v;
        if (npoints == 1) {
            v.push_back(start);
            return v;
        }
        const double step = (stop - start) / (npoints - 1);
        for (int i = 0; i < npoints; ++i) v.push_back(start + step * i);
        return v;
    }
};

inline Range parse_range(const Json& v, const std::string& path) {
    if (!v.is_string())
        fail_validation("ConfigError",
                        path + " must be a 'start:stop:npoints' string");
    const std::string s = v.get<std::string>();
    Range r;
    char c1 = 0, c2 = 0;
    std::istringstream iss(s);
    if (!(iss >> r.start >> c1 >> r.stop >> c2 >> r.npoints) || c1 != ':' ||
        c2 != ':' || (iss >> std::ws, !iss.eof()))
        fail_validation("ConfigError",
                        path + " must be a 'start:stop:npoints' string");
    if (r.npoints < 1)
        fail_validation("ConfigError", path + " needs npoints >= 1");
    if (r.npoints == 1 && r.start != r.stop)
        fail_validation("ConfigError",
                        path + " with one point needs start == stop");
    return r;
}

struct ReportDocument {
    std::string kind;
    Json body;
    CsvTable table{std::vector<std::string>{}};
};

inline std::string emit_report(const ReportDocument& doc,
                               const std::string& format) {
    if (format == "csv") return doc.table.str();
    if (format == "json") {
        Json out;
        out["schema_version"] = kSchemaVersion;
        out["kind"] = doc.kind;
        for (auto it = doc.body.begin(); it != doc.body.end(); ++it)
            out[it.key()] = it.value();
        return out.dump(2) + "\n";
    }
    fail_validation("ConfigError", "output format must be 'csv' or 'json'");
}

namespace detail {

// Analysis block of the config, restricted to the keys the runner reads.
// A block typed for a different analysis is ignored, so one config can
// serve several subcommands; an untyped block must fit the requested one.
inline Json analysis_params(const Scenario& sc, const char* kind,
                            std::initializer_list<const char*> allowed) {
    if (sc.analysis.is_null()) return Json::object();
    if (!sc.analysis.is_object())
        fail_validation("ConfigError", "config.analysis must be an object");
    if (sc.analysis.contains("type")) {
        const std::string t =
            as_string(sc.analysis.at("type"), "config.analysis.type");
        if (t != kind) return Json::object();
    }
    std::vector<const char*> all{"type"};
    all.insert(all.end(), allowed.begin(), allowed.end());
    for (auto it = sc.analysis.begin(); it != sc.analysis.end(); ++it) {
        const bool known = std::any_of(all.begin(), all.end(), [&](const char* k) {
            return it.key() == k;
        });
        if (!known)
            fail_validation("ConfigError", "unknown key '" + it.key() +
                                               "' at config.analysis");
    }
    return sc.analysis;
}

inline void require_twin_equilibrium(const Scenario& sc) {
    if (sc.reservoirs.size() != 2 ||
        sc.reservoirs[0].kind != ReservoirKind::Equilibrium ||
        sc.reservoirs[1].kind != ReservoirKind::Equilibrium)
        fail_validation("ConfigError",
                        "this analysis needs exactly two equilibrium "
                        "reservoirs");
    const ReservoirSpec& a = sc.reservoirs[0];
    const ReservoirSpec& b = sc.reservoirs[1];
    if (a.pv_cutoff != b.pv_cutoff)
        fail_validation("ConfigError",
                        "the two reservoirs must share pv_cutoff");
    const BohrTable table = bohr_frequencies(sc.spec);
    for (const BohrEntry& ch : table.entries)
        if (a.spectral_density(ch.omega) != b.spectral_density(ch.omega))
            fail_validation("ConfigError",
                            "the two reservoirs must share one spectral "
                            "density");
}

inline Json pair_currents_json(const CurrentReport& rep) {
    Json arr = Json::array();
    for (const PairCurrent& pc : rep.entries) {
        arr.push_back(Json{{"reservoir", pc.reservoir},
                           {"m", pc.m},
                           {"n", pc.n},
                           {"omega", pc.omega},
                           {"J", pc.J},
                           {"JE", pc.JE},
                           {"JQ", pc.JQ},
                           {"inactive", pc.inactive}});
    }
    return arr;
}

inline Json vector_json(const Eigen::VectorXd& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

inline Json state_json(const Mat& rho) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < rho.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < rho.cols(); ++c)
            row.push_back(Json::array({rho(r, c).real(), rho(r, c).imag()}));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace detail

inline ReportDocument run_validate(const Scenario& sc, LambShift shift) {
    detail::analysis_params(sc, "validate", {});
    const RateSet rs = rate_set(sc.spec, sc.reservoirs, shift);

    ReportDocument doc;
    doc.kind = "validate";
    doc.table = CsvTable(
        {"omega", "reservoir", "re_gm", "re_gp", "im_gm", "im_gp"});
    Json channels = Json::array();
    for (int c = 0; c < rs.channel_count(); ++c) {
        const BohrEntry& ch = rs.channel(c);
        Json per_res = Json::array();
        for (int j = 0; j < rs.n_reservoirs; ++j) {
            const Susceptivity& s = rs.sus[static_cast<std::size_t>(c)]
                                          [static_cast<std::size_t>(j)];
            doc.table.add_row({fmt_g17(ch.omega), std::to_string(j),
                               fmt_g17(s.gamma_minus.real()),
                               fmt_g17(s.gamma_plus.real()),
                               fmt_g17(s.gamma_minus.imag()),
                               fmt_g17(s.gamma_plus.imag())});
            per_res.push_back(Json{{"reservoir", j},
                                   {"re_gm", s.gamma_minus.real()},
                                   {"re_gp", s.gamma_plus.real()},
                                   {"im_gm", s.gamma_minus.imag()},
                                   {"im_gp", s.gamma_plus.imag()}});
        }
        channels.push_back(Json{{"m", ch.upper},
                                {"n", ch.lower},
                                {"omega", ch.omega},
                                {"Gamma_minus", rs.Gamma_minus[c]},
                                {"Gamma_plus", rs.Gamma_plus[c]},
                                {"susceptivities", per_res}});
    }
    doc.body["n_levels"] = sc.spec.n_levels();
    doc.body["n_reservoirs"] = static_cast<int>(sc.reservoirs.size());
    doc.body["channels"] = channels;
    doc.body["delta_diag"] = detail::vector_json(rs.Delta_diag);
    return doc;
}

inline ReportDocument run_steady(const Scenario& sc, LambShift shift) {
    detail::analysis_params(sc, "steady", {});
    const RateSet rs = rate_set(sc.spec, sc.reservoirs, shift);
    const GeneratorOps ops = build_generators(sc.spec, rs);
    const DensityMatrix rho = stationary_state(ops);
    const TemperatureProfile tp =
        beta_profile(rho, sc.spec.levels, /*strict_levels=*/false);

    ReportDocument doc;
    doc.kind = "steady";
    doc.table = CsvTable({"level", "energy", "population", "B", "beta_S"});
    for (int l = 0; l < sc.spec.n_levels(); ++l)
        doc.table.add_row({std::to_string(l), fmt_g17(sc.spec.levels(l)),
                           fmt_g17(rho(l, l).real()), fmt_g17(tp.B(l)),
                           fmt_g17(tp.beta_S(l))});
    doc.body["populations"] = detail::vector_json(rho.diagonal().real());
    doc.body["B"] = detail::vector_json(tp.B);
    doc.body["beta_S"] = detail::vector_json(tp.beta_S);
    doc.body["beta_spread"] = tp.spread;
    doc.body["equilibrium"] = tp.equilibrium;
    doc.body["drift_norm"] = ops.apply_lstar(rho).norm();
    doc.body["state"] = detail::state_json(rho);
    return doc;
}

inline ReportDocument run_evolve(const Scenario& sc, LambShift shift) {
    const Json p = detail::analysis_params(sc, "evolve", {"t", "initial"});
    const double t = p.contains("t")
                         ? detail::as_number(p.at("t"), "config.analysis.t")
                         : 1.0;
    const std::string initial =
        p.contains("initial")
            ? detail::as_string(p.at("initial"), "config.analysis.initial")
            : "maximally_mixed";

    const RateSet rs = rate_set(sc.spec, sc.reservoirs, shift);
    const GeneratorOps ops = build_generators(sc.spec, rs);
    const int n = sc.spec.n_levels();

    DensityMatrix rho0;
    if (initial == "maximally_mixed") {
        rho0 = DensityMatrix::Identity(n, n) / static_cast<double>(n);
    } else if (initial == "ground") {
        rho0 = DensityMatrix::Zero(n, n);
        rho0(0, 0) = 1.0;
    } else {
        rho0 = read_state_file(initial, n);
    }

    const DensityMatrix rho_t = evolve(ops, rho0, t);

    ReportDocument doc;
    doc.kind = "evolve";
    doc.table = CsvTable(
        {"level", "energy", "population_initial", "population_final"});
    for (int l = 0; l < n; ++l)
        doc.table.add_row({std::to_string(l), fmt_g17(sc.spec.levels(l)),
                           fmt_g17(rho0(l, l).real()),
                           fmt_g17(rho_t(l, l).real())});
    doc.body["t"] = t;
    doc.body["initial"] = initial;
    doc.body["populations_initial"] = detail::vector_json(rho0.diagonal().real());
    doc.body["populations_final"] = detail::vector_json(rho_t.diagonal().real());
    doc.body["state_final"] = detail::state_json(rho_t);
    doc.body["trace_final"] = rho_t.trace().real();
    return doc;
}

inline ReportDocument run_currents(const Scenario& sc, LambShift shift) {
    detail::analysis_params(sc, "currents", {});
    const RateSet rs = rate_set(sc.spec, sc.reservoirs, shift);
    const GeneratorOps ops = build_generators(sc.spec, rs);
    const DensityMatrix rho = stationary_state(ops);
    CurrentReport rep = micro_currents(rs, rho);
    const BalanceResiduals bal = level_balance(rep, ops, rho);
    const DetailedBalanceResult db = detailed_balance_test(rs, rho);

    const bool twin_eq =
        sc.reservoirs.size() == 2 &&
        sc.reservoirs[0].kind == ReservoirKind::Equilibrium &&
        sc.reservoirs[1].kind == ReservoirKind::Equilibrium;
    if (twin_eq) rep.gibbs_bound = gibbs_domination(rs, rho, sc.reservoirs);

    ReportDocument doc;
    doc.kind = "currents";
    doc.table = CsvTable(
        {"reservoir", "m", "n", "omega", "J", "JE", "JQ", "defect"});
    for (const PairCurrent& pc : rep.entries)
        doc.table.add_row({std::to_string(pc.reservoir), std::to_string(pc.m),
                           std::to_string(pc.n), fmt_g17(pc.omega),
                           fmt_g17(pc.J), fmt_g17(pc.JE), fmt_g17(pc.JQ),
                           fmt_g17(rep.ddb_defect(pc.m, pc.n))});
    doc.body["entries"] = detail::pair_currents_json(rep);
    doc.body["level_balance"] = detail::vector_json(rep.level_balance);
    doc.body["total_energy_flow"] = rep.total_energy_flow;
    doc.body["db_satisfied"] = rep.db_satisfied;
    doc.body["detailed_balance_defect_max"] = [&] {
        double worst = 0.0;
        for (int m = 0; m < sc.spec.n_levels(); ++m)
            for (int l = 0; l < sc.spec.n_levels(); ++l)
                worst = std::max(worst, std::abs(db.defect(m, l)));
        return worst;
    }();
    doc.body["level_balance_residual"] = bal.level.cwiseAbs().maxCoeff();
    doc.body["energy_balance_residual"] = std::abs(bal.energy);
    if (twin_eq) {
        Json verdicts = Json::array();
        for (const GibbsVerdict& g : rep.gibbs_bound)
            verdicts.push_back(Json{{"m", g.m},
                                    {"n", g.n},
                                    {"omega", g.omega},
                                    {"qualifying", g.qualifying},
                                    {"within", g.within},
                                    {"ratio", g.ratio},
                                    {"lo", g.lo},
                                    {"hi", g.hi}});
        doc.body["gibbs_bound"] = verdicts;
    }
    return doc;
}

inline ReportDocument run_onsager(const Scenario& sc, LambShift shift) {
    const Json p = detail::analysis_params(sc, "onsager", {"step"});
    const double h =
        p.contains("step")
            ? detail::as_number(p.at("step"), "config.analysis.step")
            : 1e-4;
    detail::require_twin_equilibrium(sc);

    const ReservoirSpec& r1 = sc.reservoirs[0];
    const ReservoirSpec& r2 = sc.reservoirs[1];
    const SymmetricSplit split =
        symmetric_split(r1.beta, r2.beta, r1.mu, r2.mu);
    ReservoirSpec base = r1;
    base.beta = split.beta0;
    base.mu = split.mu0;

    const OnsagerReport rep = onsager_matrix(sc.spec, base, h, shift);
    const LinearCurrentReport lin = linear_currents(sc.spec, r1, r2, shift);

    ReportDocument doc;
    doc.kind = "onsager";
    doc.table = CsvTable({"m", "n", "omega", "Gamma_on", "L_fd_12", "L_fd_21",
                          "M_on", "sigma", "reciprocity_defect"});
    Json pairs = Json::array();
    for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
        const OnsagerPair& op = rep.pairs[i];
        const double sigma = i < lin.pairs.size() ? lin.pairs[i].sigma : 0.0;
        doc.table.add_row({std::to_string(op.m), std::to_string(op.n),
                           fmt_g17(op.omega), fmt_g17(op.Gamma_on),
                           fmt_g17(op.L_fd_12), fmt_g17(op.L_fd_21),
                           fmt_g17(op.M_on), fmt_g17(sigma),
                           fmt_g17(op.reciprocity_defect)});
        pairs.push_back(Json{{"m", op.m},
                             {"n", op.n},
                             {"omega", op.omega},
                             {"Gamma_on", op.Gamma_on},
                             {"L_fd_12", op.L_fd_12},
                             {"L_fd_21", op.L_fd_21},
                             {"M_on", op.M_on},
                             {"L_ref", op.L_ref},
                             {"M_ref", op.M_ref},
                             {"sigma", sigma},
                             {"reciprocity_defect", op.reciprocity_defect}});
    }
    doc.body["beta0"] = split.beta0;
    doc.body["mu0"] = split.mu0;
    doc.body["delta_beta"] = split.dbeta;
    doc.body["delta_mu"] = split.dmu;
    doc.body["step"] = h;
    doc.body["pairs"] = pairs;
    doc.body["sigma_total"] = lin.sigma_total;
    doc.body["reference_note"] =
        "L_ref and M_ref are model closed forms; the finite-difference "
        "columns are authoritative";
    return doc;
}

inline ReportDocument run_kms(const Scenario& sc, LambShift shift) {
    const Json p = detail::analysis_params(sc, "kms", {"times"});
    std::vector<double> times{0.0, -0.7, 0.7, 3.1};
    if (p.contains("times")) {
        const Json& jt = p.at("times");
        if (!jt.is_array() || jt.empty())
            fail_validation("ConfigError",
                            "config.analysis.times must be a nonempty array");
        times.clear();
        for (std::size_t i = 0; i < jt.size(); ++i)
            times.push_back(detail::as_number(
                jt[i], "config.analysis.times[" + std::to_string(i) + "]"));
    }

    const RateSet rs = rate_set(sc.spec, sc.reservoirs, shift);
    const GeneratorOps ops = build_generators(sc.spec, rs);
    const DensityMatrix rho = stationary_state(ops);
    const TemperatureProfile tp =
        beta_profile(rho, sc.spec.levels, /*strict_levels=*/true);

    const int n = sc.spec.n_levels();
    double worst = 0.0;
    for (double t : times)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d) {
                        Mat x = Mat::Zero(n, n);
                        Mat y = Mat::Zero(n, n);
                        x(a, b) = 1.0;
                        y(c, d) = 1.0;
                        worst = std::max(
                            worst,
                            std::abs(local_kms_residual(rho, tp, x, y, t)));
                    }

    ReportDocument doc;
    doc.kind = "kms";
    doc.table = CsvTable({"level", "energy", "B", "beta_S"});
    for (int l = 0; l < n; ++l)
        doc.table.add_row({std::to_string(l), fmt_g17(sc.spec.levels(l)),
                           fmt_g17(tp.B(l)), fmt_g17(tp.beta_S(l))});
    doc.body["B"] = detail::vector_json(tp.B);
    doc.body["beta_S"] = detail::vector_json(tp.beta_S);
    doc.body["beta_spread"] = tp.spread;
    doc.body["equilibrium"] = tp.equilibrium;
    doc.body["times"] = times;
    doc.body["max_residual"] = worst;
    return doc;
}

inline ReportDocument run_ddb(const Scenario& sc, LambShift shift) {
    detail::analysis_params(sc, "ddb", {});
    const RateSet rs = rate_set(sc.spec, sc.reservoirs, shift);
    const GeneratorOps ops = build_generators(sc.spec, rs);
    const DensityMatrix rho = stationary_state(ops);
    const CurrentReport rep = micro_currents(rs, rho);
    const DetailedBalanceResult db = detailed_balance_test(rs, rho);
    const TemperatureProfile tp =
        beta_profile(rho, sc.spec.levels, /*strict_levels=*/false);

    const int n = sc.spec.n_levels();
    double worst_sym = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    Mat x = Mat::Zero(n, n);
                    Mat y = Mat::Zero(n, n);
                    x(a, b) = 1.0;
                    y(c, d) = 1.0;
                    worst_sym = std::max(
                        worst_sym,
                        ddb_symmetry_defect(ops, rs, rho, x, y).defect);
                }

    const double lgp = lg_plus_defect(ops, rs, tp);
    const std::vector<double> pi = pi_channel_defects(rs, tp);

    ReportDocument doc;
    doc.kind = "ddb";
    doc.table = CsvTable(
        {"m", "n", "omega", "channel_current", "db_defect", "pi_norm"});
    Json channels = Json::array();
    for (int c = 0; c < rs.channel_count(); ++c) {
        const BohrEntry& ch = rs.channel(c);
        const double cur = rep.ddb_defect(ch.upper, ch.lower);
        doc.table.add_row({std::to_string(ch.upper), std::to_string(ch.lower),
                           fmt_g17(ch.omega), fmt_g17(cur),
                           fmt_g17(db.defect(ch.upper, ch.lower)),
                           fmt_g17(pi[static_cast<std::size_t>(c)])});
        channels.push_back(Json{{"m", ch.upper},
                                {"n", ch.lower},
                                {"omega", ch.omega},
                                {"channel_current", cur},
                                {"db_defect", db.defect(ch.upper, ch.lower)},
                                {"pi_norm", pi[static_cast<std::size_t>(c)]}});
    }
    doc.body["channels"] = channels;
    doc.body["db_satisfied"] = db.satisfied;
    doc.body["symmetry_defect_max"] = worst_sym;
    doc.body["lg_plus_identity_norm"] = lgp;
    doc.body["beta_spread"] = tp.spread;
    return doc;
}

inline ReportDocument run_sweep(const Scenario& sc, LambShift shift) {
    const Json p =
        detail::analysis_params(sc, "sweep", {"delta_beta", "delta_mu"});
    detail::require_twin_equilibrium(sc);
    const ReservoirSpec& a = sc.reservoirs[0];
    const ReservoirSpec& b = sc.reservoirs[1];
    if (a.beta != b.beta || a.mu != b.mu)
        fail_validation("ConfigError",
                        "sweep needs identical reservoirs; the bias comes "
                        "from the grid");

    Range rb, rm;
    if (p.contains("delta_beta"))
        rb = parse_range(p.at("delta_beta"), "config.analysis.delta_beta");
    if (p.contains("delta_mu"))
        rm = parse_range(p.at("delta_mu"), "config.analysis.delta_mu");
    const std::vector<double> dbs = rb.values();
    const std::vector<double> dms = rm.values();
    if (dbs.size() * dms.size() > 10000)
        fail_validation("ConfigError", "sweep grid exceeds 10000 points");

    struct Row {
        double dbeta, dmu, J, JE, JQ, sigma;
    };
    auto job = [&](double db_, double dm_) {
        const ReservoirSpec r1 = shifted_bath(a, +0.5 * db_, -0.5 * dm_);
        const ReservoirSpec r2 = shifted_bath(a, -0.5 * db_, +0.5 * dm_);
        const RateSet rs = rate_set(sc.spec, {r1, r2}, shift);
        const GeneratorOps ops = build_generators(sc.spec, rs);
        const DensityMatrix rho = stationary_state(ops);
        const CurrentReport cur = micro_currents(rs, rho);
        Row row{db_, dm_, 0.0, 0.0, 0.0, 0.0};
        for (std::size_t i = 0; i + 1 < cur.entries.size(); i += 2) {
            row.J += 0.5 * (cur.entries[i].J - cur.entries[i + 1].J);
            row.JE += 0.5 * (cur.entries[i].JE - cur.entries[i + 1].JE);
            row.JQ += 0.5 * (cur.entries[i].JQ - cur.entries[i + 1].JQ);
        }
        row.sigma = entropy_production(row.J, row.JQ, a.beta, db_, dm_);
        return row;
    };

    std::vector<std::future<Row>> futures;
    futures.reserve(dbs.size() * dms.size());
    for (double db_ : dbs)
        for (double dm_ : dms)
            futures.push_back(
                std::async(std::launch::async, job, db_, dm_));

    ReportDocument doc;
    doc.kind = "sweep";
    doc.table = CsvTable({"index", "delta_beta", "delta_mu", "J_2to1",
                          "JE_2to1", "JQ_2to1", "sigma"});
    Json rows = Json::array();
    for (std::size_t i = 0; i < futures.size(); ++i) {
        const Row row = futures[i].get();
        doc.table.add_row({std::to_string(i), fmt_g17(row.dbeta),
                           fmt_g17(row.dmu), fmt_g17(row.J), fmt_g17(row.JE),
                           fmt_g17(row.JQ), fmt_g17(row.sigma)});
        rows.push_back(Json{{"index", i},
                            {"delta_beta", row.dbeta},
                            {"delta_mu", row.dmu},
                            {"J_2to1", row.J},
                            {"JE_2to1", row.JE},
                            {"JQ_2to1", row.JQ},
                            {"sigma", row.sigma}});
    }
    doc.body["beta0"] = a.beta;
    doc.body["mu0"] = a.mu;
    doc.body["rows"] = rows;
    return doc;
}

inline ReportDocument run_analysis(const Scenario& sc, const std::string& kind,
                                   LambShift shift) {
    if (kind == "validate") return run_validate(sc, shift);
    if (kind == "steady") return run_steady(sc, shift);
    if (kind == "evolve") return run_evolve(sc, shift);
    if (kind == "currents") return run_currents(sc, shift);
    if (kind == "onsager") return run_onsager(sc, shift);
    if (kind == "kms") return run_kms(sc, shift);
    if (kind == "ddb") return run_ddb(sc, shift);
    if (kind == "sweep") return run_sweep(sc, shift);
    fail_validation("ConfigError", "unknown analysis '" + kind + "'");
}

}  // namespace neqsteady
