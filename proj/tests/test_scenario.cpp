#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "neqsteady/scenario.hpp"
#include "support.hpp"

using namespace neqsteady;

namespace {

// Two equilibrium baths at different temperatures on a three-level ladder.
Json base_config() {
    return Json::parse(R"({
      "levels": [0.0, 1.0, 2.5],
      "dipoles": [
        {"reservoir": 0,
         "entries": [[0, 1, 1.0, 0.0], [1, 2, 0.8, 0.0], [0, 2, 0.6, 0.0]]},
        {"reservoir": 1,
         "entries": [[0, 1, 1.0, 0.0], [1, 2, 0.8, 0.0], [0, 2, 0.6, 0.0]]}
      ],
      "reservoirs": [
        {"kind": "equilibrium", "beta": 2.0, "mu": 0.0,
         "spectral_density": {"form": "ohmic", "eta": 0.5, "omega_c": 4.0},
         "pv_cutoff": 60.0},
        {"kind": "equilibrium", "beta": 1.0, "mu": 0.0,
         "spectral_density": {"form": "ohmic", "eta": 0.5, "omega_c": 4.0},
         "pv_cutoff": 60.0}
      ]
    })");
}

// Same geometry with two identical baths, as the sweep analysis expects.
Json twin_config() {
    Json cfg = base_config();
    cfg["reservoirs"][0]["beta"] = 1.2;
    cfg["reservoirs"][1]["beta"] = 1.2;
    cfg["reservoirs"][0]["mu"] = -0.4;
    cfg["reservoirs"][1]["mu"] = -0.4;
    return cfg;
}

std::filesystem::path temp_file(const std::string& tag) {
    static int counter = 0;
    return std::filesystem::temp_directory_path() /
           ("neqsteady_scenario_" + std::to_string(::getpid()) + "_" + tag +
            "_" + std::to_string(counter++));
}

std::filesystem::path write_temp(const std::string& tag,
                                 const std::string& text) {
    const auto path = temp_file(tag);
    std::ofstream out(path);
    out << text;
    return path;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

}  // namespace

TEST_CASE("scenario parser round-trips the canonical config") {
    const Scenario sc = parse_scenario(base_config());
    CHECK(sc.spec.n_levels() == 3);
    CHECK(sc.spec.levels(2) == 2.5);
    REQUIRE(sc.reservoirs.size() == 2);
    CHECK(sc.reservoirs[0].kind == ReservoirKind::Equilibrium);
    CHECK(sc.reservoirs[0].beta == 2.0);
    CHECK(sc.reservoirs[1].beta == 1.0);
    CHECK(sc.reservoirs[0].pv_cutoff == 60.0);
    CHECK(sc.spec.weight(0, 1, 0) == Catch::Approx(1.0));
    CHECK(sc.spec.weight(1, 2, 1) == Catch::Approx(0.64));
    CHECK(sc.analysis.is_null());

    // defaults: mu is optional, pv_cutoff falls back to 50
    Json cfg = base_config();
    cfg["reservoirs"][0].erase("mu");
    cfg["reservoirs"][0].erase("pv_cutoff");
    const Scenario sc2 = parse_scenario(cfg);
    CHECK(sc2.reservoirs[0].mu == 0.0);
    CHECK(sc2.reservoirs[0].pv_cutoff == 50.0);

    // frequency-local reservoirs parse too
    Json lcfg = base_config();
    lcfg["reservoirs"][1] = Json::parse(R"({
      "kind": "local_equilibrium",
      "beta_fn": {"form": "affine", "beta0": 1.0, "slope": -0.1},
      "spectral_density": {"form": "flat", "eta": 0.3}
    })");
    const Scenario sc3 = parse_scenario(lcfg);
    CHECK(sc3.reservoirs[1].kind == ReservoirKind::LocalEquilibrium);
}

TEST_CASE("unknown keys are rejected wherever they appear") {
    {
        Json cfg = base_config();
        cfg["typo"] = 1;
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        Json cfg = base_config();
        cfg["reservoirs"][0]["temperature"] = 0.5;
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        Json cfg = base_config();
        cfg["reservoirs"][1]["spectral_density"]["cutoff"] = 3.0;
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        Json cfg = base_config();
        cfg["dipoles"][0]["weight"] = 2.0;
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        Json cfg = base_config();
        cfg["reservoirs"][1] = Json::parse(R"({
          "kind": "local_equilibrium",
          "beta_fn": {"form": "constant", "beta": 1.0, "extra": 2.0},
          "spectral_density": {"form": "flat", "eta": 0.3}
        })");
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        // untyped analysis block must fit the requested runner
        Json cfg = base_config();
        cfg["analysis"] = Json::object();
        cfg["analysis"]["junk"] = 3;
        const Scenario sc = parse_scenario(cfg);
        CHECK_THROWS_AS(run_steady(sc, LambShift::none), ValidationError);
    }
    {
        // a block typed for another analysis is ignored instead
        Json cfg = base_config();
        cfg["analysis"] = Json::object();
        cfg["analysis"]["type"] = "evolve";
        cfg["analysis"]["t"] = 0.5;
        const Scenario sc = parse_scenario(cfg);
        const auto doc = run_steady(sc, LambShift::none);
        CHECK(doc.kind == "steady");
    }
}

TEST_CASE("malformed configs are rejected") {
    {
        Json cfg = base_config();
        cfg.erase("levels");
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        Json cfg = base_config();
        cfg["levels"] = Json::array({1.0});
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        Json cfg = base_config();
        cfg["reservoirs"] = Json::array();
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        Json cfg = base_config();
        cfg["reservoirs"][0]["kind"] = "markovian";
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        Json cfg = base_config();
        cfg["reservoirs"][0]["spectral_density"]["form"] = "lorentzian";
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        // entry rows are [l, m, re, im] with 0 <= l < m
        Json cfg = base_config();
        cfg["dipoles"][0]["entries"][0] = Json::array({1, 1, 0.5, 0.0});
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
        cfg["dipoles"][0]["entries"][0] = Json::array({0, 7, 0.5, 0.0});
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
        cfg["dipoles"][0]["entries"][0] = Json::array({0, 1, 0.5});
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
    {
        Json cfg = base_config();
        cfg["dipoles"][1]["reservoir"] = 0;  // duplicates the first block
        CHECK_THROWS_AS(parse_scenario(cfg), ValidationError);
    }
}

TEST_CASE("range grammar parses and guards") {
    const Range r = parse_range(Json("0:0.2:11"), "p");
    const auto v = r.values();
    REQUIRE(v.size() == 11);
    CHECK(v.front() == 0.0);
    CHECK(v.back() == Catch::Approx(0.2).margin(1e-15));
    CHECK(v[5] == Catch::Approx(0.1).margin(1e-15));

    const Range single = parse_range(Json("1.5:1.5:1"), "p");
    CHECK(single.values() == std::vector<double>{1.5});

    CHECK_THROWS_AS(parse_range(Json("0:1:0"), "p"), ValidationError);
    CHECK_THROWS_AS(parse_range(Json("0:1:3junk"), "p"), ValidationError);
    CHECK_THROWS_AS(parse_range(Json("0:1"), "p"), ValidationError);
    CHECK_THROWS_AS(parse_range(Json("a:b:c"), "p"), ValidationError);
    CHECK_THROWS_AS(parse_range(Json(5), "p"), ValidationError);
    // one point forces a degenerate interval
    CHECK_THROWS_AS(parse_range(Json("0:1:1"), "p"), ValidationError);
}

TEST_CASE("state files round-trip at full precision") {
    std::mt19937 rng(912);
    const DensityMatrix rho = testsup::random_state(rng, 3);
    const auto path = write_temp("state", format_state(rho));
    const DensityMatrix back = read_state_file(path.string(), 3);
    CHECK((back - rho).norm() == 0.0);

    CHECK_THROWS_AS(read_state_file("/nonexistent/state.txt", 3),
                    ValidationError);
    const auto shortpath = write_temp("short", "0.5 0.0 0.5 0.0");
    CHECK_THROWS_AS(read_state_file(shortpath.string(), 3), ValidationError);
    const auto longpath =
        write_temp("long", format_state(rho) + "0.25 0.0\n");
    CHECK_THROWS_AS(read_state_file(longpath.string(), 3), ValidationError);
    std::filesystem::remove(path);
    std::filesystem::remove(shortpath);
    std::filesystem::remove(longpath);
}

TEST_CASE("reports carry version, kind, and reparsable numbers") {
    const Scenario sc = parse_scenario(base_config());
    const auto doc = run_steady(sc, LambShift::none);

    const std::string js = emit_report(doc, "json");
    const Json parsed = Json::parse(js);
    CHECK(parsed.at("schema_version") == 1);
    CHECK(parsed.at("kind") == "steady");
    REQUIRE(parsed.at("populations").size() == 3);
    double sum = 0.0;
    for (const auto& p : parsed.at("populations")) sum += p.get<double>();
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));

    const std::string csv = emit_report(doc, "csv");
    const auto lines = csv_lines(csv);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "level,energy,population,B,beta_S");
    // %.17g cells reparse to the exact double that was printed
    for (int l = 0; l < 3; ++l) {
        const auto cells = split_csv(lines[static_cast<std::size_t>(l) + 1]);
        REQUIRE(cells.size() == 5);
        const double pop = std::strtod(cells[2].c_str(), nullptr);
        CHECK(pop == parsed.at("populations")[static_cast<std::size_t>(l)]
                         .get<double>());
    }

    CHECK_THROWS_AS(emit_report(doc, "yaml"), ValidationError);
}

TEST_CASE("analysis runners agree with direct library calls") {
    const Scenario sc = parse_scenario(base_config());
    const auto rs = rate_set(sc.spec, sc.reservoirs, LambShift::none);
    const auto ops = build_generators(sc.spec, rs);
    const DensityMatrix rho = stationary_state(ops);

    const auto steady = run_steady(sc, LambShift::none);
    for (int l = 0; l < 3; ++l)
        CHECK(steady.body.at("populations")[static_cast<std::size_t>(l)]
                  .get<double>() ==
              Catch::Approx(rho(l, l).real()).margin(1e-14));

    const auto cur = run_currents(sc, LambShift::none);
    CHECK(cur.body.at("entries").size() == 6);
    CHECK(cur.body.at("level_balance_residual").get<double>() < 1e-11);
    CHECK(cur.body.at("energy_balance_residual").get<double>() < 1e-11);
    CHECK_FALSE(cur.body.at("db_satisfied").get<bool>());
    REQUIRE(cur.body.contains("gibbs_bound"));
    int qualifying = 0;
    for (const auto& g : cur.body.at("gibbs_bound")) {
        if (g.at("qualifying").get<bool>()) {
            ++qualifying;
            CHECK(g.at("within").get<bool>());
        }
    }
    CHECK(qualifying > 0);

    Scenario evc = sc;
    evc.analysis = Json::object();
    evc.analysis["type"] = "evolve";
    evc.analysis["t"] = 0.7;
    evc.analysis["initial"] = "ground";
    const auto ev = run_evolve(evc, LambShift::none);
    DensityMatrix ground = DensityMatrix::Zero(3, 3);
    ground(0, 0) = 1.0;
    const DensityMatrix target = evolve(ops, ground, 0.7);
    CHECK(ev.body.at("populations_initial")[0].get<double>() == 1.0);
    CHECK(ev.body.at("trace_final").get<double>() ==
          Catch::Approx(1.0).margin(1e-12));
    for (int l = 0; l < 3; ++l)
        CHECK(ev.body.at("populations_final")[static_cast<std::size_t>(l)]
                  .get<double>() ==
              Catch::Approx(target(l, l).real()).margin(1e-13));
}

TEST_CASE("kms runner insists on nonzero levels unless offset") {
    Scenario sc = parse_scenario(base_config());
    CHECK_THROWS_AS(run_analysis(sc, "kms", LambShift::none),
                    ValidationError);
    apply_energy_offset(sc, 0.4);
    CHECK(sc.spec.levels(0) == Catch::Approx(0.4));
    const auto doc = run_analysis(sc, "kms", LambShift::none);
    CHECK(doc.kind == "kms");
    CHECK(doc.body.at("max_residual").get<double>() < 1e-11);
    CHECK(doc.table.row_count() == 3);
    CHECK_THROWS_AS(run_analysis(sc, "spectroscopy", LambShift::none),
                    ValidationError);
}

TEST_CASE("offset shifts the spectrum rigidly without touching dynamics") {
    Scenario sc = parse_scenario(base_config());
    const auto before = run_steady(sc, LambShift::none);
    apply_energy_offset(sc, 0.9);
    const auto after = run_steady(sc, LambShift::none);
    for (int l = 0; l < 3; ++l)
        CHECK(before.body.at("populations")[static_cast<std::size_t>(l)]
                  .get<double>() ==
              after.body.at("populations")[static_cast<std::size_t>(l)]
                  .get<double>());
}

TEST_CASE("sweep demands identical twins and fills the grid") {
    Scenario sc = parse_scenario(twin_config());
    sc.analysis = Json::object();
    sc.analysis["delta_beta"] = "0:0.2:3";
    sc.analysis["delta_mu"] = "0:0:1";
    const auto doc = run_sweep(sc, LambShift::none);
    REQUIRE(doc.body.at("rows").size() == 3);
    CHECK(doc.table.row_count() == 3);
    const auto& rows = doc.body.at("rows");
    CHECK(std::abs(rows[0].at("J_2to1").get<double>()) < 1e-13);
    CHECK(std::abs(rows[0].at("sigma").get<double>()) < 1e-13);
    for (const auto& row : rows)
        CHECK(row.at("sigma").get<double>() > -1e-12);
    // the hot-to-cold current flows once a bias is on
    CHECK(rows[2].at("J_2to1").get<double>() != 0.0);

    // mismatched temperatures are not a sweep base point
    Scenario biased = parse_scenario(base_config());
    biased.analysis = sc.analysis;
    CHECK_THROWS_AS(run_sweep(biased, LambShift::none), ValidationError);

    // grid size guard
    Scenario big = parse_scenario(twin_config());
    big.analysis = Json::object();
    big.analysis["delta_beta"] = "0:1:101";
    big.analysis["delta_mu"] = "0:1:101";
    CHECK_THROWS_AS(run_sweep(big, LambShift::none), ValidationError);
}

TEST_CASE("onsager runner needs a comparable pair of baths") {
    const Scenario sc = parse_scenario(base_config());
    const auto doc = run_onsager(sc, LambShift::none);
    REQUIRE(doc.body.at("pairs").size() == 3);
    for (const auto& p : doc.body.at("pairs"))
        CHECK(p.at("reciprocity_defect").get<double>() < 1e-5);
    CHECK(doc.body.at("beta0").get<double>() == Catch::Approx(1.5));

    Json cut = base_config();
    cut["reservoirs"][1]["pv_cutoff"] = 40.0;
    CHECK_THROWS_AS(run_onsager(parse_scenario(cut), LambShift::none),
                    ValidationError);

    Json dens = base_config();
    dens["reservoirs"][1]["spectral_density"]["eta"] = 0.7;
    CHECK_THROWS_AS(run_onsager(parse_scenario(dens), LambShift::none),
                    ValidationError);

    Json local = base_config();
    local["reservoirs"][1] = Json::parse(R"({
      "kind": "local_equilibrium",
      "beta_fn": {"form": "constant", "beta": 1.0},
      "spectral_density": {"form": "ohmic", "eta": 0.5, "omega_c": 4.0},
      "pv_cutoff": 60.0
    })");
    CHECK_THROWS_AS(run_onsager(parse_scenario(local), LambShift::none),
                    ValidationError);
}

TEST_CASE("scenario files load through the io guards") {
    const auto good = write_temp("good", base_config().dump());
    const Scenario sc = load_scenario(good.string());
    CHECK(sc.spec.n_levels() == 3);
    std::filesystem::remove(good);

    try {
        load_scenario("/nonexistent/config.json");
        FAIL("expected an io error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.code()) == "IoError");
    }

    const auto bad = write_temp("bad", "{not json");
    try {
        load_scenario(bad.string());
        FAIL("expected a config error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.code()) == "ConfigError");
    }
    std::filesystem::remove(bad);
}
