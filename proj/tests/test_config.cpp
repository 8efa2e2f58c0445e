#include <catch2/catch_amalgamated.hpp>

#include "tmarray/config.hpp"

#include <random>

using namespace tmarray;
using Catch::Approx;

TEST_CASE("minimal config fills defaults", "[config]") {
    const RunConfig cfg = parse_config(
        "[basis]\n"
        "carrier_ghz = 2.09\n"
        "modulation_mhz = 310\n"
        "[element]\n"
        "modulation_index = 0.29\n");
    CHECK(cfg.basis.harmonics == 3);
    CHECK(cfg.element.base_capacitance_pf == 1.0);
    CHECK(cfg.element.radiation_resistance_ohm == 100.0);
    CHECK_FALSE(cfg.element.port_inverter_ms.has_value());

    const ElementCircuit c = cfg.element_circuit();
    CHECK(c.inverter == Approx(0.02).epsilon(1e-12));  // auto = critical coupling
    CHECK(c.resonator_1.modulation_index == 0.29);
    CHECK(cfg.wavelength_m() == Approx(speed_of_light / 2.4e9).epsilon(1e-12));
}

TEST_CASE("semantic violations name the invariant", "[config]") {
    SECTION("modulation index bound") {
        CHECK_THROWS_WITH(parse_config("[element]\nmodulation_index = 1.5\n"),
                          Catch::Matchers::ContainsSubstring("modulation index"));
    }
    SECTION("modulation requires sidebands") {
        CHECK_THROWS_WITH(parse_config("[basis]\nharmonics = 0\n"),
                          Catch::Matchers::ContainsSubstring("sidebands"));
        CHECK_NOTHROW(parse_config("[basis]\nharmonics = 0\n[element]\nmodulation_index = 0\n"));
    }
    SECTION("degenerate basis") {
        CHECK_THROWS_WITH(parse_config("[basis]\nharmonics = 7\n"),
                          Catch::Matchers::ContainsSubstring("degenerate"));
    }
    SECTION("positions must increase") {
        CHECK_THROWS_WITH(
            parse_config("[array]\ncount = 2\npositions_m = 0.1, 0.05\n"),
            Catch::Matchers::ContainsSubstring("strictly increasing"));
    }
    SECTION("list length must match the element count") {
        CHECK_THROWS_WITH(parse_config("[array]\ncount = 3\nfeed_phase_deg = 0, -90\n"),
                          Catch::Matchers::ContainsSubstring("count"));
    }
}

TEST_CASE("syntax errors carry line numbers", "[config]") {
    SECTION("unknown key") {
        CHECK_THROWS_WITH(parse_config("[element]\nmodulation_index = 0.2\nbogus_key = 1\n"),
                          Catch::Matchers::ContainsSubstring("line 3"));
    }
    SECTION("unknown section") {
        CHECK_THROWS_WITH(parse_config("[nope]\nx = 1\n"),
                          Catch::Matchers::ContainsSubstring("nope.x"));
    }
    SECTION("missing equals sign") {
        CHECK_THROWS_WITH(parse_config("[element]\nmodulation_index 0.2\n"),
                          Catch::Matchers::ContainsSubstring("line 2"));
    }
    SECTION("key outside a section") {
        CHECK_THROWS_WITH(parse_config("modulation_index = 0.2\n"),
                          Catch::Matchers::ContainsSubstring("outside any [section]"));
    }
    SECTION("duplicate key") {
        CHECK_THROWS_WITH(
            parse_config("[element]\nmodulation_index = 0.2\nmodulation_index = 0.3\n"),
            Catch::Matchers::ContainsSubstring("duplicate"));
    }
    SECTION("bad number") {
        CHECK_THROWS_WITH(parse_config("[element]\nmodulation_index = fast\n"),
                          Catch::Matchers::ContainsSubstring("not a number"));
    }
    SECTION("unterminated section header") {
        CHECK_THROWS_WITH(parse_config("[element\n"),
                          Catch::Matchers::ContainsSubstring("unterminated"));
    }
}

TEST_CASE("comments and blank lines are ignored", "[config]") {
    const RunConfig cfg = parse_config(
        "# leading comment\n"
        "\n"
        "[element]\n"
        "; alternative comment style\n"
        "modulation_index = 0.1\n");
    CHECK(cfg.element.modulation_index == 0.1);
}

TEST_CASE("render/parse round trip", "[config][property]") {
    SECTION("defaults") {
        const RunConfig cfg;
        CHECK(parse_config(render_config(cfg)) == cfg);
    }
    SECTION("randomized configs") {
        std::mt19937 rng(424242);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 25; ++trial) {
            RunConfig cfg;
            cfg.element.base_capacitance_pf = 0.5 + u(rng);
            cfg.element.inductance_nh = 2.0 + 3.0 * u(rng);
            cfg.element.modulation_index = 0.45 * u(rng);
            cfg.element.modulation_phase_deg = 360.0 * u(rng) - 180.0;
            if (u(rng) > 0.5) cfg.element.port_inverter_ms = 10.0 + 30.0 * u(rng);
            cfg.basis.carrier_ghz = 1.5 + u(rng);
            cfg.basis.modulation_mhz = 100.0 + 200.0 * u(rng);
            cfg.basis.harmonics = 1 + static_cast<int>(3.0 * u(rng));
            cfg.array.count = 1 + static_cast<int>(4.0 * u(rng));
            cfg.array.feed_amplitude.assign(cfg.array.count, 1.0);
            cfg.array.feed_phase_deg.assign(cfg.array.count, 0.0);
            cfg.array.modulation_phase_deg.assign(cfg.array.count, 0.0);
            for (int p = 0; p < cfg.array.count; ++p) {
                cfg.array.feed_amplitude[p] = u(rng) * 2.0;
                cfg.array.feed_phase_deg[p] = 720.0 * u(rng) - 360.0;
                cfg.array.modulation_phase_deg[p] = 720.0 * u(rng) - 360.0;
            }
            cfg.scan.step_deg = 1.0 + 9.0 * u(rng);
            cfg.output.grid_deg = 0.1 + u(rng);
            cfg.output.directory = "out_" + std::to_string(trial);
            const RunConfig round = parse_config(render_config(cfg));
            CHECK(round == cfg);
            // Idempotence of the canonical form.
            CHECK(render_config(round) == render_config(cfg));
        }
    }
}

TEST_CASE("explicit inverter value wins over the auto rule", "[config]") {
    const RunConfig cfg = parse_config("[element]\nport_inverter_ms = 25\n");
    CHECK(cfg.element_circuit().inverter == Approx(0.025).epsilon(1e-12));
}

TEST_CASE("element pattern parsing", "[config]") {
    const RunConfig iso = parse_config("[array]\nelement_pattern = isotropic\n");
    CHECK(iso.pattern().is_isotropic());
    const RunConfig cosq = parse_config("[array]\nelement_pattern = cos^1.5\n");
    CHECK(cosq.pattern().exponent() == Approx(1.5));
    CHECK_THROWS_AS(parse_config("[array]\nelement_pattern = parabolic\n"), config_error);
}

TEST_CASE("single-entry lists broadcast to the element count", "[config]") {
    const RunConfig cfg = parse_config("[array]\ncount = 4\nmodulation_phase_deg = 45\n");
    REQUIRE(cfg.array.modulation_phase_deg.size() == 4);
    for (double v : cfg.array.modulation_phase_deg) CHECK(v == 45.0);
}

TEST_CASE("geometry builder honors spacing and explicit positions", "[config]") {
    RunConfig cfg = parse_config("[array]\ncount = 3\nspacing_wavelengths = 0.5\n");
    const ArrayGeometry g = cfg.array_geometry();
    const double d = 0.5 * cfg.wavelength_m();
    CHECK(g.elements[1].position_m == Approx(d).epsilon(1e-12));
    CHECK(g.elements[2].position_m == Approx(2.0 * d).epsilon(1e-12));

    const RunConfig explicit_pos =
        parse_config("[array]\ncount = 2\npositions_m = 0, 0.08\n");
    CHECK(explicit_pos.array_geometry().elements[1].position_m == 0.08);
}
