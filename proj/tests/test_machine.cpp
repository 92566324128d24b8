#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "blackmodel/builtin_data.hpp"
#include "blackmodel/errors.hpp"
#include "blackmodel/machine.hpp"

using namespace blackmodel;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Minimal valid document for parser edge-case tests.
std::string minimal_spec(const std::string& extra = "") {
    return "[gpu]\n"
           "name = \"X100\"\n"
           "sm_count = 10\n"
           "transistors_b = 1\n"
           "board_power_w = 100\n"
           "[memory]\n"
           "hbm_capacity_gib = 1\n"
           "hbm_peak_bw_tbps = 1.0\n"
           "global_miss_latency_cycles = 500\n"
           "stream_small_fraction = 0.5\n"
           "stream_large_fraction = 0.9\n"
           "stream_threshold_ws_gib = 2\n"
           "[tensor.peak]\n"
           "fp16_tflops = 100, 90\n" +
           extra;
}

} // namespace

TEST_CASE("builtin B200 preset matches the headline machine constants") {
    GpuSpec b = builtin_spec("B200");
    CHECK(b.sm_count == 148);
    CHECK(b.transistors_b == 208);
    CHECK(b.hbm_capacity_bytes == 192ull * 1024 * 1024 * 1024);
    CHECK(b.hbm_peak_bw == 8.0e12);
    CHECK(b.tensor_peak.at(Precision::fp4).throughput == 7702.5);
    CHECK(b.tensor_peak.at(Precision::fp4).pct_of_peak == 96.3);
    REQUIRE(b.tmem.has_value());
    CHECK(b.tmem->capacity_bytes == 256 * 1024);
    CHECK(b.tmem->miss_latency_cycles == 420);
    REQUIRE(b.de.has_value());
    CHECK(b.de->chunk_profiles.size() == 4);
}

TEST_CASE("builtin H200 preset: no fp4/fp6, no TMEM, no decompression engine") {
    GpuSpec h = builtin_spec("H200");
    CHECK(h.tensor_peak.count(Precision::fp4) == 0);
    CHECK(h.tensor_peak.count(Precision::fp6) == 0);
    CHECK(!h.tmem.has_value());
    CHECK(!h.de.has_value());
    CHECK(h.hbm_peak_bw == 4.8e12);
    REQUIRE(h.wgmma_base_cycles_per_n64.has_value());
    CHECK(*h.wgmma_base_cycles_per_n64 == 32.0);
}

TEST_CASE("unknown machine name is rejected") {
    CHECK_THROWS_AS(builtin_spec("A100"), UnknownMachine);
}

TEST_CASE("builtin text is byte-identical to the shipped files") {
    CHECK(builtin_spec_text("B200") == slurp(std::string(BLACKMODEL_DATA_DIR) + "/b200.spec"));
    CHECK(builtin_spec_text("H200") == slurp(std::string(BLACKMODEL_DATA_DIR) + "/h200.spec"));
    CHECK(builtin_spec("B200") == load_machine_path(std::string(BLACKMODEL_DATA_DIR) + "/b200.spec"));
}

TEST_CASE("serialize + reload round-trips both presets") {
    for (const std::string& name : builtin_spec_names()) {
        GpuSpec s = builtin_spec(name);
        GpuSpec reloaded = load_machine_file(serialize_machine_file(s));
        CHECK(s == reloaded);
    }
}

TEST_CASE("validate_spec is clean on both presets") {
    for (const std::string& name : builtin_spec_names())
        CHECK(validate_spec(builtin_spec(name)).empty());
}

TEST_CASE("derived theoretical peaks are consistent across calibrations within 0.5%") {
    // FP64 has two independent derivations per machine: the per-precision
    // throughput row and the DGEMM efficiency anchors.
    for (const std::string& name : builtin_spec_names()) {
        GpuSpec s = builtin_spec(name);
        for (const auto& [prec, entry] : s.tensor_peak) {
            std::vector<double> derivations = {entry.theoretical()};
            if (prec == Precision::fp64) {
                // DGEMM TFLOPS cells in the reference tables (T12).
                std::vector<double> tflops =
                    name == "B200" ? std::vector<double>{35.45, 36.14, 36.30}
                                   : std::vector<double>{18.2, 18.7, 18.9};
                for (size_t i = 0; i < tflops.size(); ++i)
                    derivations.push_back(tflops[i] / s.dgemm_fractions[i]);
            }
            double lo = *std::min_element(derivations.begin(), derivations.end());
            double hi = *std::max_element(derivations.begin(), derivations.end());
            INFO(name << " " << precision_name(prec));
            CHECK(hi / lo - 1.0 <= 0.005);
        }
    }
}

TEST_CASE("parser: unknown keys and sections are rejected with location") {
    try {
        load_machine_file(minimal_spec("[tmem]\nbogus_key = 1\n"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() > 0);
        CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
    CHECK_THROWS_AS(load_machine_file(minimal_spec("[nonsense]\nx = 1\n")), ParseError);
}

TEST_CASE("parser: missing required sections are rejected") {
    CHECK_THROWS_AS(load_machine_file("[gpu]\nname = \"X\"\nsm_count = 1\n"
                                      "transistors_b = 1\nboard_power_w = 1\n"),
                    ParseError);
}

TEST_CASE("parser: malformed lines carry line/column positions") {
    try {
        load_machine_file("[gpu]\nname == \"X\"\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(load_machine_file("key = 1\n"), ParseError);
    CHECK_THROWS_AS(load_machine_file("[gpu]\nname = \"unterminated\n"), ParseError);
    CHECK_THROWS_AS(load_machine_file(minimal_spec("[dgemm]\ndims = 1, x\nfractions = 0.5, 0.6\n")),
                    ParseError);
}

TEST_CASE("validation: negative bandwidth is a violation") {
    std::string text = minimal_spec(
        "[tmem]\ncapacity_kib = 256\nlanes = 128\ncolumns = 512\ncell_bits = 32\n"
        "read_bw_tbps = -1\nwrite_bw_tbps = 8\nmiss_latency_cycles = 420\n"
        "baseline_miss_latency_cycles = 1000\nsustained_mma_bw_tbps = 8\n"
        "global_path_bw_tbps = 3.8\nchained_saved_rate_tbps = 12\n"
        "power_delta_large_frac = -0.15\npower_delta_small_frac = 0.04\n"
        "power_large_dim = 2048\npower_small_dim = 256\n");
    CHECK_THROWS_AS(load_machine_file(text), ValidationError);
}

TEST_CASE("validation: tmem capacity mismatch is reported by name") {
    GpuSpec s = builtin_spec("B200");
    s.tmem->capacity_bytes = 128 * 1024; // lanes * columns * 4 B = 256 KiB
    std::vector<Violation> v = validate_spec(s);
    REQUIRE(!v.empty());
    bool found = false;
    for (const Violation& violation : v)
        if (violation.rule.find("capacity mismatch") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validation: percent-of-peak above 100 is a violation") {
    GpuSpec s = builtin_spec("B200");
    s.tensor_peak[Precision::fp16].pct_of_peak = 105.0;
    CHECK(!validate_spec(s).empty());
}

TEST_CASE("validation: B200 preset constants are pinned") {
    GpuSpec s = builtin_spec("B200");
    s.sm_count = 132;
    CHECK(!validate_spec(s).empty());
}

TEST_CASE("calibration set bundles both presets with provenance") {
    CalibrationSet cal = CalibrationSet::builtin();
    CHECK(cal.specs.count("B200") == 1);
    CHECK(cal.specs.count("H200") == 1);
    CHECK(!cal.provenance.at("T1").empty());
    CHECK_THROWS_AS(cal.at("A100"), UnknownMachine);
}

TEST_CASE("llm model names with dots load correctly") {
    GpuSpec b = builtin_spec("B200");
    CHECK(b.training.at("gpt-1.3b").at(128).throughput == 14397);
    CHECK(b.training.at("gpt-1.3b").at(64).throughput == 14141);
}
