#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blackmodel/errors.hpp"
#include "blackmodel/tensor_core.hpp"

using namespace blackmodel;
using namespace blackmodel::tc;

namespace {

struct Machines {
    GpuSpec b = builtin_spec("B200");
    GpuSpec h = builtin_spec("H200");
};

MmaInstr instr(Isa isa, const std::string& tile) {
    MmaInstr m;
    m.isa = isa;
    m.tile = parse_tile(tile);
    return m;
}

} // namespace

TEST_CASE("SASS opcode mapping") {
    CHECK(sass_opcode(Isa::tcgen05, Precision::fp4) == "OMMA");
    CHECK(sass_opcode(Isa::tcgen05, Precision::fp64) == "DMMA");
    CHECK(sass_opcode(Isa::wgmma, Precision::fp64) == "DMMA");
    CHECK(sass_opcode(Isa::tcgen05, Precision::fp32) == "HMMA");
    CHECK(sass_opcode(Isa::wgmma, Precision::fp32) == "HGMMA");
    CHECK(sass_opcode(Isa::tcgen05, Precision::int4) == "IMMA");
    CHECK(sass_opcode(Isa::wgmma, Precision::int8) == "IGMMA");
    CHECK_THROWS_AS(sass_opcode(Isa::wgmma, Precision::fp4), Unsupported);
}

TEST_CASE("instruction latencies: lookup and linear rule") {
    Machines m;
    CHECK(instr_latency(m.h, instr(Isa::wgmma, "m64n256k16")).cycles == 128.0);
    CHECK(instr_latency(m.h, instr(Isa::wgmma, "m64n64k16")).cycles == 32.0);
    // Linear in n between calibrated points.
    CHECK(instr_latency(m.h, instr(Isa::wgmma, "m64n192k16")).cycles == 96.0);
    CHECK(instr_latency(m.b, instr(Isa::tcgen05, "m128n128k16")).cycles == 11.3);
    CHECK(!instr_latency(m.b, instr(Isa::tcgen05, "m64n64k16")).extrapolated);
}

TEST_CASE("tcgen05 latency for unknown tiles falls back to the nearest tile, flagged") {
    Machines m;
    Cycles c = instr_latency(m.b, instr(Isa::tcgen05, "m96n96k16"));
    CHECK(c.extrapolated);
    CHECK(c.cycles >= 11.0);
    CHECK(c.cycles <= 11.4);
}

TEST_CASE("ISA/machine pairing is enforced") {
    Machines m;
    CHECK_THROWS_AS(instr_latency(m.b, instr(Isa::wgmma, "m64n64k16")), Unsupported);
    CHECK_THROWS_AS(instr_latency(m.h, instr(Isa::tcgen05, "m64n64k16")), Unsupported);
}

TEST_CASE("instruction throughput lookups") {
    Machines m;
    MmaInstr i = instr(Isa::tcgen05, "m64n8k16");
    i.in_prec = Precision::fp8;
    i.accum_prec = Precision::fp16;
    CHECK(instr_throughput(m.b, i).value == 1925.3);
    i.in_prec = Precision::fp16;
    i.accum_prec = Precision::fp32;
    CHECK(instr_throughput(m.b, i).value == 482.4);
    i.in_prec = Precision::fp4;
    i.accum_prec = Precision::fp16;
    CHECK(instr_throughput(m.b, i).value == 3850.1);
    i.in_prec = Precision::int8;
    i.accum_prec = Precision::int32;
    InstrThroughput t = instr_throughput(m.b, i);
    CHECK(t.value == 3928.5);
    CHECK(t.integer_unit);
    i.in_prec = Precision::fp6;
    i.accum_prec = Precision::fp32;
    CHECK_THROWS_AS(instr_throughput(m.b, i), MissingCalibration);
}

TEST_CASE("peak throughput rows and generation gaps") {
    Machines m;
    PeakResult fp4 = peak_throughput(m.b, Precision::fp4, &m.h);
    CHECK(fp4.tflops == 7702.5);
    CHECK(fp4.pct_of_peak == 96.3);
    CHECK(!fp4.speedup.has_value()); // baseline cannot run FP4

    PeakResult int8 = peak_throughput(m.b, Precision::int8, &m.h);
    REQUIRE(int8.speedup.has_value());
    CHECK(*int8.speedup == doctest::Approx(1.27).epsilon(0.005));

    CHECK_THROWS_WITH_AS(peak_throughput(m.h, Precision::fp6), "fp6: new-in-Blackwell",
                         MissingCalibration);
}

TEST_CASE("shared-precision speedup is 1.27 +- 0.005 (FP64 is the 1.32 exception)") {
    Machines m;
    for (Precision p : {Precision::fp32, Precision::tf32, Precision::bf16, Precision::fp16,
                        Precision::fp8, Precision::int8}) {
        PeakResult r = peak_throughput(m.b, p, &m.h);
        REQUIRE(r.speedup.has_value());
        INFO(precision_name(p));
        CHECK(std::fabs(*r.speedup - 1.27) <= 0.005);
    }
    // FP64 units doubled outright; its ratio sits at 1.32, not 1.27.
    PeakResult fp64 = peak_throughput(m.b, Precision::fp64, &m.h);
    CHECK(*fp64.speedup == doctest::Approx(1.32).epsilon(0.005));
}

TEST_CASE("dependency chains scale linearly with length") {
    Machines m;
    CHECK(dependency_chain_cycles(m.b, instr(Isa::tcgen05, "m64n64k16"), 0).cycles == 0.0);
    CHECK(dependency_chain_cycles(m.b, instr(Isa::tcgen05, "m64n64k16"), 100).cycles ==
          doctest::Approx(1100.0));
    CHECK(dependency_chain_cycles(m.h, instr(Isa::wgmma, "m64n64k16"), 100).cycles == 3200.0);
    CHECK_THROWS_AS(dependency_chain_cycles(m.b, instr(Isa::tcgen05, "m64n64k16"), -1),
                    ShapeMismatch);
}

TEST_CASE("accumulator penalties from the instruction table") {
    Machines m;
    CHECK(accum_penalty(m.b, Precision::fp16, Precision::fp32) ==
          doctest::Approx(0.50).epsilon(0.0001));
    CHECK(accum_penalty(m.b, Precision::fp16, Precision::fp16) == 1.0);
    CHECK(accum_penalty(m.b, Precision::fp8, Precision::fp32) ==
          doctest::Approx(1912.8 / 1925.3));
    CHECK_THROWS_AS(accum_penalty(m.b, Precision::fp64, Precision::fp64), MissingCalibration);
}

TEST_CASE("ISA latency speedup range reproduces (2.9, 11.6) within 0.1") {
    Machines m;
    auto [lo, hi] = isa_latency_speedup_range(m.b, m.h);
    CHECK(std::fabs(lo - 2.9) <= 0.1);
    CHECK(std::fabs(hi - 11.6) <= 0.1);
}

TEST_CASE("speedup range over a single shared tile and over no tiles") {
    Machines m;
    GpuSpec b1 = m.b;
    b1.tcgen05_latency = {{"m64n64k16", 11.0}};
    GpuSpec h1 = m.h;
    h1.wgmma_tiles = {"m64n64k16"};
    auto [lo, hi] = isa_latency_speedup_range(b1, h1);
    CHECK(lo == doctest::Approx(32.0 / 11.0));
    CHECK(hi == doctest::Approx(32.0 / 11.0));

    GpuSpec empty = m.h;
    empty.wgmma_tiles.clear();
    CHECK_THROWS_AS(isa_latency_speedup_range(b1, empty), EmptyComparison);
}

TEST_CASE("calibration-wide pipeline invariants") {
    Machines m;
    // Warp-level latency is near-constant across tiles.
    double lo = 1e9, hi = 0;
    for (const auto& [tile, cyc] : m.b.tcgen05_latency) {
        lo = std::min(lo, cyc);
        hi = std::max(hi, cyc);
    }
    CHECK(hi / lo <= 1.05);

    // Warp-group latency is exactly linear in n over its calibrated tiles.
    for (const std::string& t : m.h.wgmma_tiles) {
        Tile tile = parse_tile(t);
        CHECK(instr_latency(m.h, instr(Isa::wgmma, t)).cycles ==
              *m.h.wgmma_base_cycles_per_n64 * tile.n / 64.0);
    }

    // Across the instruction table: latency nearly flat, throughput wide.
    double lat_lo = 1e9, lat_hi = 0, thr_lo = 1e30, thr_hi = 0;
    for (const auto& [pair, e] : m.b.instr) {
        lat_lo = std::min(lat_lo, e.latency_cycles);
        lat_hi = std::max(lat_hi, e.latency_cycles);
        thr_lo = std::min(thr_lo, e.throughput);
        thr_hi = std::max(thr_hi, e.throughput);
    }
    CHECK(lat_hi / lat_lo <= 1.3);
    CHECK(thr_hi / thr_lo >= 4.0);
}

TEST_CASE("scheduler stall reduction is carried as an annotation only") {
    Machines m;
    REQUIRE(m.b.sched_stall_reduction_pct.has_value());
    CHECK(m.b.sched_stall_reduction_pct->first == 18.0);
    CHECK(m.b.sched_stall_reduction_pct->second == 23.0);
}

TEST_CASE("MmaInstr scope and flops derive from the ISA and tile") {
    MmaInstr w = instr(Isa::wgmma, "m64n128k16");
    CHECK(w.scope_threads() == 128);
    CHECK(instr(Isa::tcgen05, "m64n64k16").scope_threads() == 32);
    CHECK(w.flops() == 2.0 * 64 * 128 * 16);
    CHECK_THROWS_AS(parse_tile("n64m64k16"), ShapeMismatch);
}
