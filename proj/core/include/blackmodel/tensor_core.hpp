#ifndef BLACKMODEL_TENSOR_CORE_HPP
#define BLACKMODEL_TENSOR_CORE_HPP

#include <optional>
#include <string>
#include <utility>

#include "blackmodel/machine.hpp"

namespace blackmodel::tc {

enum class Isa { tcgen05, wgmma };

struct Tile {
    int m = 0, n = 0, k = 0;
    std::string name() const;
};

Tile parse_tile(const std::string& name); // "m64n64k16"

struct MmaInstr {
    Isa isa = Isa::tcgen05;
    Tile tile;
    Precision in_prec = Precision::fp16;
    Precision accum_prec = Precision::fp16;

    int scope_threads() const { return isa == Isa::wgmma ? 128 : 32; }
    double flops() const { return 2.0 * tile.m * tile.n * tile.k; }
};

// PTX-to-SASS opcode for an (ISA, precision) pair. Throws Unsupported for
// pairs the hardware does not provide (e.g. wgmma + FP4).
std::string sass_opcode(Isa isa, Precision p);

struct Cycles {
    double cycles = 0.0;
    bool extrapolated = false;
};

// Single-instruction latency. wgmma follows the linear base*(n/64) rule;
// tcgen05 is a calibration lookup with nearest-tile fallback (flagged).
Cycles instr_latency(const GpuSpec& spec, const MmaInstr& instr);

// Calibrated single-instruction throughput keyed (input, accumulator).
struct InstrThroughput {
    double value = 0.0;
    bool integer_unit = false; // TOPS instead of TFLOPS
    double latency_cycles = 0.0;
};
InstrThroughput instr_throughput(const GpuSpec& spec, const MmaInstr& instr);

struct PeakResult {
    double tflops = 0.0;
    double pct_of_peak = 0.0;
    bool integer_unit = false;
    std::optional<double> baseline_tflops;
    std::optional<double> speedup;
};

// Sustained per-precision throughput; baseline/speedup filled when the
// baseline machine calibrates the same precision.
PeakResult peak_throughput(const GpuSpec& spec, Precision p,
                           const GpuSpec* baseline = nullptr);

// Serial dependence forbids overlap: chain_len * instr_latency.
Cycles dependency_chain_cycles(const GpuSpec& spec, const MmaInstr& instr, int chain_len);

// Throughput of (input, accum) relative to the same input's fastest
// accumulator, e.g. FP16 with FP32 accumulation pays 0.50.
double accum_penalty(const GpuSpec& spec, Precision in, Precision accum);

// (min, max) of wgmma/tcgen05 latency ratios over the two machines'
// calibrated tiles (all pairs). Throws EmptyComparison when either side
// has no calibrated tiles.
std::pair<double, double> isa_latency_speedup_range(const GpuSpec& blackwell,
                                                    const GpuSpec& hopper);

} // namespace blackmodel::tc

#endif
