#include "blackmodel/tensor_core.hpp"

#include <cmath>
#include <limits>

#include "blackmodel/errors.hpp"

namespace blackmodel::tc {

std::string Tile::name() const {
    return "m" + std::to_string(m) + "n" + std::to_string(n) + "k" + std::to_string(k);
}

Tile parse_tile(const std::string& name) {
    Tile t;
    size_t npos = name.find('n'), kpos = name.find('k');
    if (name.empty() || name[0] != 'm' || npos == std::string::npos ||
        kpos == std::string::npos || npos < 1 || kpos < npos)
        throw ShapeMismatch("bad tile name '" + name + "', want e.g. m64n64k16");
    t.m = std::stoi(name.substr(1, npos - 1));
    t.n = std::stoi(name.substr(npos + 1, kpos - npos - 1));
    t.k = std::stoi(name.substr(kpos + 1));
    if (t.m <= 0 || t.n <= 0 || t.k <= 0) throw ShapeMismatch("tile dims must be > 0");
    return t;
}

std::string sass_opcode(Isa isa, Precision p) {
    switch (p) {
        case Precision::fp64: return "DMMA";
        case Precision::fp32: return isa == Isa::tcgen05 ? "HMMA" : "HGMMA";
        case Precision::fp4:
            if (isa == Isa::wgmma) throw Unsupported("wgmma has no FP4 path");
            return "OMMA";
        case Precision::fp8: return isa == Isa::tcgen05 ? "QMMA" : "QGMMA";
        case Precision::int4:
        case Precision::int8: return isa == Isa::tcgen05 ? "IMMA" : "IGMMA";
        default:
            throw Unsupported("no SASS mapping calibrated for " + precision_name(p));
    }
}

Cycles instr_latency(const GpuSpec& spec, const MmaInstr& instr) {
    if (instr.isa == Isa::wgmma) {
        if (!spec.wgmma_base_cycles_per_n64)
            throw Unsupported(spec.name + " has no warp-group MMA");
        return {*spec.wgmma_base_cycles_per_n64 * (instr.tile.n / 64.0), false};
    }
    if (spec.tcgen05_latency.empty())
        throw Unsupported(spec.name + " has no tcgen05 calibration");
    auto it = spec.tcgen05_latency.find(instr.tile.name());
    if (it != spec.tcgen05_latency.end()) return {it->second, false};
    // Nearest calibrated tile by log-area distance; flagged as extrapolated.
    double want = std::log2(static_cast<double>(instr.tile.m) * instr.tile.n);
    double best = std::numeric_limits<double>::infinity();
    double cycles = 0.0;
    for (const auto& [name, cyc] : spec.tcgen05_latency) {
        Tile t = parse_tile(name);
        double d = std::fabs(std::log2(static_cast<double>(t.m) * t.n) - want);
        if (d < best) {
            best = d;
            cycles = cyc;
        }
    }
    return {cycles, true};
}

InstrThroughput instr_throughput(const GpuSpec& spec, const MmaInstr& instr) {
    if (instr.isa != Isa::tcgen05 || spec.instr.empty())
        throw MissingCalibration("instruction throughput on " + spec.name);
    auto it = spec.instr.find({instr.in_prec, instr.accum_prec});
    if (it == spec.instr.end())
        throw MissingCalibration(precision_name(instr.in_prec) + "/" +
                                 precision_name(instr.accum_prec) + " instruction");
    return {it->second.throughput, it->second.integer_unit, it->second.latency_cycles};
}

PeakResult peak_throughput(const GpuSpec& spec, Precision p, const GpuSpec* baseline) {
    auto it = spec.tensor_peak.find(p);
    if (it == spec.tensor_peak.end()) {
        if (is_blackwell_only(p))
            throw MissingCalibration(precision_name(p), "new-in-Blackwell");
        throw MissingCalibration(precision_name(p) + " on " + spec.name);
    }
    PeakResult r;
    r.tflops = it->second.throughput;
    r.pct_of_peak = it->second.pct_of_peak;
    r.integer_unit = it->second.integer_unit;
    if (baseline) {
        auto bit = baseline->tensor_peak.find(p);
        if (bit != baseline->tensor_peak.end()) {
            r.baseline_tflops = bit->second.throughput;
            r.speedup = r.tflops / bit->second.throughput;
        }
    }
    return r;
}

Cycles dependency_chain_cycles(const GpuSpec& spec, const MmaInstr& instr, int chain_len) {
    if (chain_len < 0) throw ShapeMismatch("chain_len must be >= 0");
    Cycles c = instr_latency(spec, instr);
    return {c.cycles * chain_len, c.extrapolated};
}

double accum_penalty(const GpuSpec& spec, Precision in, Precision accum) {
    auto it = spec.instr.find({in, accum});
    if (it == spec.instr.end())
        throw MissingCalibration(precision_name(in) + "/" + precision_name(accum) +
                                 " instruction");
    double fastest = 0.0;
    for (const auto& [pair, e] : spec.instr)
        if (pair.first == in) fastest = std::max(fastest, e.throughput);
    return it->second.throughput / fastest;
}

std::pair<double, double> isa_latency_speedup_range(const GpuSpec& blackwell,
                                                    const GpuSpec& hopper) {
    if (!hopper.wgmma_base_cycles_per_n64 || hopper.wgmma_tiles.empty() ||
        blackwell.tcgen05_latency.empty())
        throw EmptyComparison("no calibrated tiles to compare");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const std::string& wt : hopper.wgmma_tiles) {
        Tile t = parse_tile(wt);
        double wl = *hopper.wgmma_base_cycles_per_n64 * (t.n / 64.0);
        for (const auto& [name, tl] : blackwell.tcgen05_latency) {
            lo = std::min(lo, wl / tl);
            hi = std::max(hi, wl / tl);
        }
    }
    return {lo, hi};
}

} // namespace blackmodel::tc
