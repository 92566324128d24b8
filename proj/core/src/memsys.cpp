#include "blackmodel/memsys.hpp"

#include <cmath>

#include "blackmodel/errors.hpp"

namespace blackmodel::memsys {

double access_latency(const GpuSpec& spec, LatencyTier tier) {
    switch (tier) {
        case LatencyTier::tmem_miss:
            if (!spec.tmem) throw NoTmem(spec.name);
            return spec.tmem->miss_latency_cycles;
        case LatencyTier::baseline_global_miss:
            return spec.global_miss_latency_cycles;
    }
    return 0.0;
}

double tile_efficiency(int tile_m, int tile_n) {
    if (tile_m < 1 || tile_n < 1) throw ShapeMismatch("tile dims must be >= 1");
    int e = std::min(tile_m, tile_n);
    if (e < 32) return 0.45;
    if (e > 128) return 0.70;
    if (e >= 64) return 1.0;
    // log2-linear ramp from 0.80 at 32 to 1.00 at 64.
    return 0.80 + 0.20 * (std::log2(static_cast<double>(e)) - 5.0);
}

PathBw operand_path_bw(const GpuSpec& spec, OperandPath path) {
    if (!spec.tmem) throw NoTmem(spec.name);
    const TmemParams& t = *spec.tmem;
    double bw = path == OperandPath::tmem_mma ? t.sustained_mma_bw : t.global_path_bw;
    return {bw, t.sustained_mma_bw / t.global_path_bw};
}

TrafficReport chained_gemm_traffic(const GpuSpec& spec, int m, int n, int k,
                                   int elem_bytes, bool intermediate_resident) {
    if (m <= 0 || n <= 0 || k <= 0 || elem_bytes <= 0)
        throw ShapeMismatch("chained_gemm_traffic: dims must be > 0");
    uint64_t intermediate = static_cast<uint64_t>(m) * n * elem_bytes;
    uint64_t roundtrip = 2 * intermediate; // write D, read it back for x C
    TrafficReport r;
    if (intermediate_resident) {
        if (!spec.tmem) throw NoTmem(spec.name);
        if (intermediate > spec.tmem->capacity_bytes)
            throw TmemOverflow("intermediate tile is " + std::to_string(intermediate) +
                               " bytes, capacity " +
                               std::to_string(spec.tmem->capacity_bytes));
        r.bytes_moved = 0;
        r.bytes_saved_vs_baseline = roundtrip;
        r.saved_rate_at_full_sm = spec.tmem->chained_saved_rate;
    } else {
        r.bytes_moved = roundtrip;
        r.bytes_saved_vs_baseline = 0;
        r.saved_rate_at_full_sm = 0.0;
    }
    return r;
}

StreamResult stream_triad(const GpuSpec& spec, uint64_t array_bytes) {
    if (array_bytes == 0) throw ShapeMismatch("array_bytes must be > 0");
    StreamResult r;
    r.working_set_bytes = 3 * array_bytes;
    r.efficiency = r.working_set_bytes < spec.stream_eff.threshold_ws_bytes
                       ? spec.stream_eff.small_fraction
                       : spec.stream_eff.large_fraction;
    r.bytes_per_s = r.efficiency * spec.hbm_peak_bw;
    // 24 bytes per element over array_bytes/8 elements = 3 * array_bytes.
    r.time_ms = static_cast<double>(r.working_set_bytes) / r.bytes_per_s * 1e3;
    return r;
}

double tmem_power_delta(const GpuSpec& spec, int matrix_dim) {
    if (matrix_dim < 1) throw ShapeMismatch("matrix_dim must be >= 1");
    if (!spec.tmem) throw NoTmem(spec.name);
    const TmemParams& t = *spec.tmem;
    if (matrix_dim >= t.power_large_dim) return t.power_delta_large;
    if (matrix_dim <= t.power_small_dim) return t.power_delta_small;
    double lo = std::log2(static_cast<double>(t.power_small_dim));
    double hi = std::log2(static_cast<double>(t.power_large_dim));
    double x = (std::log2(static_cast<double>(matrix_dim)) - lo) / (hi - lo);
    return t.power_delta_small + x * (t.power_delta_large - t.power_delta_small);
}

LayoutResult tmem_layout(const GpuSpec& spec, int rows, int cols, int cell_bits) {
    if (rows < 1 || cols < 1) throw ShapeMismatch("layout dims must be >= 1");
    if (!spec.tmem) throw NoTmem(spec.name);
    const TmemParams& t = *spec.tmem;
    LayoutResult r;
    r.fits = rows <= t.lanes && cols <= t.columns && cell_bits == t.cell_bits;
    r.bytes = static_cast<uint64_t>(rows) * cols * cell_bits / 8;
    return r;
}

} // namespace blackmodel::memsys
