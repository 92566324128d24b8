#ifndef BLACKMODEL_MEMSYS_HPP
#define BLACKMODEL_MEMSYS_HPP

#include <cstdint>

#include "blackmodel/machine.hpp"

namespace blackmodel::memsys {

enum class LatencyTier { tmem_miss, baseline_global_miss };
enum class OperandPath { tmem_mma, global_load };

// Calibrated end-to-end miss latency in cycles. tmem tiers require a
// TMEM-equipped machine (throws NoTmem otherwise).
double access_latency(const GpuSpec& spec, LatencyTier tier);

// Fraction of peak TMEM bandwidth delivered for an (m x n) tile,
// piecewise on the smaller edge: <32 underutilizes the wide interface,
// 64..128 is the sweet spot, >128 triggers multi-phase transfers.
double tile_efficiency(int tile_m, int tile_n);

struct PathBw {
    double bytes_per_s = 0.0;
    double ratio_vs_global = 0.0;
};
PathBw operand_path_bw(const GpuSpec& spec, OperandPath path);

struct TrafficReport {
    uint64_t bytes_moved = 0;
    uint64_t bytes_saved_vs_baseline = 0;
    double saved_rate_at_full_sm = 0.0; // bytes/s, calibrated annotation
};

// Traffic for D = (A x B) x C with the m x n intermediate either kept
// resident in TMEM or round-tripped through global memory (which costs an
// extra write + read of 2*m*n*elem_bytes). Residency throws TmemOverflow
// when the intermediate tile cannot fit.
TrafficReport chained_gemm_traffic(const GpuSpec& spec, int m, int n, int k,
                                   int elem_bytes, bool intermediate_resident);

struct StreamResult {
    double bytes_per_s = 0.0;
    double efficiency = 0.0;
    uint64_t working_set_bytes = 0;
    double time_ms = 0.0; // one triad pass at the predicted bandwidth
};

// Two-level STREAM Triad model: working set = 3 * array_bytes, efficiency
// switches from the small- to the large-set fraction at the calibrated
// threshold. Triad moves 24 bytes per element (two reads, one write).
StreamResult stream_triad(const GpuSpec& spec, uint64_t array_bytes);

// Signed board-power fraction for staging accumulators in TMEM instead of
// SMEM: -0.15 at/beyond the large anchor, +0.04 at/below the small one,
// log2-linear between (crosses zero once).
double tmem_power_delta(const GpuSpec& spec, int matrix_dim);

struct LayoutResult {
    bool fits = false;
    uint64_t bytes = 0;
};

// Whether rows x cols cells of the given width sit inside the TMEM array
// (128 lanes x 512 columns of 32-bit cells).
LayoutResult tmem_layout(const GpuSpec& spec, int rows, int cols, int cell_bits);

} // namespace blackmodel::memsys

#endif
