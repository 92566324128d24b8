#ifndef BLACKMODEL_DECOMP_HPP
#define BLACKMODEL_DECOMP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blackmodel/machine.hpp"

namespace blackmodel::decomp {

// Exact calibrated per-format row. Throws UnknownFormat; fields the
// calibration marks N/A stay empty and require_input/require_ratio raise
// MissingCalibration on demand.
const DeFormatProfile& format_profile(const GpuSpec& spec, const std::string& format);
double require_input_gbps(const DeFormatProfile& p);
double require_ratio(const DeFormatProfile& p);

struct SensitivityResult {
    double input_gbps = 0.0;
    double output_gbps = 0.0;         // pattern rate capped at the output ceiling
    double latency_ms_per_100mb = 0.0;
};

// Input bandwidth is output/ratio (the engine is output-ceiling bound);
// latency is 100 MB at the output rate plus the fixed per-call overhead.
SensitivityResult sensitivity(const GpuSpec& spec, double compression_ratio,
                              double pattern_output_gbps);

struct BatchPoint {
    int concurrency = 0;
    double aggregate_gbps = 0.0;
    double efficiency = 0.0; // aggregate / (b * single_rate)
    double speedup_vs_sequential = 0.0;
};

// Batching model: aggregate scales linearly up to the pipeline depth,
// then follows a power law in concurrency (linear in log-log space)
// that reaches the calibrated peak at the saturation batch, and stays
// flat beyond it.
BatchPoint batch_throughput(const GpuSpec& spec, uint64_t chunk_bytes, int concurrency);

struct BatchCurve {
    std::vector<BatchPoint> points; // concurrency strictly increasing
};

// Model curve sampled at powers of two from 1 through max_concurrency.
BatchCurve model_curve(const GpuSpec& spec, uint64_t chunk_bytes, int max_concurrency);

// Largest concurrency in the curve whose per-op efficiency stays at or
// above the threshold.
int pipeline_depth(const BatchCurve& curve, double threshold = 0.85);

// First concurrency whose doubling improves aggregate throughput by less
// than the margin; empty when the curve never saturates.
std::optional<int> saturation_point(const BatchCurve& curve, double margin = 0.05);

struct FitResult {
    ChunkProfile profile;
    double residual_rms = 0.0; // relative, over all points
};

struct Measurement {
    int concurrency = 0;
    double gbps = 0.0;
};

// Least-squares fit of (single_rate, depth, saturation, peak) to the
// batching curve family. Depth/saturation are searched over the measured
// concurrency grid; rate and peak come from closed-form regressions.
// Throws IllConditioned below 4 points or without a concurrency-1 point.
FitResult fit_chunk_model(std::vector<Measurement> points, uint64_t chunk_bytes = 0);

// Parses the measurement CSV ("concurrency,gbps" header, one row per point).
std::vector<Measurement> parse_measurement_csv(const std::string& text);

struct Workload {
    uint64_t typical_object_bytes = 0;
    double latency_budget_ms = 0.0;
    std::string data_kind; // "numeric", "scientific", "realtime", anything else = generic
};

struct Recommendation {
    std::string format;
    uint64_t chunk_bytes = 0;
    int concurrency = 0;      // the chunk's pipeline depth (efficiency knee)
    double predicted_gbps = 0.0; // aggregate at full batching
};

Recommendation recommend_config(const GpuSpec& spec, const Workload& w);

} // namespace blackmodel::decomp

#endif
