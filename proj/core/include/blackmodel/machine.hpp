#ifndef BLACKMODEL_MACHINE_HPP
#define BLACKMODEL_MACHINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace blackmodel {

enum class Precision { fp64, fp32, tf32, bf16, fp16, fp8, fp6, fp4, int8, int4, int32 };

const std::string& precision_name(Precision p);
Precision parse_precision(const std::string& s); // throws UnknownFormat
bool is_integer_precision(Precision p);
// FP4/FP6 exist only on the Blackwell generation.
bool is_blackwell_only(Precision p);

// One row of the per-precision throughput calibration: sustained
// throughput (TFLOPS, or TOPS for integer precisions) and the measured
// percent of theoretical peak.
struct PeakEntry {
    double throughput = 0.0;
    double pct_of_peak = 0.0;
    bool integer_unit = false;
    double theoretical() const { return throughput / (pct_of_peak / 100.0); }
    const char* unit() const { return integer_unit ? "TOPS" : "TFLOPS"; }
};

struct TmemParams {
    uint64_t capacity_bytes = 0;
    int lanes = 0;
    int columns = 0;
    int cell_bits = 0;
    double read_bw = 0.0;  // bytes/s
    double write_bw = 0.0; // bytes/s
    double miss_latency_cycles = 0.0;
    double baseline_miss_latency_cycles = 0.0;
    double sustained_mma_bw = 0.0;   // bytes/s
    double global_path_bw = 0.0;     // bytes/s
    double chained_saved_rate = 0.0; // bytes/s, annotation
    double power_delta_large = 0.0;  // signed fraction at/beyond power_large_dim
    double power_delta_small = 0.0;  // signed fraction at/below power_small_dim
    int power_large_dim = 0;
    int power_small_dim = 0;
};

struct DeFormatProfile {
    std::string name;
    std::optional<double> compression_ratio;
    std::optional<double> input_gbps;
    double output_gbps = 0.0;
    double latency_ms = 0.0; // end-to-end for a 100 MB payload
    std::string use_case;
};

struct ChunkProfile {
    uint64_t chunk_bytes = 0;
    double single_rate_gbps = 0.0;
    int pipeline_depth = 0;
    int saturation_batch = 0;
    double peak_gbps = 0.0;
    double max_speedup = 0.0;
};

struct DeParams {
    std::map<std::string, DeFormatProfile> format_profiles;
    std::map<std::string, DeFormatProfile> sensitivity; // per data pattern
    std::map<uint64_t, ChunkProfile> chunk_profiles;
    double output_ceiling_low_gbps = 0.0;
    double output_ceiling_high_gbps = 0.0;
    double efficiency_threshold = 0.0;
    double saturation_margin = 0.0;
    double latency_overhead_ms = 0.0; // fixed per-call cost
};

struct StreamEff {
    double small_fraction = 0.0;
    double large_fraction = 0.0;
    uint64_t threshold_ws_bytes = 0; // working-set size where the level switches
};

struct InstrEntry {
    double latency_cycles = 0.0;
    double throughput = 0.0; // TFLOPS / TOPS
    bool integer_unit = false;
    std::string shape;
};

struct LlmEntry {
    double tok_s = 0.0;
    double bw_pct = 0.0;
    std::optional<double> perplexity;
    std::optional<double> dppl_pct;
};

struct LlmLatencyCal {
    std::string model;
    std::string precision;
    int seq_len = 0;
    std::vector<int> batches;
    std::vector<double> latency_ms;
    std::string low_batch_stages;  // annotation, e.g. "8-10"
    std::string high_batch_stages; // annotation, e.g. "18-20"
    int low_batch_max = 0;
};

struct SpmvEntry {
    double sparsity_pct = 0.0;
    double gflops = 0.0;
    std::optional<double> speedup;
    std::optional<double> time_ms;
};

struct SpmvIndexCal {
    double rle_index_ratio = 0.0;
    double traffic_reduction_pct = 0.0; // reported figure, not derived
    double latency_overhead_pct = 0.0;
};

struct TrainingEntry {
    double throughput = 0.0;
    std::string unit; // "tok/s" or "img/s"
    double time_to_acc_hrs = 0.0;
    std::optional<double> eff_per_watt;
};

struct GpuSpec {
    std::string name;
    int sm_count = 0;
    double transistors_b = 0.0;       // units of 10^9
    uint64_t hbm_capacity_bytes = 0;
    double hbm_peak_bw = 0.0;         // bytes/s
    double board_power_w = 0.0;
    double global_miss_latency_cycles = 0.0;
    StreamEff stream_eff;
    std::optional<std::pair<double, double>> l2_hit_rate_pct;

    std::map<Precision, PeakEntry> tensor_peak;
    std::map<std::string, double> tcgen05_latency; // tile name -> cycles
    std::optional<double> wgmma_base_cycles_per_n64;
    std::vector<std::string> wgmma_tiles;
    std::map<std::pair<Precision, Precision>, InstrEntry> instr; // (input, accum)
    std::optional<std::pair<double, double>> sched_stall_reduction_pct;

    std::optional<TmemParams> tmem;
    std::optional<DeParams> de;

    std::vector<double> dgemm_dims;
    std::vector<double> dgemm_fractions;

    std::map<std::string, std::map<Precision, LlmEntry>> llm; // model -> precision
    std::optional<LlmLatencyCal> llm_latency;
    std::optional<double> attention_block_us;
    std::map<std::string, SpmvEntry> spmv;
    std::optional<SpmvIndexCal> spmv_index;
    std::map<std::string, std::map<int, TrainingEntry>> training; // model -> batch

    bool has_tmem() const { return tmem.has_value(); }
    bool has_de() const { return de.has_value(); }
};

bool operator==(const GpuSpec& a, const GpuSpec& b);

// Parse a machine-description document (see the grammar in the README).
// Unknown sections/keys and missing required sections are rejected; the
// result has already passed validate_spec.
GpuSpec load_machine_file(const std::string& text);
GpuSpec load_machine_path(const std::string& path);

// Canonical round-trippable rendering of a spec.
std::string serialize_machine_file(const GpuSpec& spec);

struct Violation {
    std::string field;
    std::string rule;
};

std::vector<Violation> validate_spec(const GpuSpec& spec);

// Bundled presets. The returned text of builtin_spec_text() is
// byte-identical to the shipped .spec files.
GpuSpec builtin_spec(const std::string& name); // "B200" | "H200"
const std::string& builtin_spec_text(const std::string& name);
std::vector<std::string> builtin_spec_names();

// A named bundle of machine specs plus per-table provenance notes.
struct CalibrationSet {
    std::map<std::string, GpuSpec> specs;
    std::map<std::string, std::string> provenance; // table id -> calibration block

    const GpuSpec& at(const std::string& name) const;
    static CalibrationSet builtin();
};

} // namespace blackmodel

#endif
