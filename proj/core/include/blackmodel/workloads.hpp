#ifndef BLACKMODEL_WORKLOADS_HPP
#define BLACKMODEL_WORKLOADS_HPP

#include <optional>
#include <string>
#include <vector>

#include "blackmodel/machine.hpp"

namespace blackmodel::workloads {

enum class Bottleneck { compute, memory_bw, input_bw, calibration };
const char* bottleneck_name(Bottleneck b);

struct Prediction {
    std::string metric;
    double value = 0.0;
    std::string unit;
    Bottleneck bottleneck = Bottleneck::calibration;
    std::optional<double> baseline_value;
    std::optional<double> ratio; // value / baseline
    bool lower_is_better = false;
    bool extrapolated = false;
    std::vector<std::pair<std::string, std::string>> aux; // extra reported figures
    std::vector<std::string> notes;

    // Improvement factor for summary rows: baseline/value for latencies,
    // value/baseline otherwise.
    std::optional<double> improvement() const;
};

// FP64 GEMM: derived theoretical peak times the calibrated efficiency
// curve (log2-linear between anchors; a saturating decay anchored at the
// smallest calibrated dim below it; flat above the largest).
Prediction dgemm_fp64(const GpuSpec& spec, int n, const GpuSpec* baseline = nullptr);
double dgemm_efficiency(const GpuSpec& spec, int n);
double fp64_theoretical_peak(const GpuSpec& spec);

// Calibrated inference throughput for (model, precision) at the reference
// batch-32 / seq-2048 configuration.
Prediction llm_throughput(const GpuSpec& spec, const std::string& model, Precision precision,
                          int batch = 32, int seq = 2048, const GpuSpec* baseline = nullptr);

// Latency vs batch. Calibrated batches return the measured value; other
// batches use the weighted-least-squares affine law a + c*batch and are
// flagged extrapolated.
Prediction llm_latency(const GpuSpec& spec, int batch, int seq = 2048,
                       const GpuSpec* baseline = nullptr);

struct AffineFit {
    double intercept = 0.0; // a, ms
    double slope = 0.0;     // c, ms per request
    double max_rel_residual = 0.0;
};
// 1/y-weighted least squares over the machine's calibrated batch points.
AffineFit llm_latency_fit(const GpuSpec& spec);

struct MatrixProfile {
    std::string name; // calibrated matrices: webbase-1m, circuit5m, ldoor
    uint64_t rows = 0;
    uint64_t nnz = 0;
    double sparsity_pct = 0.0;
    double index_compression_ratio = 8.2; // RLE on index arrays
};

// CSR SpMV with the index streams decompressed in hardware. Named
// calibrated matrices report measured GFLOPS/time; a rows/nnz profile
// adds the traffic estimate (values + indexes/ratio).
Prediction spmv(const GpuSpec& spec, const MatrixProfile& profile, bool compressed,
                const GpuSpec* baseline = nullptr);

Prediction training_throughput(const GpuSpec& spec, const std::string& model, int batch,
                               const GpuSpec* baseline = nullptr);

struct Decomposition {
    std::vector<std::pair<std::string, double>> factors;
    double product = 0.0;
    double measured_low = 0.0;
    double measured_high = 0.0;
    bool consistent = false; // product within 5% of the measured range
};

enum class DecompositionKind { inference, training };
Decomposition speedup_decomposition(DecompositionKind kind);

double energy_efficiency(double throughput, double power_watts);

struct SummaryRow {
    std::string workload;
    std::string metric;
    std::optional<double> b200;
    std::optional<double> h200;
    std::optional<double> improvement;
    std::string key_feature;
};

// One row per headline workload, each cell recomputed through the
// corresponding operation. Missing calibrations surface as empty cells.
std::vector<SummaryRow> summary(const GpuSpec& b200, const GpuSpec& h200);

} // namespace blackmodel::workloads

#endif
