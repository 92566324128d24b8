#include "blackmodel/workloads.hpp"

#include <algorithm>
#include <cmath>

#include "blackmodel/errors.hpp"
#include "blackmodel/memsys.hpp"

namespace blackmodel::workloads {

const char* bottleneck_name(Bottleneck b) {
    switch (b) {
        case Bottleneck::compute: return "compute";
        case Bottleneck::memory_bw: return "memory_bw";
        case Bottleneck::input_bw: return "input_bw";
        case Bottleneck::calibration: return "calibration";
    }
    return "?";
}

std::optional<double> Prediction::improvement() const {
    if (!baseline_value) return std::nullopt;
    return lower_is_better ? *baseline_value / value : value / *baseline_value;
}

double fp64_theoretical_peak(const GpuSpec& spec) {
    auto it = spec.tensor_peak.find(Precision::fp64);
    if (it == spec.tensor_peak.end())
        throw MissingCalibration("fp64 peak on " + spec.name);
    return it->second.theoretical();
}

double dgemm_efficiency(const GpuSpec& spec, int n) {
    if (spec.dgemm_dims.empty())
        throw MissingCalibration("dgemm efficiency on " + spec.name);
    const std::vector<double>& dims = spec.dgemm_dims;
    const std::vector<double>& fr = spec.dgemm_fractions;
    double x = static_cast<double>(n);
    if (x >= dims.back()) return fr.back();
    if (x <= dims.front()) {
        // Saturating decay below the smallest anchor: passes through
        // (dims[0], fr[0]) and falls off toward zero for tiny matrices.
        return fr.front() * 2.0 * x / (x + dims.front());
    }
    for (size_t i = 1; i < dims.size(); ++i) {
        if (x <= dims[i]) {
            double t = (std::log2(x) - std::log2(dims[i - 1])) /
                       (std::log2(dims[i]) - std::log2(dims[i - 1]));
            return fr[i - 1] + t * (fr[i] - fr[i - 1]);
        }
    }
    return fr.back();
}

Prediction dgemm_fp64(const GpuSpec& spec, int n, const GpuSpec* baseline) {
    if (n < 1) throw ShapeMismatch("matrix dim must be >= 1");
    Prediction p;
    p.metric = "dgemm_fp64";
    p.unit = "TFLOPS";
    double eff = dgemm_efficiency(spec, n);
    p.value = fp64_theoretical_peak(spec) * eff;
    p.bottleneck = Bottleneck::compute;
    p.extrapolated =
        std::find(spec.dgemm_dims.begin(), spec.dgemm_dims.end(), static_cast<double>(n)) ==
        spec.dgemm_dims.end();
    p.aux.emplace_back("pct_of_peak", std::to_string(eff * 100.0));
    if (baseline) {
        p.baseline_value = fp64_theoretical_peak(*baseline) * dgemm_efficiency(*baseline, n);
        p.ratio = p.value / *p.baseline_value;
    }
    return p;
}

namespace {

const LlmEntry& llm_entry(const GpuSpec& spec, const std::string& model, Precision prec) {
    auto mit = spec.llm.find(model);
    if (mit == spec.llm.end()) throw MissingCalibration("model " + model + " on " + spec.name);
    auto pit = mit->second.find(prec);
    if (pit == mit->second.end()) {
        if (is_blackwell_only(prec))
            throw MissingCalibration(precision_name(prec), "new-in-Blackwell");
        throw MissingCalibration(model + "/" + precision_name(prec) + " on " + spec.name);
    }
    return pit->second;
}

std::string fmt1(double v) {
    char buf[32];
    snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

Prediction llm_throughput(const GpuSpec& spec, const std::string& model, Precision precision,
                          int batch, int seq, const GpuSpec* baseline) {
    if (batch != 32 || seq != 2048)
        throw MissingCalibration("llm throughput at batch " + std::to_string(batch) +
                                     "/seq " + std::to_string(seq),
                                 "calibrated at batch 32, seq 2048 only");
    const LlmEntry& e = llm_entry(spec, model, precision);
    Prediction p;
    p.metric = "llm_throughput";
    p.unit = "tok/s";
    p.value = e.tok_s;
    p.bottleneck = e.bw_pct >= 65.0 ? Bottleneck::memory_bw : Bottleneck::compute;
    p.aux.emplace_back("bw_pct", fmt1(e.bw_pct));
    if (e.perplexity) p.aux.emplace_back("perplexity", fmt1(*e.perplexity));
    if (e.dppl_pct) p.aux.emplace_back("dppl_pct", fmt1(*e.dppl_pct));
    if (spec.l2_hit_rate_pct)
        p.notes.push_back("L2 hit rate rises from " + fmt1(spec.l2_hit_rate_pct->first) +
                          "% to " + fmt1(spec.l2_hit_rate_pct->second) +
                          "% as precision shrinks");
    if (baseline) {
        auto mit = baseline->llm.find(model);
        if (mit != baseline->llm.end()) {
            auto pit = mit->second.find(precision);
            if (pit != mit->second.end()) {
                p.baseline_value = pit->second.tok_s;
                p.ratio = p.value / *p.baseline_value;
            }
        }
        if (!p.baseline_value)
            p.notes.push_back("baseline has no " + precision_name(precision) +
                              " calibration");
    }
    return p;
}

AffineFit llm_latency_fit(const GpuSpec& spec) {
    if (!spec.llm_latency)
        throw MissingCalibration("llm latency table on " + spec.name);
    const LlmLatencyCal& cal = *spec.llm_latency;
    // Weighted least squares with 1/y weights, so the short-batch points
    // are fit in relative rather than absolute terms.
    double sw = 0.0, swx = 0.0, swxx = 0.0, swy = 0.0, swxy = 0.0;
    for (size_t i = 0; i < cal.batches.size(); ++i) {
        double x = cal.batches[i], y = cal.latency_ms[i], w = 1.0 / y;
        sw += w;
        swx += w * x;
        swxx += w * x * x;
        swy += w * y;
        swxy += w * x * y;
    }
    double det = sw * swxx - swx * swx;
    AffineFit f;
    f.slope = (sw * swxy - swx * swy) / det;
    f.intercept = (swy * swxx - swx * swxy) / det;
    for (size_t i = 0; i < cal.batches.size(); ++i) {
        double pred = f.intercept + f.slope * cal.batches[i];
        f.max_rel_residual = std::max(
            f.max_rel_residual, std::fabs(pred - cal.latency_ms[i]) / cal.latency_ms[i]);
    }
    return f;
}

Prediction llm_latency(const GpuSpec& spec, int batch, int seq, const GpuSpec* baseline) {
    if (batch < 1) throw ShapeMismatch("batch must be >= 1");
    if (!spec.llm_latency)
        throw MissingCalibration("llm latency table on " + spec.name);
    const LlmLatencyCal& cal = *spec.llm_latency;
    if (seq != cal.seq_len)
        throw MissingCalibration("llm latency at seq " + std::to_string(seq),
                                 "calibrated at seq " + std::to_string(cal.seq_len));
    Prediction p;
    p.metric = "llm_latency";
    p.unit = "ms";
    p.lower_is_better = true;
    auto lookup = [&](const GpuSpec& s) -> std::optional<double> {
        const LlmLatencyCal& c = *s.llm_latency;
        for (size_t i = 0; i < c.batches.size(); ++i)
            if (c.batches[i] == batch) return c.latency_ms[i];
        return std::nullopt;
    };
    if (auto cal_ms = lookup(spec)) {
        p.value = *cal_ms;
        p.bottleneck = Bottleneck::calibration;
    } else {
        AffineFit f = llm_latency_fit(spec);
        p.value = f.intercept + f.slope * batch;
        p.extrapolated = true;
        p.bottleneck = Bottleneck::calibration;
    }
    double tok_s = batch * static_cast<double>(cal.seq_len) / (p.value / 1e3);
    p.aux.emplace_back("tok_s", std::to_string(tok_s));
    if (batch <= cal.low_batch_max && !cal.low_batch_stages.empty())
        p.notes.push_back("latency pipeline runs " + cal.low_batch_stages +
                          " stages at this batch (vs " + cal.high_batch_stages +
                          " beyond batch " + std::to_string(cal.low_batch_max) + ")");
    if (baseline && baseline->llm_latency) {
        if (auto b = lookup(*baseline)) {
            p.baseline_value = *b;
            p.ratio = p.value / *b;
        }
    }
    return p;
}

Prediction spmv(const GpuSpec& spec, const MatrixProfile& profile, bool compressed,
                const GpuSpec* baseline) {
    Prediction p;
    p.metric = "spmv";
    p.unit = "GFLOPS";
    auto it = spec.spmv.find(profile.name);
    if (it == spec.spmv.end()) {
        if (profile.rows == 0 || profile.nnz == 0)
            throw MissingCalibration("matrix " + profile.name + " on " + spec.name);
    } else {
        const SpmvEntry& e = it->second;
        double speedup = e.speedup.value_or(1.0);
        p.value = compressed ? e.gflops : e.gflops / speedup;
        p.bottleneck = compressed ? Bottleneck::input_bw : Bottleneck::memory_bw;
        if (e.time_ms) {
            double t = compressed ? *e.time_ms : *e.time_ms * speedup;
            p.aux.emplace_back("time_ms", std::to_string(t));
        }
        if (compressed && e.speedup)
            p.aux.emplace_back("speedup_vs_uncompressed", std::to_string(*e.speedup));
        if (baseline) {
            auto bit = baseline->spmv.find(profile.name);
            if (bit != baseline->spmv.end()) {
                p.baseline_value = bit->second.gflops;
                p.ratio = p.value / *p.baseline_value;
            }
        }
    }
    if (profile.rows > 0 && profile.nnz > 0) {
        // CSR traffic: fp64 values, int32 column indexes, int32 row
        // pointers; index streams compress by the profile ratio.
        double values = 8.0 * profile.nnz;
        double indexes = 4.0 * profile.nnz + 4.0 * (profile.rows + 1);
        double total = values + indexes;
        double compressed_total = values + indexes / profile.index_compression_ratio;
        double reduction = compressed ? (total - compressed_total) / total : 0.0;
        p.aux.emplace_back("traffic_bytes",
                           std::to_string(compressed ? compressed_total : total));
        p.aux.emplace_back("traffic_reduction", std::to_string(reduction));
        if (spec.spmv_index && compressed)
            p.notes.push_back("calibrated traffic reduction for pointer-heavy matrices: " +
                              fmt1(spec.spmv_index->traffic_reduction_pct) + "% (<" +
                              fmt1(spec.spmv_index->latency_overhead_pct) +
                              "% latency overhead)");
    }
    return p;
}

Prediction training_throughput(const GpuSpec& spec, const std::string& model, int batch,
                               const GpuSpec* baseline) {
    auto mit = spec.training.find(model);
    if (mit == spec.training.end())
        throw MissingCalibration("training model " + model + " on " + spec.name);
    auto bit = mit->second.find(batch);
    if (bit == mit->second.end())
        throw MissingCalibration(model + " at batch " + std::to_string(batch));
    const TrainingEntry& e = bit->second;
    Prediction p;
    p.metric = "training_throughput";
    p.unit = e.unit;
    p.value = e.throughput;
    p.bottleneck = Bottleneck::calibration;
    p.aux.emplace_back("time_to_acc_hrs", std::to_string(e.time_to_acc_hrs));
    if (e.eff_per_watt) {
        p.aux.emplace_back("eff_per_watt", std::to_string(*e.eff_per_watt));
        p.aux.emplace_back("implied_power_w", std::to_string(e.throughput / *e.eff_per_watt));
    }
    if (baseline) {
        auto bm = baseline->training.find(model);
        if (bm != baseline->training.end()) {
            auto bb = bm->second.find(batch);
            if (bb != bm->second.end()) {
                p.baseline_value = bb->second.throughput;
                p.ratio = p.value / *p.baseline_value;
            }
        }
    }
    return p;
}

Decomposition speedup_decomposition(DecompositionKind kind) {
    Decomposition d;
    if (kind == DecompositionKind::inference) {
        d.factors = {{"sm_count", 1.09}, {"tensor_core", 1.27}, {"memory_bw", 1.23}};
        d.measured_low = 1.57;
        d.measured_high = 1.59;
    } else {
        d.factors = {{"sm_count", 1.09}, {"cta_pairing", 1.27}, {"tmem", 1.26}};
        d.measured_low = 1.54;
        d.measured_high = 1.56;
    }
    d.product = 1.0;
    for (const auto& [name, f] : d.factors) d.product *= f;
    d.consistent = d.product >= d.measured_low * 0.95 && d.product <= d.measured_high * 1.05;
    return d;
}

double energy_efficiency(double throughput, double power_watts) {
    if (power_watts <= 0.0) throw ShapeMismatch("power must be > 0");
    return throughput / power_watts;
}

namespace {

std::optional<double> try_llm_tok_s(const GpuSpec& s, const std::string& model, Precision p) {
    auto mit = s.llm.find(model);
    if (mit == s.llm.end()) return std::nullopt;
    auto pit = mit->second.find(p);
    if (pit == mit->second.end()) return std::nullopt;
    return pit->second.tok_s;
}

} // namespace

std::vector<SummaryRow> summary(const GpuSpec& b, const GpuSpec& h) {
    std::vector<SummaryRow> rows;
    auto add = [&](SummaryRow r) { rows.push_back(std::move(r)); };

    {
        SummaryRow r{"LLM Inf. (7B, FP4)", "tok/s", {}, {}, {}, "FP4 Tensor Cores"};
        r.b200 = try_llm_tok_s(b, "mistral-7b", Precision::fp4);
        // No FP4 baseline exists; the headline factor is vs the machine's
        // own FP16 run.
        auto fp16 = try_llm_tok_s(b, "mistral-7b", Precision::fp16);
        if (r.b200 && fp16) r.improvement = *r.b200 / *fp16;
        add(r);
    }
    {
        SummaryRow r{"LLM Inf. (8x7B, FP8)", "tok/s", {}, {}, {}, "5th Gen TC, TMEM"};
        r.b200 = try_llm_tok_s(b, "mixtral-8x7b", Precision::fp8);
        r.h200 = try_llm_tok_s(h, "mixtral-8x7b", Precision::fp8);
        if (r.b200 && r.h200) r.improvement = *r.b200 / *r.h200;
        add(r);
    }
    {
        SummaryRow r{"LLM Inf. (BS=1, FP8)", "Latency (ms)", {}, {}, {}, "Latency pipeline"};
        Prediction p = llm_latency(b, 1, 2048, &h);
        r.b200 = p.value;
        r.h200 = p.baseline_value;
        r.improvement = p.improvement();
        add(r);
    }
    {
        SummaryRow r{"LLM Inf. (8x22B, FP8)", "tok/s", {}, {}, {}, "HBM3e, compression"};
        r.b200 = try_llm_tok_s(b, "mixtral-8x22b", Precision::fp8);
        r.h200 = try_llm_tok_s(h, "mixtral-8x22b", Precision::fp8);
        if (r.b200 && r.h200) r.improvement = *r.b200 / *r.h200;
        add(r);
    }
    {
        SummaryRow r{"Attention Block", "Latency (us)", {}, {}, {}, "TMEM"};
        r.b200 = b.attention_block_us;
        r.h200 = h.attention_block_us;
        if (r.b200 && r.h200) r.improvement = *r.h200 / *r.b200;
        add(r);
    }
    {
        SummaryRow r{"HPC DGEMM (FP64)", "TFLOPS", {}, {}, {}, "Doubled FP64 units"};
        Prediction p = dgemm_fp64(b, 32768, &h);
        r.b200 = p.value;
        r.h200 = p.baseline_value;
        r.improvement = p.improvement();
        add(r);
    }
    {
        SummaryRow r{"STREAM Triad", "BW (TB/s)", {}, {}, {}, "HBM3e"};
        // Large-set operating point (128 GiB arrays).
        uint64_t bytes = 128ull << 30;
        r.b200 = memsys::stream_triad(b, bytes).bytes_per_s / 1e12;
        r.h200 = memsys::stream_triad(h, bytes).bytes_per_s / 1e12;
        r.improvement = *r.b200 / *r.h200;
        add(r);
    }
    {
        SummaryRow r{"SpMV (compressed)", "GFLOPS", {}, {}, {}, "Decomp engine"};
        MatrixProfile ldoor;
        ldoor.name = "ldoor";
        Prediction p = spmv(b, ldoor, true, &h);
        r.b200 = p.value;
        r.h200 = p.baseline_value;
        r.improvement = p.improvement();
        add(r);
    }
    {
        SummaryRow r{"GPT Training (1.3B)", "tok/s", {}, {}, {}, "CTA pairs, TMEM, TC"};
        Prediction p = training_throughput(b, "gpt-1.3b", 128, &h);
        r.b200 = p.value;
        r.h200 = p.baseline_value;
        r.improvement = p.improvement();
        add(r);
    }
    {
        SummaryRow r{"ResNet Training", "img/s", {}, {}, {}, "5th Gen TC, mem BW"};
        Prediction p = training_throughput(b, "resnet-50", 1024, &h);
        r.b200 = p.value;
        r.h200 = p.baseline_value;
        r.improvement = p.improvement();
        add(r);
    }
    {
        SummaryRow r{"Energy Eff. (Training)", "tok/s/W", {}, {}, {}, "Process, efficiency"};
        auto get_eff = [](const GpuSpec& s) -> std::optional<double> {
            auto mit = s.training.find("gpt-1.3b");
            if (mit == s.training.end()) return std::nullopt;
            auto bit = mit->second.find(128);
            if (bit == mit->second.end()) return std::nullopt;
            return bit->second.eff_per_watt;
        };
        r.b200 = get_eff(b);
        r.h200 = get_eff(h);
        if (r.b200 && r.h200) r.improvement = *r.b200 / *r.h200;
        add(r);
    }
    return rows;
}

} // namespace blackmodel::workloads
