#include "blackmodel/tables.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "blackmodel/builtin_data.hpp"
#include "blackmodel/decomp.hpp"
#include "blackmodel/errors.hpp"
#include "blackmodel/memsys.hpp"
#include "blackmodel/tensor_core.hpp"
#include "blackmodel/workloads.hpp"

namespace blackmodel::tables {

namespace {

std::string fmt_num(double v) {
    if (std::fabs(v - std::round(v)) < 1e-9 && std::fabs(v) < 1e15) {
        char buf[32];
        snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    char buf[64];
    snprintf(buf, sizeof buf, "%.4f", v);
    std::string s = buf;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

} // namespace

std::string Cell::render() const {
    switch (kind) {
        case Kind::number: return fmt_num(num);
        case Kind::text: return text;
        case Kind::na: return "N/A";
    }
    return "N/A";
}

ReferenceTable parse_reference_csv(const std::string& id, const std::string& text) {
    ReferenceTable t;
    t.id = id;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        bool quoted = false;
        for (size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (quoted) {
                if (c == '"') quoted = false;
                else cur.push_back(c);
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        if (header) {
            t.columns = fields;
            header = false;
            continue;
        }
        std::vector<Cell> row;
        for (const std::string& f : fields) {
            if (f == "N/A") {
                row.push_back(Cell::na());
                continue;
            }
            char* end = nullptr;
            double v = std::strtod(f.c_str(), &end);
            if (!f.empty() && end == f.c_str() + f.size())
                row.push_back(Cell::number_cell(v));
            else
                row.push_back(Cell::text_cell(f));
        }
        row.resize(t.columns.size(), Cell::text_cell(""));
        t.rows.push_back(std::move(row));
    }
    return t;
}

const std::vector<std::string>& table_ids() {
    static const std::vector<std::string> ids = {"T1", "T2", "T3", "T4", "T5", "T6", "T7",
                                                 "T8", "T9", "T10", "T11", "T12", "T13",
                                                 "T14"};
    return ids;
}

const ReferenceTable& builtin_table(const std::string& id) {
    static const std::map<std::string, ReferenceTable>* tables = [] {
        auto* m = new std::map<std::string, ReferenceTable>;
        static const std::map<std::string, std::string> titles = {
            {"T1", "Decompression engine format profiles"},
            {"T2", "Compression-ratio sensitivity (LZ4, 100 MB)"},
            {"T3", "Decompression pipeline depth by chunk size"},
            {"T4", "Tensor core SASS opcode mapping"},
            {"T5", "Single-instruction MMA latency"},
            {"T6", "Single-instruction throughput by precision"},
            {"T7", "Sustained tensor throughput by precision"},
            {"T8", "LLM inference throughput by precision"},
            {"T9", "LLM latency vs batch size"},
            {"T10", "Workload summary"},
            {"T11", "End-to-end training"},
            {"T12", "FP64 DGEMM"},
            {"T13", "STREAM Triad bandwidth"},
            {"T14", "SpMV with hardware decompression"},
        };
        for (const std::string& id : table_ids()) {
            ReferenceTable t = parse_reference_csv(id, builtin_table_csv(id));
            t.title = titles.at(id);
            (*m)[id] = std::move(t);
        }
        return m;
    }();
    auto it = tables->find(id);
    if (it == tables->end()) throw UnknownFormat("reference table " + id);
    return it->second;
}

// ---------------------------------------------------------------------------
// Reproduction engine
// ---------------------------------------------------------------------------

namespace {

using ModelRow = std::vector<Cell>;
// Computes the model's version of one reference row (keys echoed).
using RowFn = std::function<ModelRow(const CalibrationSet&, const std::vector<Cell>&)>;

Cell opt_num(const std::optional<double>& v) {
    return v ? Cell::number_cell(*v) : Cell::na();
}

double cell_num(const std::vector<Cell>& row, size_t i) { return row.at(i).num; }
std::string cell_text(const std::vector<Cell>& row, size_t i) { return row.at(i).text; }

ModelRow t1_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    const DeFormatProfile& p = decomp::format_profile(cal.at("B200"), cell_text(ref, 0));
    return {Cell::text_cell(p.name),       opt_num(p.compression_ratio),
            opt_num(p.input_gbps),         Cell::number_cell(p.output_gbps),
            Cell::number_cell(p.latency_ms), Cell::text_cell(p.use_case)};
}

ModelRow t2_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    const GpuSpec& b = cal.at("B200");
    std::string pattern = cell_text(ref, 0);
    std::string key = pattern;
    for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const DeFormatProfile& row = b.de->sensitivity.at(key);
    decomp::SensitivityResult s =
        decomp::sensitivity(b, *row.compression_ratio, row.output_gbps);
    return {Cell::text_cell(pattern), Cell::number_cell(*row.compression_ratio),
            Cell::number_cell(s.input_gbps), Cell::number_cell(s.output_gbps),
            Cell::number_cell(s.latency_ms_per_100mb)};
}

ModelRow t3_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    const GpuSpec& b = cal.at("B200");
    uint64_t chunk = static_cast<uint64_t>(cell_num(ref, 0)) * 1024;
    decomp::BatchCurve curve = decomp::model_curve(b, chunk, 2048);
    int depth = decomp::pipeline_depth(curve, b.de->efficiency_threshold);
    auto sat = decomp::saturation_point(curve, b.de->saturation_margin);
    decomp::BatchPoint at_sat = decomp::batch_throughput(b, chunk, sat.value_or(2048));
    return {Cell::number_cell(cell_num(ref, 0)), Cell::number_cell(at_sat.aggregate_gbps),
            Cell::number_cell(depth), sat ? Cell::number_cell(*sat) : Cell::na(),
            Cell::number_cell(at_sat.speedup_vs_sequential)};
}

Cell opcode_cell(tc::Isa isa, Precision p) {
    try {
        return Cell::text_cell(tc::sass_opcode(isa, p));
    } catch (const Unsupported&) {
        return Cell::na();
    }
}

ModelRow t4_row(const CalibrationSet&, const std::vector<Cell>& ref) {
    Precision p = parse_precision(cell_text(ref, 0));
    return {Cell::text_cell(cell_text(ref, 0)), opcode_cell(tc::Isa::tcgen05, p),
            opcode_cell(tc::Isa::wgmma, p)};
}

ModelRow t5_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    std::string instr = cell_text(ref, 0);
    tc::MmaInstr m;
    m.tile = tc::parse_tile(cell_text(ref, 1));
    m.isa = instr == "wgmma" ? tc::Isa::wgmma : tc::Isa::tcgen05;
    const GpuSpec& spec = m.isa == tc::Isa::wgmma ? cal.at("H200") : cal.at("B200");
    tc::Cycles c = tc::instr_latency(spec, m);
    return {Cell::text_cell(instr), Cell::text_cell(m.tile.name()),
            Cell::text_cell(m.isa == tc::Isa::wgmma ? "Warp-group" : "Warp"),
            Cell::number_cell(c.cycles)};
}

ModelRow t6_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    tc::MmaInstr m;
    m.isa = tc::Isa::tcgen05;
    m.in_prec = parse_precision(cell_text(ref, 0));
    m.accum_prec = parse_precision(cell_text(ref, 1));
    m.tile = tc::parse_tile(cell_text(ref, 2));
    tc::InstrThroughput t = tc::instr_throughput(cal.at("B200"), m);
    return {Cell::text_cell(cell_text(ref, 0)), Cell::text_cell(cell_text(ref, 1)),
            Cell::text_cell(cell_text(ref, 2)), Cell::number_cell(t.latency_cycles),
            Cell::number_cell(t.value)};
}

ModelRow t7_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    Precision p = parse_precision(cell_text(ref, 0));
    tc::PeakResult r = tc::peak_throughput(cal.at("B200"), p, &cal.at("H200"));
    Cell speedup = r.speedup ? Cell::number_cell(*r.speedup) : Cell::text_cell("New");
    return {Cell::text_cell(cell_text(ref, 0)), Cell::number_cell(r.tflops),
            Cell::number_cell(r.pct_of_peak), opt_num(r.baseline_tflops), speedup};
}

ModelRow t8_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    std::string model = cell_text(ref, 0);
    Precision prec = parse_precision(cell_text(ref, 1));
    const GpuSpec& b = cal.at("B200");
    const GpuSpec& h = cal.at("H200");
    workloads::Prediction p = workloads::llm_throughput(b, model, prec, 32, 2048, &h);
    const LlmEntry& be = b.llm.at(model).at(prec);
    Cell h_tok = opt_num(p.baseline_value);
    Cell speedup = opt_num(p.ratio);
    Cell h_bw = Cell::na();
    auto hit = h.llm.find(model);
    if (hit != h.llm.end()) {
        auto pit = hit->second.find(prec);
        if (pit != hit->second.end()) h_bw = Cell::number_cell(pit->second.bw_pct);
    }
    return {Cell::text_cell(model),      Cell::text_cell(cell_text(ref, 1)),
            Cell::number_cell(p.value),  h_tok,
            speedup,                     Cell::number_cell(be.bw_pct),
            h_bw,                        opt_num(be.perplexity),
            opt_num(be.dppl_pct)};
}

ModelRow t9_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    int batch = static_cast<int>(cell_num(ref, 0));
    const GpuSpec& b = cal.at("B200");
    const GpuSpec& h = cal.at("H200");
    workloads::Prediction p = workloads::llm_latency(b, batch, 2048, &h);
    double tok_s = batch * 2048.0 / (p.value / 1e3);
    return {Cell::number_cell(batch), Cell::number_cell(p.value),
            opt_num(p.baseline_value), opt_num(p.improvement()),
            Cell::number_cell(tok_s)};
}

ModelRow t10_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    std::vector<workloads::SummaryRow> rows =
        workloads::summary(cal.at("B200"), cal.at("H200"));
    for (const workloads::SummaryRow& r : rows) {
        if (r.workload != cell_text(ref, 0)) continue;
        return {Cell::text_cell(r.workload), Cell::text_cell(r.metric), opt_num(r.b200),
                opt_num(r.h200), opt_num(r.improvement), Cell::text_cell(r.key_feature)};
    }
    throw MissingCalibration("summary row '" + cell_text(ref, 0) + "'");
}

ModelRow t11_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    std::string model = cell_text(ref, 0);
    int batch = static_cast<int>(cell_num(ref, 1));
    workloads::Prediction p =
        workloads::training_throughput(cal.at("B200"), model, batch, &cal.at("H200"));
    const TrainingEntry& be = cal.at("B200").training.at(model).at(batch);
    const TrainingEntry& he = cal.at("H200").training.at(model).at(batch);
    return {Cell::text_cell(model),        Cell::number_cell(batch),
            Cell::number_cell(p.value),    opt_num(p.baseline_value),
            opt_num(p.ratio),              Cell::number_cell(be.time_to_acc_hrs),
            Cell::number_cell(he.time_to_acc_hrs), opt_num(be.eff_per_watt)};
}

ModelRow t12_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    int n = static_cast<int>(cell_num(ref, 0));
    const GpuSpec& b = cal.at("B200");
    const GpuSpec& h = cal.at("H200");
    workloads::Prediction p = workloads::dgemm_fp64(b, n, &h);
    return {Cell::number_cell(n),
            Cell::number_cell(p.value),
            opt_num(p.baseline_value),
            opt_num(p.ratio),
            Cell::number_cell(workloads::dgemm_efficiency(b, n) * 100.0),
            Cell::number_cell(workloads::dgemm_efficiency(h, n) * 100.0)};
}

ModelRow t13_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    uint64_t bytes = static_cast<uint64_t>(cell_num(ref, 0)) << 30;
    memsys::StreamResult b = memsys::stream_triad(cal.at("B200"), bytes);
    memsys::StreamResult h = memsys::stream_triad(cal.at("H200"), bytes);
    return {Cell::number_cell(cell_num(ref, 0)), Cell::number_cell(b.bytes_per_s / 1e12),
            Cell::number_cell(h.bytes_per_s / 1e12), Cell::number_cell(b.efficiency * 100.0),
            Cell::number_cell(h.efficiency * 100.0)};
}

ModelRow t14_row(const CalibrationSet& cal, const std::vector<Cell>& ref) {
    workloads::MatrixProfile prof;
    prof.name = cell_text(ref, 0);
    for (char& c : prof.name)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    workloads::Prediction p = workloads::spmv(cal.at("B200"), prof, true);
    const SpmvEntry& e = cal.at("B200").spmv.at(prof.name);
    return {Cell::text_cell(cell_text(ref, 0)), Cell::number_cell(e.sparsity_pct),
            Cell::number_cell(p.value), opt_num(e.speedup), opt_num(e.time_ms)};
}

struct TableSpec {
    RowFn row_fn;
    std::map<std::string, double> col_tolerance; // unlisted columns: exact
};

const std::map<std::string, TableSpec>& table_specs() {
    // Tolerances: exact for pure lookups; 1.5% for the input = output/ratio
    // identity; 2% for model-curve and interpolation cells; 1% for ratio
    // cells the reference prints at 2-3 significant figures.
    static const std::map<std::string, TableSpec> specs = {
        {"T1", {t1_row, {}}},
        {"T2", {t2_row, {{"input_gbps", 0.015}, {"output_gbps", 0.02}, {"latency_ms", 0.02}}}},
        {"T3", {t3_row, {{"peak_gbps", 0.02}, {"max_speedup", 0.02}}}},
        {"T4", {t4_row, {}}},
        {"T5", {t5_row, {}}},
        {"T6", {t6_row, {}}},
        {"T7", {t7_row, {{"speedup", 0.01}}}},
        {"T8", {t8_row, {{"speedup", 0.01}}}},
        {"T9", {t9_row, {{"ratio", 0.01}, {"b200_tok_s", 0.005}}}},
        {"T10", {t10_row, {{"b200", 0.01}, {"h200", 0.01}, {"improvement", 0.01}}}},
        {"T11", {t11_row, {{"ratio", 0.01}}}},
        {"T12",
         {t12_row,
          {{"b200_tflops", 0.02}, {"h200_tflops", 0.02}, {"ratio", 0.01}}}},
        {"T13",
         {t13_row,
          {{"b200_tbps", 0.02}, {"h200_tbps", 0.02}, {"b200_pct", 0.02}, {"h200_pct", 0.02}}}},
        {"T14", {t14_row, {}}},
    };
    return specs;
}

} // namespace

ComparisonReport reproduce(const CalibrationSet& cal, const std::string& table_id) {
    const ReferenceTable& ref = builtin_table(table_id);
    const TableSpec& spec = table_specs().at(table_id);

    ComparisonReport report;
    report.table_id = table_id;
    report.pass = true;

    for (const std::vector<Cell>& ref_row : ref.rows) {
        std::string row_key = ref_row[0].render();
        if (ref.columns.size() > 1 && ref_row[1].kind == Cell::Kind::text &&
            table_id != "T10")
            row_key += "/" + ref_row[1].text;
        ModelRow model;
        try {
            model = spec.row_fn(cal, ref_row);
        } catch (const Error&) {
            // A whole-row failure surfaces as N/A cells.
            model.assign(ref.columns.size(), Cell::na());
            model[0] = ref_row[0];
        }
        model.resize(ref.columns.size(), Cell::na());

        for (size_t c = 0; c < ref.columns.size(); ++c) {
            CellComparison cc;
            cc.row_key = row_key;
            cc.column = ref.columns[c];
            cc.model = model[c];
            cc.reference = ref_row[c];
            auto tol_it = spec.col_tolerance.find(cc.column);
            cc.tolerance = tol_it == spec.col_tolerance.end() ? 0.0 : tol_it->second;

            const Cell& m = cc.model;
            const Cell& r = cc.reference;
            if (r.kind == Cell::Kind::na || m.kind == Cell::Kind::na) {
                cc.pass = r.kind == m.kind;
            } else if (r.kind == Cell::Kind::text || m.kind == Cell::Kind::text) {
                cc.pass = r.kind == m.kind && r.text == m.text;
            } else {
                double denom = std::fabs(r.num) > 0 ? std::fabs(r.num) : 1.0;
                cc.rel_error = std::fabs(m.num - r.num) / denom;
                cc.pass = cc.rel_error <= cc.tolerance + 1e-9;
            }
            if (cc.rel_error > report.max_rel_error) {
                report.max_rel_error = cc.rel_error;
                report.worst_cell = cc.row_key + "/" + cc.column;
            }
            if (!cc.pass) {
                report.pass = false;
                if (report.worst_cell.empty())
                    report.worst_cell = cc.row_key + "/" + cc.column;
            }
            report.cells.push_back(std::move(cc));
        }
    }
    return report;
}

} // namespace blackmodel::tables
