// blackmodel — command-line front end for the calibrated B200/H200
// performance model: run predictions, reproduce the bundled reference
// tables, quantize vectors, fit decompression batching curves, and print
// the calibration inconsistency ledger.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "blackmodel/builtin_data.hpp"
#include "blackmodel/decomp.hpp"
#include "blackmodel/errors.hpp"
#include "blackmodel/ledger.hpp"
#include "blackmodel/lpfloat.hpp"
#include "blackmodel/machine.hpp"
#include "blackmodel/memsys.hpp"
#include "blackmodel/tables.hpp"
#include "blackmodel/tensor_core.hpp"
#include "blackmodel/workloads.hpp"

namespace bm = blackmodel;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kMissingCalibration = 3, kReproduceFail = 4, kFitFail = 5 };

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

struct Options {
    std::string gpu = "B200";
    std::string output = "table";
    std::string spec_file;
};

// A flat, ordered key/value report; rendered as an aligned table, CSV
// rows, or the JSON report object.
struct Report {
    std::string command;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<std::pair<std::string, std::string>> outputs;
    bool extrapolated = false;
    std::vector<std::string> errors;

    void render(const std::string& mode) const {
        if (mode == "json") {
            json j;
            j["command"] = command;
            json in = json::object(), out = json::object();
            for (const auto& [k, v] : inputs) in[k] = v;
            for (const auto& [k, v] : outputs) out[k] = v;
            j["inputs"] = in;
            j["outputs"] = out;
            j["extrapolated"] = extrapolated;
            j["errors"] = errors;
            std::cout << j.dump(2) << "\n";
        } else if (mode == "csv") {
            std::cout << "key,value\n";
            for (const auto& [k, v] : outputs) std::cout << k << "," << v << "\n";
        } else {
            size_t width = 0;
            for (const auto& [k, v] : outputs) width = std::max(width, k.size());
            for (const auto& [k, v] : outputs)
                std::cout << k << std::string(width - k.size() + 2, ' ') << v << "\n";
            if (extrapolated) std::cout << "(extrapolated)\n";
        }
    }
};

void fill_prediction(Report& r, const bm::workloads::Prediction& p) {
    r.outputs.emplace_back("metric", p.metric);
    r.outputs.emplace_back("value", fmt_num(p.value));
    r.outputs.emplace_back("unit", p.unit);
    r.outputs.emplace_back("bottleneck", bm::workloads::bottleneck_name(p.bottleneck));
    if (p.baseline_value) {
        r.outputs.emplace_back("baseline", fmt_num(*p.baseline_value));
        r.outputs.emplace_back("improvement", fmt_num(*p.improvement()));
    }
    for (const auto& [k, v] : p.aux) {
        // aux values arrive as strings; normalize numeric ones.
        char* end = nullptr;
        double num = std::strtod(v.c_str(), &end);
        r.outputs.emplace_back(k, end && *end == '\0' ? fmt_num(num) : v);
    }
    for (size_t i = 0; i < p.notes.size(); ++i)
        r.outputs.emplace_back("note" + std::to_string(i + 1), p.notes[i]);
    r.extrapolated = p.extrapolated;
}

bm::GpuSpec resolve_gpu(const std::string& name, const std::string& spec_file) {
    if (!spec_file.empty()) return bm::load_machine_path(spec_file);
    if (const char* dir = std::getenv("BLACKMODEL_SPEC_DIR")) {
        std::string lower = name;
        for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        std::filesystem::path p = std::filesystem::path(dir) / (lower + ".spec");
        if (std::filesystem::exists(p)) return bm::load_machine_path(p.string());
    }
    return bm::builtin_spec(name);
}

// Baseline for ratio reporting: the other bundled machine, when it exists.
std::optional<bm::GpuSpec> resolve_baseline(const bm::GpuSpec& primary) {
    std::string other = primary.name == "B200" ? "H200" : primary.name == "H200" ? "B200" : "";
    if (other.empty()) return std::nullopt;
    return resolve_gpu(other, "");
}

bm::CalibrationSet resolve_calibration(const std::string& spec_file) {
    bm::CalibrationSet cal;
    for (const std::string& name : bm::builtin_spec_names())
        cal.specs.emplace(name, resolve_gpu(name, ""));
    cal.provenance = bm::CalibrationSet::builtin().provenance;
    if (!spec_file.empty()) {
        bm::GpuSpec s = bm::load_machine_path(spec_file);
        cal.specs[s.name] = std::move(s);
    }
    return cal;
}

int run_reproduce(const Options& opt, const std::string& table, bool all) {
    bm::CalibrationSet cal = resolve_calibration(opt.spec_file);
    std::vector<std::string> ids;
    if (all)
        ids = bm::tables::table_ids();
    else
        ids.push_back(table);
    bool ok = true;
    std::string worst;
    for (const std::string& id : ids) {
        bm::tables::ComparisonReport rep = bm::tables::reproduce(cal, id);
        if (!rep.pass) {
            ok = false;
            worst = id + ":" + rep.worst_cell;
        }
        if (opt.output == "json") {
            json j;
            j["command"] = "reproduce";
            j["table"] = rep.table_id;
            j["pass"] = rep.pass;
            j["max_rel_error"] = rep.max_rel_error;
            j["worst_cell"] = rep.worst_cell;
            json cells = json::array();
            for (const auto& c : rep.cells) {
                json cj;
                cj["row"] = c.row_key;
                cj["column"] = c.column;
                cj["model"] = c.model.render();
                cj["reference"] = c.reference.render();
                cj["rel_error"] = c.rel_error;
                cj["tolerance"] = c.tolerance;
                cj["pass"] = c.pass;
                cells.push_back(cj);
            }
            j["cells"] = cells;
            std::cout << j.dump(2) << "\n";
        } else if (opt.output == "csv") {
            std::cout << "table,row,column,model,reference,rel_error,tolerance,pass\n";
            for (const auto& c : rep.cells)
                std::cout << rep.table_id << "," << c.row_key << "," << c.column << ","
                          << c.model.render() << "," << c.reference.render() << ","
                          << fmt_num(c.rel_error) << "," << fmt_num(c.tolerance) << ","
                          << (c.pass ? "1" : "0") << "\n";
        } else {
            printf("%-4s %-42s %s  max_rel_error=%s%s\n", rep.table_id.c_str(),
                   bm::tables::builtin_table(id).title.c_str(),
                   rep.pass ? "PASS" : "FAIL", fmt_num(rep.max_rel_error).c_str(),
                   rep.pass ? "" : ("  worst=" + rep.worst_cell).c_str());
            if (!rep.pass) {
                for (const auto& c : rep.cells)
                    if (!c.pass)
                        printf("     FAIL %s/%s: model=%s reference=%s (tol %s)\n",
                               c.row_key.c_str(), c.column.c_str(), c.model.render().c_str(),
                               c.reference.render().c_str(), fmt_num(c.tolerance).c_str());
            }
        }
    }
    if (!ok) {
        std::cerr << "error: reproduce: worst cell " << worst << "\n";
        return kReproduceFail;
    }
    return kOk;
}

int run_quantize(const Options& opt, const std::string& format, const std::string& input,
                 const std::string& codes_path) {
    std::ifstream in(input);
    if (!in) {
        std::cerr << "error: parse: cannot open '" << input << "'\n";
        return kUsage;
    }
    std::vector<double> v;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = line;
        if (!t.empty() && t.back() == '\r') t.pop_back();
        if (t.empty()) continue;
        char* end = nullptr;
        double x = std::strtod(t.c_str(), &end);
        if (end == t.c_str() || *end != '\0') {
            std::cerr << "error: parse: line " << lineno << ": not a number: '" << t << "'\n";
            return kUsage;
        }
        v.push_back(x);
    }
    if (v.empty()) {
        std::cerr << "error: parse: empty input vector\n";
        return kUsage;
    }

    Report r;
    r.command = "quantize";
    r.inputs = {{"format", format}, {"input", input}, {"count", std::to_string(v.size())}};
    std::ostringstream codes;
    bm::lpfloat::QuantStats stats;
    size_t padding = 0;
    if (bm::lpfloat::has_block_format(format)) {
        const bm::lpfloat::BlockFormat& bf = bm::lpfloat::block_format(format);
        padding = (bf.block_size - v.size() % bf.block_size) % bf.block_size;
        std::vector<double> padded = v;
        padded.resize(v.size() + padding, 0.0);
        for (size_t i = 0; i < padded.size(); i += bf.block_size) {
            std::vector<double> block(padded.begin() + i, padded.begin() + i + bf.block_size);
            bm::lpfloat::QuantizedBlock q = bm::lpfloat::quantize_block(bf, block);
            codes << std::hex << q.scale_code << ":";
            for (uint32_t c : q.elem_codes) codes << " " << c;
            codes << std::dec << "\n";
        }
        stats = bm::lpfloat::quant_error_stats(bf, v);
    } else {
        const bm::lpfloat::FloatFormat& fmt = bm::lpfloat::format(format);
        for (double x : v) codes << std::hex << bm::lpfloat::encode(fmt, x) << std::dec << "\n";
        stats = bm::lpfloat::quant_error_stats(fmt, v);
    }
    if (!codes_path.empty()) {
        std::ofstream out(codes_path);
        out << codes.str();
        r.outputs.emplace_back("codes_file", codes_path);
    }
    r.outputs.emplace_back("mse", fmt_num(stats.mse));
    r.outputs.emplace_back("max_abs_err", fmt_num(stats.max_abs_err));
    r.outputs.emplace_back("sqnr_db", stats.sqnr_db ? fmt_num(*stats.sqnr_db) : "undefined");
    r.outputs.emplace_back("overflow_count", std::to_string(stats.overflow_count));
    r.outputs.emplace_back("padding", std::to_string(padding));
    r.render(opt.output);
    if (codes_path.empty() && opt.output == "table") std::cout << codes.str();
    return kOk;
}

int run_fit_de(const Options& opt, const std::string& csv_path, uint64_t chunk_bytes,
               bool write_fragment) {
    std::ifstream in(csv_path);
    if (!in) {
        std::cerr << "error: parse: cannot open '" << csv_path << "'\n";
        return kUsage;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    std::vector<bm::decomp::Measurement> points = bm::decomp::parse_measurement_csv(ss.str());
    bm::decomp::FitResult fit = bm::decomp::fit_chunk_model(points, chunk_bytes);

    Report r;
    r.command = "fit-de";
    r.inputs = {{"csv", csv_path}, {"chunk_bytes", std::to_string(chunk_bytes)}};
    r.outputs = {
        {"single_rate_gbps", fmt_num(fit.profile.single_rate_gbps)},
        {"pipeline_depth", std::to_string(fit.profile.pipeline_depth)},
        {"saturation_batch", std::to_string(fit.profile.saturation_batch)},
        {"peak_gbps", fmt_num(fit.profile.peak_gbps)},
        {"max_speedup", fmt_num(fit.profile.max_speedup)},
        {"residual_rms", fmt_num(fit.residual_rms)},
    };
    r.render(opt.output);
    if (write_fragment) {
        std::cout << "\n[decomp.chunk." << chunk_bytes << "]\n"
                  << "single_rate_gbps = " << fmt_num(fit.profile.single_rate_gbps) << "\n"
                  << "pipeline_depth = " << fit.profile.pipeline_depth << "\n"
                  << "saturation_batch = " << fit.profile.saturation_batch << "\n"
                  << "peak_gbps = " << fmt_num(fit.profile.peak_gbps) << "\n"
                  << "max_speedup = " << fmt_num(fit.profile.max_speedup) << "\n";
    }
    return kOk;
}

int run_ledger(const Options& opt) {
    if (opt.output == "json") {
        json j = json::array();
        for (const auto& e : bm::ledger::entries()) {
            json ej;
            ej["id"] = e.id;
            ej["description"] = e.description;
            ej["value_a"] = e.value_a;
            ej["anchor_a"] = e.anchor_a;
            ej["value_b"] = e.value_b;
            ej["anchor_b"] = e.anchor_b;
            j.push_back(ej);
        }
        std::cout << j.dump(2) << "\n";
    } else if (opt.output == "csv") {
        std::cout << "id,value_a,anchor_a,value_b,anchor_b\n";
        for (const auto& e : bm::ledger::entries())
            std::cout << e.id << ",\"" << e.value_a << "\",\"" << e.anchor_a << "\",\""
                      << e.value_b << "\",\"" << e.anchor_b << "\"\n";
    } else {
        for (const auto& e : bm::ledger::entries()) {
            std::cout << e.id << "\n  " << e.description << "\n  [a] " << e.value_a << " ("
                      << e.anchor_a << ")\n  [b] " << e.value_b << " (" << e.anchor_b
                      << ")\n\n";
        }
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibrated B200/H200 performance model"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--gpu", opt.gpu, "Machine name (B200 or H200)");
        cmd->add_option("--output", opt.output, "Output mode")
            ->check(CLI::IsMember({"table", "csv", "json"}));
        cmd->add_option("--spec", opt.spec_file, "Machine file overriding the built-in preset");
    };

    // predict
    CLI::App* predict = app.add_subcommand("predict", "Run a workload prediction");
    predict->require_subcommand(1);

    int dgemm_n = 32768;
    CLI::App* p_dgemm = predict->add_subcommand("dgemm", "FP64 GEMM throughput");
    add_common(p_dgemm);
    p_dgemm->add_option("--n", dgemm_n, "Square matrix dimension")->required();

    std::string llm_model = "mistral-7b", llm_prec = "fp8";
    int llm_batch = 32, llm_seq = 2048;
    CLI::App* p_llm = predict->add_subcommand("llm", "LLM inference throughput");
    add_common(p_llm);
    p_llm->add_option("--model", llm_model, "Model name");
    p_llm->add_option("--precision", llm_prec, "Precision (fp16/fp8/fp4)")->required();
    p_llm->add_option("--batch", llm_batch, "Batch size");
    p_llm->add_option("--seq", llm_seq, "Sequence length");

    int lat_batch = 1, lat_seq = 2048;
    CLI::App* p_lat = predict->add_subcommand("llm-latency", "LLM latency vs batch");
    add_common(p_lat);
    p_lat->add_option("--batch", lat_batch, "Batch size")->required();
    p_lat->add_option("--seq", lat_seq, "Sequence length");

    double stream_gib = 128.0;
    CLI::App* p_stream = predict->add_subcommand("stream", "STREAM Triad bandwidth");
    add_common(p_stream);
    p_stream->add_option("--array-gib", stream_gib, "Array size in GiB")->required();

    std::string spmv_matrix = "ldoor";
    bool spmv_uncompressed = false;
    uint64_t spmv_rows = 0, spmv_nnz = 0;
    double spmv_idx_ratio = 8.2;
    CLI::App* p_spmv = predict->add_subcommand("spmv", "SpMV with index decompression");
    add_common(p_spmv);
    p_spmv->add_option("--matrix", spmv_matrix, "Matrix name");
    p_spmv->add_flag("--uncompressed", spmv_uncompressed, "Model the uncompressed run");
    p_spmv->add_option("--rows", spmv_rows, "Row count (traffic estimate)");
    p_spmv->add_option("--nnz", spmv_nnz, "Nonzero count (traffic estimate)");
    p_spmv->add_option("--index-ratio", spmv_idx_ratio, "Index compression ratio");

    std::string train_model = "gpt-1.3b";
    int train_batch = 128;
    CLI::App* p_train = predict->add_subcommand("training", "End-to-end training throughput");
    add_common(p_train);
    p_train->add_option("--model", train_model, "Model name");
    p_train->add_option("--batch", train_batch, "Batch size");

    // reproduce
    CLI::App* reproduce = app.add_subcommand("reproduce", "Check a reference table");
    add_common(reproduce);
    std::string table_id;
    bool all_tables = false;
    reproduce->add_option("table", table_id, "Table id (T1..T14)");
    reproduce->add_flag("--all", all_tables, "Reproduce every table");

    // quantize
    CLI::App* quantize = app.add_subcommand("quantize", "Quantize a vector file");
    add_common(quantize);
    std::string q_format, q_input, q_codes;
    quantize->add_option("--format", q_format, "e2m1/e3m2/e2m3/e4m3/e5m2/e8m0/mxfp4/nvfp4")
        ->required();
    quantize->add_option("--input", q_input, "One decimal per line")->required();
    quantize->add_option("--codes", q_codes, "Write codes to this file");

    // fit-de
    CLI::App* fitde = app.add_subcommand("fit-de", "Fit a chunk batching curve");
    add_common(fitde);
    std::string f_csv;
    uint64_t f_chunk = 0;
    bool f_write = false;
    fitde->add_option("--csv", f_csv, "Measurement CSV (concurrency,gbps)")->required();
    fitde->add_option("--chunk", f_chunk, "Chunk size in bytes")->required();
    fitde->add_flag("--write", f_write, "Emit a machine-file fragment");

    // ledger
    CLI::App* ledger_cmd = app.add_subcommand("ledger", "Print the inconsistency ledger");
    add_common(ledger_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (predict->parsed()) {
            bm::GpuSpec spec = resolve_gpu(opt.gpu, opt.spec_file);
            std::optional<bm::GpuSpec> baseline = resolve_baseline(spec);
            const bm::GpuSpec* base = baseline ? &*baseline : nullptr;
            Report r;
            r.command = "predict";
            r.inputs.emplace_back("gpu", spec.name);
            bm::workloads::Prediction p;
            if (p_dgemm->parsed()) {
                r.inputs.emplace_back("n", std::to_string(dgemm_n));
                p = bm::workloads::dgemm_fp64(spec, dgemm_n, base);
            } else if (p_llm->parsed()) {
                r.inputs.emplace_back("model", llm_model);
                r.inputs.emplace_back("precision", llm_prec);
                p = bm::workloads::llm_throughput(spec, llm_model,
                                                  bm::parse_precision(llm_prec), llm_batch,
                                                  llm_seq, base);
            } else if (p_lat->parsed()) {
                r.inputs.emplace_back("batch", std::to_string(lat_batch));
                p = bm::workloads::llm_latency(spec, lat_batch, lat_seq, base);
            } else if (p_stream->parsed()) {
                r.inputs.emplace_back("array_gib", fmt_num(stream_gib));
                bm::memsys::StreamResult sr = bm::memsys::stream_triad(
                    spec, static_cast<uint64_t>(stream_gib * (1ull << 30)));
                p.metric = "stream_triad";
                p.value = sr.bytes_per_s / 1e12;
                p.unit = "TB/s";
                p.bottleneck = bm::workloads::Bottleneck::memory_bw;
                p.aux.emplace_back("efficiency_pct", fmt_num(sr.efficiency * 100.0));
                p.aux.emplace_back("time_ms", fmt_num(sr.time_ms));
                if (base) {
                    bm::memsys::StreamResult br = bm::memsys::stream_triad(
                        *base, static_cast<uint64_t>(stream_gib * (1ull << 30)));
                    p.baseline_value = br.bytes_per_s / 1e12;
                    p.ratio = p.value / *p.baseline_value;
                }
            } else if (p_spmv->parsed()) {
                r.inputs.emplace_back("matrix", spmv_matrix);
                bm::workloads::MatrixProfile prof;
                prof.name = spmv_matrix;
                prof.rows = spmv_rows;
                prof.nnz = spmv_nnz;
                prof.index_compression_ratio = spmv_idx_ratio;
                p = bm::workloads::spmv(spec, prof, !spmv_uncompressed, base);
            } else if (p_train->parsed()) {
                r.inputs.emplace_back("model", train_model);
                r.inputs.emplace_back("batch", std::to_string(train_batch));
                p = bm::workloads::training_throughput(spec, train_model, train_batch, base);
            }
            fill_prediction(r, p);
            r.render(opt.output);
            return kOk;
        }
        if (reproduce->parsed()) {
            if (!all_tables && table_id.empty()) {
                std::cerr << "error: usage: reproduce needs a table id or --all\n";
                return kUsage;
            }
            return run_reproduce(opt, table_id, all_tables);
        }
        if (quantize->parsed()) return run_quantize(opt, q_format, q_input, q_codes);
        if (fitde->parsed()) return run_fit_de(opt, f_csv, f_chunk, f_write);
        if (ledger_cmd->parsed()) return run_ledger(opt);
    } catch (const bm::MissingCalibration& e) {
        std::cerr << "error: missing-calibration: " << e.what() << "\n";
        return kMissingCalibration;
    } catch (const bm::IllConditioned& e) {
        std::cerr << "error: ill-conditioned: " << e.what() << "\n";
        return kFitFail;
    } catch (const bm::ParseError& e) {
        std::cerr << "error: parse: " << e.what() << "\n";
        return kUsage;
    } catch (const bm::UnknownMachine& e) {
        std::cerr << "error: unknown-machine: " << e.what() << "\n";
        return kUsage;
    } catch (const bm::Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return kUsage;
    }
    return kOk;
}
