#include "blackmodel/machine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "blackmodel/errors.hpp"

namespace blackmodel {

namespace {

constexpr double kTB = 1e12;      // bandwidths are decimal
constexpr uint64_t kKiB = 1024;   // capacities are binary
constexpr uint64_t kGiB = kKiB * kKiB * kKiB;

const std::vector<std::pair<Precision, std::string>>& precision_names() {
    static const std::vector<std::pair<Precision, std::string>> t = {
        {Precision::fp64, "fp64"}, {Precision::fp32, "fp32"},  {Precision::tf32, "tf32"},
        {Precision::bf16, "bf16"}, {Precision::fp16, "fp16"},  {Precision::fp8, "fp8"},
        {Precision::fp6, "fp6"},   {Precision::fp4, "fp4"},    {Precision::int8, "int8"},
        {Precision::int4, "int4"}, {Precision::int32, "int32"},
    };
    return t;
}

} // namespace

const std::string& precision_name(Precision p) {
    for (const auto& [prec, name] : precision_names())
        if (prec == p) return name;
    static const std::string unknown = "?";
    return unknown;
}

Precision parse_precision(const std::string& s) {
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    for (const auto& [prec, name] : precision_names())
        if (name == lower) return prec;
    throw UnknownFormat(s);
}

bool is_integer_precision(Precision p) {
    return p == Precision::int8 || p == Precision::int4 || p == Precision::int32;
}

bool is_blackwell_only(Precision p) { return p == Precision::fp4 || p == Precision::fp6; }

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Value {
    enum class Kind { number, string, list } kind = Kind::number;
    double num = 0.0;
    std::string str;
    std::vector<double> list;
    int line = 0;
    int col = 0;
};

struct Section {
    std::string name;
    int line = 0;
    std::map<std::string, Value> entries;
};

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, int line, int col) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ParseError(line, col, "expected a number, got '" + tok + "'");
    return v;
}

std::vector<Section> tokenize(const std::string& text) {
    std::vector<Section> sections;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        size_t hash = line.find('#');
        // '#' inside a quoted string is content, not a comment.
        size_t quote_a = line.find('"');
        if (hash != std::string::npos &&
            (quote_a == std::string::npos || hash < quote_a ||
             (line.rfind('"') != std::string::npos && hash > line.rfind('"'))))
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(lineno, static_cast<int>(line.size()), "unterminated section header");
            std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) throw ParseError(lineno, 2, "empty section name");
            sections.push_back({name, lineno, {}});
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(lineno, 1, "expected 'key = value' or '[section]'");
        if (sections.empty())
            throw ParseError(lineno, 1, "entry before any [section] header");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        int col = static_cast<int>(eq) + 2;
        if (key.empty()) throw ParseError(lineno, 1, "empty key");
        if (val.empty()) throw ParseError(lineno, col, "empty value for '" + key + "'");
        Value v;
        v.line = lineno;
        v.col = col;
        if (val.front() == '"') {
            if (val.size() < 2 || val.back() != '"')
                throw ParseError(lineno, col, "unterminated string");
            v.kind = Value::Kind::string;
            v.str = val.substr(1, val.size() - 2);
        } else if (val.find(',') != std::string::npos) {
            v.kind = Value::Kind::list;
            std::stringstream parts(val);
            std::string item;
            while (std::getline(parts, item, ','))
                v.list.push_back(parse_number(trim(item), lineno, col));
        } else {
            v.kind = Value::Kind::number;
            v.num = parse_number(val, lineno, col);
        }
        auto& sec = sections.back();
        if (!sec.entries.emplace(key, v).second)
            throw ParseError(lineno, 1, "duplicate key '" + key + "' in [" + sec.name + "]");
    }
    return sections;
}

// Accessor that tracks which keys were consumed so leftovers can be
// rejected as unknown.
class SectionReader {
public:
    SectionReader(const Section& sec) : sec_(sec) {}

    double number(const std::string& key) {
        const Value& v = get(key, Value::Kind::number);
        return v.num;
    }
    std::optional<double> opt_number(const std::string& key) {
        if (!sec_.entries.count(key)) return std::nullopt;
        return number(key);
    }
    std::string string(const std::string& key) { return get(key, Value::Kind::string).str; }
    std::optional<std::string> opt_string(const std::string& key) {
        if (!sec_.entries.count(key)) return std::nullopt;
        return string(key);
    }
    std::vector<double> list(const std::string& key) {
        const Value& v = get(key, Value::Kind::list);
        return v.list;
    }
    // A single number is accepted where a list is expected.
    std::vector<double> number_or_list(const std::string& key) {
        auto it = sec_.entries.find(key);
        if (it == sec_.entries.end()) missing(key);
        used_.insert(key);
        if (it->second.kind == Value::Kind::number) return {it->second.num};
        if (it->second.kind == Value::Kind::list) return it->second.list;
        throw ParseError(it->second.line, it->second.col, "'" + key + "': expected numbers");
    }
    bool has(const std::string& key) const { return sec_.entries.count(key) != 0; }

    void finish() const {
        for (const auto& [key, v] : sec_.entries)
            if (!used_.count(key))
                throw ParseError(v.line, 1,
                                 "unknown key '" + key + "' in [" + sec_.name + "]");
    }
    int line() const { return sec_.line; }

private:
    const Value& get(const std::string& key, Value::Kind kind) {
        auto it = sec_.entries.find(key);
        if (it == sec_.entries.end()) missing(key);
        used_.insert(key);
        const Value& v = it->second;
        if (v.kind != kind) {
            const char* want = kind == Value::Kind::number ? "a number"
                               : kind == Value::Kind::string ? "a string"
                                                             : "a list";
            throw ParseError(v.line, v.col, "'" + key + "': expected " + std::string(want));
        }
        return v;
    }
    [[noreturn]] void missing(const std::string& key) const {
        throw ParseError(sec_.line, 1,
                         "missing required key '" + key + "' in [" + sec_.name + "]");
    }

    const Section& sec_;
    std::set<std::string> used_;
};

std::vector<std::string> split_name(const std::string& name) {
    std::vector<std::string> parts;
    std::stringstream ss(name);
    std::string item;
    while (std::getline(ss, item, '.')) parts.push_back(item);
    return parts;
}

std::pair<double, double> peak_pair(SectionReader& r, const std::string& key, int line) {
    std::vector<double> v = r.list(key);
    if (v.size() != 2)
        throw ParseError(line, 1, "'" + key + "': expected 'throughput, pct_of_peak'");
    return {v[0], v[1]};
}

} // namespace

GpuSpec load_machine_file(const std::string& text) {
    std::vector<Section> sections = tokenize(text);
    GpuSpec spec;
    DeParams de;
    bool saw_gpu = false, saw_peak = false, saw_memory = false, saw_de = false;

    for (const Section& sec : sections) {
        SectionReader r(sec);
        std::vector<std::string> parts = split_name(sec.name);

        if (sec.name == "gpu") {
            saw_gpu = true;
            spec.name = r.string("name");
            spec.sm_count = static_cast<int>(r.number("sm_count"));
            spec.transistors_b = r.number("transistors_b");
            spec.board_power_w = r.number("board_power_w");
        } else if (sec.name == "memory") {
            saw_memory = true;
            spec.hbm_capacity_bytes =
                static_cast<uint64_t>(r.number("hbm_capacity_gib") * static_cast<double>(kGiB));
            spec.hbm_peak_bw = r.number("hbm_peak_bw_tbps") * kTB;
            spec.global_miss_latency_cycles = r.number("global_miss_latency_cycles");
            spec.stream_eff.small_fraction = r.number("stream_small_fraction");
            spec.stream_eff.large_fraction = r.number("stream_large_fraction");
            spec.stream_eff.threshold_ws_bytes = static_cast<uint64_t>(
                r.number("stream_threshold_ws_gib") * static_cast<double>(kGiB));
            if (r.has("l2_hit_rate_low_pct") || r.has("l2_hit_rate_high_pct"))
                spec.l2_hit_rate_pct = {r.number("l2_hit_rate_low_pct"),
                                        r.number("l2_hit_rate_high_pct")};
        } else if (sec.name == "tensor.peak") {
            saw_peak = true;
            for (const auto& [key, v] : sec.entries) {
                bool tops = key.size() > 5 && key.substr(key.size() - 5) == "_tops";
                bool tflops = key.size() > 7 && key.substr(key.size() - 7) == "_tflops";
                if (!tops && !tflops)
                    throw ParseError(v.line, 1,
                                     "tensor.peak key '" + key +
                                         "' must end in _tflops or _tops");
                std::string prec_name = key.substr(0, key.size() - (tops ? 5 : 7));
                Precision p;
                try {
                    p = parse_precision(prec_name);
                } catch (const UnknownFormat&) {
                    throw ParseError(v.line, 1, "unknown precision '" + prec_name + "'");
                }
                auto [thr, pct] = peak_pair(r, key, v.line);
                spec.tensor_peak[p] = PeakEntry{thr, pct, tops};
            }
        } else if (sec.name == "tensor.latency.tcgen05") {
            for (const auto& [key, v] : sec.entries) {
                if (key.size() <= 7 || key.substr(key.size() - 7) != "_cycles")
                    throw ParseError(v.line, 1, "expected '<tile>_cycles' keys");
                spec.tcgen05_latency[key.substr(0, key.size() - 7)] = r.number(key);
            }
        } else if (sec.name == "tensor.latency.wgmma") {
            spec.wgmma_base_cycles_per_n64 = r.number("base_cycles_per_n64");
            std::string tiles = r.string("tiles");
            std::stringstream ss(tiles);
            std::string t;
            while (std::getline(ss, t, ',')) spec.wgmma_tiles.push_back(trim(t));
        } else if (parts.size() == 4 && parts[0] == "tensor" && parts[1] == "instr") {
            InstrEntry e;
            e.latency_cycles = r.number("latency_cycles");
            if (r.has("throughput_tops")) {
                e.throughput = r.number("throughput_tops");
                e.integer_unit = true;
            } else {
                e.throughput = r.number("throughput_tflops");
            }
            e.shape = r.string("shape");
            Precision in = parse_precision(parts[2]);
            Precision acc = parse_precision(parts[3]);
            spec.instr[{in, acc}] = e;
        } else if (sec.name == "tensor.sched") {
            spec.sched_stall_reduction_pct = {r.number("stall_reduction_low_pct"),
                                              r.number("stall_reduction_high_pct")};
        } else if (sec.name == "tmem") {
            TmemParams t;
            t.capacity_bytes = static_cast<uint64_t>(r.number("capacity_kib") * kKiB);
            t.lanes = static_cast<int>(r.number("lanes"));
            t.columns = static_cast<int>(r.number("columns"));
            t.cell_bits = static_cast<int>(r.number("cell_bits"));
            t.read_bw = r.number("read_bw_tbps") * kTB;
            t.write_bw = r.number("write_bw_tbps") * kTB;
            t.miss_latency_cycles = r.number("miss_latency_cycles");
            t.baseline_miss_latency_cycles = r.number("baseline_miss_latency_cycles");
            t.sustained_mma_bw = r.number("sustained_mma_bw_tbps") * kTB;
            t.global_path_bw = r.number("global_path_bw_tbps") * kTB;
            t.chained_saved_rate = r.number("chained_saved_rate_tbps") * kTB;
            t.power_delta_large = r.number("power_delta_large_frac");
            t.power_delta_small = r.number("power_delta_small_frac");
            t.power_large_dim = static_cast<int>(r.number("power_large_dim"));
            t.power_small_dim = static_cast<int>(r.number("power_small_dim"));
            spec.tmem = t;
        } else if (sec.name == "decomp") {
            saw_de = true;
            de.output_ceiling_low_gbps = r.number("output_ceiling_low_gbps");
            de.output_ceiling_high_gbps = r.number("output_ceiling_high_gbps");
            de.efficiency_threshold = r.number("efficiency_threshold");
            de.saturation_margin = r.number("saturation_margin");
            de.latency_overhead_ms = r.number("latency_overhead_ms");
        } else if (parts.size() == 3 && parts[0] == "decomp" && parts[1] == "format") {
            saw_de = true;
            DeFormatProfile p;
            p.name = parts[2];
            p.compression_ratio = r.opt_number("compression_ratio");
            p.input_gbps = r.opt_number("input_gbps");
            p.output_gbps = r.number("output_gbps");
            p.latency_ms = r.number("latency_ms");
            p.use_case = r.opt_string("use_case").value_or("");
            de.format_profiles[p.name] = p;
        } else if (parts.size() == 3 && parts[0] == "decomp" && parts[1] == "sensitivity") {
            saw_de = true;
            DeFormatProfile p;
            p.name = parts[2];
            p.compression_ratio = r.number("compression_ratio");
            p.input_gbps = r.number("input_gbps");
            p.output_gbps = r.number("output_gbps");
            p.latency_ms = r.number("latency_ms");
            de.sensitivity[p.name] = p;
        } else if (parts.size() == 3 && parts[0] == "decomp" && parts[1] == "chunk") {
            saw_de = true;
            ChunkProfile c;
            c.chunk_bytes = static_cast<uint64_t>(parse_number(parts[2], sec.line, 1));
            c.single_rate_gbps = r.number("single_rate_gbps");
            c.pipeline_depth = static_cast<int>(r.number("pipeline_depth"));
            c.saturation_batch = static_cast<int>(r.number("saturation_batch"));
            c.peak_gbps = r.number("peak_gbps");
            c.max_speedup = r.number("max_speedup");
            de.chunk_profiles[c.chunk_bytes] = c;
        } else if (sec.name == "dgemm") {
            spec.dgemm_dims = r.number_or_list("dims");
            spec.dgemm_fractions = r.number_or_list("fractions");
        } else if (sec.name == "llm.latency") {
            LlmLatencyCal cal;
            cal.model = r.string("model");
            cal.precision = r.string("precision");
            cal.seq_len = static_cast<int>(r.number("seq_len"));
            for (double b : r.number_or_list("batches"))
                cal.batches.push_back(static_cast<int>(b));
            cal.latency_ms = r.number_or_list("latency_ms");
            cal.low_batch_stages = r.opt_string("low_batch_stages").value_or("");
            cal.high_batch_stages = r.opt_string("high_batch_stages").value_or("");
            cal.low_batch_max = static_cast<int>(r.opt_number("low_batch_max").value_or(0));
            spec.llm_latency = cal;
        } else if (sec.name == "llm.attention") {
            spec.attention_block_us = r.number("block_latency_us");
        } else if (sec.name.rfind("llm.", 0) == 0) {
            // [llm.<model>.<precision>] — model names may contain dots, so
            // only the last component is the precision.
            std::string rest = sec.name.substr(4);
            size_t dot = rest.rfind('.');
            if (dot == std::string::npos)
                throw ParseError(sec.line, 1, "unknown section [" + sec.name + "]");
            LlmEntry e;
            e.tok_s = r.number("tok_s");
            e.bw_pct = r.number("bw_pct");
            e.perplexity = r.opt_number("perplexity");
            e.dppl_pct = r.opt_number("dppl_pct");
            spec.llm[rest.substr(0, dot)][parse_precision(rest.substr(dot + 1))] = e;
        } else if (sec.name == "spmv") {
            SpmvIndexCal c;
            c.rle_index_ratio = r.number("rle_index_ratio");
            c.traffic_reduction_pct = r.number("traffic_reduction_pct");
            c.latency_overhead_pct = r.number("latency_overhead_pct");
            spec.spmv_index = c;
        } else if (parts.size() == 2 && parts[0] == "spmv") {
            SpmvEntry e;
            e.sparsity_pct = r.number("sparsity_pct");
            e.gflops = r.number("gflops");
            e.speedup = r.opt_number("speedup");
            e.time_ms = r.opt_number("time_ms");
            spec.spmv[parts[1]] = e;
        } else if (sec.name.rfind("training.", 0) == 0) {
            // [training.<model>.<batch>] — last component is the batch.
            std::string rest = sec.name.substr(9);
            size_t dot = rest.rfind('.');
            if (dot == std::string::npos)
                throw ParseError(sec.line, 1, "unknown section [" + sec.name + "]");
            TrainingEntry e;
            e.throughput = r.number("throughput");
            e.unit = r.string("unit");
            e.time_to_acc_hrs = r.number("time_to_acc_hrs");
            e.eff_per_watt = r.opt_number("eff_per_watt");
            int batch = static_cast<int>(parse_number(rest.substr(dot + 1), sec.line, 1));
            spec.training[rest.substr(0, dot)][batch] = e;
        } else {
            throw ParseError(sec.line, 1, "unknown section [" + sec.name + "]");
        }
        r.finish();
    }

    if (!saw_gpu) throw ParseError(0, 0, "missing required section [gpu]");
    if (!saw_peak) throw ParseError(0, 0, "missing required section [tensor.peak]");
    if (!saw_memory) throw ParseError(0, 0, "missing required section [memory]");
    if (saw_de) spec.de = de;

    std::vector<Violation> violations = validate_spec(spec);
    if (!violations.empty()) {
        std::string msg;
        for (const auto& v : violations) {
            if (!msg.empty()) msg += "; ";
            msg += v.field + ": " + v.rule;
        }
        throw ValidationError(msg);
    }
    return spec;
}

GpuSpec load_machine_path(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(0, 0, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_machine_file(ss.str());
}

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

namespace {

std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void emit(std::ostream& os, const std::string& key, double v) {
    os << key << " = " << num(v) << "\n";
}
void emit(std::ostream& os, const std::string& key, const std::string& v) {
    os << key << " = \"" << v << "\"\n";
}
void emit_list(std::ostream& os, const std::string& key, const std::vector<double>& v) {
    os << key << " = ";
    for (size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << num(v[i]);
    os << "\n";
}

} // namespace

std::string serialize_machine_file(const GpuSpec& s) {
    std::ostringstream os;
    os << "[gpu]\n";
    emit(os, "name", s.name);
    emit(os, "sm_count", s.sm_count);
    emit(os, "transistors_b", s.transistors_b);
    emit(os, "board_power_w", s.board_power_w);

    os << "\n[memory]\n";
    emit(os, "hbm_capacity_gib", static_cast<double>(s.hbm_capacity_bytes) / kGiB);
    emit(os, "hbm_peak_bw_tbps", s.hbm_peak_bw / kTB);
    emit(os, "global_miss_latency_cycles", s.global_miss_latency_cycles);
    emit(os, "stream_small_fraction", s.stream_eff.small_fraction);
    emit(os, "stream_large_fraction", s.stream_eff.large_fraction);
    emit(os, "stream_threshold_ws_gib",
         static_cast<double>(s.stream_eff.threshold_ws_bytes) / kGiB);
    if (s.l2_hit_rate_pct) {
        emit(os, "l2_hit_rate_low_pct", s.l2_hit_rate_pct->first);
        emit(os, "l2_hit_rate_high_pct", s.l2_hit_rate_pct->second);
    }

    os << "\n[tensor.peak]\n";
    for (const auto& [p, e] : s.tensor_peak)
        emit_list(os, precision_name(p) + (e.integer_unit ? "_tops" : "_tflops"),
                  {e.throughput, e.pct_of_peak});

    if (!s.tcgen05_latency.empty()) {
        os << "\n[tensor.latency.tcgen05]\n";
        for (const auto& [tile, cyc] : s.tcgen05_latency) emit(os, tile + "_cycles", cyc);
    }
    if (s.wgmma_base_cycles_per_n64) {
        os << "\n[tensor.latency.wgmma]\n";
        emit(os, "base_cycles_per_n64", *s.wgmma_base_cycles_per_n64);
        std::string tiles;
        for (size_t i = 0; i < s.wgmma_tiles.size(); ++i)
            tiles += (i ? "," : "") + s.wgmma_tiles[i];
        emit(os, "tiles", tiles);
    }
    for (const auto& [pair, e] : s.instr) {
        os << "\n[tensor.instr." << precision_name(pair.first) << "."
           << precision_name(pair.second) << "]\n";
        emit(os, "latency_cycles", e.latency_cycles);
        emit(os, e.integer_unit ? "throughput_tops" : "throughput_tflops", e.throughput);
        emit(os, "shape", e.shape);
    }
    if (s.sched_stall_reduction_pct) {
        os << "\n[tensor.sched]\n";
        emit(os, "stall_reduction_low_pct", s.sched_stall_reduction_pct->first);
        emit(os, "stall_reduction_high_pct", s.sched_stall_reduction_pct->second);
    }
    if (s.tmem) {
        const TmemParams& t = *s.tmem;
        os << "\n[tmem]\n";
        emit(os, "capacity_kib", static_cast<double>(t.capacity_bytes) / kKiB);
        emit(os, "lanes", t.lanes);
        emit(os, "columns", t.columns);
        emit(os, "cell_bits", t.cell_bits);
        emit(os, "read_bw_tbps", t.read_bw / kTB);
        emit(os, "write_bw_tbps", t.write_bw / kTB);
        emit(os, "miss_latency_cycles", t.miss_latency_cycles);
        emit(os, "baseline_miss_latency_cycles", t.baseline_miss_latency_cycles);
        emit(os, "sustained_mma_bw_tbps", t.sustained_mma_bw / kTB);
        emit(os, "global_path_bw_tbps", t.global_path_bw / kTB);
        emit(os, "chained_saved_rate_tbps", t.chained_saved_rate / kTB);
        emit(os, "power_delta_large_frac", t.power_delta_large);
        emit(os, "power_delta_small_frac", t.power_delta_small);
        emit(os, "power_large_dim", t.power_large_dim);
        emit(os, "power_small_dim", t.power_small_dim);
    }
    if (s.de) {
        const DeParams& d = *s.de;
        os << "\n[decomp]\n";
        emit(os, "output_ceiling_low_gbps", d.output_ceiling_low_gbps);
        emit(os, "output_ceiling_high_gbps", d.output_ceiling_high_gbps);
        emit(os, "efficiency_threshold", d.efficiency_threshold);
        emit(os, "saturation_margin", d.saturation_margin);
        emit(os, "latency_overhead_ms", d.latency_overhead_ms);
        for (const auto& [name, p] : d.format_profiles) {
            os << "\n[decomp.format." << name << "]\n";
            if (p.compression_ratio) emit(os, "compression_ratio", *p.compression_ratio);
            if (p.input_gbps) emit(os, "input_gbps", *p.input_gbps);
            emit(os, "output_gbps", p.output_gbps);
            emit(os, "latency_ms", p.latency_ms);
            if (!p.use_case.empty()) emit(os, "use_case", p.use_case);
        }
        for (const auto& [name, p] : d.sensitivity) {
            os << "\n[decomp.sensitivity." << name << "]\n";
            emit(os, "compression_ratio", *p.compression_ratio);
            emit(os, "input_gbps", *p.input_gbps);
            emit(os, "output_gbps", p.output_gbps);
            emit(os, "latency_ms", p.latency_ms);
        }
        for (const auto& [bytes, c] : d.chunk_profiles) {
            os << "\n[decomp.chunk." << bytes << "]\n";
            emit(os, "single_rate_gbps", c.single_rate_gbps);
            emit(os, "pipeline_depth", c.pipeline_depth);
            emit(os, "saturation_batch", c.saturation_batch);
            emit(os, "peak_gbps", c.peak_gbps);
            emit(os, "max_speedup", c.max_speedup);
        }
    }
    if (!s.dgemm_dims.empty()) {
        os << "\n[dgemm]\n";
        emit_list(os, "dims", s.dgemm_dims);
        emit_list(os, "fractions", s.dgemm_fractions);
    }
    for (const auto& [model, precs] : s.llm) {
        for (const auto& [p, e] : precs) {
            os << "\n[llm." << model << "." << precision_name(p) << "]\n";
            emit(os, "tok_s", e.tok_s);
            emit(os, "bw_pct", e.bw_pct);
            if (e.perplexity) emit(os, "perplexity", *e.perplexity);
            if (e.dppl_pct) emit(os, "dppl_pct", *e.dppl_pct);
        }
    }
    if (s.llm_latency) {
        const LlmLatencyCal& c = *s.llm_latency;
        os << "\n[llm.latency]\n";
        emit(os, "model", c.model);
        emit(os, "precision", c.precision);
        emit(os, "seq_len", c.seq_len);
        std::vector<double> batches(c.batches.begin(), c.batches.end());
        emit_list(os, "batches", batches);
        emit_list(os, "latency_ms", c.latency_ms);
        if (!c.low_batch_stages.empty()) emit(os, "low_batch_stages", c.low_batch_stages);
        if (!c.high_batch_stages.empty()) emit(os, "high_batch_stages", c.high_batch_stages);
        if (c.low_batch_max) emit(os, "low_batch_max", c.low_batch_max);
    }
    if (s.attention_block_us) {
        os << "\n[llm.attention]\n";
        emit(os, "block_latency_us", *s.attention_block_us);
    }
    if (s.spmv_index) {
        os << "\n[spmv]\n";
        emit(os, "rle_index_ratio", s.spmv_index->rle_index_ratio);
        emit(os, "traffic_reduction_pct", s.spmv_index->traffic_reduction_pct);
        emit(os, "latency_overhead_pct", s.spmv_index->latency_overhead_pct);
    }
    for (const auto& [name, e] : s.spmv) {
        os << "\n[spmv." << name << "]\n";
        emit(os, "sparsity_pct", e.sparsity_pct);
        emit(os, "gflops", e.gflops);
        if (e.speedup) emit(os, "speedup", *e.speedup);
        if (e.time_ms) emit(os, "time_ms", *e.time_ms);
    }
    for (const auto& [model, batches] : s.training) {
        for (const auto& [batch, e] : batches) {
            os << "\n[training." << model << "." << batch << "]\n";
            emit(os, "throughput", e.throughput);
            emit(os, "unit", e.unit);
            emit(os, "time_to_acc_hrs", e.time_to_acc_hrs);
            if (e.eff_per_watt) emit(os, "eff_per_watt", *e.eff_per_watt);
        }
    }
    return os.str();
}

bool operator==(const GpuSpec& a, const GpuSpec& b) {
    return serialize_machine_file(a) == serialize_machine_file(b);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::vector<Violation> validate_spec(const GpuSpec& s) {
    std::vector<Violation> v;
    auto fail = [&](const std::string& field, const std::string& rule) {
        v.push_back({field, rule});
    };
    auto positive = [&](const std::string& field, double x) {
        if (!(x > 0.0)) fail(field, "must be > 0");
    };
    auto fraction = [&](const std::string& field, double x) {
        if (!(x > 0.0 && x <= 1.0)) fail(field, "must be in (0, 1]");
    };

    if (s.sm_count <= 0) fail("gpu.sm_count", "must be > 0");
    positive("memory.hbm_peak_bw", s.hbm_peak_bw);
    if (s.hbm_capacity_bytes == 0) fail("memory.hbm_capacity", "must be > 0");
    positive("gpu.board_power_w", s.board_power_w);
    fraction("memory.stream_small_fraction", s.stream_eff.small_fraction);
    fraction("memory.stream_large_fraction", s.stream_eff.large_fraction);
    if (s.stream_eff.threshold_ws_bytes == 0) fail("memory.stream_threshold", "must be > 0");

    if (s.name == "B200") {
        if (s.sm_count != 148) fail("gpu.sm_count", "B200 preset requires 148 SMs");
        if (s.hbm_capacity_bytes != 192 * kGiB)
            fail("memory.hbm_capacity_gib", "B200 preset requires 192 GiB");
        if (s.transistors_b != 208)
            fail("gpu.transistors_b", "B200 preset requires 208");
    }

    for (const auto& [p, e] : s.tensor_peak) {
        std::string field = "tensor.peak." + precision_name(p);
        positive(field + ".throughput", e.throughput);
        if (e.pct_of_peak > 100.0) fail(field + ".pct_of_peak", "must be <= 100%");
        if (e.pct_of_peak <= 0.0) fail(field + ".pct_of_peak", "must be > 0");
    }
    for (const auto& [tile, cyc] : s.tcgen05_latency)
        positive("tensor.latency.tcgen05." + tile, cyc);
    if (s.wgmma_base_cycles_per_n64) positive("tensor.latency.wgmma", *s.wgmma_base_cycles_per_n64);
    for (const auto& [pair, e] : s.instr) {
        std::string field = "tensor.instr." + precision_name(pair.first) + "." +
                            precision_name(pair.second);
        positive(field + ".latency_cycles", e.latency_cycles);
        positive(field + ".throughput", e.throughput);
    }

    if (s.tmem) {
        const TmemParams& t = *s.tmem;
        uint64_t derived = static_cast<uint64_t>(t.lanes) * t.columns * t.cell_bits / 8;
        if (derived != t.capacity_bytes)
            fail("tmem.capacity", "tmem capacity mismatch: lanes*columns*cell_bits/8 = " +
                                      std::to_string(derived) + " bytes, declared " +
                                      std::to_string(t.capacity_bytes));
        if (t.read_bw < t.write_bw) fail("tmem.read_bw", "read_bw must be >= write_bw");
        if (!(t.miss_latency_cycles < t.baseline_miss_latency_cycles))
            fail("tmem.miss_latency", "must be < baseline miss latency");
        positive("tmem.read_bw", t.read_bw);
        positive("tmem.write_bw", t.write_bw);
        positive("tmem.sustained_mma_bw", t.sustained_mma_bw);
    }

    if (s.de) {
        const DeParams& d = *s.de;
        if (!(d.efficiency_threshold > 0.0 && d.efficiency_threshold < 1.0))
            fail("decomp.efficiency_threshold", "must be in (0, 1)");
        if (!(d.saturation_margin > 0.0 && d.saturation_margin < 1.0))
            fail("decomp.saturation_margin", "must be in (0, 1)");
        for (const auto& [name, p] : d.format_profiles) {
            std::string field = "decomp.format." + name;
            positive(field + ".output_gbps", p.output_gbps);
            positive(field + ".latency_ms", p.latency_ms);
            if (p.input_gbps && p.compression_ratio) {
                double implied = p.output_gbps / *p.compression_ratio;
                if (std::fabs(*p.input_gbps - implied) / *p.input_gbps > 0.05)
                    fail(field, "input/ratio/output identity off by > 5%");
            }
        }
        for (const auto& [name, p] : d.sensitivity) {
            std::string field = "decomp.sensitivity." + name;
            positive(field + ".output_gbps", p.output_gbps);
            positive(field + ".latency_ms", p.latency_ms);
        }
        for (const auto& [bytes, c] : d.chunk_profiles) {
            std::string field = "decomp.chunk." + std::to_string(bytes);
            positive(field + ".single_rate_gbps", c.single_rate_gbps);
            positive(field + ".peak_gbps", c.peak_gbps);
            if (c.pipeline_depth < 1) fail(field + ".pipeline_depth", "must be >= 1");
            if (c.pipeline_depth > c.saturation_batch)
                fail(field + ".pipeline_depth", "must be <= saturation_batch");
            if (std::fabs(c.peak_gbps - c.single_rate_gbps * c.max_speedup) / c.peak_gbps > 0.02)
                fail(field, "peak != single_rate * max_speedup within 2%");
            if (c.max_speedup > c.saturation_batch)
                fail(field + ".max_speedup", "must be <= saturation_batch");
        }
    }

    if (!s.dgemm_dims.empty()) {
        if (s.dgemm_dims.size() != s.dgemm_fractions.size())
            fail("dgemm", "dims and fractions must have equal length");
        for (size_t i = 0; i < s.dgemm_fractions.size(); ++i)
            fraction("dgemm.fractions[" + std::to_string(i) + "]", s.dgemm_fractions[i]);
        for (size_t i = 1; i < s.dgemm_dims.size(); ++i)
            if (s.dgemm_dims[i] <= s.dgemm_dims[i - 1])
                fail("dgemm.dims", "must be strictly increasing");
    }

    for (const auto& [model, precs] : s.llm)
        for (const auto& [p, e] : precs) {
            std::string field = "llm." + model + "." + precision_name(p);
            positive(field + ".tok_s", e.tok_s);
            if (!(e.bw_pct > 0.0 && e.bw_pct <= 100.0))
                fail(field + ".bw_pct", "must be in (0, 100]");
        }
    if (s.llm_latency) {
        const LlmLatencyCal& c = *s.llm_latency;
        if (c.batches.size() != c.latency_ms.size() || c.batches.size() < 2)
            fail("llm.latency", "batches/latency_ms must be parallel lists of >= 2 points");
        for (size_t i = 1; i < c.batches.size(); ++i) {
            if (c.batches[i] <= c.batches[i - 1]) fail("llm.latency.batches", "must increase");
            if (c.latency_ms[i] <= c.latency_ms[i - 1])
                fail("llm.latency.latency_ms", "must increase with batch");
        }
        if (c.seq_len <= 0) fail("llm.latency.seq_len", "must be > 0");
    }
    for (const auto& [name, e] : s.spmv) {
        positive("spmv." + name + ".gflops", e.gflops);
        if (e.speedup && *e.speedup <= 0.0) fail("spmv." + name + ".speedup", "must be > 0");
    }
    for (const auto& [model, batches] : s.training)
        for (const auto& [batch, e] : batches) {
            std::string field = "training." + model + "." + std::to_string(batch);
            positive(field + ".throughput", e.throughput);
            if (batch <= 0) fail(field, "batch must be > 0");
        }

    return v;
}

const GpuSpec& CalibrationSet::at(const std::string& name) const {
    auto it = specs.find(name);
    if (it == specs.end()) throw UnknownMachine(name);
    return it->second;
}

} // namespace blackmodel
