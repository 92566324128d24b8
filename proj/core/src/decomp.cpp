#include "blackmodel/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "blackmodel/errors.hpp"

namespace blackmodel::decomp {

namespace {

const DeParams& de(const GpuSpec& spec) {
    if (!spec.de)
        throw MissingCalibration("decompression engine on " + spec.name,
                                 "software-only decompression");
    return *spec.de;
}

const ChunkProfile& chunk(const GpuSpec& spec, uint64_t chunk_bytes) {
    const DeParams& d = de(spec);
    auto it = d.chunk_profiles.find(chunk_bytes);
    if (it == d.chunk_profiles.end())
        throw UnknownChunk("no calibration for " + std::to_string(chunk_bytes) +
                           "-byte chunks");
    return it->second;
}

// Power-law exponent over the (depth, saturation] segment: fixes
// T(depth) = depth * single and T(sat) = peak, linear in log-log space.
double rise_exponent(const ChunkProfile& c) {
    double t_depth = c.single_rate_gbps * c.pipeline_depth;
    if (c.saturation_batch <= c.pipeline_depth) return 0.0;
    return std::log(c.peak_gbps / t_depth) /
           std::log(static_cast<double>(c.saturation_batch) / c.pipeline_depth);
}

double aggregate_at(const ChunkProfile& c, int b) {
    if (b <= c.pipeline_depth) return c.single_rate_gbps * b;
    if (b >= c.saturation_batch) return c.peak_gbps;
    double t_depth = c.single_rate_gbps * c.pipeline_depth;
    return t_depth * std::pow(static_cast<double>(b) / c.pipeline_depth, rise_exponent(c));
}

} // namespace

const DeFormatProfile& format_profile(const GpuSpec& spec, const std::string& format) {
    const DeParams& d = de(spec);
    auto it = d.format_profiles.find(format);
    if (it == d.format_profiles.end()) throw UnknownFormat(format);
    return it->second;
}

double require_input_gbps(const DeFormatProfile& p) {
    if (!p.input_gbps)
        throw MissingCalibration(p.name + " input throughput", "n/a in calibration");
    return *p.input_gbps;
}

double require_ratio(const DeFormatProfile& p) {
    if (!p.compression_ratio)
        throw MissingCalibration(p.name + " compression ratio", "n/a in calibration");
    return *p.compression_ratio;
}

SensitivityResult sensitivity(const GpuSpec& spec, double compression_ratio,
                              double pattern_output_gbps) {
    if (compression_ratio < 1.0) throw ShapeMismatch("compression ratio must be >= 1");
    if (pattern_output_gbps <= 0.0) throw ShapeMismatch("output rate must be > 0");
    const DeParams& d = de(spec);
    SensitivityResult r;
    r.input_gbps = pattern_output_gbps / compression_ratio;
    // The high edge of the ceiling band is a hard limit; the low edge only
    // describes where measured patterns cluster.
    r.output_gbps = std::min(pattern_output_gbps, d.output_ceiling_high_gbps);
    r.latency_ms_per_100mb = 0.1 / r.output_gbps * 1e3 + d.latency_overhead_ms;
    return r;
}

BatchPoint batch_throughput(const GpuSpec& spec, uint64_t chunk_bytes, int concurrency) {
    if (concurrency < 1) throw ShapeMismatch("concurrency must be >= 1");
    const ChunkProfile& c = chunk(spec, chunk_bytes);
    BatchPoint p;
    p.concurrency = concurrency;
    p.aggregate_gbps = aggregate_at(c, concurrency);
    p.efficiency = p.aggregate_gbps / (concurrency * c.single_rate_gbps);
    p.speedup_vs_sequential = p.aggregate_gbps / c.single_rate_gbps;
    return p;
}

BatchCurve model_curve(const GpuSpec& spec, uint64_t chunk_bytes, int max_concurrency) {
    BatchCurve curve;
    for (int b = 1; b <= max_concurrency; b *= 2)
        curve.points.push_back(batch_throughput(spec, chunk_bytes, b));
    return curve;
}

int pipeline_depth(const BatchCurve& curve, double threshold) {
    if (curve.points.empty()) throw ShapeMismatch("empty batch curve");
    int depth = 0;
    for (const BatchPoint& p : curve.points)
        if (p.efficiency >= threshold) depth = std::max(depth, p.concurrency);
    if (depth == 0)
        throw ShapeMismatch("no point reaches the efficiency threshold");
    return depth;
}

std::optional<int> saturation_point(const BatchCurve& curve, double margin) {
    if (curve.points.size() < 2) throw ShapeMismatch("need >= 2 curve points");
    for (size_t i = 0; i < curve.points.size(); ++i) {
        int b = curve.points[i].concurrency;
        // Find the doubled concurrency in the curve.
        for (size_t j = i + 1; j < curve.points.size(); ++j) {
            if (curve.points[j].concurrency != 2 * b) continue;
            double gain = curve.points[j].aggregate_gbps / curve.points[i].aggregate_gbps - 1.0;
            if (gain < margin) return b;
            break;
        }
    }
    return std::nullopt;
}

FitResult fit_chunk_model(std::vector<Measurement> points, uint64_t chunk_bytes) {
    std::sort(points.begin(), points.end(),
              [](const Measurement& a, const Measurement& b) {
                  return a.concurrency < b.concurrency;
              });
    if (points.size() < 4)
        throw IllConditioned("need >= 4 points to fit 4 parameters, got " +
                             std::to_string(points.size()));
    if (points.front().concurrency != 1)
        throw IllConditioned("fit requires a concurrency-1 measurement");
    for (const Measurement& m : points)
        if (m.gbps <= 0.0 || m.concurrency < 1)
            throw IllConditioned("measurements must be positive");

    double best_rss = std::numeric_limits<double>::infinity();
    ChunkProfile best;
    for (size_t di = 0; di < points.size(); ++di) {
        for (size_t si = di; si < points.size(); ++si) {
            int d = points[di].concurrency;
            int s = points[si].concurrency;
            // Linear region: T = rate * b through the origin.
            double num = 0.0, den = 0.0;
            for (const Measurement& m : points)
                if (m.concurrency <= d) {
                    num += m.gbps * m.concurrency;
                    den += static_cast<double>(m.concurrency) * m.concurrency;
                }
            double rate = num / den;
            // Rising + flat region in log space, anchored at (d, rate*d):
            // ln T = ln(rate*d) + alpha * ln(min(b, s)/d).
            double t_depth = rate * d;
            double sxy = 0.0, sxx = 0.0;
            for (const Measurement& m : points) {
                if (m.concurrency <= d) continue;
                double x = std::log(static_cast<double>(std::min(m.concurrency, s)) / d);
                double y = std::log(m.gbps / t_depth);
                sxy += x * y;
                sxx += x * x;
            }
            double alpha = sxx > 0.0 ? sxy / sxx : 0.0;
            double peak = t_depth * std::pow(static_cast<double>(s) / d, alpha);

            ChunkProfile cand;
            cand.chunk_bytes = chunk_bytes;
            cand.single_rate_gbps = rate;
            cand.pipeline_depth = d;
            cand.saturation_batch = s;
            cand.peak_gbps = peak;
            cand.max_speedup = peak / rate;

            double rss = 0.0;
            for (const Measurement& m : points) {
                double pred = aggregate_at(cand, m.concurrency);
                double rel = (pred - m.gbps) / m.gbps;
                rss += rel * rel;
            }
            if (rss < best_rss) {
                best_rss = rss;
                best = cand;
            }
        }
    }
    return {best, std::sqrt(best_rss / points.size())};
}

std::vector<Measurement> parse_measurement_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<Measurement> out;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != "concurrency,gbps")
                throw ParseError(1, 1, "expected header 'concurrency,gbps'");
            continue;
        }
        size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(lineno, 1, "expected 'concurrency,gbps' row");
        try {
            Measurement m;
            m.concurrency = std::stoi(line.substr(0, comma));
            m.gbps = std::stod(line.substr(comma + 1));
            out.push_back(m);
        } catch (const std::exception&) {
            throw ParseError(lineno, 1, "bad number in row '" + line + "'");
        }
    }
    return out;
}

Recommendation recommend_config(const GpuSpec& spec, const Workload& w) {
    if (w.typical_object_bytes == 0 || w.latency_budget_ms <= 0.0)
        throw ShapeMismatch("workload fields must be positive");
    Recommendation r;
    r.chunk_bytes = w.typical_object_bytes < 64 * 1024 ? 32 * 1024 : 256 * 1024;
    const ChunkProfile& c = chunk(spec, r.chunk_bytes);
    r.concurrency = c.pipeline_depth;
    r.predicted_gbps = c.peak_gbps;
    if (w.data_kind == "numeric" || w.data_kind == "scientific")
        r.format = "bitcomp";
    else if (w.data_kind == "realtime")
        r.format = "snappy";
    else
        r.format = "zstd";
    return r;
}

} // namespace blackmodel::decomp
