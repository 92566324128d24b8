#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "blackmodel/decomp.hpp"
#include "blackmodel/errors.hpp"

using namespace blackmodel;
using namespace blackmodel::decomp;

namespace {
const GpuSpec& b200() {
    static GpuSpec s = builtin_spec("B200");
    return s;
}

const uint64_t kChunks[] = {32768, 65536, 131072, 262144};
} // namespace

TEST_CASE("format profiles are exact calibration rows") {
    const DeFormatProfile& bitcomp = format_profile(b200(), "bitcomp");
    CHECK(bitcomp.output_gbps == 462.37);
    CHECK(bitcomp.latency_ms == 0.227);
    CHECK(bitcomp.use_case == "Scientific");

    const DeFormatProfile& gzip = format_profile(b200(), "gzip");
    CHECK(*gzip.input_gbps == 42.00);
    CHECK(gzip.output_gbps == 83.83);

    const DeFormatProfile& ans = format_profile(b200(), "ans");
    CHECK(ans.output_gbps == 539.21);
    CHECK_THROWS_AS(require_input_gbps(ans), MissingCalibration);
    CHECK_THROWS_AS(require_ratio(format_profile(b200(), "cascaded")), MissingCalibration);
    CHECK_THROWS_AS(format_profile(b200(), "brotli"), UnknownFormat);
    CHECK_THROWS_AS(format_profile(builtin_spec("H200"), "lz4"), MissingCalibration);
}

TEST_CASE("sensitivity: input = output / ratio identity on all calibrated patterns") {
    for (const auto& [name, row] : b200().de->sensitivity) {
        SensitivityResult r = sensitivity(b200(), *row.compression_ratio, row.output_gbps);
        INFO(name);
        CHECK(std::fabs(r.input_gbps - *row.input_gbps) / *row.input_gbps <= 0.015);
        CHECK(std::fabs(r.latency_ms_per_100mb - row.latency_ms) / row.latency_ms <= 0.03);
    }
}

TEST_CASE("sensitivity corner cases") {
    SensitivityResult rep = sensitivity(b200(), 15.02, 219.80);
    CHECK(rep.input_gbps == doctest::Approx(14.63).epsilon(0.001));
    SensitivityResult zeros = sensitivity(b200(), 245.45, 209.83);
    CHECK(zeros.input_gbps == doctest::Approx(0.85).epsilon(0.01));
    // Ratio 1 is the identity on the rate.
    CHECK(sensitivity(b200(), 1.0, 123.0).input_gbps == 123.0);
    // Rates above the ceiling clamp to the band's high edge.
    CHECK(sensitivity(b200(), 1.0, 500.0).output_gbps == 220.0);
    CHECK_THROWS_AS(sensitivity(b200(), 0.5, 100.0), ShapeMismatch);
}

TEST_CASE("sensitivity latency stays within the observed band (seeded property)") {
    std::mt19937 rng(555);
    std::uniform_real_distribution<double> ratio(1.0, 246.0);
    std::uniform_real_distribution<double> rate(158.94, 219.80);
    for (int i = 0; i < 5000; ++i) {
        SensitivityResult r = sensitivity(b200(), ratio(rng), rate(rng));
        CHECK(r.latency_ms_per_100mb >= 0.45);
        CHECK(r.latency_ms_per_100mb <= 0.70);
    }
}

TEST_CASE("batch throughput: linear region, peak, and calibrated speedup") {
    BatchPoint one = batch_throughput(b200(), 32768, 1);
    CHECK(one.efficiency == 1.0);
    CHECK(one.aggregate_gbps == 0.75);

    BatchPoint full = batch_throughput(b200(), 32768, 1024);
    CHECK(full.aggregate_gbps == doctest::Approx(53.8));
    CHECK(full.speedup_vs_sequential == doctest::Approx(71.95).epsilon(0.02));

    BatchPoint knee = batch_throughput(b200(), 262144, 4);
    CHECK(knee.efficiency >= 0.85); // 4 is the calibrated pipeline depth

    CHECK_THROWS_AS(batch_throughput(b200(), 1000, 4), UnknownChunk);
    CHECK_THROWS_AS(batch_throughput(b200(), 32768, 0), ShapeMismatch);
}

TEST_CASE("peak = single_rate x max_speedup within 2% on every calibrated chunk") {
    for (uint64_t chunk : kChunks) {
        const ChunkProfile& c = b200().de->chunk_profiles.at(chunk);
        INFO(chunk);
        CHECK(std::fabs(c.peak_gbps - c.single_rate_gbps * c.max_speedup) / c.peak_gbps <=
              0.02);
    }
}

TEST_CASE("batch efficiency starts at 1 and never increases (seeded property)") {
    std::mt19937 rng(2468);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int rep = 0; rep < 200; ++rep) {
        uint64_t chunk = kChunks[pick(rng)];
        double prev = 1.0;
        CHECK(batch_throughput(b200(), chunk, 1).efficiency == 1.0);
        for (int b = 2; b <= 4096; b *= 2) {
            double eff = batch_throughput(b200(), chunk, b).efficiency;
            CHECK(eff <= prev + 1e-12);
            prev = eff;
        }
    }
    // Aggregate is non-decreasing in concurrency.
    for (uint64_t chunk : kChunks) {
        double prev = 0.0;
        for (int b = 1; b <= 4096; b += 7) {
            double t = batch_throughput(b200(), chunk, b).aggregate_gbps;
            CHECK(t >= prev - 1e-12);
            prev = t;
        }
    }
}

TEST_CASE("pipeline depth recovered from the model curves matches calibration") {
    for (uint64_t chunk : kChunks) {
        BatchCurve curve = model_curve(b200(), chunk, 2048);
        INFO(chunk);
        CHECK(pipeline_depth(curve) == b200().de->chunk_profiles.at(chunk).pipeline_depth);
    }
}

TEST_CASE("pipeline depth of a perfectly linear curve is its last concurrency") {
    BatchCurve curve;
    for (int b = 1; b <= 64; b *= 2) curve.points.push_back({b, 2.0 * b, 1.0, double(b)});
    CHECK(pipeline_depth(curve) == 64);
}

TEST_CASE("saturation points recovered from the model curves match calibration") {
    for (uint64_t chunk : kChunks) {
        BatchCurve curve = model_curve(b200(), chunk, 2048);
        auto sat = saturation_point(curve, b200().de->saturation_margin);
        REQUIRE(sat.has_value());
        INFO(chunk);
        CHECK(*sat == b200().de->chunk_profiles.at(chunk).saturation_batch);
    }
}

TEST_CASE("a strictly linear curve never saturates") {
    BatchCurve curve;
    for (int b = 1; b <= 1024; b *= 2) curve.points.push_back({b, 3.0 * b, 1.0, double(b)});
    CHECK(!saturation_point(curve).has_value());
}

TEST_CASE("fit recovers all four chunk profiles from noiseless curves within 1%") {
    for (uint64_t chunk : kChunks) {
        const ChunkProfile& truth = b200().de->chunk_profiles.at(chunk);
        std::vector<Measurement> points;
        for (int b = 1; b <= 2048; b *= 2)
            points.push_back({b, batch_throughput(b200(), chunk, b).aggregate_gbps});
        FitResult fit = fit_chunk_model(points, chunk);
        INFO(chunk);
        CHECK(fit.profile.pipeline_depth == truth.pipeline_depth);
        CHECK(fit.profile.saturation_batch == truth.saturation_batch);
        CHECK(std::fabs(fit.profile.single_rate_gbps - truth.single_rate_gbps) /
                  truth.single_rate_gbps <=
              0.01);
        CHECK(std::fabs(fit.profile.peak_gbps - truth.peak_gbps) / truth.peak_gbps <= 0.01);
        CHECK(fit.residual_rms <= 1e-9);
    }
}

TEST_CASE("fit stays within 5% under seeded 2% multiplicative noise") {
    std::mt19937 rng(20250810);
    std::normal_distribution<double> noise(0.0, 0.02);
    for (uint64_t chunk : kChunks) {
        const ChunkProfile& truth = b200().de->chunk_profiles.at(chunk);
        std::vector<Measurement> points;
        for (int b = 1; b <= 2048; b *= 2) {
            double t = batch_throughput(b200(), chunk, b).aggregate_gbps;
            points.push_back({b, t * (1.0 + noise(rng))});
        }
        FitResult fit = fit_chunk_model(points, chunk);
        INFO(chunk);
        CHECK(std::fabs(fit.profile.single_rate_gbps - truth.single_rate_gbps) /
                  truth.single_rate_gbps <=
              0.05);
        CHECK(std::fabs(fit.profile.peak_gbps - truth.peak_gbps) / truth.peak_gbps <= 0.05);
        CHECK(fit.profile.pipeline_depth == truth.pipeline_depth);
        CHECK(fit.profile.saturation_batch == truth.saturation_batch);
    }
}

TEST_CASE("fit preconditions") {
    CHECK_THROWS_AS(fit_chunk_model({{1, 1.0}, {2, 2.0}}), IllConditioned);
    CHECK_THROWS_AS(fit_chunk_model({{2, 2.0}, {4, 4.0}, {8, 8.0}, {16, 16.0}}),
                    IllConditioned); // no b=1 point
}

TEST_CASE("measurement CSV parsing") {
    std::vector<Measurement> m = parse_measurement_csv("concurrency,gbps\n1,0.75\n2,1.5\n");
    REQUIRE(m.size() == 2);
    CHECK(m[1].concurrency == 2);
    CHECK(m[1].gbps == 1.5);
    CHECK_THROWS_AS(parse_measurement_csv("a,b\n1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_measurement_csv("concurrency,gbps\nx,2\n"), ParseError);
}

TEST_CASE("configuration recommendations follow object size and data kind") {
    Workload small{16 * 1024, 5.0, "generic"};
    Recommendation r = recommend_config(b200(), small);
    CHECK(r.format == "zstd");
    CHECK(r.chunk_bytes == 32768);
    CHECK(r.concurrency == 16);
    CHECK(r.predicted_gbps == doctest::Approx(53.8));

    Workload sci{8 * 1024 * 1024, 50.0, "scientific"};
    Recommendation rs = recommend_config(b200(), sci);
    CHECK(rs.format == "bitcomp");
    CHECK(rs.chunk_bytes == 262144);
    CHECK(rs.concurrency == 4);

    Workload rt{4 * 1024, 1.0, "realtime"};
    CHECK(recommend_config(b200(), rt).format == "snappy");
    CHECK_THROWS_AS(recommend_config(b200(), Workload{0, 1.0, "x"}), ShapeMismatch);
}
