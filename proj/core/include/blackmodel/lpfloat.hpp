#ifndef BLACKMODEL_LPFLOAT_HPP
#define BLACKMODEL_LPFLOAT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace blackmodel::lpfloat {

// Bit-level descriptor of a micro floating-point encoding. Codes are laid
// out MSB-first as [sign][exponent][mantissa]. e8m0 is the one signless
// format: 8 exponent bits, no mantissa, a pure power-of-two scale.
struct FloatFormat {
    std::string name;
    int sign_bits = 1;
    int exp_bits = 0;
    int man_bits = 0;
    int bias = 0;
    // Max-exponent codes encode ordinary normal values instead of Inf/NaN.
    bool finite_only = true;
    // e4m3 reserves mantissa-all-ones at max exponent as NaN.
    bool nan_on_max_mantissa = false;

    int total_bits() const { return sign_bits + exp_bits + man_bits; }
    uint32_t code_count() const { return 1u << total_bits(); }
    double max_finite() const;
};

// The calibrated format table: e2m1 (FP4), e3m2/e2m3 (FP6), e4m3/e5m2
// (FP8), e8m0 (scale). Throws UnknownFormat for anything else.
const FloatFormat& format(const std::string& name);
bool has_format(const std::string& name);

// Block-scaled schemes. MXFP4 = 32-element blocks of e2m1 with e8m0
// scales; NVFP4 = 16-element blocks of e2m1 with e4m3 scales.
struct BlockFormat {
    std::string name;
    FloatFormat elem;
    int block_size = 0;
    FloatFormat scale_format;
};

const BlockFormat& block_format(const std::string& name); // "mxfp4", "nvfp4"
bool has_block_format(const std::string& name);

// All representable finite values, strictly increasing, with -0/+0
// collapsed to a single 0.
std::vector<double> enumerate_values(const FloatFormat& fmt);

// Round-to-nearest-even encode. Finite inputs beyond the largest finite
// value saturate to +-max; they never produce specials.
uint32_t encode(const FloatFormat& fmt, double x);

// Exact value of a code. Throws InvalidCode if the code has bits beyond
// the format width. e5m2 specials decode to +-Inf/NaN; e8m0 code 255 and
// e4m3 S.1111.111 decode to NaN.
double decode(const FloatFormat& fmt, uint32_t code);

struct QuantizedBlock {
    uint32_t scale_code = 0;
    std::vector<uint32_t> elem_codes;
};

// Scale selection: e8m0 scales use the smallest power of two s with
// max|v|/s <= elem max; other scale formats encode max|v|/elem_max
// directly. An all-zero block gets the code of scale 1.0 and zero
// elements.
QuantizedBlock quantize_block(const BlockFormat& bf, const std::vector<double>& v);
std::vector<double> dequantize_block(const BlockFormat& bf, const QuantizedBlock& q);

struct QuantStats {
    double mse = 0.0;
    double max_abs_err = 0.0;
    std::optional<double> sqnr_db; // empty when signal power is zero
    uint64_t overflow_count = 0;   // elements clipped by saturation
};

QuantStats quant_error_stats(const FloatFormat& fmt, const std::vector<double>& v);
QuantStats quant_error_stats(const BlockFormat& bf, const std::vector<double>& v);

// Round-trip x through a format (or a whole vector through block
// quantization). Building blocks for the stats and the GEMM reference.
double round_through(const FloatFormat& fmt, double x);
std::vector<double> quantize_vector(const BlockFormat& bf, const std::vector<double>& v,
                                    uint64_t* overflow_count = nullptr);

enum class AccumPrecision { fp16, fp32, exact };

// Reference quantized GEMM: A (m x k) and B (k x n), row-major. Inputs are
// quantized per `fmt` elementwise (scalar format) or in blocks along the k
// dimension (block format); fp16/fp32 accumulation rounds the running sum
// after every multiply-add.
std::vector<double> quantized_gemm(const std::vector<double>& a, const std::vector<double>& b,
                                   int m, int k, int n, const FloatFormat& fmt,
                                   AccumPrecision accum);
std::vector<double> quantized_gemm(const std::vector<double>& a, const std::vector<double>& b,
                                   int m, int k, int n, const BlockFormat& bf,
                                   AccumPrecision accum);

} // namespace blackmodel::lpfloat

#endif
