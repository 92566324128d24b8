#include "blackmodel/lpfloat.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>

#include "blackmodel/errors.hpp"

namespace blackmodel::lpfloat {

namespace {

FloatFormat make(const std::string& name, int sign, int exp, int man, bool finite_only,
                 bool nan_on_max_mantissa) {
    FloatFormat f;
    f.name = name;
    f.sign_bits = sign;
    f.exp_bits = exp;
    f.man_bits = man;
    f.bias = (1 << (exp - 1)) - 1;
    f.finite_only = finite_only;
    f.nan_on_max_mantissa = nan_on_max_mantissa;
    return f;
}

const std::map<std::string, FloatFormat>& format_table() {
    static const std::map<std::string, FloatFormat> t = {
        {"e2m1", make("e2m1", 1, 2, 1, true, false)},
        {"e3m2", make("e3m2", 1, 3, 2, true, false)},
        {"e2m3", make("e2m3", 1, 2, 3, true, false)},
        {"e4m3", make("e4m3", 1, 4, 3, true, true)},
        {"e5m2", make("e5m2", 1, 5, 2, false, false)},
        {"e8m0", make("e8m0", 0, 8, 0, true, false)},
        // fp16 is not a tensor-input micro-format here; it backs the
        // fp16-accumulator rounding path in quantized_gemm.
        {"e5m10", make("e5m10", 1, 5, 10, false, false)},
    };
    return t;
}

bool is_e8m0(const FloatFormat& f) { return f.sign_bits == 0; }

// Largest finite magnitude's code (positive sign).
uint32_t max_finite_code(const FloatFormat& f) {
    if (is_e8m0(f)) return (1u << f.exp_bits) - 2; // 254
    uint32_t max_exp = (1u << f.exp_bits) - 1;
    uint32_t max_man = (1u << f.man_bits) - 1;
    if (f.finite_only) {
        if (f.nan_on_max_mantissa) return (max_exp << f.man_bits) | (max_man - 1);
        return (max_exp << f.man_bits) | max_man;
    }
    // IEEE-style: top exponent is Inf/NaN.
    return ((max_exp - 1) << f.man_bits) | max_man;
}

double decode_magnitude(const FloatFormat& f, uint32_t exp, uint32_t man) {
    if (exp == 0) {
        // Subnormal: man/2^m * 2^(1-bias).
        return std::ldexp(static_cast<double>(man), 1 - f.bias - f.man_bits);
    }
    return std::ldexp(1.0 + static_cast<double>(man) / (1 << f.man_bits),
                      static_cast<int>(exp) - f.bias);
}

} // namespace

double FloatFormat::max_finite() const { return decode(*this, max_finite_code(*this)); }

const FloatFormat& format(const std::string& name) {
    auto it = format_table().find(name);
    if (it == format_table().end()) throw UnknownFormat(name);
    return it->second;
}

bool has_format(const std::string& name) { return format_table().count(name) != 0; }

const BlockFormat& block_format(const std::string& name) {
    static const std::map<std::string, BlockFormat> t = {
        {"mxfp4", {"mxfp4", format("e2m1"), 32, format("e8m0")}},
        {"nvfp4", {"nvfp4", format("e2m1"), 16, format("e4m3")}},
    };
    auto it = t.find(name);
    if (it == t.end()) throw UnknownFormat(name);
    return it->second;
}

bool has_block_format(const std::string& name) {
    return name == "mxfp4" || name == "nvfp4";
}

double decode(const FloatFormat& fmt, uint32_t code) {
    if (code >= fmt.code_count())
        throw InvalidCode(fmt.name + ": code 0x" + std::to_string(code) + " exceeds " +
                          std::to_string(fmt.total_bits()) + " bits");
    if (is_e8m0(fmt)) {
        if (code == fmt.code_count() - 1) return std::numeric_limits<double>::quiet_NaN();
        return std::ldexp(1.0, static_cast<int>(code) - fmt.bias);
    }
    uint32_t man = code & ((1u << fmt.man_bits) - 1);
    uint32_t exp = (code >> fmt.man_bits) & ((1u << fmt.exp_bits) - 1);
    uint32_t sign = code >> (fmt.man_bits + fmt.exp_bits);
    uint32_t max_exp = (1u << fmt.exp_bits) - 1;
    if (exp == max_exp) {
        if (!fmt.finite_only)
            return man == 0 ? (sign ? -std::numeric_limits<double>::infinity()
                                    : std::numeric_limits<double>::infinity())
                            : std::numeric_limits<double>::quiet_NaN();
        if (fmt.nan_on_max_mantissa && man == (1u << fmt.man_bits) - 1)
            return std::numeric_limits<double>::quiet_NaN();
    }
    double mag = decode_magnitude(fmt, exp, man);
    return sign ? -mag : mag;
}

std::vector<double> enumerate_values(const FloatFormat& fmt) {
    std::vector<double> out;
    for (uint32_t c = 0; c < fmt.code_count(); ++c) {
        double v = decode(fmt, c);
        if (std::isfinite(v)) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end()); // collapses -0/+0
    return out;
}

uint32_t encode(const FloatFormat& fmt, double x) {
    if (is_e8m0(fmt)) {
        // Nearest power of two in value; exact midpoints round up.
        if (x <= 0.0 || std::isnan(x)) return 0; // clamp to 2^-127
        int e = 0;
        double frac = std::frexp(x, &e); // x = frac * 2^e, frac in [0.5, 1)
        // Candidates 2^(e-1) and 2^e; midpoint is 0.75 * 2^e.
        int pow2 = (frac < 0.75) ? e - 1 : e;
        int code = pow2 + fmt.bias;
        code = std::clamp(code, 0, static_cast<int>(fmt.code_count()) - 2);
        return static_cast<uint32_t>(code);
    }

    uint32_t sign = std::signbit(x) ? 1u : 0u;
    double mag = std::fabs(x);
    if (mag == 0.0) return 0; // +0 regardless of input sign
    uint32_t max_code = max_finite_code(fmt);
    double vmax = decode_magnitude(fmt, max_code >> fmt.man_bits,
                                   max_code & ((1u << fmt.man_bits) - 1));
    uint32_t sign_shift = static_cast<uint32_t>(fmt.man_bits + fmt.exp_bits);
    if (mag >= vmax) return (sign << sign_shift) | max_code;

    // Scale into fixed-point units of the subnormal step 2^(1-bias-m) and
    // round to nearest even integer; the integer maps directly onto the
    // monotone (exp, man) code ordering.
    int step_exp = 1 - fmt.bias - fmt.man_bits;
    int e = 0;
    double frac = std::frexp(mag, &e);
    int unbiased = e - 1; // mag = frac*2 * 2^(e-1), frac*2 in [1, 2)
    uint32_t code_mag;
    if (unbiased < 1 - fmt.bias) {
        // Subnormal range: round mag / 2^step_exp to nearest even.
        double units = std::ldexp(mag, -step_exp);
        double r = std::nearbyint(units); // assumes FE_TONEAREST (round-half-even)
        // nearbyint honors the current rounding mode; enforce ties-to-even
        // explicitly to stay independent of environment.
        double fl = std::floor(units);
        double diff = units - fl;
        if (diff == 0.5) r = (std::fmod(fl, 2.0) == 0.0) ? fl : fl + 1.0;
        code_mag = static_cast<uint32_t>(r);
        if (code_mag >= (1u << fmt.man_bits)) {
            // Rounded up into the first normal binade.
            code_mag = 1u << fmt.man_bits;
        }
    } else {
        int exp_field = unbiased + fmt.bias;
        double scaled = std::ldexp(frac * 2.0 - 1.0, fmt.man_bits); // in [0, 2^m)
        double fl = std::floor(scaled);
        double diff = scaled - fl;
        double r;
        if (diff > 0.5) r = fl + 1.0;
        else if (diff < 0.5) r = fl;
        else r = (std::fmod(fl, 2.0) == 0.0) ? fl : fl + 1.0;
        uint32_t man = static_cast<uint32_t>(r);
        uint32_t exp_u = static_cast<uint32_t>(exp_field);
        if (man == (1u << fmt.man_bits)) {
            man = 0;
            ++exp_u;
        }
        code_mag = (exp_u << fmt.man_bits) | man;
    }
    if (code_mag > max_code) code_mag = max_code;
    return (sign << sign_shift) | code_mag;
}

double round_through(const FloatFormat& fmt, double x) { return decode(fmt, encode(fmt, x)); }

QuantizedBlock quantize_block(const BlockFormat& bf, const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != bf.block_size)
        throw ShapeMismatch(bf.name + ": block expects " + std::to_string(bf.block_size) +
                            " elements, got " + std::to_string(v.size()));
    double amax = 0.0;
    for (double x : v) amax = std::max(amax, std::fabs(x));

    QuantizedBlock q;
    double elem_max = bf.elem.max_finite();
    if (amax == 0.0) {
        q.scale_code = encode(bf.scale_format, 1.0);
        q.elem_codes.assign(v.size(), 0);
        return q;
    }
    double scale;
    if (bf.scale_format.sign_bits == 0) {
        // Smallest power of two with amax/scale <= elem_max.
        int e = static_cast<int>(std::ceil(std::log2(amax / elem_max)));
        // Guard against log2 rounding at exact powers of two.
        while (amax / std::ldexp(1.0, e) > elem_max) ++e;
        while (e > -bf.scale_format.bias && amax / std::ldexp(1.0, e - 1) <= elem_max) --e;
        int code = std::clamp(e + bf.scale_format.bias, 0,
                              static_cast<int>(bf.scale_format.code_count()) - 2);
        q.scale_code = static_cast<uint32_t>(code);
    } else {
        q.scale_code = encode(bf.scale_format, amax / elem_max);
    }
    scale = decode(bf.scale_format, q.scale_code);
    if (!(scale > 0.0)) scale = 1.0;
    q.elem_codes.reserve(v.size());
    for (double x : v) q.elem_codes.push_back(encode(bf.elem, x / scale));
    return q;
}

std::vector<double> dequantize_block(const BlockFormat& bf, const QuantizedBlock& q) {
    if (static_cast<int>(q.elem_codes.size()) != bf.block_size)
        throw ShapeMismatch(bf.name + ": code count " + std::to_string(q.elem_codes.size()) +
                            " != block size " + std::to_string(bf.block_size));
    double scale = decode(bf.scale_format, q.scale_code);
    std::vector<double> out;
    out.reserve(q.elem_codes.size());
    for (uint32_t c : q.elem_codes) out.push_back(decode(bf.elem, c) * scale);
    return out;
}

std::vector<double> quantize_vector(const BlockFormat& bf, const std::vector<double>& v,
                                    uint64_t* overflow_count) {
    std::vector<double> out;
    out.reserve(v.size());
    double elem_max = bf.elem.max_finite();
    for (size_t i = 0; i < v.size(); i += bf.block_size) {
        std::vector<double> block(bf.block_size, 0.0);
        size_t n = std::min<size_t>(bf.block_size, v.size() - i);
        std::copy(v.begin() + i, v.begin() + i + n, block.begin());
        QuantizedBlock q = quantize_block(bf, block);
        double scale = decode(bf.scale_format, q.scale_code);
        if (overflow_count) {
            for (size_t j = 0; j < n; ++j)
                if (std::fabs(block[j]) / scale > elem_max) ++*overflow_count;
        }
        std::vector<double> dq = dequantize_block(bf, q);
        out.insert(out.end(), dq.begin(), dq.begin() + n);
    }
    return out;
}

namespace {

QuantStats stats_from(const std::vector<double>& v, const std::vector<double>& rt,
                      uint64_t overflow) {
    QuantStats s;
    s.overflow_count = overflow;
    double sig = 0.0, errp = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        double e = rt[i] - v[i];
        s.mse += e * e;
        s.max_abs_err = std::max(s.max_abs_err, std::fabs(e));
        sig += v[i] * v[i];
        errp += e * e;
    }
    s.mse /= static_cast<double>(v.size());
    if (sig > 0.0) {
        if (errp == 0.0)
            s.sqnr_db = std::numeric_limits<double>::infinity();
        else
            s.sqnr_db = 10.0 * std::log10(sig / errp);
    }
    return s;
}

} // namespace

QuantStats quant_error_stats(const FloatFormat& fmt, const std::vector<double>& v) {
    if (v.empty()) throw ShapeMismatch("quant_error_stats: empty input");
    std::vector<double> rt;
    rt.reserve(v.size());
    uint64_t overflow = 0;
    double vmax = fmt.max_finite();
    for (double x : v) {
        if (std::fabs(x) > vmax) ++overflow;
        rt.push_back(round_through(fmt, x));
    }
    return stats_from(v, rt, overflow);
}

QuantStats quant_error_stats(const BlockFormat& bf, const std::vector<double>& v) {
    if (v.empty()) throw ShapeMismatch("quant_error_stats: empty input");
    uint64_t overflow = 0;
    std::vector<double> rt = quantize_vector(bf, v, &overflow);
    return stats_from(v, rt, overflow);
}

namespace {

double round_accum(double x, AccumPrecision p) {
    switch (p) {
        case AccumPrecision::fp32: return static_cast<double>(static_cast<float>(x));
        case AccumPrecision::fp16: return round_through(format("e5m10"), x);
        case AccumPrecision::exact: return x;
    }
    return x;
}

std::vector<double> gemm_rounded(const std::vector<double>& aq, const std::vector<double>& bq,
                                 int m, int k, int n, AccumPrecision accum) {
    std::vector<double> d(static_cast<size_t>(m) * n, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int t = 0; t < k; ++t)
                acc = round_accum(acc + aq[i * k + t] * bq[t * n + j], accum);
            d[i * n + j] = acc;
        }
    }
    return d;
}

void check_shapes(size_t a, size_t b, int m, int k, int n) {
    if (m <= 0 || k <= 0 || n <= 0 || a != static_cast<size_t>(m) * k ||
        b != static_cast<size_t>(k) * n)
        throw ShapeMismatch("quantized_gemm: A is " + std::to_string(a) + " elems, B is " +
                            std::to_string(b) + ", want " + std::to_string(m) + "x" +
                            std::to_string(k) + " * " + std::to_string(k) + "x" +
                            std::to_string(n));
}

} // namespace

std::vector<double> quantized_gemm(const std::vector<double>& a, const std::vector<double>& b,
                                   int m, int k, int n, const FloatFormat& fmt,
                                   AccumPrecision accum) {
    check_shapes(a.size(), b.size(), m, k, n);
    std::vector<double> aq(a.size()), bq(b.size());
    for (size_t i = 0; i < a.size(); ++i) aq[i] = round_through(fmt, a[i]);
    for (size_t i = 0; i < b.size(); ++i) bq[i] = round_through(fmt, b[i]);
    return gemm_rounded(aq, bq, m, k, n, accum);
}

std::vector<double> quantized_gemm(const std::vector<double>& a, const std::vector<double>& b,
                                   int m, int k, int n, const BlockFormat& bf,
                                   AccumPrecision accum) {
    check_shapes(a.size(), b.size(), m, k, n);
    // Blocks run along the reduction dimension: rows of A, columns of B.
    std::vector<double> aq(a.size()), bq(b.size());
    for (int i = 0; i < m; ++i) {
        std::vector<double> row(a.begin() + static_cast<size_t>(i) * k,
                                a.begin() + static_cast<size_t>(i + 1) * k);
        std::vector<double> q = quantize_vector(bf, row);
        std::copy(q.begin(), q.end(), aq.begin() + static_cast<size_t>(i) * k);
    }
    for (int j = 0; j < n; ++j) {
        std::vector<double> col(k);
        for (int t = 0; t < k; ++t) col[t] = b[static_cast<size_t>(t) * n + j];
        std::vector<double> q = quantize_vector(bf, col);
        for (int t = 0; t < k; ++t) bq[static_cast<size_t>(t) * n + j] = q[t];
    }
    return gemm_rounded(aq, bq, m, k, n, accum);
}

} // namespace blackmodel::lpfloat
