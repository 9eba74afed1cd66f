#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "earnlm/error.hpp"
#include "earnlm/io.hpp"
#include "earnlm/matrix.hpp"

namespace earnlm::quant {

namespace detail {

// Inverse standard-normal CDF, Wichura's algorithm AS241 (PPND16 variant,
// ~1e-16 relative accuracy). Used to place the codebook levels.
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorCode::non_finite_input, "inverse_normal_cdf domain is (0,1)");
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-6) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

}  // namespace detail

// 16-level NormalFloat4 code. Levels are standard-normal quantiles,
// rescaled so the extreme entries are exactly +-1, with an exact zero.
struct Codebook {
    std::array<double, 16> values{};

    // Index of the exact-zero entry.
    std::size_t zero_index() const {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] == 0.0) return i;
        }
        return values.size() / 2;
    }

    // Largest gap between adjacent levels; the half-gap bounds the
    // round-trip error of a unit-scaled element.
    double max_adjacent_gap() const {
        double g = 0.0;
        for (std::size_t i = 1; i < values.size(); ++i) {
            g = std::max(g, values[i] - values[i - 1]);
        }
        return g;
    }
};

// Quantile range endpoint from the NF4 recipe: 1 - (1/32 + 1/30)/2.
inline constexpr double kNf4QuantileOffset = 0.9677083;

// Builds the NF4 codebook: 8 evenly spaced quantile points on the negative
// side, 7 on the positive side, plus an exact zero; both sides share the
// extreme quantile so dividing by it pins the endpoints to exactly -1/+1.
inline Codebook build_nf4_codebook() {
    const double offset = kNf4QuantileOffset;
    std::vector<double> vals;
    vals.reserve(16);
    for (int i = 0; i < 8; ++i) {
        const double p = offset + static_cast<double>(i) * (0.5 - offset) / 8.0;
        vals.push_back(-detail::inverse_normal_cdf(p));
    }
    vals.push_back(0.0);
    for (int j = 6; j >= 0; --j) {
        const double p = offset + static_cast<double>(j) * (0.5 - offset) / 7.0;
        vals.push_back(detail::inverse_normal_cdf(p));
    }
    const double extreme = detail::inverse_normal_cdf(offset);
    Codebook cb;
    for (std::size_t i = 0; i < 16; ++i) cb.values[i] = vals[i] / extreme;
    return cb;
}

inline const Codebook& nf4_codebook() {
    static const Codebook cb = build_nf4_codebook();
    return cb;
}

// Second-level affine 8-bit quantization of per-block absmax scales.
struct DoubleQuantScales {
    std::vector<std::uint8_t> q_codes;  // one per first-level block
    std::uint32_t q_block = 256;        // scales per second-level group
    std::vector<double> q_scale;        // one per group
    std::vector<double> q_offset;       // one per group
};

// Blockwise 4-bit tensor: one code per element plus a per-block scale.
struct QuantizedTensor {
    std::vector<std::uint64_t> shape;
    std::uint32_t block_size = 64;
    std::vector<std::uint8_t> codes;  // values in [0, 16), row-major
    bool double_quant = false;
    std::vector<double> absmax;  // plain scales (empty when double_quant)
    DoubleQuantScales dq;        // used when double_quant

    std::size_t element_count() const {
        std::size_t n = 1;
        for (auto d : shape) n *= static_cast<std::size_t>(d);
        return shape.empty() ? 0 : n;
    }

    std::size_t block_count() const {
        return (element_count() + block_size - 1) / block_size;
    }

    // Scale of block b, reconstructing from the 8-bit form when present.
    double absmax_at(std::size_t b) const {
        if (!double_quant) return absmax[b];
        const std::size_t g = b / dq.q_block;
        return dq.q_offset[g] + static_cast<double>(dq.q_codes[b]) * dq.q_scale[g];
    }
};

inline constexpr std::uint32_t kDefaultBlockSize = 64;
inline constexpr std::uint32_t kDefaultDoubleQuantBlock = 256;

namespace detail {

// Nearest codebook level; ties break toward the smaller index.
inline std::uint8_t nearest_code(const Codebook& cb, double x) {
    std::uint8_t best = 0;
    double best_dist = std::fabs(x - cb.values[0]);
    for (std::uint8_t i = 1; i < 16; ++i) {
        const double d = std::fabs(x - cb.values[i]);
        if (d < best_dist) {
            best = i;
            best_dist = d;
        }
    }
    return best;
}

inline DoubleQuantScales double_quantize_scales(const std::vector<double>& scales,
                                                std::uint32_t q_block) {
    DoubleQuantScales dq;
    dq.q_block = q_block;
    dq.q_codes.resize(scales.size());
    const std::size_t n_groups = (scales.size() + q_block - 1) / q_block;
    dq.q_scale.resize(n_groups);
    dq.q_offset.resize(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        const std::size_t lo = g * q_block;
        const std::size_t hi = std::min(scales.size(), lo + q_block);
        double mn = scales[lo], mx = scales[lo];
        for (std::size_t i = lo; i < hi; ++i) {
            mn = std::min(mn, scales[i]);
            mx = std::max(mx, scales[i]);
        }
        const double step = (mx - mn) / 255.0;
        dq.q_offset[g] = mn;
        dq.q_scale[g] = step;
        for (std::size_t i = lo; i < hi; ++i) {
            if (step == 0.0) {
                dq.q_codes[i] = 0;
                continue;
            }
            long code = std::lround((scales[i] - mn) / step);
            code = std::max(0L, std::min(255L, code));
            dq.q_codes[i] = static_cast<std::uint8_t>(code);
        }
    }
    return dq;
}

}  // namespace detail

// Blockwise absmax NF4 quantization. Zero blocks map every element to the
// zero code with absmax 0 so dequantization never divides by the scale.
inline QuantizedTensor quantize_blockwise(const Matrix& w,
                                          std::uint32_t block_size = kDefaultBlockSize,
                                          bool double_quant = false,
                                          std::uint32_t q_block = kDefaultDoubleQuantBlock) {
    if (block_size < 1) throw Error(ErrorCode::config_error, "block_size must be >= 1");
    if (q_block < 1) throw Error(ErrorCode::config_error, "q_block must be >= 1");
    for (double v : w.data) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::non_finite_input, "quantize_blockwise: non-finite input");
        }
    }
    const Codebook& cb = nf4_codebook();
    const std::uint8_t zero_code = static_cast<std::uint8_t>(cb.zero_index());

    QuantizedTensor q;
    q.shape = {w.rows, w.cols};
    q.block_size = block_size;
    q.double_quant = double_quant;
    const std::size_t n = w.size();
    q.codes.resize(n);

    std::vector<double> scales(q.block_count(), 0.0);
    for (std::size_t b = 0; b < scales.size(); ++b) {
        const std::size_t lo = b * block_size;
        const std::size_t hi = std::min(n, lo + block_size);
        double amax = 0.0;
        for (std::size_t i = lo; i < hi; ++i) amax = std::max(amax, std::fabs(w.data[i]));
        scales[b] = amax;
        if (amax == 0.0) {
            for (std::size_t i = lo; i < hi; ++i) q.codes[i] = zero_code;
            continue;
        }
        for (std::size_t i = lo; i < hi; ++i) {
            q.codes[i] = detail::nearest_code(cb, w.data[i] / amax);
        }
    }

    if (double_quant) {
        q.dq = detail::double_quantize_scales(scales, q_block);
    } else {
        q.absmax = std::move(scales);
    }
    return q;
}

inline void validate_quantized(const QuantizedTensor& q) {
    if (q.shape.size() != 2) {
        throw Error(ErrorCode::corrupt_tensor, "quantized tensor must be 2-D");
    }
    if (q.block_size < 1) throw Error(ErrorCode::corrupt_tensor, "block_size must be >= 1");
    const std::size_t n = q.element_count();
    if (q.codes.size() != n) {
        throw Error(ErrorCode::corrupt_tensor, "code array length does not match shape");
    }
    const std::size_t blocks = q.block_count();
    if (q.double_quant) {
        if (q.dq.q_codes.size() != blocks) {
            throw Error(ErrorCode::corrupt_tensor, "double-quant code count mismatch");
        }
        const std::size_t groups = (blocks + q.dq.q_block - 1) / q.dq.q_block;
        if (q.dq.q_scale.size() != groups || q.dq.q_offset.size() != groups) {
            throw Error(ErrorCode::corrupt_tensor, "double-quant group count mismatch");
        }
    } else if (q.absmax.size() != blocks) {
        throw Error(ErrorCode::corrupt_tensor, "absmax count does not match block count");
    }
    for (auto c : q.codes) {
        if (c >= 16) throw Error(ErrorCode::corrupt_tensor, "4-bit code out of range");
    }
}

inline Matrix dequantize(const QuantizedTensor& q) {
    validate_quantized(q);
    const Codebook& cb = nf4_codebook();
    Matrix out(static_cast<std::size_t>(q.shape[0]), static_cast<std::size_t>(q.shape[1]));
    const std::size_t n = out.size();
    for (std::size_t b = 0; b < q.block_count(); ++b) {
        const double scale = q.absmax_at(b);
        const std::size_t lo = b * q.block_size;
        const std::size_t hi = std::min(n, lo + q.block_size);
        for (std::size_t i = lo; i < hi; ++i) {
            out.data[i] = cb.values[q.codes[i]] * scale;
        }
    }
    return out;
}

struct QuantizationReport {
    double max_abs_err = 0.0;
    double rms_err = 0.0;
    double memory_ratio = 0.0;
};

// Nominal payload accounting: 4 bits per code; scales cost 32 bits each
// when stored plain, 8 bits each plus a 32+32-bit affine pair per group
// when double-quantized.
inline double payload_bits(const QuantizedTensor& q) {
    const double code_bits = 4.0 * static_cast<double>(q.element_count());
    const double blocks = static_cast<double>(q.block_count());
    if (!q.double_quant) return code_bits + 32.0 * blocks;
    const double groups =
        static_cast<double>((q.block_count() + q.dq.q_block - 1) / q.dq.q_block);
    return code_bits + 8.0 * blocks + 64.0 * groups;
}

inline QuantizationReport quantization_report(const Matrix& w, const QuantizedTensor& q) {
    if (q.shape.size() != 2 || q.shape[0] != w.rows || q.shape[1] != w.cols) {
        throw Error(ErrorCode::shape_mismatch, "quantization_report: shapes differ");
    }
    const Matrix deq = dequantize(q);
    QuantizationReport rep;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double err = std::fabs(w.data[i] - deq.data[i]);
        rep.max_abs_err = std::max(rep.max_abs_err, err);
        sq_sum += err * err;
    }
    rep.rms_err = w.size() ? std::sqrt(sq_sum / static_cast<double>(w.size())) : 0.0;
    rep.memory_ratio = payload_bits(q) / (32.0 * static_cast<double>(w.size()));
    return rep;
}

// Wire format: header {shape, block_size, double-quant flag}, then packed
// 4-bit codes (two per byte, low nibble first), then the scales.
inline void write_quantized(ByteWriter& out, const QuantizedTensor& q) {
    out.u32(static_cast<std::uint32_t>(q.shape.size()));
    for (auto d : q.shape) out.u64(d);
    out.u32(q.block_size);
    out.u8(q.double_quant ? 1 : 0);
    const std::size_t n = q.codes.size();
    for (std::size_t i = 0; i < n; i += 2) {
        std::uint8_t byte = static_cast<std::uint8_t>(q.codes[i] & 0x0F);
        if (i + 1 < n) byte |= static_cast<std::uint8_t>((q.codes[i + 1] & 0x0F) << 4);
        out.u8(byte);
    }
    if (q.double_quant) {
        out.u32(q.dq.q_block);
        out.bytes(q.dq.q_codes.data(), q.dq.q_codes.size());
        for (double s : q.dq.q_scale) out.f64(s);
        for (double o : q.dq.q_offset) out.f64(o);
    } else {
        for (double s : q.absmax) out.f64(s);
    }
}

inline QuantizedTensor read_quantized(ByteReader& in) {
    QuantizedTensor q;
    const std::uint32_t ndims = in.u32();
    if (ndims == 0 || ndims > 8) throw Error(ErrorCode::corrupt_tensor, "bad tensor rank");
    q.shape.resize(ndims);
    for (auto& d : q.shape) d = in.u64();
    q.block_size = in.u32();
    if (q.block_size < 1) throw Error(ErrorCode::corrupt_tensor, "bad block size");
    q.double_quant = in.u8() != 0;
    const std::size_t n = q.element_count();
    q.codes.resize(n);
    for (std::size_t i = 0; i < n; i += 2) {
        const std::uint8_t byte = in.u8();
        q.codes[i] = byte & 0x0F;
        if (i + 1 < n) q.codes[i + 1] = byte >> 4;
    }
    const std::size_t blocks = q.block_count();
    if (q.double_quant) {
        q.dq.q_block = in.u32();
        if (q.dq.q_block < 1) throw Error(ErrorCode::corrupt_tensor, "bad double-quant block");
        q.dq.q_codes.resize(blocks);
        in.raw(q.dq.q_codes.data(), blocks);
        const std::size_t groups = (blocks + q.dq.q_block - 1) / q.dq.q_block;
        q.dq.q_scale.resize(groups);
        q.dq.q_offset.resize(groups);
        for (auto& s : q.dq.q_scale) s = in.f64();
        for (auto& o : q.dq.q_offset) o = in.f64();
    } else {
        q.absmax.resize(blocks);
        for (auto& s : q.absmax) s = in.f64();
    }
    validate_quantized(q);
    return q;
}

}  // namespace earnlm::quant
