#include <bit>
#include <cmath>

#include "tagsync/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define TAGSYNC_KERNELS_X86 1
#elif defined(__ARM_NEON) || defined(__aarch64__)
#include <arm_neon.h>
#define TAGSYNC_KERNELS_NEON 1
#endif

namespace tagsync::kernels::detail {

// ---- packed bit kernels (word-parallel popcount, portable) ----------------

void xor_sym_packed(const PackedBits& bits, int arms, std::span<int32_t> out) {
    const PackedBits rev = bits.reversed();
    const std::size_t n = bits.nbits;
    const auto a = static_cast<std::size_t>(arms);
    for (std::size_t t = a; t + a < n; ++t) {
        int32_t acc = 0;
        for (int off = 0; off < arms; off += 64) {
            const int len = std::min(64, arms - off);
            const uint64_t f = bits.window(t + 1 + off, len);
            const uint64_t b = rev.window(n - t + off, len);
            acc += std::popcount(f ^ b);
        }
        out[t - a] = acc;
    }
}

void xnor_sym_packed(const PackedBits& bits, int arms, std::span<int32_t> out) {
    const PackedBits rev = bits.reversed();
    const std::size_t n = bits.nbits;
    const auto a = static_cast<std::size_t>(arms);
    for (std::size_t t = a; t + a < n; ++t) {
        int32_t acc = 0;
        for (int off = 0; off < arms; off += 64) {
            const int len = std::min(64, arms - off);
            const uint64_t f = bits.window(t + 1 + off, len);
            const uint64_t b = rev.window(n - t + off, len);
            const uint64_t mask = len == 64 ? ~uint64_t{0} : ((uint64_t{1} << len) - 1);
            acc += std::popcount(~(f ^ b) & mask);
        }
        out[t - a] = acc;
    }
}

void hamming_packed(const PackedBits& bits, const PackedBits& tmpl, std::span<int32_t> out) {
    const std::size_t n = bits.nbits;
    const auto L = static_cast<int>(tmpl.nbits);
    std::vector<uint64_t> tchunks;
    for (int off = 0; off < L; off += 64)
        tchunks.push_back(tmpl.window(off, std::min(64, L - off)));
    for (std::size_t t = 0; t + tmpl.nbits <= n; ++t) {
        int32_t mism = 0;
        for (std::size_t c = 0; c < tchunks.size(); ++c) {
            const int off = static_cast<int>(c) * 64;
            const int len = std::min(64, L - off);
            mism += std::popcount(bits.window(t + off, len) ^ tchunks[c]);
        }
        out[t] = L - 2 * mism;
    }
}

// ---- real-domain vector kernels --------------------------------------------

#if defined(TAGSYNC_KERNELS_X86)

#define TAGSYNC_AVX2 __attribute__((target("avx2,fma")))

namespace {

// reverses [x0 x1 x2 x3] -> [x3 x2 x1 x0]
TAGSYNC_AVX2 inline __m256d reverse4(__m256d v) { return _mm256_permute4x64_pd(v, 0x1b); }

TAGSYNC_AVX2 inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

TAGSYNC_AVX2 inline __m256d abs4(__m256d v) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    return _mm256_and_pd(v, mask);
}

} // namespace

TAGSYNC_AVX2
void sd_trace_simd(std::span<const double> env, int arms, std::span<double> out) {
    const double* e = env.data();
    const std::size_t n = env.size();
    const auto a = static_cast<std::size_t>(arms);
    for (std::size_t t = a; t + a < n; ++t) {
        __m256d acc = _mm256_setzero_pd();
        std::size_t k = 1;
        for (; k + 3 <= a; k += 4) {
            const __m256d f = _mm256_loadu_pd(e + t + k);
            const __m256d b = reverse4(_mm256_loadu_pd(e + t - k - 3));
            acc = _mm256_add_pd(acc, abs4(_mm256_sub_pd(f, b)));
        }
        double s = hsum(acc);
        for (; k <= a; ++k) s += std::fabs(e[t + k] - e[t - k]);
        out[t - a] = s;
    }
}

TAGSYNC_AVX2
void sym_autocorr_simd(std::span<const double> env, int arms, std::span<double> out,
                       std::vector<uint8_t>* flags) {
    const double* e = env.data();
    const std::size_t n = env.size();
    const auto a = static_cast<std::size_t>(arms);
    for (std::size_t t = a; t + a < n; ++t) {
        __m256d vsf = _mm256_setzero_pd(), vsb = _mm256_setzero_pd();
        __m256d vsff = _mm256_setzero_pd(), vsbb = _mm256_setzero_pd();
        __m256d vsfb = _mm256_setzero_pd();
        std::size_t k = 1;
        for (; k + 3 <= a; k += 4) {
            const __m256d f = _mm256_loadu_pd(e + t + k);
            const __m256d b = reverse4(_mm256_loadu_pd(e + t - k - 3));
            vsf = _mm256_add_pd(vsf, f);
            vsb = _mm256_add_pd(vsb, b);
            vsff = _mm256_fmadd_pd(f, f, vsff);
            vsbb = _mm256_fmadd_pd(b, b, vsbb);
            vsfb = _mm256_fmadd_pd(f, b, vsfb);
        }
        double sf = hsum(vsf), sb = hsum(vsb), sff = hsum(vsff), sbb = hsum(vsbb),
               sfb = hsum(vsfb);
        for (; k <= a; ++k) {
            const double f = e[t + k], b = e[t - k];
            sf += f;
            sb += b;
            sff += f * f;
            sbb += b * b;
            sfb += f * b;
        }
        bool bad = false;
        out[t - a] = pearson_from_sums(sf, sb, sff, sbb, sfb, arms, &bad);
        if (bad && flags) (*flags)[t - a] = 1;
    }
}

TAGSYNC_AVX2
void xcorr_simd(std::span<const double> env, std::span<const double> tmpl,
                std::span<double> out, std::vector<uint8_t>* flags) {
    const double* e = env.data();
    const double* p = tmpl.data();
    const std::size_t n = env.size();
    const std::size_t L = tmpl.size();
    double sp = 0, spp = 0;
    for (double v : tmpl) {
        sp += v;
        spp += v * v;
    }
    for (std::size_t t = 0; t + L <= n; ++t) {
        __m256d vss = _mm256_setzero_pd(), vsss = _mm256_setzero_pd(),
                vdot = _mm256_setzero_pd();
        std::size_t k = 0;
        for (; k + 4 <= L; k += 4) {
            const __m256d s = _mm256_loadu_pd(e + t + k);
            const __m256d pv = _mm256_loadu_pd(p + k);
            vss = _mm256_add_pd(vss, s);
            vsss = _mm256_fmadd_pd(s, s, vsss);
            vdot = _mm256_fmadd_pd(s, pv, vdot);
        }
        double ss = hsum(vss), sss = hsum(vsss), dot = hsum(vdot);
        for (; k < L; ++k) {
            const double s = e[t + k];
            ss += s;
            sss += s * s;
            dot += s * p[k];
        }
        bool bad = false;
        out[t] = pearson_from_sums(ss, sp, sss, spp, dot, static_cast<int>(L), &bad);
        if (bad && flags) (*flags)[t] = 1;
    }
}

#elif defined(TAGSYNC_KERNELS_NEON)

namespace {
// reverses [x0 x1] -> [x1 x0]
inline float64x2_t reverse2(float64x2_t v) { return vextq_f64(v, v, 1); }
} // namespace

void sd_trace_simd(std::span<const double> env, int arms, std::span<double> out) {
    const double* e = env.data();
    const std::size_t n = env.size();
    const auto a = static_cast<std::size_t>(arms);
    for (std::size_t t = a; t + a < n; ++t) {
        float64x2_t acc = vdupq_n_f64(0.0);
        std::size_t k = 1;
        for (; k + 1 <= a; k += 2) {
            const float64x2_t f = vld1q_f64(e + t + k);
            const float64x2_t b = reverse2(vld1q_f64(e + t - k - 1));
            acc = vaddq_f64(acc, vabdq_f64(f, b));
        }
        double s = vaddvq_f64(acc);
        for (; k <= a; ++k) s += std::fabs(e[t + k] - e[t - k]);
        out[t - a] = s;
    }
}

void sym_autocorr_simd(std::span<const double> env, int arms, std::span<double> out,
                       std::vector<uint8_t>* flags) {
    const double* e = env.data();
    const std::size_t n = env.size();
    const auto a = static_cast<std::size_t>(arms);
    for (std::size_t t = a; t + a < n; ++t) {
        float64x2_t vsf = vdupq_n_f64(0.0), vsb = vdupq_n_f64(0.0);
        float64x2_t vsff = vdupq_n_f64(0.0), vsbb = vdupq_n_f64(0.0);
        float64x2_t vsfb = vdupq_n_f64(0.0);
        std::size_t k = 1;
        for (; k + 1 <= a; k += 2) {
            const float64x2_t f = vld1q_f64(e + t + k);
            const float64x2_t b = reverse2(vld1q_f64(e + t - k - 1));
            vsf = vaddq_f64(vsf, f);
            vsb = vaddq_f64(vsb, b);
            vsff = vfmaq_f64(vsff, f, f);
            vsbb = vfmaq_f64(vsbb, b, b);
            vsfb = vfmaq_f64(vsfb, f, b);
        }
        double sf = vaddvq_f64(vsf), sb = vaddvq_f64(vsb), sff = vaddvq_f64(vsff),
               sbb = vaddvq_f64(vsbb), sfb = vaddvq_f64(vsfb);
        for (; k <= a; ++k) {
            const double f = e[t + k], b = e[t - k];
            sf += f;
            sb += b;
            sff += f * f;
            sbb += b * b;
            sfb += f * b;
        }
        bool bad = false;
        out[t - a] = pearson_from_sums(sf, sb, sff, sbb, sfb, arms, &bad);
        if (bad && flags) (*flags)[t - a] = 1;
    }
}

void xcorr_simd(std::span<const double> env, std::span<const double> tmpl,
                std::span<double> out, std::vector<uint8_t>* flags) {
    const double* e = env.data();
    const double* p = tmpl.data();
    const std::size_t n = env.size();
    const std::size_t L = tmpl.size();
    double sp = 0, spp = 0;
    for (double v : tmpl) {
        sp += v;
        spp += v * v;
    }
    for (std::size_t t = 0; t + L <= n; ++t) {
        float64x2_t vss = vdupq_n_f64(0.0), vsss = vdupq_n_f64(0.0),
                    vdot = vdupq_n_f64(0.0);
        std::size_t k = 0;
        for (; k + 2 <= L; k += 2) {
            const float64x2_t s = vld1q_f64(e + t + k);
            const float64x2_t pv = vld1q_f64(p + k);
            vss = vaddq_f64(vss, s);
            vsss = vfmaq_f64(vsss, s, s);
            vdot = vfmaq_f64(vdot, s, pv);
        }
        double ss = vaddvq_f64(vss), sss = vaddvq_f64(vsss), dot = vaddvq_f64(vdot);
        for (; k < L; ++k) {
            const double s = e[t + k];
            ss += s;
            sss += s * s;
            dot += s * p[k];
        }
        bool bad = false;
        out[t] = pearson_from_sums(ss, sp, sss, spp, dot, static_cast<int>(L), &bad);
        if (bad && flags) (*flags)[t] = 1;
    }
}

#else

// No vector unit targeted at build time; the dispatcher never selects these,
// but keep the suite linkable.
void sd_trace_simd(std::span<const double> env, int arms, std::span<double> out) {
    sd_trace_scalar(env, arms, out);
}
void sym_autocorr_simd(std::span<const double> env, int arms, std::span<double> out,
                       std::vector<uint8_t>* flags) {
    sym_autocorr_scalar(env, arms, out, flags);
}
void xcorr_simd(std::span<const double> env, std::span<const double> tmpl,
                std::span<double> out, std::vector<uint8_t>* flags) {
    xcorr_scalar(env, tmpl, out, flags);
}

#endif

} // namespace tagsync::kernels::detail
