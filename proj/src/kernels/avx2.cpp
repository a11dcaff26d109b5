// AVX2 + FMA variants of the flux kernels. Compiled with -mavx2 -mfma and
// only entered after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "perosim/kernels.hpp"

namespace perosim::kernels::avx2 {
namespace {

constexpr int kLanes = 4;
constexpr double kLarge = 40.0;
constexpr double kSeries = 0.1;
constexpr double kExpm1Poly = 0.34657359027997264;  // ln(2)/2

// 1/k! for k = 1..13
constexpr double kInvFact[] = {
    1.0,
    1.0 / 2.0,
    1.0 / 6.0,
    1.0 / 24.0,
    1.0 / 120.0,
    1.0 / 720.0,
    1.0 / 5040.0,
    1.0 / 40320.0,
    1.0 / 362880.0,
    1.0 / 3628800.0,
    1.0 / 39916800.0,
    1.0 / 479001600.0,
    1.0 / 6227020800.0,
};

// sum_{k=1}^{13} r^k / k!  (expm1 on |r| <= ln2/2, truncation < 5e-18)
inline __m256d expm1_poly(__m256d r) {
  __m256d p = _mm256_set1_pd(kInvFact[12]);
  for (int k = 11; k >= 0; --k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[k]));
  return _mm256_mul_pd(p, r);
}

// e^x for x in [-708, 709]; inputs are clamped to that interval.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(709.0));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);
  const __m256d er = _mm256_add_pd(expm1_poly(r), _mm256_set1_pd(1.0));
  // 2^n through the exponent field
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(n64, 52));
  return _mm256_mul_pd(er, scale);
}

inline __m256d expm1_pd(__m256d x) {
  const __m256d absx = _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
  const __m256d small = _mm256_cmp_pd(absx, _mm256_set1_pd(kExpm1Poly), _CMP_LE_OQ);
  const __m256d poly = expm1_poly(x);
  const __m256d full = _mm256_sub_pd(exp_pd(x), _mm256_set1_pd(1.0));
  return _mm256_blendv_pd(full, poly, small);
}

inline __m256d bernoulli_pd(__m256d x) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d large = _mm256_set1_pd(kLarge);
  const __m256d is_zero = _mm256_cmp_pd(x, zero, _CMP_EQ_OQ);
  const __m256d is_pos_large = _mm256_cmp_pd(x, large, _CMP_GT_OQ);
  const __m256d is_neg_large = _mm256_cmp_pd(x, _mm256_sub_pd(zero, large), _CMP_LT_OQ);

  // keep the middle branch away from 0/0 and overflow in masked-out lanes
  const __m256d safe = _mm256_blendv_pd(x, one, _mm256_or_pd(is_zero, _mm256_or_pd(is_pos_large, is_neg_large)));
  __m256d b = _mm256_div_pd(safe, expm1_pd(safe));

  // x > 40: x e^{-x}, flushed to zero where e^{-x} underflows
  const __m256d neg_x = _mm256_sub_pd(zero, x);
  __m256d tail = _mm256_mul_pd(x, exp_pd(neg_x));
  tail = _mm256_blendv_pd(tail, zero, _mm256_cmp_pd(x, _mm256_set1_pd(708.0), _CMP_GT_OQ));

  b = _mm256_blendv_pd(b, tail, is_pos_large);
  b = _mm256_blendv_pd(b, neg_x, is_neg_large);
  b = _mm256_blendv_pd(b, one, is_zero);
  return b;
}

inline __m256d bernoulli_derivative_pd(__m256d x, __m256d b) {
  const __m256d absx = _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
  const __m256d near_zero = _mm256_cmp_pd(absx, _mm256_set1_pd(kSeries), _CMP_LT_OQ);
  const __m256d x2 = _mm256_mul_pd(x, x);
  __m256d s = _mm256_set1_pd(1.0 / 4790016.0);
  s = _mm256_fmadd_pd(s, x2, _mm256_set1_pd(-1.0 / 151200.0));
  s = _mm256_fmadd_pd(s, x2, _mm256_set1_pd(1.0 / 5040.0));
  s = _mm256_fmadd_pd(s, x2, _mm256_set1_pd(-1.0 / 180.0));
  s = _mm256_fmadd_pd(s, x2, _mm256_set1_pd(1.0 / 6.0));
  s = _mm256_fmadd_pd(s, x, _mm256_set1_pd(-0.5));

  const __m256d safe_x = _mm256_blendv_pd(x, _mm256_set1_pd(1.0), near_zero);
  const __m256d ratio = _mm256_div_pd(b, safe_x);
  const __m256d general = _mm256_sub_pd(_mm256_mul_pd(ratio, _mm256_sub_pd(_mm256_set1_pd(1.0), b)), b);
  return _mm256_blendv_pd(general, s, near_zero);
}

}  // namespace

void bernoulli(std::span<const double> x, std::span<double> b, std::span<double> db) {
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d xv = _mm256_loadu_pd(x.data() + i);
    const __m256d bv = bernoulli_pd(xv);
    _mm256_storeu_pd(b.data() + i, bv);
    _mm256_storeu_pd(db.data() + i, bernoulli_derivative_pd(xv, bv));
  }
  if (i < n) scalar::bernoulli(x.subspan(i), b.subspan(i), db.subspan(i));
}

void sg_flux(const FluxInputs& in, const FluxOutputs& out) {
  const std::size_t n = in.drive.size();
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d s = _mm256_loadu_pd(in.drive.data() + i);
    const __m256d c = _mm256_loadu_pd(in.coeff.data() + i);
    const __m256d up = _mm256_loadu_pd(in.up.data() + i);
    const __m256d down = _mm256_loadu_pd(in.down.data() + i);
    const __m256d ms = _mm256_sub_pd(zero, s);
    const __m256d bp = bernoulli_pd(s);
    const __m256d bm = bernoulli_pd(ms);
    const __m256d dbp = bernoulli_derivative_pd(s, bp);
    const __m256d dbm = bernoulli_derivative_pd(ms, bm);
    // separate multiplies: a fused form would break exact antisymmetry
    const __m256d flux = _mm256_mul_pd(c, _mm256_sub_pd(_mm256_mul_pd(bp, up), _mm256_mul_pd(bm, down)));
    const __m256d drive = _mm256_mul_pd(c, _mm256_add_pd(_mm256_mul_pd(dbp, up), _mm256_mul_pd(dbm, down)));
    _mm256_storeu_pd(out.flux.data() + i, flux);
    _mm256_storeu_pd(out.d_up.data() + i, _mm256_mul_pd(c, bp));
    _mm256_storeu_pd(out.d_down.data() + i, _mm256_sub_pd(zero, _mm256_mul_pd(c, bm)));
    _mm256_storeu_pd(out.d_drive.data() + i, drive);
  }
  if (i < n) {
    scalar::sg_flux({in.drive.subspan(i), in.up.subspan(i), in.down.subspan(i), in.coeff.subspan(i)},
                    {out.flux.subspan(i), out.d_up.subspan(i), out.d_down.subspan(i), out.d_drive.subspan(i)});
  }
}

}  // namespace perosim::kernels::avx2
