#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "motifbench/dataset.hpp"
#include "motifbench/errors.hpp"
#include "motifbench/params.hpp"

// Pure compute kernels: single-threaded, deterministic building blocks.
// Chunking, threading, spill, and combining live in the executor.
namespace motifbench::kernels {

// ---------------------------------------------------------------- sorting

// In-place quicksort: median-of-three pivot, Hoare partition, small runs
// finished by insertion sort. Recurses into the smaller side so stack depth
// stays logarithmic.
template <typename T, typename Less = std::less<T>>
void quick_sort(T* a, int64_t n, Less less = Less()) {
  while (n > 16) {
    int64_t mid = n / 2;
    // Median-of-three: order a[0], a[mid], a[n-1], then pivot on the median.
    if (less(a[mid], a[0])) std::swap(a[mid], a[0]);
    if (less(a[n - 1], a[0])) std::swap(a[n - 1], a[0]);
    if (less(a[n - 1], a[mid])) std::swap(a[n - 1], a[mid]);
    T pivot = a[mid];

    int64_t i = -1, j = n;
    for (;;) {
      while (less(a[++i], pivot)) {}
      while (less(pivot, a[--j])) {}
      if (i >= j) break;
      std::swap(a[i], a[j]);
    }
    // Recurse into the smaller partition, loop on the larger.
    if (j + 1 < n - j - 1) {
      quick_sort(a, j + 1, less);
      a += j + 1;
      n -= j + 1;
    } else {
      quick_sort(a + j + 1, n - j - 1, less);
      n = j + 1;
    }
  }
  for (int64_t i = 1; i < n; ++i) {
    T v = a[i];
    int64_t j = i;
    for (; j > 0 && less(v, a[j - 1]); --j) a[j] = a[j - 1];
    a[j] = v;
  }
}

// Stable bottom-up merge sort with a single scratch buffer.
template <typename T, typename Less = std::less<T>>
void merge_sort(T* a, int64_t n, Less less = Less()) {
  if (n < 2) return;
  std::vector<T> scratch(a, a + n);
  T* src = a;
  T* dst = scratch.data();
  for (int64_t width = 1; width < n; width *= 2) {
    for (int64_t lo = 0; lo < n; lo += 2 * width) {
      int64_t mid = std::min(lo + width, n);
      int64_t hi = std::min(lo + 2 * width, n);
      int64_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) dst[k++] = less(src[j], src[i]) ? src[j++] : src[i++];
      while (i < mid) dst[k++] = src[i++];
      while (j < hi) dst[k++] = src[j++];
    }
    std::swap(src, dst);
  }
  if (src != a) std::copy(src, src + n, a);
}

// --------------------------------------------------------------- sampling

// floor(fraction * n), with forgiveness for binary rounding of exact
// products (0.3 * 10 must count as 3).
uint64_t sample_count(double fraction, uint64_t n);

// Indices 0, k, 2k, ... below n.
std::vector<uint64_t> interval_indices(uint64_t n, uint64_t interval);

// Seeded selection within [start, end) sized so that per-range quotas of a
// partition always add up to sample_count(rate, total): the quota for a
// range is floor(rate*end) - floor(rate*start). Output is sorted.
std::vector<uint64_t> random_indices_range(uint64_t start, uint64_t end, double rate,
                                           uint64_t seed);

// ----------------------------------------------------------------- matrix

// c[h1 x w2] = a[h1 x w] * b[w x w2], row-major.
void matmul(const double* a, const double* b, double* c, uint64_t h1, uint64_t w,
            uint64_t w2);

double euclidean_distance(const double* x, const double* y, uint64_t n);
// 1 - cosine similarity; zero-norm vectors yield distance 1.
double cosine_distance(const double* x, const double* y, uint64_t n);

// -------------------------------------------------------------- transform

// In-place radix-2 decimation-in-time FFT; n must be a power of two.
void fft_pow2(std::complex<double>* a, uint64_t n);

// ------------------------------------------------------------------ graph

// Compressed adjacency with neighbor lists sorted ascending.
struct Adjacency {
  uint64_t vertices = 0;
  std::vector<uint64_t> offsets;    // vertices + 1 entries
  std::vector<uint32_t> neighbors;  // sorted within each vertex's slice
};

Adjacency build_adjacency(const uint64_t* edges, uint64_t count, uint64_t vertices);

// Breadth-first visit order from root; neighbor ties break by ascending id.
// Unreachable vertices are absent from the order.
std::vector<uint32_t> bfs_order(const Adjacency& adj, uint64_t root);

// Accumulates per-vertex degrees into caller-provided arrays.
void degree_counts(const uint64_t* edges, uint64_t count, uint64_t vertices,
                   uint32_t* out_degree, uint32_t* in_degree);

// -------------------------------------------------------------------- set

// Inputs must be sorted and deduplicated; outputs are sorted.
std::vector<double> set_union(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> set_intersect(const std::vector<double>& a,
                                  const std::vector<double>& b);
std::vector<double> set_difference(const std::vector<double>& a,
                                   const std::vector<double>& b);

// ------------------------------------------------------------------ logic

// Elementwise bitwise op with a constant operand; shift must be < 64.
void word_op(const uint64_t* in, uint64_t* out, uint64_t n, MotifVariant variant,
             uint64_t operand);

template <typename T>
void relu(const T* in, T* out, uint64_t n) {
  for (uint64_t i = 0; i < n; ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
}

// ------------------------------------------------------------- statistics

// Mergeable chunk summary; sums are Kahan-compensated so the combined mean
// stays within 1e-12 relative of a high-precision oracle.
struct StatsPartial {
  uint64_t count = 0;
  double sum = 0.0;
  double compensation = 0.0;
  double min = 0.0;
  double max = 0.0;

  void add(double x);
  static StatsPartial merge(const StatsPartial& a, const StatsPartial& b);
};

StatsPartial stats_partial(const double* x, uint64_t n);

constexpr uint32_t kHistogramBins = 16;

// Bin counts over [lo, hi]; values at hi land in the last bin.
std::array<uint64_t, kHistogramBins> histogram_partial(const double* x, uint64_t n,
                                                       double lo, double hi);

// ------------------------------------------------------------ tensor (AI)

// 4-D tensor; logical axes are always N, H, W, C while `layout` fixes the
// memory order (NHWC or NCHW). Filters reuse the struct with axes read as
// (kh, kw, in_channels, out_channels) in NHWC order.
struct Tensor4 {
  TensorDims dims;
  TensorLayout layout = TensorLayout::nhwc;
  std::vector<float> v;

  uint64_t index(uint64_t n, uint64_t h, uint64_t w, uint64_t c) const {
    if (layout == TensorLayout::nhwc)
      return ((n * dims.h + h) * dims.w + w) * dims.c + c;
    return ((n * dims.c + c) * dims.h + h) * dims.w + w;
  }
  float at(uint64_t n, uint64_t h, uint64_t w, uint64_t c) const {
    return v[index(n, h, w, c)];
  }
  float& at(uint64_t n, uint64_t h, uint64_t w, uint64_t c) {
    return v[index(n, h, w, c)];
  }
};

// Output spatial size plus leading pad for one axis.
struct ConvGeometry {
  uint32_t out = 0;
  int64_t pad_before = 0;
};
ConvGeometry conv_geometry(uint32_t in, uint32_t k, uint32_t stride, PaddingMode pad);

// Cross-correlation (no filter flip). Filter dims are (kh, kw, inC, outC)
// and must match the input channel count.
Tensor4 conv2d(const Tensor4& input, const Tensor4& filter, uint32_t stride,
               PaddingMode padding);

Tensor4 pool2d(const Tensor4& input, uint32_t window_h, uint32_t window_w,
               uint32_t stride, bool take_max);

// out[batch x m] = in[batch x n] * weights[n x m] + bias[m].
void fully_connected(const float* in, uint64_t batch, uint64_t n, const float* weights,
                     const float* bias, uint64_t m, float* out);

// Per-feature standardization to mean 0, variance 1 (scale=1, shift=0).
// Requires batch >= 2.
void batch_norm(const float* in, float* out, uint64_t batch, uint64_t features,
                double epsilon);

// Column partials for chunked batch_norm: accumulates sum and sum-of-squares
// per feature over `rows` rows.
void column_moments(const float* in, uint64_t rows, uint64_t features, double* sum,
                    double* sum_sq);
void normalize_rows(const float* in, float* out, uint64_t rows, uint64_t features,
                    const double* mean, const double* inv_std);

// Row-wise softmax with max-shift for stability; rows sum to 1 within 1e-9.
void softmax_rows(const double* in, double* out, uint64_t rows, uint64_t cols);

// Zeroes a seeded floor(rate*n) subset and scales survivors by 1/(1-rate).
// rate must be in [0, 1).
template <typename T>
void dropout(const T* in, T* out, uint64_t n, double rate, uint64_t seed);

// Exact-count form for chunked execution: zeroes `drops` seeded positions
// and scales the rest by `scale`, so per-chunk quotas sum to the global
// floor(rate * n).
template <typename T>
void dropout_count(const T* in, T* out, uint64_t n, uint64_t drops, double scale,
                   uint64_t seed);

}  // namespace motifbench::kernels
