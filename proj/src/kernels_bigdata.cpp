#include <algorithm>
#include <cmath>
#include <numbers>

#include "motifbench/kernels.hpp"
#include "motifbench/rng.hpp"

namespace motifbench::kernels {

// --------------------------------------------------------------- sampling

uint64_t sample_count(double fraction, uint64_t n) {
  return uint64_t(std::floor(fraction * double(n) + 1e-9));
}

std::vector<uint64_t> interval_indices(uint64_t n, uint64_t interval) {
  if (interval == 0) throw ParameterError("sampling interval must be >= 1");
  std::vector<uint64_t> out;
  out.reserve(size_t(n / interval + 1));
  for (uint64_t i = 0; i < n; i += interval) out.push_back(i);
  return out;
}

std::vector<uint64_t> random_indices_range(uint64_t start, uint64_t end, double rate,
                                           uint64_t seed) {
  if (!(rate > 0.0) || rate > 1.0) throw ParameterError("sampling rate must be in (0, 1]");
  if (end < start) throw ParameterError("invalid sampling range");
  const uint64_t quota = sample_count(rate, end) - sample_count(rate, start);
  std::vector<uint64_t> picks =
      choose_indices(end - start, quota, derive_seed(seed, start));
  for (uint64_t& p : picks) p += start;
  return picks;
}

// ----------------------------------------------------------------- matrix

void matmul(const double* a, const double* b, double* c, uint64_t h1, uint64_t w,
            uint64_t w2) {
  for (uint64_t i = 0; i < h1; ++i) {
    double* row = c + i * w2;
    std::fill(row, row + w2, 0.0);
    for (uint64_t k = 0; k < w; ++k) {
      const double aik = a[i * w + k];
      const double* brow = b + k * w2;
      for (uint64_t j = 0; j < w2; ++j) row[j] += aik * brow[j];
    }
  }
}

double euclidean_distance(const double* x, const double* y, uint64_t n) {
  double acc = 0.0;
  for (uint64_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double cosine_distance(const double* x, const double* y, uint64_t n) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (uint64_t i = 0; i < n; ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) return 1.0;
  return 1.0 - dot / (std::sqrt(nx) * std::sqrt(ny));
}

// -------------------------------------------------------------- transform

void fft_pow2(std::complex<double>* a, uint64_t n) {
  if (n == 0 || (n & (n - 1)) != 0)
    throw ShapeError("fft length must be a power of two");

  // Bit-reversal permutation.
  for (uint64_t i = 1, j = 0; i < n; ++i) {
    uint64_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (uint64_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / double(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (uint64_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (uint64_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// ------------------------------------------------------------------ graph

Adjacency build_adjacency(const uint64_t* edges, uint64_t count, uint64_t vertices) {
  Adjacency adj;
  adj.vertices = vertices;
  adj.offsets.assign(vertices + 1, 0);
  for (uint64_t i = 0; i < count; ++i) {
    const uint64_t src = edges[i] >> 32;
    if (src >= vertices || (edges[i] & 0xffffffffu) >= vertices)
      throw ParameterError("edge endpoint outside vertex range");
    ++adj.offsets[src + 1];
  }
  for (uint64_t v = 0; v < vertices; ++v) adj.offsets[v + 1] += adj.offsets[v];

  adj.neighbors.resize(count);
  std::vector<uint64_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (uint64_t i = 0; i < count; ++i)
    adj.neighbors[cursor[edges[i] >> 32]++] = uint32_t(edges[i] & 0xffffffffu);
  for (uint64_t v = 0; v < vertices; ++v)
    std::sort(adj.neighbors.begin() + adj.offsets[v],
              adj.neighbors.begin() + adj.offsets[v + 1]);
  return adj;
}

std::vector<uint32_t> bfs_order(const Adjacency& adj, uint64_t root) {
  if (root >= adj.vertices) throw ParameterError("bfs root outside vertex range");
  std::vector<uint32_t> order;
  std::vector<uint8_t> seen(adj.vertices, 0);
  std::vector<uint32_t> frontier{uint32_t(root)};
  seen[root] = 1;
  while (!frontier.empty()) {
    std::vector<uint32_t> next;
    for (uint32_t v : frontier) {
      order.push_back(v);
      for (uint64_t i = adj.offsets[v]; i < adj.offsets[v + 1]; ++i) {
        const uint32_t nb = adj.neighbors[i];
        if (!seen[nb]) {
          seen[nb] = 1;
          next.push_back(nb);
        }
      }
    }
    // Frontier order is ascending id, making the visit order unique: parents
    // are processed in id order and each appends its unseen neighbors.
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }
  return order;
}

void degree_counts(const uint64_t* edges, uint64_t count, uint64_t vertices,
                   uint32_t* out_degree, uint32_t* in_degree) {
  for (uint64_t i = 0; i < count; ++i) {
    const uint64_t src = edges[i] >> 32;
    const uint64_t dst = edges[i] & 0xffffffffu;
    if (src >= vertices || dst >= vertices)
      throw ParameterError("edge endpoint outside vertex range");
    ++out_degree[src];
    ++in_degree[dst];
  }
}

// -------------------------------------------------------------------- set

std::vector<double> set_union(const std::vector<double>& a,
                              const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<double> set_intersect(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  std::vector<double> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

std::vector<double> set_difference(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  std::vector<double> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// ------------------------------------------------------------------ logic

void word_op(const uint64_t* in, uint64_t* out, uint64_t n, MotifVariant variant,
             uint64_t operand) {
  switch (variant) {
    case MotifVariant::bit_and:
      for (uint64_t i = 0; i < n; ++i) out[i] = in[i] & operand;
      return;
    case MotifVariant::bit_or:
      for (uint64_t i = 0; i < n; ++i) out[i] = in[i] | operand;
      return;
    case MotifVariant::bit_xor:
      for (uint64_t i = 0; i < n; ++i) out[i] = in[i] ^ operand;
      return;
    case MotifVariant::shift:
      if (operand >= 64) throw ParameterError("shift amount must be < 64");
      for (uint64_t i = 0; i < n; ++i) out[i] = in[i] << operand;
      return;
    default:
      throw ParameterError("not a word-level logic variant");
  }
}

// ------------------------------------------------------------- statistics

void StatsPartial::add(double x) {
  if (count == 0) {
    min = max = x;
  } else {
    min = std::min(min, x);
    max = std::max(max, x);
  }
  ++count;
  // Kahan step: recover the low-order bits lost by the running sum.
  const double y = x - compensation;
  const double t = sum + y;
  compensation = (t - sum) - y;
  sum = t;
}

StatsPartial StatsPartial::merge(const StatsPartial& a, const StatsPartial& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  StatsPartial m;
  m.count = a.count + b.count;
  m.min = std::min(a.min, b.min);
  m.max = std::max(a.max, b.max);
  const double y = b.sum - (a.compensation + b.compensation);
  const double t = a.sum + y;
  m.compensation = (t - a.sum) - y;
  m.sum = t;
  return m;
}

StatsPartial stats_partial(const double* x, uint64_t n) {
  StatsPartial p;
  for (uint64_t i = 0; i < n; ++i) p.add(x[i]);
  return p;
}

std::array<uint64_t, kHistogramBins> histogram_partial(const double* x, uint64_t n,
                                                       double lo, double hi) {
  std::array<uint64_t, kHistogramBins> bins{};
  const double span = hi - lo;
  for (uint64_t i = 0; i < n; ++i) {
    uint32_t b = 0;
    if (span > 0.0) {
      const double t = (x[i] - lo) / span;
      b = t >= 1.0 ? kHistogramBins - 1
                   : uint32_t(std::max(0.0, t * kHistogramBins));
      if (b >= kHistogramBins) b = kHistogramBins - 1;
    }
    ++bins[b];
  }
  return bins;
}

}  // namespace motifbench::kernels
