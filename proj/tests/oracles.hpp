#pragma once

// Brute-force reference implementations, written independently of the
// library kernels (separate indexing math, separate accumulation) so a
// shared bug cannot hide. Slow on purpose.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <set>
#include <vector>

namespace oracle {

// O(n^2) discrete Fourier transform.
inline std::vector<std::complex<double>> dft(
    const std::vector<std::complex<double>>& x) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  const double tau = 6.283185307179586476925286766559;
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t t = 0; t < n; ++t) {
      const double ang = -tau * double(k) * double(t) / double(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

// Triple-loop matrix product, c[h1 x w2] = a[h1 x w] * b[w x w2].
inline std::vector<double> matmul(const std::vector<double>& a,
                                  const std::vector<double>& b, uint64_t h1,
                                  uint64_t w, uint64_t w2) {
  std::vector<double> c(h1 * w2, 0.0);
  for (uint64_t i = 0; i < h1; ++i)
    for (uint64_t j = 0; j < w2; ++j) {
      double s = 0.0;
      for (uint64_t k = 0; k < w; ++k) s += a[i * w + k] * b[k * w2 + j];
      c[i * w2 + j] = s;
    }
  return c;
}

inline double euclidean(const std::vector<double>& x, const std::vector<double>& y) {
  long double s = 0.0L;
  for (size_t i = 0; i < x.size(); ++i) {
    const long double d = (long double)x[i] - (long double)y[i];
    s += d * d;
  }
  return double(std::sqrt((double)s));
}

inline double cosine_distance(const std::vector<double>& x,
                              const std::vector<double>& y) {
  long double dot = 0.0L, nx = 0.0L, ny = 0.0L;
  for (size_t i = 0; i < x.size(); ++i) {
    dot += (long double)x[i] * y[i];
    nx += (long double)x[i] * x[i];
    ny += (long double)y[i] * y[i];
  }
  if (nx == 0.0L || ny == 0.0L) return 1.0;
  return double(1.0L - dot / (std::sqrt((double)nx) * std::sqrt((double)ny)));
}

// Nested-loop valid/same cross-correlation over NHWC float data. All
// indexing is spelled out locally.
struct ConvSpec {
  uint32_t n, h, w, c;      // input dims
  uint32_t kh, kw, oc;      // filter dims (in-channels = c)
  uint32_t stride;
  bool same;                // valid otherwise
};

inline std::vector<float> conv2d(const std::vector<float>& in,
                                 const std::vector<float>& filter,
                                 const ConvSpec& s, uint32_t* out_h,
                                 uint32_t* out_w) {
  uint32_t oh, ow;
  int64_t ph = 0, pw = 0;
  if (s.same) {
    oh = (s.h + s.stride - 1) / s.stride;
    ow = (s.w + s.stride - 1) / s.stride;
    const int64_t need_h =
        std::max<int64_t>(0, int64_t(oh - 1) * s.stride + s.kh - s.h);
    const int64_t need_w =
        std::max<int64_t>(0, int64_t(ow - 1) * s.stride + s.kw - s.w);
    ph = need_h / 2;
    pw = need_w / 2;
  } else {
    oh = s.h >= s.kh ? (s.h - s.kh) / s.stride + 1 : 0;
    ow = s.w >= s.kw ? (s.w - s.kw) / s.stride + 1 : 0;
  }
  *out_h = oh;
  *out_w = ow;
  std::vector<float> out(uint64_t(s.n) * oh * ow * s.oc, 0.0f);
  for (uint32_t b = 0; b < s.n; ++b)
    for (uint32_t y = 0; y < oh; ++y)
      for (uint32_t x = 0; x < ow; ++x)
        for (uint32_t o = 0; o < s.oc; ++o) {
          double acc = 0.0;
          for (uint32_t fy = 0; fy < s.kh; ++fy)
            for (uint32_t fx = 0; fx < s.kw; ++fx)
              for (uint32_t ci = 0; ci < s.c; ++ci) {
                const int64_t iy = int64_t(y) * s.stride + fy - ph;
                const int64_t ix = int64_t(x) * s.stride + fx - pw;
                if (iy < 0 || ix < 0 || iy >= s.h || ix >= s.w) continue;
                const uint64_t ii =
                    ((uint64_t(b) * s.h + iy) * s.w + ix) * s.c + ci;
                const uint64_t fi =
                    ((uint64_t(fy) * s.kw + fx) * s.c + ci) * s.oc + o;
                acc += double(in[ii]) * double(filter[fi]);
              }
          out[((uint64_t(b) * oh + y) * ow + x) * s.oc + o] = float(acc);
        }
  return out;
}

inline std::vector<float> pool2d(const std::vector<float>& in, uint32_t n,
                                 uint32_t h, uint32_t w, uint32_t c, uint32_t wh,
                                 uint32_t ww, uint32_t stride, bool take_max,
                                 uint32_t* out_h, uint32_t* out_w) {
  const uint32_t oh = h >= wh ? (h - wh) / stride + 1 : 0;
  const uint32_t ow = w >= ww ? (w - ww) / stride + 1 : 0;
  *out_h = oh;
  *out_w = ow;
  std::vector<float> out(uint64_t(n) * oh * ow * c, 0.0f);
  for (uint32_t b = 0; b < n; ++b)
    for (uint32_t y = 0; y < oh; ++y)
      for (uint32_t x = 0; x < ow; ++x)
        for (uint32_t ci = 0; ci < c; ++ci) {
          double acc = take_max ? -1e300 : 0.0;
          for (uint32_t fy = 0; fy < wh; ++fy)
            for (uint32_t fx = 0; fx < ww; ++fx) {
              const uint64_t ii =
                  ((uint64_t(b) * h + (y * stride + fy)) * w + (x * stride + fx)) *
                      c +
                  ci;
              const double v = in[ii];
              if (take_max)
                acc = std::max(acc, v);
              else
                acc += v;
            }
          if (!take_max) acc /= double(wh) * ww;
          out[((uint64_t(b) * oh + y) * ow + x) * c + ci] = float(acc);
        }
  return out;
}

inline std::vector<float> fully_connected(const std::vector<float>& in,
                                          uint64_t batch, uint64_t n,
                                          const std::vector<float>& weights,
                                          const std::vector<float>& bias,
                                          uint64_t m) {
  std::vector<float> out(batch * m);
  for (uint64_t b = 0; b < batch; ++b)
    for (uint64_t j = 0; j < m; ++j) {
      double acc = bias[j];
      for (uint64_t k = 0; k < n; ++k)
        acc += double(in[b * n + k]) * double(weights[k * m + j]);
      out[b * m + j] = float(acc);
    }
  return out;
}

// High-precision streaming moments.
struct Moments {
  long double sum = 0.0L;
  double min = 0.0, max = 0.0;
  uint64_t count = 0;
};

inline Moments moments(const std::vector<double>& x) {
  Moments m;
  for (double v : x) {
    if (m.count == 0) {
      m.min = m.max = v;
    } else {
      m.min = std::min(m.min, v);
      m.max = std::max(m.max, v);
    }
    m.sum += (long double)v;
    ++m.count;
  }
  return m;
}

inline double mean(const std::vector<double>& x) {
  const Moments m = moments(x);
  return m.count ? double(m.sum / (long double)m.count) : 0.0;
}

// Per-edge scan into plain arrays; edges packed (src << 32 | dst).
inline void degrees(const std::vector<uint64_t>& edges, uint64_t vertices,
                    std::vector<uint64_t>* out_deg, std::vector<uint64_t>* in_deg) {
  out_deg->assign(vertices, 0);
  in_deg->assign(vertices, 0);
  for (uint64_t e : edges) {
    (*out_deg)[e >> 32] += 1;
    (*in_deg)[e & 0xffffffffu] += 1;
  }
}

// Breadth-first order spelled as distances first, then vertices emitted by
// (distance, id): every vertex of one level precedes the next level, equal
// distances break by ascending id, unreachable vertices are absent.
inline std::vector<uint32_t> bfs(const std::vector<uint64_t>& edges,
                                 uint64_t vertices, uint64_t root) {
  std::vector<std::vector<uint32_t>> adj(vertices);
  for (uint64_t e : edges) adj[e >> 32].push_back(uint32_t(e & 0xffffffffu));
  const uint64_t unreached = ~uint64_t(0);
  std::vector<uint64_t> dist(vertices, unreached);
  std::deque<uint32_t> queue;
  dist[root] = 0;
  queue.push_back(uint32_t(root));
  while (!queue.empty()) {
    const uint32_t v = queue.front();
    queue.pop_front();
    for (uint32_t nb : adj[v])
      if (dist[nb] == unreached) {
        dist[nb] = dist[v] + 1;
        queue.push_back(nb);
      }
  }
  std::vector<uint32_t> order;
  for (uint64_t v = 0; v < vertices; ++v)
    if (dist[v] != unreached) order.push_back(uint32_t(v));
  std::stable_sort(order.begin(), order.end(),
                   [&](uint32_t a, uint32_t b) { return dist[a] < dist[b]; });
  return order;
}

inline std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline std::vector<double> set_union(const std::vector<double>& a,
                                     const std::vector<double>& b) {
  std::set<double> s(a.begin(), a.end());
  s.insert(b.begin(), b.end());
  return {s.begin(), s.end()};
}

inline std::vector<double> set_intersect(const std::vector<double>& a,
                                         const std::vector<double>& b) {
  const std::set<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::vector<double> out;
  for (double v : sa)
    if (sb.count(v)) out.push_back(v);
  return out;
}

inline std::vector<double> set_difference(const std::vector<double>& a,
                                          const std::vector<double>& b) {
  const std::set<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::vector<double> out;
  for (double v : sa)
    if (!sb.count(v)) out.push_back(v);
  return out;
}

inline std::vector<double> softmax_rows(const std::vector<double>& in,
                                        uint64_t rows, uint64_t cols) {
  std::vector<double> out(in.size());
  for (uint64_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * cols;
    double* y = out.data() + r * cols;
    long double mx = x[0];
    for (uint64_t c = 1; c < cols; ++c) mx = std::max<long double>(mx, x[c]);
    long double total = 0.0L;
    for (uint64_t c = 0; c < cols; ++c) total += std::exp((long double)x[c] - mx);
    for (uint64_t c = 0; c < cols; ++c)
      y[c] = double(std::exp((long double)x[c] - mx) / total);
  }
  return out;
}

inline std::vector<float> batch_norm(const std::vector<float>& in, uint64_t batch,
                                     uint64_t features, double epsilon) {
  std::vector<float> out(in.size());
  for (uint64_t f = 0; f < features; ++f) {
    long double sum = 0.0L;
    for (uint64_t b = 0; b < batch; ++b) sum += in[b * features + f];
    const long double mu = sum / (long double)batch;
    long double var = 0.0L;
    for (uint64_t b = 0; b < batch; ++b) {
      const long double d = in[b * features + f] - mu;
      var += d * d;
    }
    var /= (long double)batch;
    const long double inv = 1.0L / std::sqrt(double(var + epsilon));
    for (uint64_t b = 0; b < batch; ++b)
      out[b * features + f] = float((in[b * features + f] - mu) * inv);
  }
  return out;
}

// Chi-square statistic against a uniform expectation.
inline double chi_square_uniform(const std::vector<uint64_t>& counts,
                                 uint64_t total) {
  const double expected = double(total) / double(counts.size());
  double stat = 0.0;
  for (uint64_t c : counts) {
    const double d = double(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

}  // namespace oracle
