#include <algorithm>
#include <cmath>
#include <limits>

#include "motifbench/kernels.hpp"
#include "motifbench/rng.hpp"

namespace motifbench::kernels {

ConvGeometry conv_geometry(uint32_t in, uint32_t k, uint32_t stride, PaddingMode pad) {
  if (stride == 0) throw ParameterError("stride must be >= 1");
  if (k == 0) throw ShapeError("filter extent must be >= 1");
  ConvGeometry g;
  if (pad == PaddingMode::valid) {
    if (k > in) throw ShapeError("filter larger than input in valid mode");
    g.out = (in - k) / stride + 1;
    g.pad_before = 0;
  } else {
    // `same`: output covers ceil(in / stride); total padding is split with
    // the extra cell at the trailing edge.
    g.out = (in + stride - 1) / stride;
    const int64_t total =
        std::max<int64_t>(0, int64_t(g.out - 1) * stride + k - in);
    g.pad_before = total / 2;
  }
  return g;
}

Tensor4 conv2d(const Tensor4& input, const Tensor4& filter, uint32_t stride,
               PaddingMode padding) {
  const uint32_t kh = filter.dims.n, kw = filter.dims.h;
  const uint32_t in_c = filter.dims.w, out_c = filter.dims.c;
  if (in_c != input.dims.c)
    throw ShapeError("filter input channels do not match tensor channels");

  const ConvGeometry gh = conv_geometry(input.dims.h, kh, stride, padding);
  const ConvGeometry gw = conv_geometry(input.dims.w, kw, stride, padding);

  Tensor4 out;
  out.dims = {input.dims.n, gh.out, gw.out, out_c};
  out.layout = input.layout;
  out.v.assign(out.dims.elements(), 0.0f);

  for (uint32_t n = 0; n < input.dims.n; ++n)
    for (uint32_t oh = 0; oh < gh.out; ++oh)
      for (uint32_t ow = 0; ow < gw.out; ++ow)
        for (uint32_t oc = 0; oc < out_c; ++oc) {
          double acc = 0.0;
          for (uint32_t fh = 0; fh < kh; ++fh) {
            const int64_t ih = int64_t(oh) * stride + fh - gh.pad_before;
            if (ih < 0 || ih >= input.dims.h) continue;
            for (uint32_t fw = 0; fw < kw; ++fw) {
              const int64_t iw = int64_t(ow) * stride + fw - gw.pad_before;
              if (iw < 0 || iw >= input.dims.w) continue;
              for (uint32_t ic = 0; ic < in_c; ++ic)
                acc += double(input.at(n, uint64_t(ih), uint64_t(iw), ic)) *
                       double(filter.at(fh, fw, ic, oc));
            }
          }
          out.at(n, oh, ow, oc) = float(acc);
        }
  return out;
}

Tensor4 pool2d(const Tensor4& input, uint32_t window_h, uint32_t window_w,
               uint32_t stride, bool take_max) {
  if (window_h == 0 || window_w == 0) throw ShapeError("pool window must be >= 1");
  if (window_h > input.dims.h || window_w > input.dims.w)
    throw ShapeError("pool window exceeds input");
  const ConvGeometry gh = conv_geometry(input.dims.h, window_h, stride,
                                        PaddingMode::valid);
  const ConvGeometry gw = conv_geometry(input.dims.w, window_w, stride,
                                        PaddingMode::valid);

  Tensor4 out;
  out.dims = {input.dims.n, gh.out, gw.out, input.dims.c};
  out.layout = input.layout;
  out.v.assign(out.dims.elements(), 0.0f);

  for (uint32_t n = 0; n < input.dims.n; ++n)
    for (uint32_t oh = 0; oh < gh.out; ++oh)
      for (uint32_t ow = 0; ow < gw.out; ++ow)
        for (uint32_t c = 0; c < input.dims.c; ++c) {
          double acc = take_max ? -std::numeric_limits<double>::infinity() : 0.0;
          for (uint32_t fh = 0; fh < window_h; ++fh)
            for (uint32_t fw = 0; fw < window_w; ++fw) {
              const double x =
                  input.at(n, uint64_t(oh) * stride + fh, uint64_t(ow) * stride + fw, c);
              acc = take_max ? std::max(acc, x) : acc + x;
            }
          out.at(n, oh, ow, c) =
              float(take_max ? acc : acc / (double(window_h) * window_w));
        }
  return out;
}

void fully_connected(const float* in, uint64_t batch, uint64_t n, const float* weights,
                     const float* bias, uint64_t m, float* out) {
  for (uint64_t b = 0; b < batch; ++b) {
    const float* row = in + b * n;
    float* orow = out + b * m;
    for (uint64_t j = 0; j < m; ++j) orow[j] = bias[j];
    for (uint64_t k = 0; k < n; ++k) {
      const float x = row[k];
      const float* wrow = weights + k * m;
      for (uint64_t j = 0; j < m; ++j) orow[j] += x * wrow[j];
    }
  }
}

void column_moments(const float* in, uint64_t rows, uint64_t features, double* sum,
                    double* sum_sq) {
  for (uint64_t r = 0; r < rows; ++r) {
    const float* row = in + r * features;
    for (uint64_t f = 0; f < features; ++f) {
      const double x = row[f];
      sum[f] += x;
      sum_sq[f] += x * x;
    }
  }
}

void normalize_rows(const float* in, float* out, uint64_t rows, uint64_t features,
                    const double* mean, const double* inv_std) {
  for (uint64_t r = 0; r < rows; ++r)
    for (uint64_t f = 0; f < features; ++f)
      out[r * features + f] =
          float((double(in[r * features + f]) - mean[f]) * inv_std[f]);
}

void batch_norm(const float* in, float* out, uint64_t batch, uint64_t features,
                double epsilon) {
  if (batch < 2) throw ParameterError("batch normalization needs batch >= 2");
  std::vector<double> sum(features, 0.0), sum_sq(features, 0.0);
  column_moments(in, batch, features, sum.data(), sum_sq.data());
  std::vector<double> mean(features), inv_std(features);
  for (uint64_t f = 0; f < features; ++f) {
    mean[f] = sum[f] / double(batch);
    const double var = std::max(0.0, sum_sq[f] / double(batch) - mean[f] * mean[f]);
    inv_std[f] = 1.0 / std::sqrt(var + epsilon);
  }
  normalize_rows(in, out, batch, features, mean.data(), inv_std.data());
}

void softmax_rows(const double* in, double* out, uint64_t rows, uint64_t cols) {
  if (cols == 0) throw ShapeError("softmax rows need at least one column");
  for (uint64_t r = 0; r < rows; ++r) {
    const double* row = in + r * cols;
    double* orow = out + r * cols;
    double mx = row[0];
    for (uint64_t c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (uint64_t c = 0; c < cols; ++c) {
      orow[c] = std::exp(row[c] - mx);
      sum += orow[c];
    }
    for (uint64_t c = 0; c < cols; ++c) orow[c] /= sum;
  }
}

template <typename T>
void dropout_count(const T* in, T* out, uint64_t n, uint64_t drops, double scale,
                   uint64_t seed) {
  if (drops > n) throw ParameterError("dropout count exceeds element count");
  for (uint64_t i = 0; i < n; ++i) out[i] = T(double(in[i]) * scale);
  for (uint64_t idx : choose_indices(n, drops, seed)) out[idx] = T(0);
}

template <typename T>
void dropout(const T* in, T* out, uint64_t n, double rate, uint64_t seed) {
  if (rate < 0.0 || rate >= 1.0 || !std::isfinite(rate))
    throw ParameterError("dropout rate must be in [0, 1)");
  dropout_count(in, out, n, sample_count(rate, n), 1.0 / (1.0 - rate), seed);
}

template void dropout<float>(const float*, float*, uint64_t, double, uint64_t);
template void dropout<double>(const double*, double*, uint64_t, double, uint64_t);
template void dropout_count<float>(const float*, float*, uint64_t, uint64_t, double,
                                   uint64_t);
template void dropout_count<double>(const double*, double*, uint64_t, uint64_t,
                                    double, uint64_t);

}  // namespace motifbench::kernels
