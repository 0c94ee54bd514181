#include "negev/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace negev {
namespace {

using detail::attach_backward;
using detail::TensorNode;

void require(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

// Stride-1 correlation with zero padding, output-row-stationary so that the
// per-output accumulation order is exactly (ci, kh, kw) starting from the
// bias — the same order as a nested-loop reference, so results match it
// bit for bit. `bias` may be null (treated as zero).
void correlate_s1(const double* in, int ci_n, int ih, int iw, const double* ker,
                  int co_n, int kh_n, int kw_n, const double* bias, int pad,
                  double* out, int oh, int ow) {
  const int ph = ih + 2 * pad;
  const int pw = iw + 2 * pad;
  std::vector<double> padded;
  const double* src = in;
  int sh = ih, sw = iw;
  if (pad > 0) {
    padded.assign(static_cast<std::size_t>(ci_n) * ph * pw, 0.0);
    for (int ci = 0; ci < ci_n; ++ci)
      for (int y = 0; y < ih; ++y)
        std::copy_n(in + (static_cast<std::size_t>(ci) * ih + y) * iw, iw,
                    padded.data() + (static_cast<std::size_t>(ci) * ph + y + pad) * pw + pad);
    src = padded.data();
    sh = ph;
    sw = pw;
  }
  for (int co = 0; co < co_n; ++co) {
    double* oplane = out + static_cast<std::size_t>(co) * oh * ow;
    const double b = bias ? bias[co] : 0.0;
    std::fill_n(oplane, static_cast<std::size_t>(oh) * ow, b);
    for (int ci = 0; ci < ci_n; ++ci) {
      const double* splane = src + static_cast<std::size_t>(ci) * sh * sw;
      const double* kbase =
          ker + ((static_cast<std::size_t>(co) * ci_n + ci) * kh_n) * kw_n;
      for (int kh = 0; kh < kh_n; ++kh) {
        for (int kw = 0; kw < kw_n; ++kw) {
          const double w = kbase[kh * kw_n + kw];
          for (int oy = 0; oy < oh; ++oy) {
            const double* srow = splane + static_cast<std::size_t>(oy + kh) * sw + kw;
            double* orow = oplane + static_cast<std::size_t>(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) orow[ox] += w * srow[ox];
          }
        }
      }
    }
  }
}

// Arbitrary-stride reference path; same per-output accumulation order.
void correlate_generic(const double* in, int ci_n, int ih, int iw,
                       const double* ker, int co_n, int kh_n, int kw_n,
                       const double* bias, int stride, int pad, double* out,
                       int oh, int ow) {
  for (int co = 0; co < co_n; ++co) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = bias ? bias[co] : 0.0;
        for (int ci = 0; ci < ci_n; ++ci) {
          for (int kh = 0; kh < kh_n; ++kh) {
            const int iy = oy * stride - pad + kh;
            if (iy < 0 || iy >= ih) continue;
            for (int kw = 0; kw < kw_n; ++kw) {
              const int ix = ox * stride - pad + kw;
              if (ix < 0 || ix >= iw) continue;
              acc += in[(static_cast<std::size_t>(ci) * ih + iy) * iw + ix] *
                     ker[((static_cast<std::size_t>(co) * ci_n + ci) * kh_n + kh) * kw_n + kw];
            }
          }
        }
        out[(static_cast<std::size_t>(co) * oh + oy) * ow + ox] = acc;
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride, int pad) {
  require(input.rank() == 3, "conv2d: input must be [C_in,H,W]");
  require(kernel.rank() == 4, "conv2d: kernel must be [C_out,C_in,kH,kW]");
  require(bias.rank() == 1, "conv2d: bias must be [C_out]");
  if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
  if (pad < 0) throw ConfigError("conv2d: pad must be >= 0");
  const int ci_n = input.dim(0), ih = input.dim(1), iw = input.dim(2);
  const int co_n = kernel.dim(0), kh_n = kernel.dim(2), kw_n = kernel.dim(3);
  require(kernel.dim(1) == ci_n,
          "conv2d: kernel axis 1 (" + std::to_string(kernel.dim(1)) +
              ") does not match input channels (" + std::to_string(ci_n) + ")");
  require(bias.dim(0) == co_n,
          "conv2d: bias axis 0 (" + std::to_string(bias.dim(0)) +
              ") does not match kernel output channels (" + std::to_string(co_n) + ")");
  require(kh_n <= ih + 2 * pad, "conv2d: kernel height exceeds padded input height");
  require(kw_n <= iw + 2 * pad, "conv2d: kernel width exceeds padded input width");
  const int oh = (ih + 2 * pad - kh_n) / stride + 1;
  const int ow = (iw + 2 * pad - kw_n) / stride + 1;

  Tensor out = Tensor::zeros({co_n, oh, ow});
  if (stride == 1)
    correlate_s1(input.values().data(), ci_n, ih, iw, kernel.values().data(),
                 co_n, kh_n, kw_n, bias.values().data(), pad,
                 out.values_mut().data(), oh, ow);
  else
    correlate_generic(input.values().data(), ci_n, ih, iw, kernel.values().data(),
                      co_n, kh_n, kw_n, bias.values().data(), stride, pad,
                      out.values_mut().data(), oh, ow);

  auto in_n = input.shared_node();
  auto k_n = kernel.shared_node();
  auto b_n = bias.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {input, kernel, bias}, [=]() {
    const double* gout = out_n->grad.data();
    if (b_n->needs_grad) {
      b_n->ensure_grad();
      for (int co = 0; co < co_n; ++co) {
        double s = 0.0;
        const double* g = gout + static_cast<std::size_t>(co) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) s += g[i];
        b_n->grad[static_cast<std::size_t>(co)] += s;
      }
    }
    if (k_n->needs_grad) {
      k_n->ensure_grad();
      const double* in = in_n->values.data();
      for (int co = 0; co < co_n; ++co) {
        const double* g = gout + static_cast<std::size_t>(co) * oh * ow;
        for (int ci = 0; ci < ci_n; ++ci) {
          const double* iplane = in + static_cast<std::size_t>(ci) * ih * iw;
          for (int kh = 0; kh < kh_n; ++kh) {
            for (int kw = 0; kw < kw_n; ++kw) {
              double s0 = 0.0, s1 = 0.0;
              for (int oy = 0; oy < oh; ++oy) {
                const int iy = oy * stride - pad + kh;
                if (iy < 0 || iy >= ih) continue;
                const double* grow = g + static_cast<std::size_t>(oy) * ow;
                const double* irow = iplane + static_cast<std::size_t>(iy) * iw;
                int ox = 0;
                for (; ox + 1 < ow; ox += 2) {
                  const int ix0 = ox * stride - pad + kw;
                  const int ix1 = ix0 + stride;
                  if (ix0 >= 0 && ix1 < iw) {
                    s0 += grow[ox] * irow[ix0];
                    s1 += grow[ox + 1] * irow[ix1];
                  } else {
                    if (ix0 >= 0 && ix0 < iw) s0 += grow[ox] * irow[ix0];
                    if (ix1 >= 0 && ix1 < iw) s1 += grow[ox + 1] * irow[ix1];
                  }
                }
                for (; ox < ow; ++ox) {
                  const int ix = ox * stride - pad + kw;
                  if (ix >= 0 && ix < iw) s0 += grow[ox] * irow[ix];
                }
              }
              k_n->grad[((static_cast<std::size_t>(co) * ci_n + ci) * kh_n + kh) * kw_n + kw] += s0 + s1;
            }
          }
        }
      }
    }
    if (in_n->needs_grad) {
      in_n->ensure_grad();
      const double* ker = k_n->values.data();
      if (stride == 1 && kh_n == kw_n && kh_n - 1 - pad >= 0) {
        // Gradient w.r.t. input is a stride-1 correlation of the output
        // gradient with the channel-transposed, spatially flipped kernel.
        std::vector<double> kt(static_cast<std::size_t>(ci_n) * co_n * kh_n * kw_n);
        for (int co = 0; co < co_n; ++co)
          for (int ci = 0; ci < ci_n; ++ci)
            for (int kh = 0; kh < kh_n; ++kh)
              for (int kw = 0; kw < kw_n; ++kw)
                kt[((static_cast<std::size_t>(ci) * co_n + co) * kh_n + kh) * kw_n + kw] =
                    ker[((static_cast<std::size_t>(co) * ci_n + ci) * kh_n + (kh_n - 1 - kh)) * kw_n +
                        (kw_n - 1 - kw)];
        std::vector<double> gin(static_cast<std::size_t>(ci_n) * ih * iw);
        correlate_s1(gout, co_n, oh, ow, kt.data(), ci_n, kh_n, kw_n, nullptr,
                     kh_n - 1 - pad, gin.data(), ih, iw);
        for (std::size_t i = 0; i < gin.size(); ++i) in_n->grad[i] += gin[i];
      } else {
        for (int co = 0; co < co_n; ++co) {
          const double* g = gout + static_cast<std::size_t>(co) * oh * ow;
          for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
              const double gv = g[static_cast<std::size_t>(oy) * ow + ox];
              if (gv == 0.0) continue;
              for (int ci = 0; ci < ci_n; ++ci) {
                for (int kh = 0; kh < kh_n; ++kh) {
                  const int iy = oy * stride - pad + kh;
                  if (iy < 0 || iy >= ih) continue;
                  for (int kw = 0; kw < kw_n; ++kw) {
                    const int ix = ox * stride - pad + kw;
                    if (ix < 0 || ix >= iw) continue;
                    in_n->grad[(static_cast<std::size_t>(ci) * ih + iy) * iw + ix] +=
                        gv * ker[((static_cast<std::size_t>(co) * ci_n + ci) * kh_n + kh) * kw_n + kw];
                  }
                }
              }
            }
          }
        }
      }
    }
  });
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = Tensor::zeros(input.shape());
  auto x = input.values();
  auto y = out.values_mut();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;

  auto in_n = input.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {input}, [=]() {
    if (!in_n->needs_grad) return;
    in_n->ensure_grad();
    for (std::size_t i = 0; i < in_n->values.size(); ++i)
      if (in_n->values[i] > 0.0) in_n->grad[i] += out_n->grad[i];
  });
  return out;
}

Tensor maxpool2(const Tensor& input) {
  require(input.rank() == 3, "maxpool2: input must be [C,H,W]");
  const int c_n = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (h % 2 != 0) throw DimensionError("maxpool2: height " + std::to_string(h) + " is odd");
  if (w % 2 != 0) throw DimensionError("maxpool2: width " + std::to_string(w) + " is odd");
  const int oh = h / 2, ow = w / 2;
  Tensor out = Tensor::zeros({c_n, oh, ow});
  auto argmax = std::make_shared<std::vector<std::int32_t>>(out.size());
  auto x = input.values();
  auto y = out.values_mut();
  for (int c = 0; c < c_n; ++c) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const std::size_t base = (static_cast<std::size_t>(c) * h + 2 * oy) * w + 2 * ox;
        const std::size_t win[4] = {base, base + 1, base + w, base + w + 1};
        std::size_t best = win[0];
        for (int k = 1; k < 4; ++k)
          if (x[win[k]] > x[best]) best = win[k];
        const std::size_t o = (static_cast<std::size_t>(c) * oh + oy) * ow + ox;
        y[o] = x[best];
        (*argmax)[o] = static_cast<std::int32_t>(best);
      }
    }
  }

  auto in_n = input.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {input}, [=]() {
    if (!in_n->needs_grad) return;
    in_n->ensure_grad();
    for (std::size_t o = 0; o < argmax->size(); ++o)
      in_n->grad[static_cast<std::size_t>((*argmax)[o])] += out_n->grad[o];
  });
  return out;
}

Tensor upsample_nearest2(const Tensor& input) {
  require(input.rank() == 3, "upsample_nearest2: input must be [C,H,W]");
  const int c_n = input.dim(0), h = input.dim(1), w = input.dim(2);
  Tensor out = Tensor::zeros({c_n, 2 * h, 2 * w});
  auto x = input.values();
  auto y = out.values_mut();
  for (int c = 0; c < c_n; ++c)
    for (int iy = 0; iy < h; ++iy)
      for (int ix = 0; ix < w; ++ix) {
        const double v = x[(static_cast<std::size_t>(c) * h + iy) * w + ix];
        const std::size_t base = (static_cast<std::size_t>(c) * 2 * h + 2 * iy) * 2 * w + 2 * ix;
        y[base] = v;
        y[base + 1] = v;
        y[base + 2 * w] = v;
        y[base + 2 * w + 1] = v;
      }

  auto in_n = input.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {input}, [=]() {
    if (!in_n->needs_grad) return;
    in_n->ensure_grad();
    for (int c = 0; c < c_n; ++c)
      for (int iy = 0; iy < h; ++iy)
        for (int ix = 0; ix < w; ++ix) {
          const std::size_t base =
              (static_cast<std::size_t>(c) * 2 * h + 2 * iy) * 2 * w + 2 * ix;
          in_n->grad[(static_cast<std::size_t>(c) * h + iy) * w + ix] +=
              out_n->grad[base] + out_n->grad[base + 1] +
              out_n->grad[base + 2 * w] + out_n->grad[base + 2 * w + 1];
        }
  });
  return out;
}

Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require(input.rank() == 1, "dense: input must be [D]");
  require(weight.rank() == 2, "dense: weight must be [K,D]");
  require(bias.rank() == 1, "dense: bias must be [K]");
  const int d = input.dim(0), k_n = weight.dim(0);
  require(weight.dim(1) == d,
          "dense: weight axis 1 (" + std::to_string(weight.dim(1)) +
              ") does not match input length (" + std::to_string(d) + ")");
  require(bias.dim(0) == k_n, "dense: bias axis 0 does not match weight axis 0");

  Tensor out = Tensor::zeros({k_n});
  auto x = input.values();
  auto wv = weight.values();
  auto bv = bias.values();
  auto y = out.values_mut();
  for (int k = 0; k < k_n; ++k) {
    double acc = bv[static_cast<std::size_t>(k)];
    const double* wr = wv.data() + static_cast<std::size_t>(k) * d;
    for (int i = 0; i < d; ++i) acc += wr[i] * x[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(k)] = acc;
  }

  auto in_n = input.shared_node();
  auto w_n = weight.shared_node();
  auto b_n = bias.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {input, weight, bias}, [=]() {
    const double* g = out_n->grad.data();
    if (b_n->needs_grad) {
      b_n->ensure_grad();
      for (int k = 0; k < k_n; ++k) b_n->grad[static_cast<std::size_t>(k)] += g[k];
    }
    if (w_n->needs_grad) {
      w_n->ensure_grad();
      for (int k = 0; k < k_n; ++k)
        for (int i = 0; i < d; ++i)
          w_n->grad[static_cast<std::size_t>(k) * d + i] += g[k] * in_n->values[static_cast<std::size_t>(i)];
    }
    if (in_n->needs_grad) {
      in_n->ensure_grad();
      for (int k = 0; k < k_n; ++k)
        for (int i = 0; i < d; ++i)
          in_n->grad[static_cast<std::size_t>(i)] += g[k] * w_n->values[static_cast<std::size_t>(k) * d + i];
    }
  });
  return out;
}

Tensor global_avg_pool(const Tensor& input) {
  require(input.rank() == 3, "global_avg_pool: input must be [C,H,W]");
  const int c_n = input.dim(0), h = input.dim(1), w = input.dim(2);
  const double inv = 1.0 / (static_cast<double>(h) * w);
  Tensor out = Tensor::zeros({c_n});
  auto x = input.values();
  auto y = out.values_mut();
  for (int c = 0; c < c_n; ++c) {
    double s = 0.0;
    const double* p = x.data() + static_cast<std::size_t>(c) * h * w;
    for (int i = 0; i < h * w; ++i) s += p[i];
    y[static_cast<std::size_t>(c)] = s * inv;
  }

  auto in_n = input.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {input}, [=]() {
    if (!in_n->needs_grad) return;
    in_n->ensure_grad();
    for (int c = 0; c < c_n; ++c) {
      const double g = out_n->grad[static_cast<std::size_t>(c)] * inv;
      double* p = in_n->grad.data() + static_cast<std::size_t>(c) * h * w;
      for (int i = 0; i < h * w; ++i) p[i] += g;
    }
  });
  return out;
}

Tensor pixel_softmax(const Tensor& input) {
  require(input.rank() == 3, "pixel_softmax: input must be [2,H,W]");
  if (input.dim(0) != 2)
    throw DimensionError("pixel_softmax: channel axis must have extent 2, got " +
                         std::to_string(input.dim(0)));
  const int h = input.dim(1), w = input.dim(2);
  const std::size_t n = static_cast<std::size_t>(h) * w;
  Tensor out = Tensor::zeros(input.shape());
  auto x = input.values();
  auto y = out.values_mut();
  for (std::size_t p = 0; p < n; ++p) {
    const double l0 = x[p], l1 = x[n + p];
    const double m = l0 > l1 ? l0 : l1;
    const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
    const double inv = 1.0 / (e0 + e1);
    y[p] = e0 * inv;
    y[n + p] = e1 * inv;
  }

  auto in_n = input.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {input}, [=]() {
    if (!in_n->needs_grad) return;
    in_n->ensure_grad();
    for (std::size_t p = 0; p < n; ++p) {
      const double s0 = out_n->values[p], s1 = out_n->values[n + p];
      const double g0 = out_n->grad[p], g1 = out_n->grad[n + p];
      const double dot = g0 * s0 + g1 * s1;
      in_n->grad[p] += s0 * (g0 - dot);
      in_n->grad[n + p] += s1 * (g1 - dot);
    }
  });
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require(a.rank() == 3 && b.rank() == 3, "concat_channels: inputs must be [C,H,W]");
  require(a.dim(1) == b.dim(1) && a.dim(2) == b.dim(2),
          "concat_channels: spatial extents disagree");
  const int ca = a.dim(0), cb = b.dim(0), h = a.dim(1), w = a.dim(2);
  Tensor out = Tensor::zeros({ca + cb, h, w});
  auto y = out.values_mut();
  std::copy_n(a.values().data(), a.size(), y.data());
  std::copy_n(b.values().data(), b.size(), y.data() + a.size());

  auto a_n = a.shared_node();
  auto b_n = b.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {a, b}, [=]() {
    const std::size_t na = a_n->values.size();
    if (a_n->needs_grad) {
      a_n->ensure_grad();
      for (std::size_t i = 0; i < na; ++i) a_n->grad[i] += out_n->grad[i];
    }
    if (b_n->needs_grad) {
      b_n->ensure_grad();
      for (std::size_t i = 0; i < b_n->values.size(); ++i)
        b_n->grad[i] += out_n->grad[na + i];
    }
  });
  return out;
}

Tensor scale(const Tensor& input, double factor) {
  Tensor out = Tensor::zeros(input.shape());
  auto x = input.values();
  auto y = out.values_mut();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = factor * x[i];

  auto in_n = input.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {input}, [=]() {
    if (!in_n->needs_grad) return;
    in_n->ensure_grad();
    for (std::size_t i = 0; i < in_n->values.size(); ++i)
      in_n->grad[i] += factor * out_n->grad[i];
  });
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "add: shapes disagree");
  Tensor out = Tensor::zeros(a.shape());
  auto xa = a.values();
  auto xb = b.values();
  auto y = out.values_mut();
  for (std::size_t i = 0; i < xa.size(); ++i) y[i] = xa[i] + xb[i];

  auto a_n = a.shared_node();
  auto b_n = b.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {a, b}, [=]() {
    if (a_n->needs_grad) {
      a_n->ensure_grad();
      for (std::size_t i = 0; i < a_n->values.size(); ++i) a_n->grad[i] += out_n->grad[i];
    }
    if (b_n->needs_grad) {
      b_n->ensure_grad();
      for (std::size_t i = 0; i < b_n->values.size(); ++i) b_n->grad[i] += out_n->grad[i];
    }
  });
  return out;
}

Tensor softmax_cross_entropy(const Tensor& scores, int label) {
  require(scores.rank() == 1, "softmax_cross_entropy: scores must be [K]");
  const int k_n = scores.dim(0);
  if (label < 0 || label >= k_n)
    throw DimensionError("softmax_cross_entropy: label " + std::to_string(label) +
                         " outside [0," + std::to_string(k_n) + ")");
  auto x = scores.values();
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - m);
  const double lse = m + std::log(sum);
  Tensor out = Tensor::scalar(lse - x[static_cast<std::size_t>(label)]);

  auto s_n = scores.shared_node();
  TensorNode* out_n = out.node();
  attach_backward(out, {scores}, [=]() {
    if (!s_n->needs_grad) return;
    s_n->ensure_grad();
    const double g = out_n->grad[0];
    double mm = s_n->values[0];
    for (double v : s_n->values) mm = std::max(mm, v);
    double z = 0.0;
    for (double v : s_n->values) z += std::exp(v - mm);
    for (int i = 0; i < k_n; ++i) {
      const double soft = std::exp(s_n->values[static_cast<std::size_t>(i)] - mm) / z;
      s_n->grad[static_cast<std::size_t>(i)] += g * (soft - (i == label ? 1.0 : 0.0));
    }
  });
  return out;
}

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& loss_fn,
                        const Tensor& point, double eps) {
  if (!(eps > 0.0)) throw ConfigError("finite_diff_grad: eps must be positive");
  Tensor probe = point.clone_values();
  Tensor grad = Tensor::zeros(point.shape());
  auto p = probe.values_mut();
  auto g = grad.values_mut();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x0 = p[i];
    p[i] = x0 + eps;
    const double up = loss_fn(probe);
    p[i] = x0 - eps;
    const double down = loss_fn(probe);
    p[i] = x0;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("finite_diff_grad: non-finite loss at coordinate " +
                         std::to_string(i));
    g[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

}  // namespace negev
