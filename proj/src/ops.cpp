#include "uncseg/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace uncseg {

namespace {

void check_4d(const Tensor& t, const char* what) {
  if (!t.defined() || t.ndim() != 4)
    throw DimensionError(std::string(what) + ": expected 4-D tensor, got " +
                         (t.defined() ? shape_str(t.shape()) : "undefined"));
}

// C += A(MxK) * B(KxN), row major.
void gemm_acc(int M, int K, int N, const float* A, const float* B, float* C) {
  for (int m = 0; m < M; ++m) {
    float* c = C + size_t(m) * N;
    const float* a = A + size_t(m) * K;
    for (int k = 0; k < K; ++k) {
      const float av = a[k];
      if (av == 0.f) continue;
      const float* b = B + size_t(k) * N;
      for (int n = 0; n < N; ++n) c[n] += av * b[n];
    }
  }
}

// col(K x P) from one input image (Cin x H x W), zero padded.
void im2col(const float* img, int cin, int h, int w, int kh, int kw,
            int stride, int pad, int oh, int ow, float* col) {
  const int P = oh * ow;
  for (int ci = 0; ci < cin; ++ci) {
    const float* plane = img + size_t(ci) * h * w;
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        float* row = col + (size_t(ci) * kh * kw + size_t(ki) * kw + kj) * P;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ki;
          float* dst = row + size_t(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::memset(dst, 0, sizeof(float) * size_t(ow));
            continue;
          }
          const float* src = plane + size_t(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kj;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.f;
          }
        }
      }
    }
  }
}

// Scatter-add of dCol(K x P) back into dImg(Cin x H x W).
void col2im_acc(const float* col, int cin, int h, int w, int kh, int kw,
                int stride, int pad, int oh, int ow, float* dimg) {
  const int P = oh * ow;
  for (int ci = 0; ci < cin; ++ci) {
    float* plane = dimg + size_t(ci) * h * w;
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const float* row =
            col + (size_t(ci) * kh * kw + size_t(ki) * kw + kj) * P;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= h) continue;
          float* dst = plane + size_t(iy) * w;
          const float* src = row + size_t(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kj;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride, int pad) {
  check_4d(input, "conv2d input");
  check_4d(kernel, "conv2d kernel");
  const int N = input.dim(0), cin = input.dim(1), H = input.dim(2),
            W = input.dim(3);
  const int cout = kernel.dim(0), kcin = kernel.dim(1), kh = kernel.dim(2),
            kw = kernel.dim(3);
  if (kcin != cin)
    throw DimensionError("conv2d: input channels " + std::to_string(cin) +
                         " vs kernel channels " + std::to_string(kcin));
  if (kh % 2 == 0 || kw % 2 == 0)
    throw DimensionError("conv2d: kernel dims must be odd, got " +
                         std::to_string(kh) + "x" + std::to_string(kw));
  if (stride < 1 || pad < 0)
    throw DomainError("conv2d: stride must be >= 1 and pad >= 0");
  if (bias.defined() &&
      (bias.ndim() != 1 || bias.dim(0) != cout))
    throw DimensionError("conv2d: bias shape " + shape_str(bias.shape()) +
                         " vs Cout " + std::to_string(cout));
  const int OH = (H + 2 * pad - kh) / stride + 1;
  const int OW = (W + 2 * pad - kw) / stride + 1;
  if (OH <= 0 || OW <= 0)
    throw DimensionError("conv2d: output would be empty for input " +
                         shape_str(input.shape()));

  const int K = cin * kh * kw;
  const int P = OH * OW;
  std::vector<float> out(size_t(N) * cout * P, 0.f);
  std::vector<float> col(size_t(K) * P);
  for (int n = 0; n < N; ++n) {
    im2col(input.data().data() + size_t(n) * cin * H * W, cin, H, W, kh, kw,
           stride, pad, OH, OW, col.data());
    float* o = out.data() + size_t(n) * cout * P;
    if (bias.defined()) {
      for (int co = 0; co < cout; ++co)
        std::fill(o + size_t(co) * P, o + size_t(co + 1) * P,
                  bias.data()[co]);
    }
    gemm_acc(cout, K, P, kernel.data().data(), col.data(), o);
  }

  auto in_node = input.node();
  auto k_node = kernel.node();
  std::vector<std::shared_ptr<TensorNode>> parents{in_node, k_node};
  if (bias.defined()) parents.push_back(bias.node());
  auto b_node = bias.defined() ? bias.node() : nullptr;
  return make_result(
      {N, cout, OH, OW}, std::move(out), std::move(parents),
      [=](TensorNode& self) {
        const float* dy = self.grad.data();
        std::vector<float> col(size_t(K) * P);
        std::vector<float> dcol(size_t(K) * P);
        for (int n = 0; n < N; ++n) {
          const float* dyn = dy + size_t(n) * cout * P;
          if (b_node && b_node->requires_grad) {
            for (int co = 0; co < cout; ++co) {
              double s = 0;
              const float* g = dyn + size_t(co) * P;
              for (int p = 0; p < P; ++p) s += g[p];
              b_node->grad[co] += float(s);
            }
          }
          const bool need_k = k_node->requires_grad;
          const bool need_x = in_node->requires_grad;
          if (need_k || need_x)
            im2col(in_node->value.data() + size_t(n) * cin * H * W, cin, H, W,
                   kh, kw, stride, pad, OH, OW, col.data());
          if (need_k) {
            // dK[co][k] += sum_p dY[co][p] * col[k][p]
            for (int co = 0; co < cout; ++co) {
              const float* g = dyn + size_t(co) * P;
              float* dk = k_node->grad.data() + size_t(co) * K;
              for (int k = 0; k < K; ++k) {
                const float* c = col.data() + size_t(k) * P;
                double s = 0;
                for (int p = 0; p < P; ++p) s += double(g[p]) * c[p];
                dk[k] += float(s);
              }
            }
          }
          if (need_x) {
            std::fill(dcol.begin(), dcol.end(), 0.f);
            // dCol[k][p] = sum_co K[co][k] * dY[co][p]
            for (int co = 0; co < cout; ++co) {
              const float* g = dyn + size_t(co) * P;
              const float* kr = k_node->value.data() + size_t(co) * K;
              for (int k = 0; k < K; ++k) {
                const float kv = kr[k];
                if (kv == 0.f) continue;
                float* dc = dcol.data() + size_t(k) * P;
                for (int p = 0; p < P; ++p) dc[p] += kv * g[p];
              }
            }
            col2im_acc(dcol.data(), cin, H, W, kh, kw, stride, pad, OH, OW,
                       in_node->grad.data() + size_t(n) * cin * H * W);
          }
        }
      });
}

Tensor maxpool2(const Tensor& input) {
  check_4d(input, "maxpool2");
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2),
            W = input.dim(3);
  if (H % 2 != 0 || W % 2 != 0)
    throw DimensionError("maxpool2: spatial dims must be even, got " +
                         std::to_string(H) + "x" + std::to_string(W));
  const int OH = H / 2, OW = W / 2;
  std::vector<float> out(size_t(N) * C * OH * OW);
  auto argmax = std::make_shared<std::vector<int32_t>>(out.size());
  const float* x = input.data().data();
  for (int nc = 0; nc < N * C; ++nc) {
    const float* plane = x + size_t(nc) * H * W;
    float* o = out.data() + size_t(nc) * OH * OW;
    int32_t* am = argmax->data() + size_t(nc) * OH * OW;
    for (int oy = 0; oy < OH; ++oy) {
      for (int ox = 0; ox < OW; ++ox) {
        int best = (2 * oy) * W + 2 * ox;
        float bv = plane[best];
        const int cand[3] = {best + 1, best + W, best + W + 1};
        for (int idx : cand) {
          if (plane[idx] > bv) {
            bv = plane[idx];
            best = idx;
          }
        }
        o[size_t(oy) * OW + ox] = bv;
        am[size_t(oy) * OW + ox] = best;
      }
    }
  }
  auto in_node = input.node();
  return make_result(
      {N, C, OH, OW}, std::move(out), {in_node}, [=](TensorNode& self) {
        for (int nc = 0; nc < N * C; ++nc) {
          float* dx = in_node->grad.data() + size_t(nc) * H * W;
          const float* dy = self.grad.data() + size_t(nc) * OH * OW;
          const int32_t* am = argmax->data() + size_t(nc) * OH * OW;
          for (int p = 0; p < OH * OW; ++p) dx[am[p]] += dy[p];
        }
      });
}

Tensor nearest_upsample2(const Tensor& input) {
  check_4d(input, "nearest_upsample2");
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2),
            W = input.dim(3);
  const int OH = 2 * H, OW = 2 * W;
  std::vector<float> out(size_t(N) * C * OH * OW);
  const float* x = input.data().data();
  for (int nc = 0; nc < N * C; ++nc) {
    const float* plane = x + size_t(nc) * H * W;
    float* o = out.data() + size_t(nc) * OH * OW;
    for (int y = 0; y < H; ++y) {
      for (int xcol = 0; xcol < W; ++xcol) {
        const float v = plane[size_t(y) * W + xcol];
        float* d = o + size_t(2 * y) * OW + 2 * xcol;
        d[0] = v;
        d[1] = v;
        d[OW] = v;
        d[OW + 1] = v;
      }
    }
  }
  auto in_node = input.node();
  return make_result(
      {N, C, OH, OW}, std::move(out), {in_node}, [=](TensorNode& self) {
        for (int nc = 0; nc < N * C; ++nc) {
          float* dx = in_node->grad.data() + size_t(nc) * H * W;
          const float* dy = self.grad.data() + size_t(nc) * OH * OW;
          for (int y = 0; y < H; ++y)
            for (int xcol = 0; xcol < W; ++xcol) {
              const float* d = dy + size_t(2 * y) * OW + 2 * xcol;
              dx[size_t(y) * W + xcol] += d[0] + d[1] + d[OW] + d[OW + 1];
            }
        }
      });
}

Tensor relu(const Tensor& input) {
  std::vector<float> out(input.data());
  for (float& v : out) v = v > 0.f ? v : 0.f;
  auto in_node = input.node();
  return make_result(input.shape(), std::move(out), {in_node},
                     [=](TensorNode& self) {
                       const float* x = in_node->value.data();
                       const float* dy = self.grad.data();
                       float* dx = in_node->grad.data();
                       const size_t n = self.value.size();
                       for (size_t i = 0; i < n; ++i)
                         if (x[i] > 0.f) dx[i] += dy[i];
                     });
}

Tensor softmax_channels(const Tensor& logits) {
  check_4d(logits, "softmax_channels");
  const int N = logits.dim(0), C = logits.dim(1), H = logits.dim(2),
            W = logits.dim(3);
  const int HW = H * W;
  std::vector<float> out(logits.data().size());
  const float* x = logits.data().data();
  for (int n = 0; n < N; ++n) {
    const float* xb = x + size_t(n) * C * HW;
    float* ob = out.data() + size_t(n) * C * HW;
    for (int p = 0; p < HW; ++p) {
      float mx = xb[p];
      for (int c = 1; c < C; ++c) mx = std::max(mx, xb[size_t(c) * HW + p]);
      if (std::isnan(mx))
        throw NumericError("softmax_channels: NaN logit");
      double z = 0;
      for (int c = 0; c < C; ++c) {
        const float e = std::exp(xb[size_t(c) * HW + p] - mx);
        ob[size_t(c) * HW + p] = e;
        z += e;
      }
      const float inv = float(1.0 / z);
      for (int c = 0; c < C; ++c) ob[size_t(c) * HW + p] *= inv;
    }
  }
  auto in_node = logits.node();
  return make_result(
      logits.shape(), std::move(out), {in_node}, [=](TensorNode& self) {
        const float* p = self.value.data();
        const float* dy = self.grad.data();
        float* dx = in_node->grad.data();
        for (int n = 0; n < N; ++n) {
          const size_t base = size_t(n) * C * HW;
          for (int pix = 0; pix < HW; ++pix) {
            double dot = 0;
            for (int c = 0; c < C; ++c) {
              const size_t i = base + size_t(c) * HW + pix;
              dot += double(dy[i]) * p[i];
            }
            for (int c = 0; c < C; ++c) {
              const size_t i = base + size_t(c) * HW + pix;
              dx[i] += float(p[i] * (double(dy[i]) - dot));
            }
          }
        }
      });
}

Tensor cross_entropy(const Tensor& probs,
                     const std::vector<LabelMask>& labels) {
  check_4d(probs, "cross_entropy");
  const int N = probs.dim(0), C = probs.dim(1), H = probs.dim(2),
            W = probs.dim(3);
  if (int(labels.size()) != N)
    throw DimensionError("cross_entropy: batch " + std::to_string(N) +
                         " vs " + std::to_string(labels.size()) + " masks");
  const int HW = H * W;
  double acc = 0;
  const float* p = probs.data().data();
  for (int n = 0; n < N; ++n) {
    const LabelMask& m = labels[size_t(n)];
    if (m.h != H || m.w != W)
      throw DimensionError("cross_entropy: mask " + std::to_string(m.h) + "x" +
                           std::to_string(m.w) + " vs probs " +
                           std::to_string(H) + "x" + std::to_string(W));
    for (int pix = 0; pix < HW; ++pix) {
      const int y = m.labels[size_t(pix)];
      if (y >= C)
        throw DomainError("cross_entropy: label " + std::to_string(y) +
                          " >= num classes " + std::to_string(C));
      const double pv =
          std::max(double(p[size_t(n) * C * HW + size_t(y) * HW + pix]),
                   kLogProbFloor);
      acc -= std::log(pv);
    }
  }
  const double count = double(N) * HW;
  auto in_node = probs.node();
  auto masks = std::make_shared<std::vector<LabelMask>>(labels);
  return make_result(
      {1}, {float(acc / count)}, {in_node}, [=](TensorNode& self) {
        const float g = self.grad[0];
        const float* pv = in_node->value.data();
        float* dp = in_node->grad.data();
        for (int n = 0; n < N; ++n) {
          const LabelMask& m = (*masks)[size_t(n)];
          for (int pix = 0; pix < HW; ++pix) {
            const size_t i =
                size_t(n) * C * HW + size_t(m.labels[size_t(pix)]) * HW + pix;
            const double pc = std::max(double(pv[i]), kLogProbFloor);
            dp[i] += float(-double(g) / (pc * count));
          }
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError("add: shapes " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  std::vector<float> out(a.data());
  const float* bd = b.data().data();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  auto an = a.node();
  auto bn = b.node();
  return make_result(a.shape(), std::move(out), {an, bn},
                     [=](TensorNode& self) {
                       const float* dy = self.grad.data();
                       const size_t n = self.value.size();
                       if (an->requires_grad) {
                         float* da = an->grad.data();
                         for (size_t i = 0; i < n; ++i) da[i] += dy[i];
                       }
                       if (bn->requires_grad) {
                         float* db = bn->grad.data();
                         for (size_t i = 0; i < n; ++i) db[i] += dy[i];
                       }
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError("mul: shapes " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  std::vector<float> out(a.data());
  const float* bd = b.data().data();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bd[i];
  auto an = a.node();
  auto bn = b.node();
  return make_result(a.shape(), std::move(out), {an, bn},
                     [=](TensorNode& self) {
                       const float* dy = self.grad.data();
                       const size_t n = self.value.size();
                       if (an->requires_grad) {
                         float* da = an->grad.data();
                         const float* bv = bn->value.data();
                         for (size_t i = 0; i < n; ++i) da[i] += dy[i] * bv[i];
                       }
                       if (bn->requires_grad) {
                         float* db = bn->grad.data();
                         const float* av = an->value.data();
                         for (size_t i = 0; i < n; ++i) db[i] += dy[i] * av[i];
                       }
                     });
}

Tensor scale(const Tensor& a, float s) {
  std::vector<float> out(a.data());
  for (float& v : out) v *= s;
  auto an = a.node();
  return make_result(a.shape(), std::move(out), {an}, [=](TensorNode& self) {
    const float* dy = self.grad.data();
    float* da = an->grad.data();
    for (size_t i = 0; i < self.value.size(); ++i) da[i] += dy[i] * s;
  });
}

Tensor sum(const Tensor& a) {
  double acc = 0;
  for (float v : a.data()) acc += v;
  auto an = a.node();
  return make_result({1}, {float(acc)}, {an}, [=](TensorNode& self) {
    const float g = self.grad[0];
    float* da = an->grad.data();
    for (size_t i = 0; i < an->value.size(); ++i) da[i] += g;
  });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  check_4d(a, "concat_channels");
  check_4d(b, "concat_channels");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    throw DimensionError("concat_channels: shapes " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  const int N = a.dim(0), Ca = a.dim(1), Cb = b.dim(1), H = a.dim(2),
            W = a.dim(3);
  const size_t HW = size_t(H) * W;
  std::vector<float> out(size_t(N) * (Ca + Cb) * HW);
  for (int n = 0; n < N; ++n) {
    std::memcpy(out.data() + size_t(n) * (Ca + Cb) * HW,
                a.data().data() + size_t(n) * Ca * HW,
                sizeof(float) * Ca * HW);
    std::memcpy(out.data() + size_t(n) * (Ca + Cb) * HW + Ca * HW,
                b.data().data() + size_t(n) * Cb * HW,
                sizeof(float) * Cb * HW);
  }
  auto an = a.node();
  auto bn = b.node();
  return make_result(
      {N, Ca + Cb, H, W}, std::move(out), {an, bn}, [=](TensorNode& self) {
        const float* dy = self.grad.data();
        for (int n = 0; n < N; ++n) {
          if (an->requires_grad) {
            float* da = an->grad.data() + size_t(n) * Ca * HW;
            const float* s = dy + size_t(n) * (Ca + Cb) * HW;
            for (size_t i = 0; i < Ca * HW; ++i) da[i] += s[i];
          }
          if (bn->requires_grad) {
            float* db = bn->grad.data() + size_t(n) * Cb * HW;
            const float* s = dy + size_t(n) * (Ca + Cb) * HW + Ca * HW;
            for (size_t i = 0; i < Cb * HW; ++i) db[i] += s[i];
          }
        }
      });
}

}  // namespace uncseg
