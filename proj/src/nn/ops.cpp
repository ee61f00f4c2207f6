// Copyright 2026 The smokeseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "smokeseg/nn/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "smokeseg/errors.hpp"

namespace smokeseg::nn::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

// Upper bound on the im2col scratch buffer, in doubles.
constexpr std::size_t kPatchBudget = std::size_t{1} << 21;

[[noreturn]] void shape_error(const std::string& op, const std::string& detail) {
  throw GraphShapeError(op + ": " + detail);
}

void require_rank(const std::string& op, const Var& v, int rank) {
  if (!v.defined()) shape_error(op, "undefined input");
  if (v.value().rank() != rank) {
    shape_error(op, "expected rank " + std::to_string(rank) + ", got " + to_string(v.shape()));
  }
}

// Gradient buffer of input `i` when it takes part in differentiation.
Tensor* input_grad(Node& self, std::size_t i) {
  if (i >= self.inputs.size()) return nullptr;
  Node* in = self.inputs[i].get();
  if (in == nullptr || !in->requires_grad) return nullptr;
  return &in->grad_buffer();
}

const Tensor& input_value(const Node& self, std::size_t i) { return self.inputs[i]->value; }

// Rows [row_begin, row_end) of sample `n` unfolded into a (rows*W) x (K*K*C)
// patch matrix, zero outside the image.
void im2col(const Tensor& x, int n, int row_begin, int row_end, int kernel, std::vector<double>& patches) {
  const int H = x.dim(1), W = x.dim(2), C = x.dim(3);
  const int pad = kernel / 2;
  const std::size_t patch_width = static_cast<std::size_t>(kernel) * kernel * C;
  patches.resize(static_cast<std::size_t>(row_end - row_begin) * W * patch_width);
  double* dst_row = patches.data();
  for (int r = row_begin; r < row_end; ++r) {
    for (int c = 0; c < W; ++c, dst_row += patch_width) {
      for (int ky = 0; ky < kernel; ++ky) {
        const int yy = r + ky - pad;
        for (int kx = 0; kx < kernel; ++kx) {
          const int xx = c + kx - pad;
          double* dst = dst_row + static_cast<std::size_t>(ky * kernel + kx) * C;
          if (yy < 0 || yy >= H || xx < 0 || xx >= W) {
            std::fill(dst, dst + C, 0.0);
          } else {
            const double* src = &x.at(n, yy, xx, 0);
            std::copy(src, src + C, dst);
          }
        }
      }
    }
  }
}

void col2im_add(const std::vector<double>& patches, Tensor& gx, int n, int row_begin, int row_end, int kernel) {
  const int H = gx.dim(1), W = gx.dim(2), C = gx.dim(3);
  const int pad = kernel / 2;
  const std::size_t patch_width = static_cast<std::size_t>(kernel) * kernel * C;
  const double* src_row = patches.data();
  for (int r = row_begin; r < row_end; ++r) {
    for (int c = 0; c < W; ++c, src_row += patch_width) {
      for (int ky = 0; ky < kernel; ++ky) {
        const int yy = r + ky - pad;
        if (yy < 0 || yy >= H) continue;
        for (int kx = 0; kx < kernel; ++kx) {
          const int xx = c + kx - pad;
          if (xx < 0 || xx >= W) continue;
          const double* src = src_row + static_cast<std::size_t>(ky * kernel + kx) * C;
          double* dst = &gx.at(n, yy, xx, 0);
          for (int ch = 0; ch < C; ++ch) dst[ch] += src[ch];
        }
      }
    }
  }
}

int rows_per_chunk(int width, std::size_t patch_width) {
  const std::size_t per_row = static_cast<std::size_t>(width) * patch_width;
  return static_cast<int>(std::max<std::size_t>(1, kPatchBudget / std::max<std::size_t>(1, per_row)));
}

void add_bias_rows(double* data, std::size_t rows, const Tensor& bias) {
  const std::size_t cols = bias.size();
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = data + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += bias[c];
  }
}

void accumulate_bias_grad(const Tensor& g, Tensor& gb) {
  const std::size_t cols = gb.size();
  const std::size_t rows = g.size() / cols;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = g.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) gb[c] += row[c];
  }
}

void check_bias(const std::string& op, const Var& bias, int width) {
  if (!bias.defined()) return;
  if (bias.value().rank() != 1 || bias.value().dim(0) != width) {
    shape_error(op, "bias shape " + to_string(bias.shape()) + " does not match width " + std::to_string(width));
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  if (!a.defined() || !b.defined() || a.shape() != b.shape()) {
    shape_error("add", "operand shapes differ: " + (a.defined() ? to_string(a.shape()) : "?") + " vs " +
                           (b.defined() ? to_string(b.shape()) : "?"));
  }
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (Tensor* g = input_grad(self, k)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Var relu(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return make_result(std::move(out), {x}, [](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    const Tensor& in = input_value(self, 0);
    for (std::size_t i = 0; i < g->size(); ++i) {
      if (in[i] > 0.0) (*g)[i] += self.grad[i];
    }
  });
}

Var leaky_relu(const Var& x, double slope) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : slope * v;
  return make_result(std::move(out), {x}, [slope](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    const Tensor& in = input_value(self, 0);
    for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += in[i] > 0.0 ? self.grad[i] : slope * self.grad[i];
  });
}

Var sigmoid(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
  return make_result(std::move(out), {x}, [](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double y = self.value[i];
      (*g)[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

Var concat_last(std::span<const Var> parts) {
  if (parts.empty()) shape_error("concat", "no inputs");
  const Shape& first = parts.front().shape();
  Shape lead(first.begin(), first.end() - 1);
  std::vector<int> widths;
  int total = 0;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size() || !std::equal(lead.begin(), lead.end(), s.begin())) {
      shape_error("concat", "leading extents differ: " + to_string(first) + " vs " + to_string(s));
    }
    widths.push_back(s.back());
    total += s.back();
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  Tensor out(out_shape);
  const std::size_t rows = element_count(lead);
  int offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double* src = parts[k].value().data();
    const int w = widths[k];
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(src + r * w, src + (r + 1) * w, out.data() + r * total + offset);
    }
    offset += w;
  }
  return make_result(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                     [widths, rows, total](Node& self) {
                       int off = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         const int w = widths[k];
                         if (Tensor* g = input_grad(self, k)) {
                           for (std::size_t r = 0; r < rows; ++r) {
                             const double* src = self.grad.data() + r * total + off;
                             double* dst = g->data() + r * w;
                             for (int c = 0; c < w; ++c) dst[c] += src[c];
                           }
                         }
                         off += w;
                       }
                     });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  require_rank("linear", weight, 2);
  const int in = weight.value().dim(0), out_w = weight.value().dim(1);
  if (!x.defined() || x.value().rank() < 1 || x.shape().back() != in) {
    shape_error("linear", "input " + (x.defined() ? to_string(x.shape()) : "?") + " does not end in width " +
                              std::to_string(in));
  }
  check_bias("linear", bias, out_w);
  Shape out_shape = x.shape();
  out_shape.back() = out_w;
  const auto rows = static_cast<Eigen::Index>(x.value().size() / in);
  Tensor out(out_shape);
  MatMap(out.data(), rows, out_w).noalias() =
      ConstMatMap(x.value().data(), rows, in) * ConstMatMap(weight.value().data(), in, out_w);
  if (bias.defined()) add_bias_rows(out.data(), static_cast<std::size_t>(rows), bias.value());
  return make_result(std::move(out), {x, weight, bias}, [rows, in, out_w](Node& self) {
    ConstMatMap gy(self.grad.data(), rows, out_w);
    if (Tensor* gx = input_grad(self, 0)) {
      MatMap(gx->data(), rows, in).noalias() += gy * ConstMatMap(input_value(self, 1).data(), in, out_w).transpose();
    }
    if (Tensor* gw = input_grad(self, 1)) {
      MatMap(gw->data(), in, out_w).noalias() += ConstMatMap(input_value(self, 0).data(), rows, in).transpose() * gy;
    }
    if (Tensor* gb = input_grad(self, 2)) accumulate_bias_grad(self.grad, *gb);
  });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias) {
  require_rank("conv2d", x, 4);
  require_rank("conv2d", weight, 4);
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const int B = xv.dim(0), H = xv.dim(1), W = xv.dim(2), Ci = xv.dim(3);
  const int K = wv.dim(0), Co = wv.dim(3);
  if (wv.dim(1) != K || K % 2 == 0) shape_error("conv2d", "kernel must be square and odd, got " + to_string(wv.shape()));
  if (wv.dim(2) != Ci) {
    shape_error("conv2d", "weight expects " + std::to_string(wv.dim(2)) + " input channels, input has " + std::to_string(Ci));
  }
  check_bias("conv2d", bias, Co);
  const std::size_t patch_width = static_cast<std::size_t>(K) * K * Ci;
  const int chunk = rows_per_chunk(W, patch_width);
  Tensor out({B, H, W, Co});
  ConstMatMap wm(wv.data(), static_cast<Eigen::Index>(patch_width), Co);
  if (K == 1) {
    const auto rows = static_cast<Eigen::Index>(B) * H * W;
    MatMap(out.data(), rows, Co).noalias() = ConstMatMap(xv.data(), rows, Ci) * wm;
  } else {
    std::vector<double> patches;
    for (int n = 0; n < B; ++n) {
      for (int r0 = 0; r0 < H; r0 += chunk) {
        const int r1 = std::min(H, r0 + chunk);
        im2col(xv, n, r0, r1, K, patches);
        const auto rows = static_cast<Eigen::Index>(r1 - r0) * W;
        MatMap(&out.at(n, r0, 0, 0), rows, Co).noalias() =
            ConstMatMap(patches.data(), rows, static_cast<Eigen::Index>(patch_width)) * wm;
      }
    }
  }
  if (bias.defined()) add_bias_rows(out.data(), out.size() / Co, bias.value());

  return make_result(std::move(out), {x, weight, bias}, [=](Node& self) {
    const Tensor& xin = input_value(self, 0);
    const Tensor& w = input_value(self, 1);
    Tensor* gx = input_grad(self, 0);
    Tensor* gw = input_grad(self, 1);
    if (Tensor* gb = input_grad(self, 2)) accumulate_bias_grad(self.grad, *gb);
    ConstMatMap wmat(w.data(), static_cast<Eigen::Index>(patch_width), Co);
    if (K == 1) {
      const auto rows = static_cast<Eigen::Index>(B) * H * W;
      ConstMatMap gy(self.grad.data(), rows, Co);
      if (gw) MatMap(gw->data(), Ci, Co).noalias() += ConstMatMap(xin.data(), rows, Ci).transpose() * gy;
      if (gx) MatMap(gx->data(), rows, Ci).noalias() += gy * wmat.transpose();
      return;
    }
    if (!gx && !gw) return;
    std::vector<double> patches;
    RowMat gpatch;
    for (int n = 0; n < B; ++n) {
      for (int r0 = 0; r0 < H; r0 += chunk) {
        const int r1 = std::min(H, r0 + chunk);
        const auto rows = static_cast<Eigen::Index>(r1 - r0) * W;
        ConstMatMap gy(&self.grad.at(n, r0, 0, 0), rows, Co);
        if (gw) {
          im2col(xin, n, r0, r1, K, patches);
          MatMap(gw->data(), static_cast<Eigen::Index>(patch_width), Co).noalias() +=
              ConstMatMap(patches.data(), rows, static_cast<Eigen::Index>(patch_width)).transpose() * gy;
        }
        if (gx) {
          patches.resize(static_cast<std::size_t>(rows) * patch_width);
          MatMap(patches.data(), rows, static_cast<Eigen::Index>(patch_width)).noalias() = gy * wmat.transpose();
          col2im_add(patches, *gx, n, r0, r1, K);
        }
      }
    }
  });
}

Var conv_transpose2x2(const Var& x, const Var& weight, const Var& bias) {
  require_rank("conv_transpose2x2", x, 4);
  require_rank("conv_transpose2x2", weight, 4);
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const int B = xv.dim(0), H = xv.dim(1), W = xv.dim(2), Ci = xv.dim(3);
  const int Co = wv.dim(3);
  if (wv.dim(0) != Ci || wv.dim(1) != 2 || wv.dim(2) != 2) {
    shape_error("conv_transpose2x2", "weight " + to_string(wv.shape()) + " incompatible with input " + to_string(xv.shape()));
  }
  check_bias("conv_transpose2x2", bias, Co);
  const auto rows = static_cast<Eigen::Index>(B) * H * W;
  RowMat expanded = ConstMatMap(xv.data(), rows, Ci) * ConstMatMap(wv.data(), Ci, 4 * Co);
  Tensor out({B, 2 * H, 2 * W, Co});
  for (int n = 0; n < B; ++n) {
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        const double* src = expanded.data() + ((static_cast<std::size_t>(n) * H + i) * W + j) * 4 * Co;
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            std::copy(src + (a * 2 + b) * Co, src + (a * 2 + b + 1) * Co, &out.at(n, 2 * i + a, 2 * j + b, 0));
          }
        }
      }
    }
  }
  if (bias.defined()) add_bias_rows(out.data(), out.size() / Co, bias.value());
  return make_result(std::move(out), {x, weight, bias}, [=](Node& self) {
    if (Tensor* gb = input_grad(self, 2)) accumulate_bias_grad(self.grad, *gb);
    Tensor* gx = input_grad(self, 0);
    Tensor* gw = input_grad(self, 1);
    if (!gx && !gw) return;
    RowMat gexp(rows, 4 * Co);
    for (int n = 0; n < B; ++n) {
      for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
          double* dst = gexp.data() + ((static_cast<std::size_t>(n) * H + i) * W + j) * 4 * Co;
          for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
              const double* src = &self.grad.at(n, 2 * i + a, 2 * j + b, 0);
              std::copy(src, src + Co, dst + (a * 2 + b) * Co);
            }
          }
        }
      }
    }
    if (gx) MatMap(gx->data(), rows, Ci).noalias() += gexp * ConstMatMap(input_value(self, 1).data(), Ci, 4 * Co).transpose();
    if (gw) MatMap(gw->data(), Ci, 4 * Co).noalias() += ConstMatMap(input_value(self, 0).data(), rows, Ci).transpose() * gexp;
  });
}

Var max_pool2x2(const Var& x) {
  require_rank("max_pool2x2", x, 4);
  const Tensor& xv = x.value();
  const int B = xv.dim(0), H = xv.dim(1), W = xv.dim(2), C = xv.dim(3);
  if (H % 2 != 0 || W % 2 != 0) shape_error("max_pool2x2", "odd spatial extent " + to_string(xv.shape()));
  Tensor out({B, H / 2, W / 2, C});
  std::vector<std::size_t> argmax(out.size());
  std::size_t k = 0;
  for (int n = 0; n < B; ++n) {
    for (int i = 0; i < H / 2; ++i) {
      for (int j = 0; j < W / 2; ++j) {
        for (int c = 0; c < C; ++c, ++k) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_idx = 0;
          for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
              const std::size_t idx = ((static_cast<std::size_t>(n) * H + 2 * i + a) * W + 2 * j + b) * C + c;
              if (xv[idx] > best) {
                best = xv[idx];
                best_idx = idx;
              }
            }
          }
          out[k] = best;
          argmax[k] = best_idx;
        }
      }
    }
  }
  return make_result(std::move(out), {x}, [argmax = std::move(argmax)](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < argmax.size(); ++i) (*g)[argmax[i]] += self.grad[i];
  });
}

Var instance_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  require_rank("instance_norm", x, 4);
  const Tensor& xv = x.value();
  const int B = xv.dim(0), C = xv.dim(3);
  const std::size_t pixels = static_cast<std::size_t>(xv.dim(1)) * xv.dim(2);
  if (gamma.value().size() != static_cast<std::size_t>(C) || beta.value().size() != static_cast<std::size_t>(C)) {
    shape_error("instance_norm", "affine parameters do not match " + std::to_string(C) + " channels");
  }
  std::vector<double> mean(static_cast<std::size_t>(B) * C, 0.0), inv_std(static_cast<std::size_t>(B) * C, 0.0);
  for (int n = 0; n < B; ++n) {
    const double* base = xv.data() + static_cast<std::size_t>(n) * pixels * C;
    double* m = mean.data() + static_cast<std::size_t>(n) * C;
    double* s = inv_std.data() + static_cast<std::size_t>(n) * C;
    for (std::size_t p = 0; p < pixels; ++p) {
      for (int c = 0; c < C; ++c) m[c] += base[p * C + c];
    }
    for (int c = 0; c < C; ++c) m[c] /= static_cast<double>(pixels);
    for (std::size_t p = 0; p < pixels; ++p) {
      for (int c = 0; c < C; ++c) {
        const double d = base[p * C + c] - m[c];
        s[c] += d * d;
      }
    }
    for (int c = 0; c < C; ++c) s[c] = 1.0 / std::sqrt(s[c] / static_cast<double>(pixels) + eps);
  }
  Tensor out(xv.shape());
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  for (int n = 0; n < B; ++n) {
    const std::size_t off = static_cast<std::size_t>(n) * pixels * C;
    const double* m = mean.data() + static_cast<std::size_t>(n) * C;
    const double* s = inv_std.data() + static_cast<std::size_t>(n) * C;
    for (std::size_t p = 0; p < pixels; ++p) {
      for (int c = 0; c < C; ++c) {
        const std::size_t i = off + p * C + c;
        out[i] = gv[c] * (xv[i] - m[c]) * s[c] + bv[c];
      }
    }
  }
  return make_result(std::move(out), {x, gamma, beta},
                     [B, C, pixels, mean = std::move(mean), inv_std = std::move(inv_std)](Node& self) {
                       const Tensor& xin = input_value(self, 0);
                       const Tensor& gam = input_value(self, 1);
                       Tensor* gx = input_grad(self, 0);
                       Tensor* gg = input_grad(self, 1);
                       Tensor* gb = input_grad(self, 2);
                       std::vector<double> sum_dy(C), sum_dy_xhat(C);
                       for (int n = 0; n < B; ++n) {
                         const std::size_t off = static_cast<std::size_t>(n) * pixels * C;
                         const double* m = mean.data() + static_cast<std::size_t>(n) * C;
                         const double* s = inv_std.data() + static_cast<std::size_t>(n) * C;
                         std::fill(sum_dy.begin(), sum_dy.end(), 0.0);
                         std::fill(sum_dy_xhat.begin(), sum_dy_xhat.end(), 0.0);
                         for (std::size_t p = 0; p < pixels; ++p) {
                           for (int c = 0; c < C; ++c) {
                             const std::size_t i = off + p * C + c;
                             const double xhat = (xin[i] - m[c]) * s[c];
                             sum_dy[c] += self.grad[i];
                             sum_dy_xhat[c] += self.grad[i] * xhat;
                           }
                         }
                         for (int c = 0; c < C; ++c) {
                           if (gg) (*gg)[c] += sum_dy_xhat[c];
                           if (gb) (*gb)[c] += sum_dy[c];
                         }
                         if (!gx) continue;
                         const double inv_n = 1.0 / static_cast<double>(pixels);
                         for (std::size_t p = 0; p < pixels; ++p) {
                           for (int c = 0; c < C; ++c) {
                             const std::size_t i = off + p * C + c;
                             const double xhat = (xin[i] - m[c]) * s[c];
                             (*gx)[i] += gam[c] * s[c] *
                                         (self.grad[i] - inv_n * sum_dy[c] - xhat * inv_n * sum_dy_xhat[c]);
                           }
                         }
                       }
                     });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  if (!x.defined() || x.value().rank() < 1) shape_error("layer_norm", "undefined input");
  const Tensor& xv = x.value();
  const int D = xv.shape().back();
  if (gamma.value().size() != static_cast<std::size_t>(D) || beta.value().size() != static_cast<std::size_t>(D)) {
    shape_error("layer_norm", "affine parameters do not match width " + std::to_string(D));
  }
  const std::size_t rows = xv.size() / D;
  std::vector<double> mean(rows), inv_std(rows);
  Tensor out(xv.shape());
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * D;
    double m = 0.0;
    for (int d = 0; d < D; ++d) m += row[d];
    m /= D;
    double var = 0.0;
    for (int d = 0; d < D; ++d) var += (row[d] - m) * (row[d] - m);
    const double s = 1.0 / std::sqrt(var / D + eps);
    mean[r] = m;
    inv_std[r] = s;
    double* o = out.data() + r * D;
    for (int d = 0; d < D; ++d) o[d] = gv[d] * (row[d] - m) * s + bv[d];
  }
  return make_result(std::move(out), {x, gamma, beta},
                     [D, rows, mean = std::move(mean), inv_std = std::move(inv_std)](Node& self) {
                       const Tensor& xin = input_value(self, 0);
                       const Tensor& gam = input_value(self, 1);
                       Tensor* gx = input_grad(self, 0);
                       Tensor* gg = input_grad(self, 1);
                       Tensor* gb = input_grad(self, 2);
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* row = xin.data() + r * D;
                         const double* gy = self.grad.data() + r * D;
                         double s1 = 0.0, s2 = 0.0;
                         for (int d = 0; d < D; ++d) {
                           const double xhat = (row[d] - mean[r]) * inv_std[r];
                           if (gg) (*gg)[d] += gy[d] * xhat;
                           if (gb) (*gb)[d] += gy[d];
                           s1 += gy[d] * gam[d];
                           s2 += gy[d] * gam[d] * xhat;
                         }
                         if (!gx) continue;
                         double* gxr = gx->data() + r * D;
                         for (int d = 0; d < D; ++d) {
                           const double xhat = (row[d] - mean[r]) * inv_std[r];
                           gxr[d] += inv_std[r] * (gy[d] * gam[d] - s1 / D - xhat * s2 / D);
                         }
                       }
                     });
}

Var region_tokens(const Var& x, int region) {
  require_rank("region_tokens", x, 4);
  const Tensor& xv = x.value();
  const int B = xv.dim(0), H = xv.dim(1), W = xv.dim(2), C = xv.dim(3);
  if (region <= 0 || H % region != 0 || W % region != 0) {
    shape_error("region_tokens", "region " + std::to_string(region) + " does not tile " + to_string(xv.shape()));
  }
  const int rows = H / region, cols = W / region, T = rows * cols;
  Tensor out({B, T, 2 * C});
  std::vector<std::size_t> argmax(static_cast<std::size_t>(B) * T * C);
  const double area = static_cast<double>(region) * region;
  for (int n = 0; n < B; ++n) {
    for (int gy = 0; gy < rows; ++gy) {
      for (int gx = 0; gx < cols; ++gx) {
        const int t = gy * cols + gx;
        double* tok = out.data() + (static_cast<std::size_t>(n) * T + t) * 2 * C;
        std::size_t* am = argmax.data() + (static_cast<std::size_t>(n) * T + t) * C;
        for (int c = 0; c < C; ++c) tok[C + c] = -std::numeric_limits<double>::infinity();
        for (int dy = 0; dy < region; ++dy) {
          for (int dx = 0; dx < region; ++dx) {
            const std::size_t base = ((static_cast<std::size_t>(n) * H + gy * region + dy) * W + gx * region + dx) * C;
            for (int c = 0; c < C; ++c) {
              const double v = xv[base + c];
              tok[c] += v;
              if (v > tok[C + c]) {
                tok[C + c] = v;
                am[c] = base + c;
              }
            }
          }
        }
        for (int c = 0; c < C; ++c) tok[c] /= area;
      }
    }
  }
  return make_result(std::move(out), {x}, [=, argmax = std::move(argmax)](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    for (int n = 0; n < B; ++n) {
      for (int gy = 0; gy < rows; ++gy) {
        for (int gx = 0; gx < cols; ++gx) {
          const int t = gy * cols + gx;
          const double* gt = self.grad.data() + (static_cast<std::size_t>(n) * T + t) * 2 * C;
          const std::size_t* am = argmax.data() + (static_cast<std::size_t>(n) * T + t) * C;
          for (int dy = 0; dy < region; ++dy) {
            for (int dx = 0; dx < region; ++dx) {
              double* dst = &g->at(n, gy * region + dy, gx * region + dx, 0);
              for (int c = 0; c < C; ++c) dst[c] += gt[c] / area;
            }
          }
          for (int c = 0; c < C; ++c) (*g)[am[c]] += gt[C + c];
        }
      }
    }
  });
}

Var region_broadcast(const Var& tokens, int grid_rows, int grid_cols, int region) {
  require_rank("region_broadcast", tokens, 3);
  const Tensor& tv = tokens.value();
  const int B = tv.dim(0), T = tv.dim(1), C = tv.dim(2);
  if (T != grid_rows * grid_cols || region <= 0) {
    shape_error("region_broadcast", std::to_string(T) + " tokens do not form a " + std::to_string(grid_rows) + "x" +
                                        std::to_string(grid_cols) + " grid");
  }
  const int H = grid_rows * region, W = grid_cols * region;
  Tensor out({B, H, W, C});
  for (int n = 0; n < B; ++n) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const int t = (y / region) * grid_cols + x / region;
        const double* src = tv.data() + (static_cast<std::size_t>(n) * T + t) * C;
        std::copy(src, src + C, &out.at(n, y, x, 0));
      }
    }
  }
  return make_result(std::move(out), {tokens}, [=](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    for (int n = 0; n < B; ++n) {
      for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
          const int t = (y / region) * grid_cols + x / region;
          double* dst = g->data() + (static_cast<std::size_t>(n) * T + t) * C;
          const double* src = &self.grad.at(n, y, x, 0);
          for (int c = 0; c < C; ++c) dst[c] += src[c];
        }
      }
    }
  });
}

Var add_per_token(const Var& tokens, const Var& table) {
  require_rank("add_per_token", tokens, 3);
  require_rank("add_per_token", table, 2);
  const int B = tokens.value().dim(0);
  const std::size_t per_sample = table.value().size();
  if (tokens.value().dim(1) != table.value().dim(0) || tokens.value().dim(2) != table.value().dim(1)) {
    shape_error("add_per_token", "table " + to_string(table.shape()) + " vs tokens " + to_string(tokens.shape()));
  }
  Tensor out = tokens.value();
  for (int n = 0; n < B; ++n) {
    double* dst = out.data() + n * per_sample;
    for (std::size_t i = 0; i < per_sample; ++i) dst[i] += table.value()[i];
  }
  return make_result(std::move(out), {tokens, table}, [B, per_sample](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (Tensor* g = input_grad(self, 1)) {
      for (int n = 0; n < B; ++n) {
        const double* src = self.grad.data() + n * per_sample;
        for (std::size_t i = 0; i < per_sample; ++i) (*g)[i] += src[i];
      }
    }
  });
}

Var multi_head_attention(const Var& qkv, int heads) {
  require_rank("multi_head_attention", qkv, 3);
  const Tensor& in = qkv.value();
  const int B = in.dim(0), T = in.dim(1);
  if (in.dim(2) % 3 != 0) shape_error("multi_head_attention", "packed width not divisible by 3");
  const int E = in.dim(2) / 3;
  if (heads <= 0 || E % heads != 0) {
    shape_error("multi_head_attention", std::to_string(heads) + " heads do not divide width " + std::to_string(E));
  }
  const int d = E / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const bool keep = grad_enabled() && qkv.requires_grad();
  std::vector<RowMat> probs;
  if (keep) probs.reserve(static_cast<std::size_t>(B) * heads);
  Tensor out({B, T, E});
  RowMat scores;
  for (int n = 0; n < B; ++n) {
    const double* base = in.data() + static_cast<std::size_t>(n) * T * 3 * E;
    for (int h = 0; h < heads; ++h) {
      ConstStridedMap q(base + h * d, T, d, Eigen::OuterStride<>(3 * E));
      ConstStridedMap k(base + E + h * d, T, d, Eigen::OuterStride<>(3 * E));
      ConstStridedMap v(base + 2 * E + h * d, T, d, Eigen::OuterStride<>(3 * E));
      scores.noalias() = scale * (q * k.transpose());
      for (int r = 0; r < T; ++r) {
        auto row = scores.row(r);
        const double mx = row.maxCoeff();
        row = (row.array() - mx).exp();
        row /= row.sum();
      }
      StridedMap o(out.data() + static_cast<std::size_t>(n) * T * E + h * d, T, d, Eigen::OuterStride<>(E));
      o.noalias() = scores * v;
      if (keep) probs.push_back(scores);
    }
  }
  return make_result(std::move(out), {qkv}, [=, probs = std::move(probs)](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    const Tensor& packed = input_value(self, 0);
    RowMat dp, ds;
    for (int n = 0; n < B; ++n) {
      const double* base = packed.data() + static_cast<std::size_t>(n) * T * 3 * E;
      double* gbase = g->data() + static_cast<std::size_t>(n) * T * 3 * E;
      for (int h = 0; h < heads; ++h) {
        const RowMat& p = probs[static_cast<std::size_t>(n) * heads + h];
        ConstStridedMap q(base + h * d, T, d, Eigen::OuterStride<>(3 * E));
        ConstStridedMap k(base + E + h * d, T, d, Eigen::OuterStride<>(3 * E));
        ConstStridedMap v(base + 2 * E + h * d, T, d, Eigen::OuterStride<>(3 * E));
        ConstStridedMap go(self.grad.data() + static_cast<std::size_t>(n) * T * E + h * d, T, d,
                           Eigen::OuterStride<>(E));
        StridedMap gq(gbase + h * d, T, d, Eigen::OuterStride<>(3 * E));
        StridedMap gk(gbase + E + h * d, T, d, Eigen::OuterStride<>(3 * E));
        StridedMap gv(gbase + 2 * E + h * d, T, d, Eigen::OuterStride<>(3 * E));
        gv.noalias() += p.transpose() * go;
        dp.noalias() = go * v.transpose();
        ds = p.array() * (dp.array().colwise() - (dp.array() * p.array()).rowwise().sum());
        gq.noalias() += scale * (ds * k);
        gk.noalias() += scale * (ds.transpose() * q);
      }
    }
  });
}

Var spatial_mean(const Var& x) {
  require_rank("spatial_mean", x, 4);
  const Tensor& xv = x.value();
  const int B = xv.dim(0), C = xv.dim(3);
  const std::size_t pixels = static_cast<std::size_t>(xv.dim(1)) * xv.dim(2);
  Tensor out({B, C});
  for (int n = 0; n < B; ++n) {
    const double* base = xv.data() + n * pixels * C;
    for (std::size_t p = 0; p < pixels; ++p) {
      for (int c = 0; c < C; ++c) out[static_cast<std::size_t>(n) * C + c] += base[p * C + c];
    }
  }
  for (double& v : out.values()) v /= static_cast<double>(pixels);
  return make_result(std::move(out), {x}, [B, C, pixels](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    for (int n = 0; n < B; ++n) {
      double* base = g->data() + n * pixels * C;
      for (std::size_t p = 0; p < pixels; ++p) {
        for (int c = 0; c < C; ++c) base[p * C + c] += self.grad[static_cast<std::size_t>(n) * C + c] / pixels;
      }
    }
  });
}

Var scale_channels(const Var& x, const Var& factors) {
  require_rank("scale_channels", x, 4);
  require_rank("scale_channels", factors, 2);
  const Tensor& xv = x.value();
  const int B = xv.dim(0), C = xv.dim(3);
  if (factors.value().dim(0) != B || factors.value().dim(1) != C) {
    shape_error("scale_channels", "factors " + to_string(factors.shape()) + " vs map " + to_string(xv.shape()));
  }
  const std::size_t pixels = static_cast<std::size_t>(xv.dim(1)) * xv.dim(2);
  Tensor out = xv;
  const Tensor& f = factors.value();
  for (int n = 0; n < B; ++n) {
    double* base = out.data() + n * pixels * C;
    for (std::size_t p = 0; p < pixels; ++p) {
      for (int c = 0; c < C; ++c) base[p * C + c] *= f[static_cast<std::size_t>(n) * C + c];
    }
  }
  return make_result(std::move(out), {x, factors}, [B, C, pixels](Node& self) {
    const Tensor& xin = input_value(self, 0);
    const Tensor& fac = input_value(self, 1);
    Tensor* gx = input_grad(self, 0);
    Tensor* gf = input_grad(self, 1);
    for (int n = 0; n < B; ++n) {
      const std::size_t off = n * pixels * C;
      for (std::size_t p = 0; p < pixels; ++p) {
        for (int c = 0; c < C; ++c) {
          const std::size_t i = off + p * C + c;
          const std::size_t fi = static_cast<std::size_t>(n) * C + c;
          if (gx) (*gx)[i] += self.grad[i] * fac[fi];
          if (gf) (*gf)[fi] += self.grad[i] * xin[i];
        }
      }
    }
  });
}

Var masked_mse(const Var& scores, const Tensor& target, std::span<const std::uint8_t> labelled) {
  if (!scores.defined() || scores.shape() != target.shape() || scores.value().rank() < 2) {
    throw PairingError("masked_mse: score shape " + (scores.defined() ? to_string(scores.shape()) : "?") +
                       " does not match target " + to_string(target.shape()));
  }
  const int channels = target.shape().back();
  const std::size_t pixels = target.size() / channels;
  if (labelled.size() != pixels) {
    throw PairingError("masked_mse: label mask has " + std::to_string(labelled.size()) + " entries for " +
                       std::to_string(pixels) + " pixels");
  }
  std::size_t count = 0;
  for (auto m : labelled) count += m ? 1 : 0;
  const Tensor& s = scores.value();
  double total = 0.0;
  for (std::size_t p = 0; p < pixels; ++p) {
    if (!labelled[p]) continue;
    for (int c = 0; c < channels; ++c) {
      const double diff = s[p * channels + c] - target[p * channels + c];
      total += diff * diff;
    }
  }
  const double denom = static_cast<double>(count) * channels;
  Tensor out({1}, count ? total / denom : 0.0);
  std::vector<std::uint8_t> mask(labelled.begin(), labelled.end());
  return make_result(std::move(out), {scores},
                     [target, mask = std::move(mask), channels, pixels, denom, count](Node& self) {
                       Tensor* g = input_grad(self, 0);
                       if (!g || count == 0) return;
                       const Tensor& sv = input_value(self, 0);
                       const double scale = 2.0 * self.grad[0] / denom;
                       for (std::size_t p = 0; p < pixels; ++p) {
                         if (!mask[p]) continue;
                         for (int c = 0; c < channels; ++c) {
                           const std::size_t i = p * channels + c;
                           (*g)[i] += scale * (sv[i] - target[i]);
                         }
                       }
                     });
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return make_result(Tensor({1}, total), {x}, [](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    for (double& v : g->values()) v += self.grad[0];
  });
}

}  // namespace smokeseg::nn::ops
