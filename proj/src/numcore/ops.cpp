// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>

#include "inlg/numcore/graph.hpp"
#include "kernels.hpp"

INLG_NAMESPACE_BEGIN
namespace ops {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.same_shape(b), std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                               " vs " + shape_str(b.shape()));
}

template <typename F>
NodeId unary(Graph& g, NodeId x, const char* name, F f_and_df) {
  const Tensor& xv = g.value(x);
  Tensor out = Tensor::zeros_like(xv);
  Tensor deriv = Tensor::zeros_like(xv);
  for (std::size_t i = 0; i < xv.size(); ++i) {
    auto [y, dy] = f_and_df(xv[i]);
    out[i] = y;
    deriv[i] = dy;
  }
  return g.add_node(name, std::move(out), {x}, [deriv = std::move(deriv)](Graph& g, NodeId self) {
    const NodeId in = g.inputs(self)[0];
    if (!g.requires_grad(in)) return;
    const Tensor& go = g.grad(self);
    Tensor& gi = g.grad(in);
    for (std::size_t i = 0; i < go.size(); ++i) gi[i] += go[i] * deriv[i];
  });
}

}  // namespace

NodeId matmul(Graph& g, NodeId a, NodeId b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  const std::size_t M = av.rows(), K = av.cols(), N = bv.cols();
  require(bv.rows() == K, "matmul: inner dimensions differ " + shape_str(av.shape()) + " x " +
                              shape_str(bv.shape()));
  Tensor out({M, N});
  kernels::gemm_nn(M, K, N, av.data().data(), bv.data().data(), out.data().data());
  return g.add_node("matmul", std::move(out), {a, b}, [](Graph& g, NodeId self) {
    const NodeId a = g.inputs(self)[0], b = g.inputs(self)[1];
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    const std::size_t M = av.rows(), K = av.cols(), N = bv.cols();
    const Real* go = g.grad(self).data().data();
    if (g.requires_grad(a)) {
      kernels::gemm_nt(M, N, K, go, bv.data().data(), g.grad(a).data().data());
    }
    if (g.requires_grad(b)) {
      kernels::gemm_tn(M, K, N, av.data().data(), go, g.grad(b).data().data());
    }
  });
}

NodeId matmul_nt(Graph& g, NodeId a, NodeId b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  const std::size_t M = av.rows(), K = av.cols(), N = bv.rows();
  require(bv.cols() == K, "matmul_nt: inner dimensions differ " + shape_str(av.shape()) +
                              " x " + shape_str(bv.shape()) + "^T");
  Tensor out({M, N});
  kernels::gemm_nt(M, K, N, av.data().data(), bv.data().data(), out.data().data());
  return g.add_node("matmul_nt", std::move(out), {a, b}, [](Graph& g, NodeId self) {
    const NodeId a = g.inputs(self)[0], b = g.inputs(self)[1];
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    const std::size_t M = av.rows(), K = av.cols(), N = bv.rows();
    const Real* go = g.grad(self).data().data();
    // dA[M,K] = dC[M,N] B[N,K];  dB[N,K] = dC^T A
    if (g.requires_grad(a)) {
      kernels::gemm_nn(M, N, K, go, bv.data().data(), g.grad(a).data().data());
    }
    if (g.requires_grad(b)) {
      kernels::gemm_tn(M, N, K, go, av.data().data(), g.grad(b).data().data());
    }
  });
}

NodeId add(Graph& g, NodeId a, NodeId b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  require_same_shape(av, bv, "add");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return g.add_node("add", std::move(out), {a, b}, [](Graph& g, NodeId self) {
    for (NodeId in : g.inputs(self)) {
      if (!g.requires_grad(in)) continue;
      const Tensor& go = g.grad(self);
      Tensor& gi = g.grad(in);
      for (std::size_t i = 0; i < go.size(); ++i) gi[i] += go[i];
    }
  });
}

NodeId add_bias(Graph& g, NodeId x, NodeId bias) {
  const Tensor& xv = g.value(x);
  const Tensor& bv = g.value(bias);
  const std::size_t R = xv.rows(), C = xv.cols();
  require(bv.size() == C, "add_bias: bias length " + std::to_string(bv.size()) +
                              " != columns " + std::to_string(C));
  Tensor out = xv;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) out[r * C + c] += bv[c];
  }
  return g.add_node("add_bias", std::move(out), {x, bias}, [](Graph& g, NodeId self) {
    const NodeId x = g.inputs(self)[0], b = g.inputs(self)[1];
    const Tensor& go = g.grad(self);
    if (g.requires_grad(x)) {
      Tensor& gx = g.grad(x);
      for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
    }
    if (g.requires_grad(b)) {
      Tensor& gb = g.grad(b);
      const std::size_t C = gb.size();
      for (std::size_t i = 0; i < go.size(); ++i) gb[i % C] += go[i];
    }
  });
}

NodeId mul(Graph& g, NodeId a, NodeId b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  require_same_shape(av, bv, "mul");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return g.add_node("mul", std::move(out), {a, b}, [](Graph& g, NodeId self) {
    const NodeId a = g.inputs(self)[0], b = g.inputs(self)[1];
    const Tensor& go = g.grad(self);
    if (g.requires_grad(a)) {
      Tensor& ga = g.grad(a);
      const Tensor& bv = g.value(b);
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * bv[i];
    }
    if (g.requires_grad(b)) {
      Tensor& gb = g.grad(b);
      const Tensor& av = g.value(a);
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * av[i];
    }
  });
}

NodeId scale(Graph& g, NodeId x, Real factor) {
  Tensor out = g.value(x);
  for (Real& v : out.storage()) v *= factor;
  return g.add_node("scale", std::move(out), {x}, [factor](Graph& g, NodeId self) {
    const NodeId in = g.inputs(self)[0];
    if (!g.requires_grad(in)) return;
    const Tensor& go = g.grad(self);
    Tensor& gi = g.grad(in);
    for (std::size_t i = 0; i < go.size(); ++i) gi[i] += go[i] * factor;
  });
}

NodeId gelu(Graph& g, NodeId x) {
  // tanh approximation
  constexpr Real k = Real(0.7978845608028654);  // sqrt(2/pi)
  constexpr Real c = Real(0.044715);
  return unary(g, x, "gelu", [](Real v) {
    const Real u = k * (v + c * v * v * v);
    const Real t = std::tanh(u);
    const Real y = Real(0.5) * v * (Real(1) + t);
    const Real du = k * (Real(1) + Real(3) * c * v * v);
    const Real dy = Real(0.5) * (Real(1) + t) + Real(0.5) * v * (Real(1) - t * t) * du;
    return std::pair{y, dy};
  });
}

NodeId tanh(Graph& g, NodeId x) {
  return unary(g, x, "tanh", [](Real v) {
    const Real t = std::tanh(v);
    return std::pair{t, Real(1) - t * t};
  });
}

NodeId relu(Graph& g, NodeId x) {
  return unary(g, x, "relu", [](Real v) {
    return v > Real(0) ? std::pair{v, Real(1)} : std::pair{Real(0), Real(0)};
  });
}

namespace {

void softmax_row(std::span<const Real> in, std::span<Real> out) {
  Real m = -std::numeric_limits<Real>::infinity();
  for (Real v : in) m = std::max(m, v);
  Real s = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - m);
    s += out[i];
  }
  for (Real& v : out) v /= s;
}

}  // namespace

NodeId softmax_rows(Graph& g, NodeId x) {
  const Tensor& xv = g.value(x);
  Tensor out = Tensor::zeros_like(xv);
  for (std::size_t r = 0; r < xv.rows(); ++r) softmax_row(xv.row(r), out.row(r));
  return g.add_node("softmax", std::move(out), {x}, [](Graph& g, NodeId self) {
    const NodeId in = g.inputs(self)[0];
    if (!g.requires_grad(in)) return;
    const Tensor& y = g.value(self);
    const Tensor& go = g.grad(self);
    Tensor& gi = g.grad(in);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row(r);
      auto gr = go.row(r);
      Real dot = 0;
      for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * gr[c];
      auto out = gi.row(r);
      for (std::size_t c = 0; c < yr.size(); ++c) out[c] += yr[c] * (gr[c] - dot);
    }
  });
}

NodeId layer_norm(Graph& g, NodeId x, NodeId gamma, NodeId beta, Real eps) {
  const Tensor& xv = g.value(x);
  const Tensor& gv = g.value(gamma);
  const Tensor& bv = g.value(beta);
  const std::size_t R = xv.rows(), C = xv.cols();
  require(gv.size() == C && bv.size() == C, "layer_norm: gain/bias length mismatch");
  Tensor out = Tensor::zeros_like(xv);
  Tensor xhat = Tensor::zeros_like(xv);
  std::vector<Real> inv_std(R);
  for (std::size_t r = 0; r < R; ++r) {
    auto in = xv.row(r);
    Real mu = 0;
    for (Real v : in) mu += v;
    mu /= Real(C);
    Real var = 0;
    for (Real v : in) var += (v - mu) * (v - mu);
    var /= Real(C);
    const Real is = Real(1) / std::sqrt(var + eps);
    inv_std[r] = is;
    auto xh = xhat.row(r);
    auto o = out.row(r);
    for (std::size_t c = 0; c < C; ++c) {
      xh[c] = (in[c] - mu) * is;
      o[c] = xh[c] * gv[c] + bv[c];
    }
  }
  return g.add_node(
      "layer_norm", std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g, NodeId self) {
        const NodeId x = g.inputs(self)[0], gamma = g.inputs(self)[1], beta = g.inputs(self)[2];
        const Tensor& go = g.grad(self);
        const Tensor& gv = g.value(gamma);
        const std::size_t R = xhat.rows(), C = xhat.cols();
        if (g.requires_grad(gamma)) {
          Tensor& gg = g.grad(gamma);
          for (std::size_t i = 0; i < go.size(); ++i) gg[i % C] += go[i] * xhat[i];
        }
        if (g.requires_grad(beta)) {
          Tensor& gb = g.grad(beta);
          for (std::size_t i = 0; i < go.size(); ++i) gb[i % C] += go[i];
        }
        if (g.requires_grad(x)) {
          Tensor& gx = g.grad(x);
          std::vector<Real> dxh(C);
          for (std::size_t r = 0; r < R; ++r) {
            auto gr = go.row(r);
            auto xh = xhat.row(r);
            Real mean_d = 0, mean_dx = 0;
            for (std::size_t c = 0; c < C; ++c) {
              dxh[c] = gr[c] * gv[c];
              mean_d += dxh[c];
              mean_dx += dxh[c] * xh[c];
            }
            mean_d /= Real(C);
            mean_dx /= Real(C);
            auto out = gx.row(r);
            for (std::size_t c = 0; c < C; ++c) {
              out[c] += inv_std[r] * (dxh[c] - mean_d - xh[c] * mean_dx);
            }
          }
        }
      });
}

NodeId embedding(Graph& g, NodeId table, std::span<const std::int32_t> ids) {
  const Tensor& tv = g.value(table);
  const std::size_t V = tv.rows(), D = tv.cols();
  require(!ids.empty(), "embedding: empty id list");
  Tensor out({ids.size(), D});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < V,
            "embedding: id " + std::to_string(ids[i]) + " out of range for table of " +
                std::to_string(V) + " rows");
    std::copy_n(tv.row(ids[i]).begin(), D, out.row(i).begin());
  }
  std::vector<std::int32_t> idv(ids.begin(), ids.end());
  return g.add_node("embedding", std::move(out), {table},
                    [idv = std::move(idv)](Graph& g, NodeId self) {
                      const NodeId table = g.inputs(self)[0];
                      if (!g.requires_grad(table)) return;
                      const Tensor& go = g.grad(self);
                      Tensor& gt = g.grad(table);
                      for (std::size_t i = 0; i < idv.size(); ++i) {
                        auto src = go.row(i);
                        auto dst = gt.row(idv[i]);
                        for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                      }
                    });
}

NodeId gather_rows(Graph& g, NodeId x, std::span<const std::size_t> rows) {
  const Tensor& xv = g.value(x);
  const std::size_t C = xv.cols();
  require(!rows.empty(), "gather_rows: empty row list");
  Tensor out({rows.size(), C});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < xv.rows(), "gather_rows: row index out of range");
    std::copy_n(xv.row(rows[i]).begin(), C, out.row(i).begin());
  }
  std::vector<std::size_t> rv(rows.begin(), rows.end());
  return g.add_node("gather_rows", std::move(out), {x},
                    [rv = std::move(rv)](Graph& g, NodeId self) {
                      const NodeId x = g.inputs(self)[0];
                      if (!g.requires_grad(x)) return;
                      const Tensor& go = g.grad(self);
                      Tensor& gx = g.grad(x);
                      for (std::size_t i = 0; i < rv.size(); ++i) {
                        auto src = go.row(i);
                        auto dst = gx.row(rv[i]);
                        for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                      }
                    });
}

NodeId scatter_rows(Graph& g, NodeId base, NodeId src, std::span<const std::size_t> rows) {
  const Tensor& bv = g.value(base);
  const Tensor& sv = g.value(src);
  require(sv.cols() == bv.cols(), "scatter_rows: column mismatch");
  require(sv.rows() == rows.size(), "scatter_rows: source rows != index count");
  Tensor out = bv;
  std::vector<char> taken(bv.rows(), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < bv.rows(), "scatter_rows: row index out of range");
    require(!taken[rows[i]], "scatter_rows: duplicate row index");
    taken[rows[i]] = 1;
    std::copy_n(sv.row(i).begin(), sv.cols(), out.row(rows[i]).begin());
  }
  std::vector<std::size_t> rv(rows.begin(), rows.end());
  return g.add_node(
      "scatter_rows", std::move(out), {base, src},
      [rv = std::move(rv), taken = std::move(taken)](Graph& g, NodeId self) {
        const NodeId base = g.inputs(self)[0], src = g.inputs(self)[1];
        const Tensor& go = g.grad(self);
        if (g.requires_grad(base)) {
          Tensor& gb = g.grad(base);
          for (std::size_t r = 0; r < go.rows(); ++r) {
            if (taken[r]) continue;
            auto s = go.row(r);
            auto d = gb.row(r);
            for (std::size_t c = 0; c < s.size(); ++c) d[c] += s[c];
          }
        }
        if (g.requires_grad(src)) {
          Tensor& gs = g.grad(src);
          for (std::size_t i = 0; i < rv.size(); ++i) {
            auto s = go.row(rv[i]);
            auto d = gs.row(i);
            for (std::size_t c = 0; c < s.size(); ++c) d[c] += s[c];
          }
        }
      });
}

NodeId reshape(Graph& g, NodeId x, Shape shape) {
  Tensor out = g.value(x).reshaped(std::move(shape));
  return g.add_node("reshape", std::move(out), {x}, [](Graph& g, NodeId self) {
    const NodeId in = g.inputs(self)[0];
    if (!g.requires_grad(in)) return;
    const Tensor& go = g.grad(self);
    Tensor& gi = g.grad(in);
    for (std::size_t i = 0; i < go.size(); ++i) gi[i] += go[i];
  });
}

NodeId attention(Graph& g, NodeId qkv, std::size_t batch, std::size_t seq, std::size_t heads,
                 bool causal) {
  const Tensor& in = g.value(qkv);
  require(in.rows() == batch * seq, "attention: rows != batch*seq");
  require(in.cols() % 3 == 0, "attention: qkv width must be 3*d");
  const std::size_t D = in.cols() / 3;
  require(heads >= 1 && D % heads == 0, "attention: d not divisible by heads");
  const std::size_t dh = D / heads;
  const Real scale = Real(1) / std::sqrt(Real(dh));
  const std::size_t W = 3 * D;

  Tensor out({batch * seq, D});
  // probs[b][h] is a seq x seq row-stochastic matrix (upper triangle zero when causal)
  std::vector<Real> probs(batch * heads * seq * seq, Real(0));
  std::vector<Real> scores(seq);
  for (std::size_t b = 0; b < batch; ++b) {
    const Real* base = in.data().data() + b * seq * W;
    for (std::size_t h = 0; h < heads; ++h) {
      Real* P = probs.data() + (b * heads + h) * seq * seq;
      for (std::size_t i = 0; i < seq; ++i) {
        const Real* q = base + i * W + h * dh;
        const std::size_t width = causal ? i + 1 : seq;
        Real m = -std::numeric_limits<Real>::infinity();
        for (std::size_t j = 0; j < width; ++j) {
          const Real* k = base + j * W + D + h * dh;
          Real s = 0;
          for (std::size_t c = 0; c < dh; ++c) s += q[c] * k[c];
          scores[j] = s * scale;
          m = std::max(m, scores[j]);
        }
        Real z = 0;
        for (std::size_t j = 0; j < width; ++j) {
          scores[j] = std::exp(scores[j] - m);
          z += scores[j];
        }
        Real* o = out.data().data() + (b * seq + i) * D + h * dh;
        for (std::size_t j = 0; j < width; ++j) {
          const Real p = scores[j] / z;
          P[i * seq + j] = p;
          const Real* v = base + j * W + 2 * D + h * dh;
          for (std::size_t c = 0; c < dh; ++c) o[c] += p * v[c];
        }
      }
    }
  }
  return g.add_node(
      "attention", std::move(out), {qkv},
      [probs = std::move(probs), batch, seq, heads, causal, dh, scale](Graph& g, NodeId self) {
        const NodeId qkv = g.inputs(self)[0];
        if (!g.requires_grad(qkv)) return;
        const Tensor& in = g.value(qkv);
        const Tensor& go = g.grad(self);
        Tensor& gi = g.grad(qkv);
        const std::size_t D = dh * heads, W = 3 * D;
        std::vector<Real> dp(seq);
        for (std::size_t b = 0; b < batch; ++b) {
          const Real* base = in.data().data() + b * seq * W;
          Real* gbase = gi.data().data() + b * seq * W;
          for (std::size_t h = 0; h < heads; ++h) {
            const Real* P = probs.data() + (b * heads + h) * seq * seq;
            for (std::size_t i = 0; i < seq; ++i) {
              const std::size_t width = causal ? i + 1 : seq;
              const Real* dout = go.data().data() + (b * seq + i) * D + h * dh;
              // dP_ij = dO_i . V_j ; dV_j += P_ij dO_i
              Real dot = 0;
              for (std::size_t j = 0; j < width; ++j) {
                const Real* v = base + j * W + 2 * D + h * dh;
                Real* dv = gbase + j * W + 2 * D + h * dh;
                const Real p = P[i * seq + j];
                Real s = 0;
                for (std::size_t c = 0; c < dh; ++c) {
                  s += dout[c] * v[c];
                  dv[c] += p * dout[c];
                }
                dp[j] = s;
                dot += p * s;
              }
              const Real* q = base + i * W + h * dh;
              Real* dq = gbase + i * W + h * dh;
              for (std::size_t j = 0; j < width; ++j) {
                const Real ds = P[i * seq + j] * (dp[j] - dot) * scale;
                const Real* k = base + j * W + D + h * dh;
                Real* dk = gbase + j * W + D + h * dh;
                for (std::size_t c = 0; c < dh; ++c) {
                  dq[c] += ds * k[c];
                  dk[c] += ds * q[c];
                }
              }
            }
          }
        }
      });
}

NodeId dropout(Graph& g, NodeId x, Real p, Rng& rng) {
  require(p >= Real(0) && p < Real(1), "dropout: p must be in [0, 1)");
  if (p == Real(0)) return x;
  const Tensor& xv = g.value(x);
  Tensor mask = Tensor::zeros_like(xv);
  const Real keep = Real(1) / (Real(1) - p);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < double(p) ? 0 : keep;
  Tensor out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return g.add_node("dropout", std::move(out), {x}, [mask = std::move(mask)](Graph& g, NodeId self) {
    const NodeId in = g.inputs(self)[0];
    if (!g.requires_grad(in)) return;
    const Tensor& go = g.grad(self);
    Tensor& gi = g.grad(in);
    for (std::size_t i = 0; i < go.size(); ++i) gi[i] += go[i] * mask[i];
  });
}

NodeId l2_normalize_rows(Graph& g, NodeId x) {
  const Tensor& xv = g.value(x);
  Tensor out = Tensor::zeros_like(xv);
  std::vector<Real> norms(xv.rows());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    Real s = 0;
    for (Real v : xv.row(r)) s += v * v;
    const Real n = std::sqrt(s);
    require(n > Real(0), "l2_normalize_rows: zero-norm row " + std::to_string(r));
    norms[r] = n;
    auto o = out.row(r);
    auto in = xv.row(r);
    for (std::size_t c = 0; c < o.size(); ++c) o[c] = in[c] / n;
  }
  return g.add_node("l2_normalize", std::move(out), {x},
                    [norms = std::move(norms)](Graph& g, NodeId self) {
                      const NodeId in = g.inputs(self)[0];
                      if (!g.requires_grad(in)) return;
                      const Tensor& y = g.value(self);
                      const Tensor& go = g.grad(self);
                      Tensor& gi = g.grad(in);
                      for (std::size_t r = 0; r < y.rows(); ++r) {
                        auto yr = y.row(r);
                        auto gr = go.row(r);
                        Real dot = 0;
                        for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * gr[c];
                        auto o = gi.row(r);
                        for (std::size_t c = 0; c < yr.size(); ++c) {
                          o[c] += (gr[c] - yr[c] * dot) / norms[r];
                        }
                      }
                    });
}

NodeId cross_entropy(Graph& g, NodeId logits, std::span<const std::int32_t> targets,
                     std::span<const Real> weights) {
  const Tensor& lv = g.value(logits);
  const std::size_t R = lv.rows(), V = lv.cols();
  require(targets.size() == R && weights.size() == R,
          "cross_entropy: targets/weights must have one entry per logit row");
  Tensor probs = Tensor::zeros_like(lv);
  Real total = 0;
  for (std::size_t r = 0; r < R; ++r) {
    if (weights[r] == Real(0)) continue;
    require(targets[r] >= 0 && static_cast<std::size_t>(targets[r]) < V,
            "cross_entropy: target id out of range");
    auto row = lv.row(r);
    Real m = -std::numeric_limits<Real>::infinity();
    for (Real v : row) m = std::max(m, v);
    Real z = 0;
    for (Real v : row) z += std::exp(v - m);
    const Real lse = m + std::log(z);
    total += weights[r] * (lse - row[targets[r]]);
    auto p = probs.row(r);
    for (std::size_t c = 0; c < V; ++c) p[c] = std::exp(row[c] - lse);
  }
  std::vector<std::int32_t> tv(targets.begin(), targets.end());
  std::vector<Real> wv(weights.begin(), weights.end());
  return g.add_node("cross_entropy", Tensor::scalar(total), {logits},
                    [probs = std::move(probs), tv = std::move(tv), wv = std::move(wv)](
                        Graph& g, NodeId self) {
                      const NodeId logits = g.inputs(self)[0];
                      if (!g.requires_grad(logits)) return;
                      const Real go = g.grad(self).item();
                      Tensor& gl = g.grad(logits);
                      for (std::size_t r = 0; r < tv.size(); ++r) {
                        if (wv[r] == Real(0)) continue;
                        auto p = probs.row(r);
                        auto out = gl.row(r);
                        const Real w = go * wv[r];
                        for (std::size_t c = 0; c < p.size(); ++c) out[c] += w * p[c];
                        out[tv[r]] -= w;
                      }
                    });
}

NodeId info_nce(Graph& g, NodeId logits, bool exclude_positive) {
  const Tensor& sv = g.value(logits);
  const std::size_t B = sv.rows();
  require(sv.cols() == B, "info_nce: similarity matrix must be square");
  require(B >= 2, "info_nce: needs at least two samples");
  Tensor soft = Tensor::zeros_like(sv);
  Real total = 0;
  for (std::size_t i = 0; i < B; ++i) {
    auto row = sv.row(i);
    Real m = -std::numeric_limits<Real>::infinity();
    for (std::size_t j = 0; j < B; ++j) {
      if (exclude_positive && j == i) continue;
      m = std::max(m, row[j]);
    }
    Real z = 0;
    for (std::size_t j = 0; j < B; ++j) {
      if (exclude_positive && j == i) continue;
      z += std::exp(row[j] - m);
    }
    const Real lse = m + std::log(z);
    total += lse - row[i];
    auto s = soft.row(i);
    for (std::size_t j = 0; j < B; ++j) {
      s[j] = (exclude_positive && j == i) ? Real(0) : std::exp(row[j] - lse);
    }
  }
  const Real inv_b = Real(1) / Real(B);
  return g.add_node("info_nce", Tensor::scalar(total * inv_b), {logits},
                    [soft = std::move(soft), inv_b](Graph& g, NodeId self) {
                      const NodeId logits = g.inputs(self)[0];
                      if (!g.requires_grad(logits)) return;
                      const Real go = g.grad(self).item() * inv_b;
                      Tensor& gl = g.grad(logits);
                      const std::size_t B = soft.rows();
                      for (std::size_t i = 0; i < B; ++i) {
                        for (std::size_t j = 0; j < B; ++j) {
                          gl.at(i, j) += go * (soft.at(i, j) - (i == j ? Real(1) : Real(0)));
                        }
                      }
                    });
}

NodeId sum(Graph& g, NodeId x) {
  Real s = 0;
  for (Real v : g.value(x).data()) s += v;
  return g.add_node("sum", Tensor::scalar(s), {x}, [](Graph& g, NodeId self) {
    const NodeId in = g.inputs(self)[0];
    if (!g.requires_grad(in)) return;
    const Real go = g.grad(self).item();
    for (Real& v : g.grad(in).storage()) v += go;
  });
}

NodeId mean(Graph& g, NodeId x) {
  const std::size_t n = g.value(x).size();
  return scale(g, sum(g, x), Real(1) / Real(n));
}

NodeId weighted_sum(Graph& g, NodeId x, const Tensor& weights) {
  const Tensor& xv = g.value(x);
  require(weights.size() == xv.size(), "weighted_sum: weight count mismatch");
  Real s = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i] * weights[i];
  return g.add_node("weighted_sum", Tensor::scalar(s), {x}, [weights](Graph& g, NodeId self) {
    const NodeId in = g.inputs(self)[0];
    if (!g.requires_grad(in)) return;
    const Real go = g.grad(self).item();
    Tensor& gi = g.grad(in);
    for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += go * weights[i];
  });
}

}  // namespace ops
INLG_NAMESPACE_END
