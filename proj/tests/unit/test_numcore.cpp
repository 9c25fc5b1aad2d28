// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "inlg/numcore/checkpoint.hpp"
#include "inlg/numcore/graph.hpp"
#include "inlg/numcore/optim.hpp"

using namespace inlg;
using testing::bit_equal;
using testing::random_tensor;

namespace {

// plain triple loop, no shared code with the library kernels
std::vector<double> naive_matmul(const Tensor& a, const Tensor& b, bool b_transposed) {
  const std::size_t m = a.rows(), k = a.cols();
  const std::size_t n = b_transposed ? b.rows() : b.cols();
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p)
        c[i * n + j] += double(a.at(i, p)) * double(b_transposed ? b.at(j, p) : b.at(p, j));
  return c;
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("shape contracts") {
    CHECK_THROWS_AS(Tensor(Shape{}), ContractViolation);
    CHECK_THROWS_AS(Tensor(Shape{2, 0}), ContractViolation);
    CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<Real>{1, 2, 3}), ContractViolation);
    Tensor t({2, 3}, 1.5f);
    CHECK(t.size() == 6);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK(t.at(1, 2) == 1.5f);
    CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
    CHECK_THROWS_AS(t.reshaped({4, 2}), ContractViolation);
  }

  TEST_CASE("finite check reports the node") {
    Tensor t({3});
    CHECK(t.all_finite());
    t[1] = std::numeric_limits<Real>::quiet_NaN();
    CHECK_FALSE(t.all_finite());
    try {
      t.check_finite("probe", 17);
      FAIL("expected NumericFault");
    } catch (const NumericFault& e) {
      CHECK(e.node_id() == 17);
    }
  }
}

TEST_SUITE("rng") {
  TEST_CASE("streams are deterministic and independent") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng s1 = Rng::for_stream(42, "init"), s2 = Rng::for_stream(42, "data");
    CHECK(s1.next_u64() != s2.next_u64());
  }

  TEST_CASE("below stays in range and covers it") {
    Rng r(1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
      auto v = r.below(7);
      CHECK(v < 7);
      seen.insert(v);
    }
    CHECK(seen.size() == 7);
  }

  TEST_CASE("normal moments") {
    Rng r(3);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      double x = r.normal();
      s += x;
      s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.01);
  }

  TEST_CASE("shuffle is a permutation") {
    Rng r(9);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    r.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
    CHECK(v != sorted);
  }
}

TEST_SUITE("graph") {
  TEST_CASE("x*x at 3 has derivative 6") {
    Graph g;
    NodeId x = g.leaf(Tensor::scalar(3));
    NodeId y = ops::mul(g, x, x);
    g.backward(y);
    CHECK(g.grad(x).item() == doctest::Approx(6.0));
  }

  TEST_CASE("cross-entropy gradient is softmax minus one-hot") {
    Rng rng(5);
    Tensor z = random_tensor(rng, {1, 6});
    Graph g;
    NodeId zn = g.leaf(z);
    std::vector<std::int32_t> tgt{4};
    std::vector<Real> w{1};
    g.backward(ops::cross_entropy(g, zn, tgt, w));
    double mx = *std::max_element(z.data().begin(), z.data().end()), den = 0;
    for (Real v : z.data()) den += std::exp(double(v) - mx);
    for (std::size_t i = 0; i < 6; ++i) {
      double p = std::exp(double(z[i]) - mx) / den;
      CHECK(g.grad(zn)[i] == doctest::Approx(p - (i == 4 ? 1.0 : 0.0)).epsilon(1e-5));
    }
  }

  TEST_CASE("matmul and matmul_nt agree with a naive oracle") {
    Rng rng(11);
    Tensor a = random_tensor(rng, {5, 7}), b = random_tensor(rng, {7, 3}),
           bt = random_tensor(rng, {4, 7});
    Graph g;
    const Tensor& c = g.value(ops::matmul(g, g.constant(a), g.constant(b)));
    auto ref = naive_matmul(a, b, false);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(c[i] == doctest::Approx(ref[i]).epsilon(1e-5));
    const Tensor& d = g.value(ops::matmul_nt(g, g.constant(a), g.constant(bt)));
    auto ref2 = naive_matmul(a, bt, true);
    for (std::size_t i = 0; i < ref2.size(); ++i) CHECK(d[i] == doctest::Approx(ref2[i]).epsilon(1e-5));
  }

  TEST_CASE("softmax rows sum to one; layer norm standardizes") {
    Rng rng(2);
    Tensor x = random_tensor(rng, {4, 9}, 3.0);
    Graph g;
    const Tensor& s = g.value(ops::softmax_rows(g, g.constant(x)));
    for (std::size_t r = 0; r < 4; ++r) {
      double sum = 0;
      for (Real v : s.row(r)) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
    const Tensor& y = g.value(ops::layer_norm(g, g.constant(x), g.constant(Tensor({9}, 1)),
                                              g.constant(Tensor({9}, 0))));
    for (std::size_t r = 0; r < 4; ++r) {
      double m = 0, v = 0;
      for (Real e : y.row(r)) m += e;
      m /= 9;
      for (Real e : y.row(r)) v += (e - m) * (e - m);
      CHECK(std::abs(m) < 1e-5);
      CHECK(v / 9 == doctest::Approx(1.0).epsilon(1e-3));
    }
  }

  TEST_CASE("attention matches a single-head oracle and is causal") {
    Rng rng(8);
    const std::size_t seq = 5, d = 4;
    Tensor qkv = random_tensor(rng, {seq, 3 * d});
    Graph g;
    const Tensor out = g.value(ops::attention(g, g.constant(qkv), 1, seq, 1, true));
    for (std::size_t i = 0; i < seq; ++i) {
      std::vector<double> w(i + 1);
      double mx = -1e300;
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0;
        for (std::size_t c = 0; c < d; ++c) s += double(qkv.at(i, c)) * qkv.at(j, d + c);
        w[j] = s / std::sqrt(double(d));
        mx = std::max(mx, w[j]);
      }
      double z = 0;
      for (auto& e : w) z += (e = std::exp(e - mx));
      for (std::size_t c = 0; c < d; ++c) {
        double o = 0;
        for (std::size_t j = 0; j <= i; ++j) o += w[j] / z * qkv.at(j, 2 * d + c);
        CHECK(out.at(i, c) == doctest::Approx(o).epsilon(1e-5));
      }
    }
    // perturbing the last row leaves earlier outputs untouched
    Tensor qkv2 = qkv;
    for (std::size_t c = 0; c < 3 * d; ++c) qkv2.at(seq - 1, c) += 1;
    Graph g2;
    const Tensor out2 = g2.value(ops::attention(g2, g2.constant(qkv2), 1, seq, 1, true));
    for (std::size_t i = 0; i + 1 < seq; ++i)
      for (std::size_t c = 0; c < d; ++c) CHECK(out2.at(i, c) == out.at(i, c));
  }

  TEST_CASE("backward errors") {
    Graph g;
    NodeId v = g.leaf(Tensor({2}, 1));
    CHECK_THROWS_AS(g.backward(v), ContractViolation);
    Tensor bad({1}, std::numeric_limits<Real>::infinity());
    NodeId b = g.leaf(bad);
    NodeId loss = ops::sum(g, ops::scale(g, b, 2));
    CHECK_THROWS_AS(g.backward(loss), NumericFault);
  }

  TEST_CASE("unreached parameters get zero gradients; frozen ones are constants") {
    ParamStore ps;
    ps["a"] = Tensor({2}, 1);
    ps["b"] = Tensor({2}, 2);
    ps["frozen"] = Tensor({2}, 3);
    Graph g(ps, [](const std::string& n) { return n != "frozen"; });
    NodeId a = g.param("a");
    CHECK(g.param("a") == a);
    NodeId f = g.param("frozen");
    CHECK_FALSE(g.requires_grad(f));
    auto res = g.backward(ops::sum(g, ops::mul(g, a, f)));
    CHECK(res.reached == std::set<std::string>{"a"});
    CHECK(res.grads.at("b")[0] == 0);
    CHECK(res.grads.at("a")[0] == 3);
  }

  TEST_CASE("gradient of a sum of losses is the sum of gradients") {
    Rng rng(4);
    Tensor x = random_tensor(rng, {3, 4}), w = random_tensor(rng, {4, 2});
    auto run = [&](int which) {
      Graph g;
      NodeId wn = g.leaf(w);
      NodeId h = ops::matmul(g, g.constant(x), wn);
      NodeId l1 = ops::sum(g, ops::tanh(g, h));
      NodeId l2 = ops::mean(g, ops::mul(g, h, h));
      NodeId loss = which == 0 ? l1 : which == 1 ? l2 : ops::add(g, l1, l2);
      g.backward(loss);
      return g.grad(wn);
    };
    Tensor g1 = run(0), g2 = run(1), g12 = run(2);
    for (std::size_t i = 0; i < g12.size(); ++i)
      CHECK(g12[i] == doctest::Approx(double(g1[i]) + g2[i]).epsilon(1e-6));
  }
}

TEST_SUITE("optimizer") {
  TEST_CASE("decay-only step") {
    ParamStore ps{{"w", Tensor({1}, 1)}};
    OptimizerState st;
    std::map<std::string, Tensor> grads{{"w", Tensor({1}, 0)}};
    optimizer_step(st, ps, grads, 0.01f, {});
    CHECK(ps["w"][0] == doctest::Approx(0.9999));
  }

  TEST_CASE("first adaptive step is -lr*sign(g)") {
    ParamStore ps{{"w", Tensor({1}, 0)}};
    OptimizerState st;
    st.config.weight_decay = 0;
    st.config.eps = 0;
    std::map<std::string, Tensor> grads{{"w", Tensor({1}, 2)}};
    optimizer_step(st, ps, grads, 0.001f, {});
    CHECK(ps["w"][0] == doctest::Approx(-0.001).epsilon(1e-6));
    CHECK(st.slots.at("w").step == 1);
    CHECK(st.slots.at("w").m.shape() == ps["w"].shape());
  }

  TEST_CASE("lr 0 leaves parameters bit-identical while moments advance") {
    Rng rng(1);
    ParamStore ps{{"w", random_tensor(rng, {3, 3})}};
    const Tensor before = ps["w"];
    OptimizerState st;
    std::map<std::string, Tensor> grads{{"w", random_tensor(rng, {3, 3})}};
    optimizer_step(st, ps, grads, 0, {});
    CHECK(bit_equal(ps["w"], before));
    CHECK(st.slots.at("w").step == 1);
    CHECK(st.slots.at("w").m[0] != 0);
  }

  TEST_CASE("identical steps are bit-identical; unlisted names untouched") {
    Rng rng(7);
    ParamStore base{{"a", random_tensor(rng, {4})}, {"b", random_tensor(rng, {4})}};
    std::map<std::string, Tensor> grads{{"a", random_tensor(rng, {4})},
                                        {"b", random_tensor(rng, {4})}};
    ParamStore p1 = base, p2 = base;
    OptimizerState s1, s2;
    for (int i = 0; i < 3; ++i) {
      optimizer_step(s1, p1, grads, 0.01f, {"a"});
      optimizer_step(s2, p2, grads, 0.01f, {"a"});
    }
    CHECK(bit_equal(p1["a"], p2["a"]));
    CHECK(bit_equal(p1["b"], base["b"]));
    CHECK_FALSE(s1.slots.contains("b"));
  }

  TEST_CASE("shape mismatch is a contract violation") {
    ParamStore ps{{"w", Tensor({2})}};
    OptimizerState st;
    std::map<std::string, Tensor> grads{{"w", Tensor({3})}};
    CHECK_THROWS_AS(optimizer_step(st, ps, grads, 0.1f, {}), ContractViolation);
  }

  TEST_CASE("global-norm clipping") {
    std::map<std::string, Tensor> grads{{"a", Tensor({2}, {3, 0})}, {"b", Tensor({1}, {4})}};
    Real n = clip_grad_norm(grads, {"a", "b"}, 1);
    CHECK(n == doctest::Approx(5));
    double after = std::sqrt(double(grads["a"][0]) * grads["a"][0] + double(grads["b"][0]) * grads["b"][0]);
    CHECK(after == doctest::Approx(1).epsilon(1e-5));
  }

  TEST_CASE("warmup schedule") {
    LRSchedule s{2e-5f, 400};
    CHECK(s.lr_at(0) == 0);
    CHECK(s.lr_at(200) == doctest::Approx(1e-5));
    CHECK(s.lr_at(400) == doctest::Approx(2e-5));
    CHECK(s.lr_at(10000) == doctest::Approx(2e-5));
    for (std::uint64_t i = 0; i < 400; ++i) CHECK(s.lr_at(i) <= s.lr_at(i + 1));
    LRSchedule none{1e-3f, 0};
    CHECK(none.lr_at(0) == doctest::Approx(1e-3));
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip is bit-exact") {
    Rng rng(12);
    Checkpoint ck;
    ck.header["model.d_model"] = "8";
    ck.header["note"] = "hello world";
    ck.params["x.w"] = random_tensor(rng, {3, 5});
    ck.params["x.b"] = random_tensor(rng, {5});
    ck.params["deep"] = random_tensor(rng, {2, 3, 4});
    const std::string bytes = encode_checkpoint(ck);
    CHECK(bytes.substr(0, 8) == "INLGCKPT");
    Checkpoint back = decode_checkpoint(bytes);
    CHECK(back.header == ck.header);
    for (const auto& [n, t] : ck.params) CHECK(bit_equal(back.params.at(n), t));
    CHECK(encode_checkpoint(back) == bytes);
  }

  TEST_CASE("corrupt files are rejected") {
    Checkpoint ck;
    ck.params["w"] = Tensor({2}, 1);
    std::string bytes = encode_checkpoint(ck);
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(bad_magic), FormatError);
    std::string bad_version = bytes;
    bad_version[8] = 9;
    CHECK_THROWS_AS(decode_checkpoint(bad_version), FormatError);
    CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 1)), FormatError);
    CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), FormatError);
  }
}
