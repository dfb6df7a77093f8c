#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "absa/encoders.hpp"
#include "test_support.hpp"

using namespace absa;

namespace {

const ForwardCtx kEval{};  // eval mode, no dropout

SharedEncoder tiny_shared(Rng& rng, int emb_dim = 6) { return SharedEncoder(emb_dim, 2, 4, 4, 8, rng); }

}  // namespace

TEST_CASE("shared encoder shape and determinism") {
  Rng rng(1);
  SharedEncoder enc = tiny_shared(rng);
  Tensor one = Tensor::uniform({1, 6}, -1, 1, rng);
  Tensor h1 = enc.encode(one, kEval);
  CHECK(h1.rows() == 1);
  CHECK(h1.cols() == 8);
  CHECK(enc.out_dim() == 8);

  Tensor x = Tensor::uniform({5, 6}, -1, 1, rng);
  Tensor a = enc.encode(x, kEval);
  Tensor b = enc.encode(x, kEval);
  CHECK(a.rows() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("shared encoder annihilates zero input with zero biases") {
  Rng rng(2);
  SharedEncoder enc = tiny_shared(rng);
  Tensor zeros = Tensor::zeros({4, 6});
  Tensor h = enc.encode(zeros, kEval);
  for (double v : h.data()) CHECK(v == 0.0);
}

TEST_CASE("conv stack locality: two k=5 layers reach at most 4 tokens") {
  Rng rng(3);
  const int n = 12, d = 5;
  ConvStack stack(2, d, 6, 5, rng);
  Tensor base = Tensor::uniform({n, d}, -1, 1, rng);
  Tensor ref = stack.encode(base, kEval);

  const int poke = 6;
  Tensor poked = Tensor::from_data(base.shape(), {base.data().begin(), base.data().end()});
  for (int c = 0; c < d; ++c) poked.data()[static_cast<std::size_t>(poke) * d + c] += 0.71;
  Tensor out = stack.encode(poked, kEval);

  for (int i = 0; i < n; ++i) {
    double delta = 0.0;
    for (int j = 0; j < 6; ++j) delta += std::abs(out.at(i, j) - ref.at(i, j));
    if (std::abs(i - poke) <= 4) continue;  // inside the receptive field, may change
    CHECK(delta == 0.0);
  }
}

TEST_CASE("empty conv stack is the identity") {
  Rng rng(4);
  ConvStack stack(0, 7, 9, 5, rng);
  Tensor x = Tensor::uniform({3, 7}, -1, 1, rng);
  Tensor y = stack.encode(x, kEval);
  CHECK(y.node().get() == x.node().get());
  CHECK(stack.out_dim() == 7);
}

TEST_CASE("self attention n=2 forces the single off-diagonal weight") {
  Rng rng(5);
  Tensor h = Tensor::uniform({2, 4}, -1, 1, rng);
  Tensor w = Tensor::uniform({4, 4}, -1, 1, rng);
  Tensor p = Tensor::from_data({2}, {0.3, 0.9});
  auto res = opinion_gated_self_attention(h, p, w);
  CHECK(res.weights.at(0, 0) == 0.0);
  CHECK(res.weights.at(1, 1) == 0.0);
  CHECK(res.weights.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.weights.at(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  // context rows equal the other token
  for (int j = 0; j < 4; ++j) {
    CHECK(res.context.at(0, j) == doctest::Approx(h.at(1, j)).epsilon(1e-12));
    CHECK(res.context.at(1, j) == doctest::Approx(h.at(0, j)).epsilon(1e-12));
  }
}

TEST_CASE("zero bilinear matrix yields uniform off-diagonal rows") {
  Rng rng(6);
  const int n = 5;
  Tensor h = Tensor::uniform({n, 3}, -1, 1, rng);
  Tensor w = Tensor::zeros({3, 3});
  Tensor p = Tensor::uniform({n}, 0, 1, rng);
  auto res = opinion_gated_self_attention(h, p, w);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(res.weights.at(i, j) == doctest::Approx(i == j ? 0.0 : 1.0 / (n - 1)).epsilon(1e-9));
}

TEST_CASE("hand-evaluated scores: unit bilinear term with unit gates") {
  // h rows = e0, w = e00 so h_i W h_j^T = 1 for all pairs; row 0 scores are
  // then (-, 1, 0.5) and A_01 = e / (e + sqrt(e)).
  Tensor h = Tensor::from_data({3, 2}, {1, 0, 1, 0, 1, 0});
  Tensor w = Tensor::from_data({2, 2}, {1, 0, 0, 0});
  Tensor p = Tensor::from_data({3}, {1, 1, 1});
  auto res = opinion_gated_self_attention(h, p, w);
  const double e1 = std::exp(1.0), eh = std::exp(0.5);
  CHECK(res.weights.at(0, 1) == doctest::Approx(e1 / (e1 + eh)).epsilon(1e-9));
  CHECK(res.weights.at(0, 1) == doctest::Approx(0.6225).epsilon(1e-4));
  CHECK(res.weights.at(0, 2) == doctest::Approx(eh / (e1 + eh)).epsilon(1e-9));
}

TEST_CASE("attention matrix laws over random inputs") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(16));
    const int d = 3;
    Tensor h = Tensor::uniform({n, d}, -2, 2, rng);
    Tensor w = Tensor::uniform({d, d}, -2, 2, rng);
    Tensor p = Tensor::uniform({n}, 0, 1, rng);
    auto res = opinion_gated_self_attention(h, p, w);
    for (int i = 0; i < n; ++i) {
      CHECK(res.weights.at(i, i) == 0.0);
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        CHECK(res.weights.at(i, j) >= 0.0);
        sum += res.weights.at(i, j);
      }
      if (n > 1) CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("distance factor decays scores monotonically") {
  // constant positive bilinear term and gates: nearer tokens get more mass
  const int n = 6;
  Tensor h = Tensor::from_data({n, 1}, std::vector<double>(n, 1.0));
  Tensor w = Tensor::from_data({1, 1}, {2.0});
  Tensor p = Tensor::from_data({n}, std::vector<double>(n, 1.0));
  auto res = opinion_gated_self_attention(h, p, w);
  for (int i = 0; i < n; ++i)
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = 0; j2 < n; ++j2) {
        if (j1 == i || j2 == i) continue;
        if (std::abs(i - j1) < std::abs(i - j2)) CHECK(res.weights.at(i, j1) > res.weights.at(i, j2));
      }
}

TEST_CASE("gating nullity: zero opinion probability flattens the column") {
  Rng rng(8);
  const int n = 4;
  Tensor h = Tensor::uniform({n, 3}, -1, 1, rng);
  Tensor w = Tensor::uniform({3, 3}, -1, 1, rng);

  // all gates zero -> every score collapses to 0 -> fully uniform rows
  Tensor p0 = Tensor::zeros({n});
  auto res0 = opinion_gated_self_attention(h, p0, w);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) CHECK(res0.weights.at(i, j) == doctest::Approx(1.0 / (n - 1)).epsilon(1e-9));

  // a single zeroed gate pins that column's score at the uniform baseline
  Tensor p = Tensor::from_data({n}, {0.8, 0.0, 0.6, 0.9});
  auto res = opinion_gated_self_attention(h, p, w);
  for (int i = 0; i < n; ++i) {
    if (i == 1) continue;
    double mx = 0.0;
    for (int j = 0; j < n; ++j) mx = std::max(mx, res.weights.at(i, j));
    CHECK(res.weights.at(i, 1) <= mx + 1e-12);
    // exp(0)=1 never exceeds the softmax share of the largest-score column
  }
}

TEST_CASE("attended vectors stay inside the componentwise hull of h") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(8));
    Tensor h = Tensor::uniform({n, 4}, -3, 3, rng);
    Tensor w = Tensor::uniform({4, 4}, -1, 1, rng);
    Tensor p = Tensor::uniform({n}, 0, 1, rng);
    auto res = opinion_gated_self_attention(h, p, w);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 4; ++j) {
        double lo = 1e300, hi = -1e300;
        for (int k = 0; k < n; ++k) {
          lo = std::min(lo, h.at(k, j));
          hi = std::max(hi, h.at(k, j));
        }
        CHECK(res.context.at(i, j) >= lo - 1e-9);
        CHECK(res.context.at(i, j) <= hi + 1e-9);
      }
  }
}

TEST_CASE("n=1 attention is defined as zero context") {
  Rng rng(10);
  Tensor h = Tensor::uniform({1, 4}, -1, 1, rng);
  Tensor w = Tensor::uniform({4, 4}, -1, 1, rng);
  auto res = opinion_gated_self_attention(h, Tensor::from_data({1}, {0.5}), w);
  CHECK(res.weights.at(0, 0) == 0.0);
  for (int j = 0; j < 4; ++j) CHECK(res.context.at(0, j) == 0.0);
}

TEST_CASE("opinion probabilities outside [0,1] are rejected") {
  Rng rng(11);
  Tensor h = Tensor::uniform({3, 2}, -1, 1, rng);
  Tensor w = Tensor::uniform({2, 2}, -1, 1, rng);
  CHECK_THROWS_AS(opinion_gated_self_attention(h, Tensor::from_data({3}, {0.5, 1.2, 0.1}), w),
                  std::invalid_argument);
  CHECK_THROWS_AS(opinion_gated_self_attention(h, Tensor::from_data({3}, {-0.2, 0.5, 0.1}), w),
                  std::invalid_argument);
}

TEST_CASE("document attention") {
  // identical rows -> uniform weights
  Tensor h = Tensor::from_data({3, 2}, {1, 2, 1, 2, 1, 2});
  Rng rng(12);
  Tensor w = Tensor::uniform({2}, -1, 1, rng);
  auto res = doc_attention(h, w);
  for (int i = 0; i < 3; ++i) CHECK(res.weights.at(i) == doctest::Approx(1.0 / 3).epsilon(1e-9));

  // single token: weight 1 and pooled copy
  Tensor one = Tensor::from_data({1, 2}, {0.4, -0.7});
  auto single = doc_attention(one, w);
  CHECK(single.weights.at(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(single.pooled.at(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(single.pooled.at(0, 1) == doctest::Approx(-0.7).epsilon(1e-12));

  // logits (1, 0) by construction
  Tensor h2 = Tensor::from_data({2, 1}, {1.0, 0.0});
  Tensor w2 = Tensor::from_data({1}, {1.0});
  auto two = doc_attention(h2, w2);
  CHECK(two.weights.at(0) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(two.weights.at(1) == doctest::Approx(0.2689).epsilon(1e-4));
}

TEST_CASE("gradients flow through both attention mechanisms") {
  Rng rng(13);
  const int n = 4, d = 3;
  Tensor h = Tensor::uniform({n, d}, -1, 1, rng, true);
  Tensor w = Tensor::uniform({d, d}, -1, 1, rng, true);
  Tensor p = Tensor::uniform({n}, 0.1, 0.9, rng, true);
  Tensor dv = Tensor::uniform({d}, -1, 1, rng, true);

  auto rebuild = [&]() {
    auto att = opinion_gated_self_attention(h, p, w);
    auto doc = doc_attention(att.context, dv);
    return sum_all(mul(doc.pooled, doc.pooled));
  };
  auto failures = absa::testing::check_gradients(rebuild, {{"h", h}, {"w", w}, {"p", p}, {"dv", dv}});
  for (const auto& f : failures)
    MESSAGE("grad mismatch at ", f.param, "[", f.index, "]: ", f.analytic, " vs ", f.numeric);
  CHECK(failures.empty());
}
