#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lumio/rng.hpp"
#include "lumio/vonet.hpp"
#include "oracles.hpp"

using namespace lumio;
using namespace lumio::vonet;

namespace {

Image random_image(Rng& rng, int h, int w) {
  Image img;
  img.height = h;
  img.width = w;
  for (auto& c : img.channels) {
    c.resize(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) c(y, x) = rng.uniform01() * 0.999;
  }
  return img;
}

MatrixXd random_matrix(Rng& rng, int r, int c, double sigma = 1.0) {
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.gaussian(sigma);
  return m;
}

double relative_error(double got, double want) {
  return std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)});
}

// ---------------------------------------------------------------------------
// Straight-line re-implementation of the full encoder arithmetic with plain
// loops; mirrors the documented wiring without sharing any library code.
// ---------------------------------------------------------------------------

std::vector<double> ln_row_loops(const std::vector<double>& x, const VectorXd& scale,
                                 const VectorXd& shift) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (x[i] - mean) / std::sqrt(var + 1e-6) * scale[static_cast<int>(i)] +
             shift[static_cast<int>(i)];
  }
  return out;
}

double gelu_loops(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

VectorXd encoder_forward_loops(const Image& frame_t, const Image& frame_t1,
                               const ModelWeights& w) {
  const int h = frame_t.height, wd = frame_t.width;
  const int p = w.config.patch;
  const int c_br = w.config.brightness_channels;
  const int d = w.config.model_dim;
  const int grid_h = h / p, grid_w = wd / p;
  const int n_patch = grid_h * grid_w;
  const Image* frames[2] = {&frame_t, &frame_t1};

  std::vector<std::vector<double>> x(2 * n_patch + 1, std::vector<double>(d, 0.0));
  std::vector<std::vector<double>> gate(2 * n_patch + 1, std::vector<double>(d, 1.0));
  for (int m = 0; m < d; ++m) x[0][m] = w.cls_token[m];

  for (int f = 0; f < 2; ++f) {
    const Image& img = *frames[f];

    // Brightness prior.
    MatrixXd prior(h, wd);
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < wd; ++xx) {
        prior(y, xx) = (img.channels[0](y, xx) + img.channels[1](y, xx) +
                        img.channels[2](y, xx)) /
                       3.0;
      }

    // 1x1 conv over [I, prior].
    std::vector<MatrixXd> mixed(c_br, MatrixXd::Zero(h, wd));
    for (int oc = 0; oc < c_br; ++oc)
      for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < wd; ++xx) {
          double acc = w.br_conv1_b[oc];
          for (int ic = 0; ic < 3; ++ic)
            acc += w.br_conv1_w(oc, ic) * img.channels[ic](y, xx);
          acc += w.br_conv1_w(oc, 3) * prior(y, xx);
          mixed[oc](y, xx) = acc;
        }

    // 9x9 depth-wise conv, zero padding 4.
    std::vector<MatrixXd> fbr(c_br, MatrixXd::Zero(h, wd));
    for (int oc = 0; oc < c_br; ++oc)
      for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < wd; ++xx) {
          double acc = w.br_dw_b[oc];
          for (int ky = -4; ky <= 4; ++ky)
            for (int kx = -4; kx <= 4; ++kx) {
              const int sy = y + ky, sx = xx + kx;
              if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
              acc += mixed[oc](sy, sx) * w.br_dw_w[oc](ky + 4, kx + 4);
            }
          fbr[oc](y, xx) = acc;
        }

    // 1x1 conv to the enhanced image.
    std::vector<MatrixXd> ibr(3, MatrixXd::Zero(h, wd));
    for (int oc = 0; oc < 3; ++oc)
      for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < wd; ++xx) {
          double acc = w.br_conv2_b[oc];
          for (int ic = 0; ic < c_br; ++ic) acc += w.br_conv2_w(oc, ic) * fbr[ic](y, xx);
          ibr[oc](y, xx) = acc;
        }

    // Patch embedding of the enhanced image + frame embedding; pooled gate.
    for (int gy = 0; gy < grid_h; ++gy)
      for (int gx = 0; gx < grid_w; ++gx) {
        const int idx = gy * grid_w + gx;
        std::vector<double> flat(3 * p * p);
        for (int ch = 0; ch < 3; ++ch)
          for (int py = 0; py < p; ++py)
            for (int px = 0; px < p; ++px)
              flat[ch * p * p + py * p + px] = ibr[ch](gy * p + py, gx * p + px);

        const int row = 1 + f * n_patch + idx;
        for (int m = 0; m < d; ++m) {
          double acc = w.embed_b[m];
          for (int q = 0; q < 3 * p * p; ++q) acc += w.embed_w(m, q) * flat[q];
          x[row][m] = acc + w.pos_embed(idx, m) + w.frame_embed(f, m);
        }

        std::vector<double> pooled(c_br, 0.0);
        for (int ch = 0; ch < c_br; ++ch) {
          double acc = 0.0;
          for (int py = 0; py < p; ++py)
            for (int px = 0; px < p; ++px) acc += fbr[ch](gy * p + py, gx * p + px);
          pooled[ch] = acc / (p * p);
        }
        for (int m = 0; m < d; ++m) {
          double acc = w.gate_b[m];
          for (int ch = 0; ch < c_br; ++ch) acc += w.gate_w(m, ch) * pooled[ch];
          gate[row][m] = acc;
        }
      }
  }

  const int n_tokens = 2 * n_patch + 1;
  for (const auto& layer : w.layers) {
    MatrixXd q(n_tokens, d), k(n_tokens, d), v(n_tokens, d), gm(n_tokens, d);
    for (int i = 0; i < n_tokens; ++i) {
      const auto normed = ln_row_loops(x[i], layer.ln1_scale, layer.ln1_shift);
      for (int m = 0; m < d; ++m) {
        double aq = layer.bq[m], ak = layer.bk[m], av = layer.bv[m];
        for (int t = 0; t < d; ++t) {
          aq += layer.wq(m, t) * normed[t];
          ak += layer.wk(m, t) * normed[t];
          av += layer.wv(m, t) * normed[t];
        }
        q(i, m) = aq;
        k(i, m) = ak;
        v(i, m) = av;
        gm(i, m) = gate[i][m];
      }
    }
    const MatrixXd attn = oracles::guided_attention_loops(q, k, v, gm, layer.alpha);
    for (int i = 0; i < n_tokens; ++i)
      for (int m = 0; m < d; ++m) x[i][m] += attn(i, m);

    for (int i = 0; i < n_tokens; ++i) {
      const auto normed = ln_row_loops(x[i], layer.ln2_scale, layer.ln2_shift);
      std::vector<double> hidden(w.config.ffn_dim);
      for (int hh = 0; hh < w.config.ffn_dim; ++hh) {
        double acc = layer.ffn_b1[hh];
        for (int t = 0; t < d; ++t) acc += layer.ffn_w1(hh, t) * normed[t];
        hidden[hh] = gelu_loops(acc);
      }
      for (int m = 0; m < d; ++m) {
        double acc = layer.ffn_b2[m];
        for (int hh = 0; hh < w.config.ffn_dim; ++hh)
          acc += layer.ffn_w2(m, hh) * hidden[hh];
        x[i][m] += acc;
      }
    }
  }

  VectorXd cls(d);
  for (int m = 0; m < d; ++m) cls[m] = x[0][m];
  return cls;
}

Vec6 decoder_forward_loops(const VectorXd& cls, const ModelWeights& w) {
  std::vector<double> in(cls.data(), cls.data() + cls.size());
  const auto normed = ln_row_loops(in, w.dec_ln_scale, w.dec_ln_shift);
  std::vector<double> hidden(w.config.decoder_hidden);
  for (int i = 0; i < w.config.decoder_hidden; ++i) {
    double acc = w.dec_b1[i];
    for (int j = 0; j < w.config.model_dim; ++j) acc += w.dec_w1(i, j) * normed[j];
    hidden[i] = gelu_loops(acc);
  }
  std::vector<double> refined(w.config.model_dim);
  for (int i = 0; i < w.config.model_dim; ++i) {
    double acc = w.dec_b2[i];
    for (int j = 0; j < w.config.decoder_hidden; ++j) acc += w.dec_w2(i, j) * hidden[j];
    refined[i] = acc;
  }
  Vec6 out;
  for (int i = 0; i < 6; ++i) {
    double acc = w.out_b[i];
    for (int j = 0; j < w.config.model_dim; ++j) acc += w.out_w(i, j) * refined[j];
    out[i] = acc;
  }
  return out;
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.patch = 16;
  cfg.image_height = 32;
  cfg.image_width = 32;
  cfg.model_dim = 4;
  cfg.layers = 1;
  cfg.brightness_channels = 2;
  cfg.heads = 1;
  cfg.ffn_dim = 8;
  cfg.decoder_hidden = 4;
  return cfg;
}

}  // namespace

TEST_SUITE("vonet") {

TEST_CASE("brightness prior of a uniform gray image") {
  const Image img = Image::constant(8, 8, 0.5);
  const BrightnessPrior prior = brightness_prior(img);
  CHECK((prior.array() - 0.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("brightness prior averages channels per pixel") {
  Image img = Image::constant(4, 4, 0.0);
  img.channels[0](1, 2) = 1.0;
  img.channels[1](1, 2) = 0.5;
  img.channels[2](1, 2) = 0.0;
  CHECK(brightness_prior(img)(1, 2) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("brightness prior matches an elementwise loop oracle") {
  Rng rng(31);
  const Image img = random_image(rng, 12, 9);
  const BrightnessPrior prior = brightness_prior(img);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 9; ++x) {
      const double expected =
          (img.channels[0](y, x) + img.channels[1](y, x) + img.channels[2](y, x)) / 3.0;
      CHECK(std::abs(prior(y, x) - expected) < 1e-12);
    }
}

TEST_CASE("brightness prior is linear in pixel scale") {
  Rng rng(32);
  const Image img = random_image(rng, 8, 8);
  Image scaled = img;
  for (auto& c : scaled.channels) c *= 0.25;
  const BrightnessPrior a = brightness_prior(img);
  const BrightnessPrior b = brightness_prior(scaled);
  CHECK((b - 0.25 * a).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("brightness estimator with zero weights returns zeros") {
  const auto w = ModelWeights::zeros(tiny_config());
  Rng rng(33);
  const Image img = random_image(rng, 32, 32);
  const auto [enhanced, feature] = brightness_estimator(img, brightness_prior(img), w);
  for (const auto& c : enhanced.channels) CHECK(c.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& c : feature.channels) CHECK(c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("brightness estimator output shapes at 224x224, C=8") {
  ModelConfig cfg = tiny_config();
  cfg.image_height = 224;
  cfg.image_width = 224;
  cfg.brightness_channels = 8;
  const auto w = ModelWeights::zeros(cfg);
  Rng rng(34);
  const Image img = random_image(rng, 224, 224);
  const auto [enhanced, feature] = brightness_estimator(img, brightness_prior(img), w);
  CHECK(enhanced.height == 224);
  CHECK(enhanced.width == 224);
  CHECK(feature.channels.size() == 8);
  for (const auto& c : feature.channels) {
    CHECK(c.rows() == 224);
    CHECK(c.cols() == 224);
  }
}

TEST_CASE("delta depth-wise kernel passes the 1x1 stage through exactly") {
  ModelConfig cfg = tiny_config();
  cfg.brightness_channels = 2;
  auto w = ModelWeights::zeros(cfg);
  Rng rng(35);
  // Arbitrary 1x1 mixing, delta depth-wise kernel (center tap only).
  w.br_conv1_w << 0.3, -0.2, 0.5, 0.1,
                  -0.4, 0.25, 0.0, 0.6;
  for (auto& k : w.br_dw_w) k(4, 4) = 1.0;

  const Image img = random_image(rng, 5, 5);
  const BrightnessPrior prior = brightness_prior(img);
  const auto [enhanced, feature] = brightness_estimator(img, prior, w);

  // Hand-computed convolution oracle for the first 1x1 stage.
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x)
      for (int oc = 0; oc < 2; ++oc) {
        const double expected = w.br_conv1_w(oc, 0) * img.channels[0](y, x) +
                                w.br_conv1_w(oc, 1) * img.channels[1](y, x) +
                                w.br_conv1_w(oc, 2) * img.channels[2](y, x) +
                                w.br_conv1_w(oc, 3) * prior(y, x);
        CHECK(std::abs(feature.channels[oc](y, x) - expected) < 1e-15);
      }
}

TEST_CASE("guided attention with all-ones gate equals standard attention") {
  Rng rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4, d = 1 + trial % 3;
    const MatrixXd q = random_matrix(rng, n, d), k = random_matrix(rng, n, d),
                   v = random_matrix(rng, n, d);
    const MatrixXd ones = MatrixXd::Ones(n, d);
    const double alpha = rng.uniform(0.5, 3.0);
    const MatrixXd got = guided_attention(q, k, v, ones, alpha);
    const MatrixXd expected = oracles::standard_attention_loops(q, k, v, alpha);
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("guided attention with one token returns the gated value") {
  Rng rng(37);
  const MatrixXd q = random_matrix(rng, 1, 3), k = random_matrix(rng, 1, 3),
                 v = random_matrix(rng, 1, 3), g = random_matrix(rng, 1, 3);
  const MatrixXd out = guided_attention(q, k, v, g, 1.3);
  CHECK((out - v.cwiseProduct(g)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("guided attention matches the brute-force loop oracle") {
  MatrixXd q(3, 2), k(3, 2), v(3, 2), g(3, 2);
  q << 1, 0, 2, -1, 0, 1;
  k << 1, 1, -1, 0, 2, 1;
  v << 3, -2, 1, 4, 0, 2;
  g << 1, 2, 0, 1, -1, 1;
  const MatrixXd got = guided_attention(q, k, v, g, 2.0);
  const MatrixXd expected = oracles::guided_attention_loops(q, k, v, g, 2.0);
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("attention weights are a convex combination per query") {
  // With V = I and an all-ones gate the output is the weight matrix itself.
  Rng rng(38);
  const int n = 5;
  const MatrixXd q = random_matrix(rng, n, n), k = random_matrix(rng, n, n);
  const MatrixXd weights =
      guided_attention(q, k, MatrixXd::Identity(n, n), MatrixXd::Ones(n, n), 1.7);
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(weights.row(i).sum() - 1.0) < 1e-9);
    CHECK(weights.row(i).minCoeff() >= 0.0);
    CHECK(weights.row(i).maxCoeff() <= 1.0);
  }
}

TEST_CASE("guided attention rejects invalid input") {
  const MatrixXd m = MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(guided_attention(m, m, m, m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(guided_attention(m, m, m, m, -1.0), std::invalid_argument);
  MatrixXd bad = m;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(guided_attention(bad, m, m, m, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(guided_attention(m, m, m, MatrixXd::Ones(3, 2), 1.0),
                  std::invalid_argument);
}

TEST_CASE("attention gradients vanish for zero upstream") {
  Rng rng(39);
  const MatrixXd q = random_matrix(rng, 3, 2), k = random_matrix(rng, 3, 2),
                 v = random_matrix(rng, 3, 2), g = random_matrix(rng, 3, 2);
  const auto grads = guided_attention_grad(q, k, v, g, 1.2, MatrixXd::Zero(3, 2));
  CHECK(grads.q.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.k.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.v.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.gate.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.alpha == 0.0);
}

TEST_CASE("attention gradients match central finite differences") {
  Rng rng(40);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 3, d = 2 + trial % 2;
    MatrixXd q = random_matrix(rng, n, d), k = random_matrix(rng, n, d),
             v = random_matrix(rng, n, d), g = random_matrix(rng, n, d);
    const double alpha = rng.uniform(0.6, 2.5);
    const MatrixXd upstream = random_matrix(rng, n, d);

    const auto grads = guided_attention_grad(q, k, v, g, alpha, upstream);
    auto loss = [&](const MatrixXd& qq, const MatrixXd& kk, const MatrixXd& vv,
                    const MatrixXd& gg, double aa) {
      return guided_attention(qq, kk, vv, gg, aa).cwiseProduct(upstream).sum();
    };

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) {
        auto wiggle = [&](MatrixXd& target, double delta) {
          target(i, j) += delta;
          const double value = loss(q, k, v, g, alpha);
          target(i, j) -= delta;
          return value;
        };
        const double fd_q = (wiggle(q, h) - wiggle(q, -h)) / (2.0 * h);
        const double fd_k = (wiggle(k, h) - wiggle(k, -h)) / (2.0 * h);
        const double fd_v = (wiggle(v, h) - wiggle(v, -h)) / (2.0 * h);
        const double fd_g = (wiggle(g, h) - wiggle(g, -h)) / (2.0 * h);
        CHECK(relative_error(grads.q(i, j), fd_q) < 1e-4);
        CHECK(relative_error(grads.k(i, j), fd_k) < 1e-4);
        CHECK(relative_error(grads.v(i, j), fd_v) < 1e-4);
        CHECK(relative_error(grads.gate(i, j), fd_g) < 1e-4);
      }
    const double fd_alpha = oracles::central_difference(
        [&](double aa) { return loss(q, k, v, g, aa); }, alpha, h);
    CHECK(relative_error(grads.alpha, fd_alpha) < 1e-4);
  }
}

TEST_CASE("gate of ones reproduces the standard-attention Q gradient") {
  Rng rng(41);
  const int n = 4, d = 3;
  const MatrixXd q = random_matrix(rng, n, d), k = random_matrix(rng, n, d),
                 v = random_matrix(rng, n, d), upstream = random_matrix(rng, n, d);
  const double alpha = 1.9;
  const auto grads = guided_attention_grad(q, k, v, MatrixXd::Ones(n, d), alpha, upstream);
  const MatrixXd expected =
      oracles::standard_attention_q_grad_loops(q, k, v, alpha, upstream);
  CHECK((grads.q - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("patch embedding token counts") {
  ModelConfig big = tiny_config();
  big.image_height = 224;
  big.image_width = 224;
  const auto wb = ModelWeights::zeros(big);
  CHECK(patch_embed(Image::constant(224, 224, 0.25), wb).rows() == 197);

  const auto wt = ModelWeights::zeros(tiny_config());
  CHECK(patch_embed(Image::constant(32, 32, 0.25), wt).rows() == 5);
}

TEST_CASE("patch embedding of a zero image is the bias") {
  auto w = ModelWeights::zeros(tiny_config());
  Rng rng(42);
  for (int i = 0; i < w.embed_b.size(); ++i) w.embed_b[i] = rng.gaussian();
  const TokenSequence tokens = patch_embed(Image::constant(32, 32, 0.0), w);
  for (int row = 1; row < tokens.rows(); ++row) {
    CHECK((tokens.row(row).transpose() - w.embed_b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("patch embedding rejects indivisible dimensions") {
  const auto w = ModelWeights::zeros(tiny_config());
  CHECK_THROWS_AS(patch_embed(Image::constant(30, 32, 0.1), w), std::invalid_argument);
}

TEST_CASE("encoder is deterministic") {
  const auto w = ModelWeights::seeded(tiny_config(), 77);
  Rng rng(43);
  const Image a = random_image(rng, 32, 32), b = random_image(rng, 32, 32);
  const VectorXd first = encoder_forward(a, b, w);
  const VectorXd second = encoder_forward(a, b, w);
  CHECK((first - second).cwiseAbs().maxCoeff() == 0.0);  // bit-identical
}

TEST_CASE("encoder with zero layers returns the embedded cls token") {
  ModelConfig cfg = tiny_config();
  cfg.layers = 0;
  auto w = ModelWeights::seeded(cfg, 5);
  Rng rng(44);
  const Image a = random_image(rng, 32, 32), b = random_image(rng, 32, 32);
  CHECK((encoder_forward(a, b, w) - w.cls_token).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encoder matches the straight-line oracle") {
  const auto w = ModelWeights::seeded(tiny_config(), 99);
  Rng rng(45);
  const Image a = random_image(rng, 32, 32), b = random_image(rng, 32, 32);
  const VectorXd got = encoder_forward(a, b, w);
  const VectorXd expected = encoder_forward_loops(a, b, w);
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("encoder rejects mismatched frames") {
  const auto w = ModelWeights::zeros(tiny_config());
  CHECK_THROWS_AS(
      encoder_forward(Image::constant(32, 32, 0.1), Image::constant(16, 16, 0.1), w),
      std::invalid_argument);
}

TEST_CASE("decoder with zero weights emits the output bias") {
  auto w = ModelWeights::zeros(tiny_config());
  for (int i = 0; i < 6; ++i) w.out_b[i] = 0.1 * (i + 1);
  const Twist6 out = decoder_forward(VectorXd::Zero(4), w);
  const Vec6 v = out.vector();
  for (int i = 0; i < 6; ++i) CHECK(v[i] == doctest::Approx(0.1 * (i + 1)).epsilon(1e-15));
}

TEST_CASE("identity layer norm of a constant vector leaves only the bias") {
  auto w = ModelWeights::zeros(tiny_config());
  w.dec_ln_scale.setOnes();
  for (int i = 0; i < 6; ++i) w.out_b[i] = 1.0 - 0.1 * i;
  const Twist6 out = decoder_forward(VectorXd::Constant(4, 3.7), w);
  CHECK((out.vector() - w.out_b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decoder matches the direct arithmetic oracle") {
  ModelConfig cfg = tiny_config();
  cfg.model_dim = 8;
  cfg.decoder_hidden = 6;
  const auto w = ModelWeights::seeded(cfg, 123);
  Rng rng(46);
  VectorXd cls(8);
  for (int i = 0; i < 8; ++i) cls[i] = rng.gaussian();
  const Vec6 got = decoder_forward(cls, w).vector();
  const Vec6 expected = decoder_forward_loops(cls, w);
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero-output configuration infers the identity pose") {
  const auto w = ModelWeights::zeros(tiny_config());
  Rng rng(47);
  const Image a = random_image(rng, 32, 32), b = random_image(rng, 32, 32);
  const Pose pose = vonet_infer(a, b, w);
  CHECK((pose.matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inference composes encoder, decoder, and twist conversion") {
  const auto w = ModelWeights::seeded(tiny_config(), 321);
  Rng rng(48);
  const Image a = random_image(rng, 32, 32), b = random_image(rng, 32, 32);
  const Pose got = vonet_infer(a, b, w);
  const Pose again = vonet_infer(a, b, w);
  CHECK((got.matrix() - again.matrix()).cwiseAbs().maxCoeff() == 0.0);

  const Vec6 twist = decoder_forward_loops(encoder_forward_loops(a, b, w), w);
  const Pose expected = pose_from_twist(Twist6(twist));
  CHECK((got.matrix() - expected.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

}  // TEST_SUITE
