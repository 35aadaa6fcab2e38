#include "lumio/vonet.hpp"

#include <cmath>
#include <stdexcept>

#include "lumio/rng.hpp"

namespace lumio::vonet {

namespace {

constexpr double kLayerNormEps = 1e-6;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

VectorXd layer_norm(const VectorXd& x, const VectorXd& scale, const VectorXd& shift) {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  const VectorXd normalized = ((x.array() - mean) / std::sqrt(var + kLayerNormEps)).matrix();
  return (normalized.array() * scale.array() + shift.array()).matrix();
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_finite(const MatrixXd& m, const char* name) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(name) + ": non-finite values");
  }
}

// 2-D convolution of one padded plane with a (2r+1)^2 kernel, same resolution.
MatrixXd conv2d_same(const MatrixXd& plane, const MatrixXd& kernel) {
  const int radius = static_cast<int>(kernel.rows()) / 2;
  const int h = static_cast<int>(plane.rows());
  const int w = static_cast<int>(plane.cols());
  MatrixXd out = MatrixXd::Zero(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int ky = -radius; ky <= radius; ++ky) {
        const int sy = y + ky;
        if (sy < 0 || sy >= h) continue;
        for (int kx = -radius; kx <= radius; ++kx) {
          const int sx = x + kx;
          if (sx < 0 || sx >= w) continue;
          acc += plane(sy, sx) * kernel(ky + radius, kx + radius);
        }
      }
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace

Image Image::constant(int height, int width, double value) {
  Image img;
  img.height = height;
  img.width = width;
  for (auto& c : img.channels) c = MatrixXd::Constant(height, width, value);
  return img;
}

void validate_image(const Image& img) {
  require(img.height > 0 && img.width > 0, "Image: empty dimensions");
  for (const auto& c : img.channels) {
    require(c.rows() == img.height && c.cols() == img.width,
            "Image: channel shape mismatch");
    require(c.allFinite(), "Image: non-finite values");
    require(c.minCoeff() >= 0.0 && c.maxCoeff() <= 1.0, "Image: values outside [0, 1]");
  }
}

int ModelConfig::patches_per_frame() const {
  return (image_height / patch) * (image_width / patch);
}

void ModelConfig::validate() const {
  require(patch > 0 && model_dim > 0 && layers >= 0 && brightness_channels > 0 &&
              heads > 0 && ffn_dim > 0 && decoder_hidden > 0,
          "ModelConfig: dimensions must be positive");
  require(image_height % patch == 0 && image_width % patch == 0,
          "ModelConfig: image dimensions must be divisible by patch size");
  require(model_dim % heads == 0, "ModelConfig: model_dim must be divisible by heads");
  require(drop_path_rate >= 0.0 && drop_path_rate < 1.0,
          "ModelConfig: drop_path_rate outside [0, 1)");
}

ModelWeights ModelWeights::zeros(const ModelConfig& cfg) {
  cfg.validate();
  const int c = cfg.brightness_channels;
  const int d = cfg.model_dim;
  ModelWeights w;
  w.config = cfg;
  w.br_conv1_w = MatrixXd::Zero(c, 4);
  w.br_conv1_b = VectorXd::Zero(c);
  w.br_dw_w.assign(c, MatrixXd::Zero(9, 9));
  w.br_dw_b = VectorXd::Zero(c);
  w.br_conv2_w = MatrixXd::Zero(3, c);
  w.br_conv2_b = VectorXd::Zero(3);
  w.embed_w = MatrixXd::Zero(d, 3 * cfg.patch * cfg.patch);
  w.embed_b = VectorXd::Zero(d);
  w.pos_embed = MatrixXd::Zero(cfg.patches_per_frame(), d);
  w.cls_token = VectorXd::Zero(d);
  w.frame_embed = MatrixXd::Zero(2, d);
  w.gate_w = MatrixXd::Zero(d, c);
  w.gate_b = VectorXd::Zero(d);
  w.layers.resize(cfg.layers);
  for (auto& layer : w.layers) {
    layer.ln1_scale = VectorXd::Zero(d);
    layer.ln1_shift = VectorXd::Zero(d);
    layer.wq = MatrixXd::Zero(d, d);
    layer.wk = MatrixXd::Zero(d, d);
    layer.wv = MatrixXd::Zero(d, d);
    layer.bq = VectorXd::Zero(d);
    layer.bk = VectorXd::Zero(d);
    layer.bv = VectorXd::Zero(d);
    layer.alpha = 1.0;  // zero would be an invalid attention scale
    layer.ln2_scale = VectorXd::Zero(d);
    layer.ln2_shift = VectorXd::Zero(d);
    layer.ffn_w1 = MatrixXd::Zero(cfg.ffn_dim, d);
    layer.ffn_b1 = VectorXd::Zero(cfg.ffn_dim);
    layer.ffn_w2 = MatrixXd::Zero(d, cfg.ffn_dim);
    layer.ffn_b2 = VectorXd::Zero(d);
  }
  w.dec_ln_scale = VectorXd::Zero(d);
  w.dec_ln_shift = VectorXd::Zero(d);
  w.dec_w1 = MatrixXd::Zero(cfg.decoder_hidden, d);
  w.dec_b1 = VectorXd::Zero(cfg.decoder_hidden);
  w.dec_w2 = MatrixXd::Zero(d, cfg.decoder_hidden);
  w.dec_b2 = VectorXd::Zero(d);
  w.out_w = MatrixXd::Zero(6, d);
  w.out_b = VectorXd::Zero(6);
  return w;
}

namespace {

void fill_gaussian(MatrixXd& m, Rng& rng, double sigma) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.gaussian(sigma);
}

void fill_gaussian(VectorXd& v, Rng& rng, double sigma) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.gaussian(sigma);
}

}  // namespace

ModelWeights ModelWeights::seeded(const ModelConfig& cfg, std::uint64_t seed) {
  ModelWeights w = zeros(cfg);
  Rng rng(seed);
  const double ws = 0.05;   // projection weights
  const double es = 0.02;   // embeddings
  fill_gaussian(w.br_conv1_w, rng, ws);
  for (auto& k : w.br_dw_w) fill_gaussian(k, rng, ws);
  fill_gaussian(w.br_conv2_w, rng, ws);
  fill_gaussian(w.embed_w, rng, ws);
  fill_gaussian(w.embed_b, rng, es);
  fill_gaussian(w.pos_embed, rng, es);
  fill_gaussian(w.cls_token, rng, es);
  fill_gaussian(w.frame_embed, rng, es);
  fill_gaussian(w.gate_w, rng, ws);
  w.gate_b.setOnes();  // gates start near neutral
  for (auto& layer : w.layers) {
    layer.ln1_scale.setOnes();
    layer.ln2_scale.setOnes();
    fill_gaussian(layer.wq, rng, ws);
    fill_gaussian(layer.wk, rng, ws);
    fill_gaussian(layer.wv, rng, ws);
    fill_gaussian(layer.ffn_w1, rng, ws);
    fill_gaussian(layer.ffn_w2, rng, ws);
    layer.alpha = std::sqrt(static_cast<double>(cfg.model_dim) / cfg.heads);
  }
  w.dec_ln_scale.setOnes();
  fill_gaussian(w.dec_w1, rng, ws);
  fill_gaussian(w.dec_w2, rng, ws);
  fill_gaussian(w.out_w, rng, ws);
  return w;
}

void ModelWeights::validate() const {
  config.validate();
  const int c = config.brightness_channels;
  const int d = config.model_dim;
  require(br_conv1_w.rows() == c && br_conv1_w.cols() == 4, "weights: br_conv1_w shape");
  require(br_conv1_b.size() == c, "weights: br_conv1_b shape");
  require(static_cast<int>(br_dw_w.size()) == c, "weights: br_dw_w count");
  for (const auto& k : br_dw_w) {
    require(k.rows() == 9 && k.cols() == 9, "weights: depth-wise kernel must be 9x9");
  }
  require(br_dw_b.size() == c, "weights: br_dw_b shape");
  require(br_conv2_w.rows() == 3 && br_conv2_w.cols() == c, "weights: br_conv2_w shape");
  require(br_conv2_b.size() == 3, "weights: br_conv2_b shape");
  require(embed_w.rows() == d && embed_w.cols() == 3 * config.patch * config.patch,
          "weights: embed_w shape");
  require(embed_b.size() == d, "weights: embed_b shape");
  require(pos_embed.rows() == config.patches_per_frame() && pos_embed.cols() == d,
          "weights: pos_embed shape");
  require(cls_token.size() == d, "weights: cls_token shape");
  require(frame_embed.rows() == 2 && frame_embed.cols() == d, "weights: frame_embed shape");
  require(gate_w.rows() == d && gate_w.cols() == c, "weights: gate_w shape");
  require(gate_b.size() == d, "weights: gate_b shape");
  require(static_cast<int>(layers.size()) == config.layers, "weights: layer count");
  for (const auto& l : layers) {
    require(l.ln1_scale.size() == d && l.ln1_shift.size() == d, "weights: ln1 shape");
    require(l.wq.rows() == d && l.wq.cols() == d, "weights: wq shape");
    require(l.wk.rows() == d && l.wk.cols() == d, "weights: wk shape");
    require(l.wv.rows() == d && l.wv.cols() == d, "weights: wv shape");
    require(l.bq.size() == d && l.bk.size() == d && l.bv.size() == d,
            "weights: qkv bias shape");
    require(std::isfinite(l.alpha) && l.alpha > 0.0, "weights: alpha must be > 0");
    require(l.ln2_scale.size() == d && l.ln2_shift.size() == d, "weights: ln2 shape");
    require(l.ffn_w1.rows() == config.ffn_dim && l.ffn_w1.cols() == d,
            "weights: ffn_w1 shape");
    require(l.ffn_b1.size() == config.ffn_dim, "weights: ffn_b1 shape");
    require(l.ffn_w2.rows() == d && l.ffn_w2.cols() == config.ffn_dim,
            "weights: ffn_w2 shape");
    require(l.ffn_b2.size() == d, "weights: ffn_b2 shape");
    require_finite(l.wq, "wq");
    require_finite(l.wk, "wk");
    require_finite(l.wv, "wv");
  }
  require(dec_ln_scale.size() == d && dec_ln_shift.size() == d, "weights: decoder ln shape");
  require(dec_w1.rows() == config.decoder_hidden && dec_w1.cols() == d,
          "weights: dec_w1 shape");
  require(dec_b1.size() == config.decoder_hidden, "weights: dec_b1 shape");
  require(dec_w2.rows() == d && dec_w2.cols() == config.decoder_hidden,
          "weights: dec_w2 shape");
  require(dec_b2.size() == d, "weights: dec_b2 shape");
  require(out_w.rows() == 6 && out_w.cols() == d, "weights: out_w shape");
  require(out_b.size() == 6, "weights: out_b shape");
}

BrightnessPrior brightness_prior(const Image& img) {
  validate_image(img);
  return (img.channels[0] + img.channels[1] + img.channels[2]) / 3.0;
}

std::pair<Image, BrightnessFeature> brightness_estimator(const Image& img,
                                                         const BrightnessPrior& prior,
                                                         const ModelWeights& w) {
  require(prior.rows() == img.height && prior.cols() == img.width,
          "brightness_estimator: prior shape mismatch");
  const int c = w.config.brightness_channels;
  require(w.br_conv1_w.rows() == c && w.br_conv1_w.cols() == 4,
          "brightness_estimator: weight shape mismatch");

  // 1x1 conv over the 4 stacked input planes.
  std::vector<const MatrixXd*> inputs = {&img.channels[0], &img.channels[1],
                                         &img.channels[2], &prior};
  std::vector<MatrixXd> mixed(c);
  for (int oc = 0; oc < c; ++oc) {
    MatrixXd plane = MatrixXd::Constant(img.height, img.width, w.br_conv1_b[oc]);
    for (int ic = 0; ic < 4; ++ic) plane += w.br_conv1_w(oc, ic) * (*inputs[ic]);
    mixed[oc] = std::move(plane);
  }

  BrightnessFeature feature;
  feature.channels.resize(c);
  for (int oc = 0; oc < c; ++oc) {
    feature.channels[oc] =
        (conv2d_same(mixed[oc], w.br_dw_w[oc]).array() + w.br_dw_b[oc]).matrix();
  }

  Image enhanced;
  enhanced.height = img.height;
  enhanced.width = img.width;
  for (int oc = 0; oc < 3; ++oc) {
    MatrixXd plane = MatrixXd::Constant(img.height, img.width, w.br_conv2_b[oc]);
    for (int ic = 0; ic < c; ++ic) plane += w.br_conv2_w(oc, ic) * feature.channels[ic];
    enhanced.channels[oc] = std::move(plane);
  }
  return {std::move(enhanced), std::move(feature)};
}

MatrixXd guided_attention(const MatrixXd& q, const MatrixXd& k, const MatrixXd& v,
                          const MatrixXd& gate, double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0, "guided_attention: alpha must be > 0");
  const Eigen::Index n = q.rows();
  const Eigen::Index d = q.cols();
  require(k.rows() == n && k.cols() == d && v.rows() == n && v.cols() == d &&
              gate.rows() == n && gate.cols() == d,
          "guided_attention: shape mismatch");
  require_finite(q, "q");
  require_finite(k, "k");
  require_finite(v, "v");
  require_finite(gate, "gate");

  MatrixXd scores = q * k.transpose() / alpha;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - m).exp().matrix();
    scores.row(i) /= scores.row(i).sum();
  }
  return scores * v.cwiseProduct(gate);
}

AttentionGrads guided_attention_grad(const MatrixXd& q, const MatrixXd& k,
                                     const MatrixXd& v, const MatrixXd& gate,
                                     double alpha, const MatrixXd& upstream) {
  require(std::isfinite(alpha) && alpha > 0.0, "guided_attention_grad: alpha must be > 0");
  const Eigen::Index n = q.rows();
  require(upstream.rows() == n && upstream.cols() == q.cols(),
          "guided_attention_grad: upstream shape mismatch");
  require_finite(upstream, "upstream");

  const MatrixXd scores = q * k.transpose() / alpha;
  MatrixXd weights(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = scores.row(i).maxCoeff();
    Eigen::RowVectorXd e = (scores.row(i).array() - m).exp();
    weights.row(i) = e / e.sum();
  }
  const MatrixXd gated = v.cwiseProduct(gate);

  AttentionGrads grads;
  const MatrixXd d_gated = weights.transpose() * upstream;
  grads.v = d_gated.cwiseProduct(gate);
  grads.gate = d_gated.cwiseProduct(v);

  const MatrixXd d_weights = upstream * gated.transpose();
  MatrixXd d_scores(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double row_dot = d_weights.row(i).dot(weights.row(i));
    d_scores.row(i) =
        (weights.row(i).array() * (d_weights.row(i).array() - row_dot)).matrix();
  }
  grads.q = d_scores * k / alpha;
  grads.k = d_scores.transpose() * q / alpha;
  grads.alpha = -d_scores.cwiseProduct(scores).sum() / alpha;
  return grads;
}

TokenSequence patch_embed(const Image& img, const ModelWeights& w) {
  const int p = w.config.patch;
  require(img.height % p == 0 && img.width % p == 0,
          "patch_embed: image dimensions not divisible by patch size");
  const int grid_h = img.height / p;
  const int grid_w = img.width / p;
  const int n_patches = grid_h * grid_w;
  require(w.pos_embed.rows() == n_patches,
          "patch_embed: positional encoding does not match patch grid");

  TokenSequence tokens(n_patches + 1, w.config.model_dim);
  tokens.row(0) = w.cls_token.transpose();

  VectorXd flat(3 * p * p);
  for (int gy = 0; gy < grid_h; ++gy) {
    for (int gx = 0; gx < grid_w; ++gx) {
      // Channel-major flattening: [c][py][px].
      for (int c = 0; c < 3; ++c) {
        for (int py = 0; py < p; ++py) {
          for (int px = 0; px < p; ++px) {
            flat[c * p * p + py * p + px] = img.channels[c](gy * p + py, gx * p + px);
          }
        }
      }
      const int idx = gy * grid_w + gx;
      tokens.row(idx + 1) =
          (w.embed_w * flat + w.embed_b).transpose() + w.pos_embed.row(idx);
    }
  }
  return tokens;
}

namespace {

// Per-patch mean pooling of F_br, projected into the token dimension.
MatrixXd pooled_gate(const BrightnessFeature& feature, const ModelWeights& w, int height,
                     int width) {
  const int p = w.config.patch;
  const int grid_h = height / p;
  const int grid_w = width / p;
  const int c = w.config.brightness_channels;
  MatrixXd gates(grid_h * grid_w, w.config.model_dim);
  VectorXd pooled(c);
  for (int gy = 0; gy < grid_h; ++gy) {
    for (int gx = 0; gx < grid_w; ++gx) {
      for (int ch = 0; ch < c; ++ch) {
        pooled[ch] = feature.channels[ch].block(gy * p, gx * p, p, p).mean();
      }
      gates.row(gy * grid_w + gx) = (w.gate_w * pooled + w.gate_b).transpose();
    }
  }
  return gates;
}

MatrixXd row_layer_norm(const MatrixXd& x, const VectorXd& scale, const VectorXd& shift) {
  MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out.row(i) = layer_norm(x.row(i).transpose(), scale, shift).transpose();
  }
  return out;
}

}  // namespace

VectorXd encoder_forward(const Image& frame_t, const Image& frame_t1,
                         const ModelWeights& w) {
  w.validate();
  require(frame_t.height == frame_t1.height && frame_t.width == frame_t1.width,
          "encoder_forward: frame shapes differ");
  require(frame_t.height == w.config.image_height &&
              frame_t.width == w.config.image_width,
          "encoder_forward: frame shape does not match model config");

  const int n_patch = w.config.patches_per_frame();
  const int d = w.config.model_dim;
  const Image* frames[2] = {&frame_t, &frame_t1};

  MatrixXd x(2 * n_patch + 1, d);
  MatrixXd gates(2 * n_patch + 1, d);
  x.row(0) = w.cls_token.transpose();
  gates.row(0).setOnes();  // the cls token is not tied to a patch; neutral gate

  for (int f = 0; f < 2; ++f) {
    const BrightnessPrior prior = brightness_prior(*frames[f]);
    auto [enhanced, feature] = brightness_estimator(*frames[f], prior, w);
    const TokenSequence tokens = patch_embed(enhanced, w);
    const MatrixXd frame_gates = pooled_gate(feature, w, frames[f]->height,
                                             frames[f]->width);
    for (int i = 0; i < n_patch; ++i) {
      x.row(1 + f * n_patch + i) = tokens.row(i + 1) + w.frame_embed.row(f);
      gates.row(1 + f * n_patch + i) = frame_gates.row(i);
    }
  }

  const int heads = w.config.heads;
  const int dh = d / heads;
  for (const auto& layer : w.layers) {
    const MatrixXd normed = row_layer_norm(x, layer.ln1_scale, layer.ln1_shift);
    const MatrixXd q = (normed * layer.wq.transpose()).rowwise() + layer.bq.transpose();
    const MatrixXd k = (normed * layer.wk.transpose()).rowwise() + layer.bk.transpose();
    const MatrixXd v = (normed * layer.wv.transpose()).rowwise() + layer.bv.transpose();
    MatrixXd attn(x.rows(), d);
    for (int h = 0; h < heads; ++h) {
      attn.middleCols(h * dh, dh) = guided_attention(
          q.middleCols(h * dh, dh), k.middleCols(h * dh, dh), v.middleCols(h * dh, dh),
          gates.middleCols(h * dh, dh), layer.alpha);
    }
    x += attn;

    const MatrixXd normed2 = row_layer_norm(x, layer.ln2_scale, layer.ln2_shift);
    MatrixXd hidden =
        (normed2 * layer.ffn_w1.transpose()).rowwise() + layer.ffn_b1.transpose();
    hidden = hidden.unaryExpr([](double t) { return gelu(t); });
    x += (hidden * layer.ffn_w2.transpose()).rowwise() + layer.ffn_b2.transpose();
  }

  return x.row(0).transpose();
}

Twist6 decoder_forward(const VectorXd& cls, const ModelWeights& w) {
  require(cls.size() == w.config.model_dim, "decoder_forward: cls dimension mismatch");
  const VectorXd normed = layer_norm(cls, w.dec_ln_scale, w.dec_ln_shift);
  VectorXd hidden = w.dec_w1 * normed + w.dec_b1;
  hidden = hidden.unaryExpr([](double t) { return gelu(t); });
  const VectorXd refined = w.dec_w2 * hidden + w.dec_b2;  // DropPath: identity at inference
  const VectorXd out = w.out_w * refined + w.out_b;
  return Twist6(Vec3(out.head<3>()), Vec3(out.tail<3>()));
}

Pose vonet_infer(const Image& frame_t, const Image& frame_t1, const ModelWeights& w) {
  return pose_from_twist(decoder_forward(encoder_forward(frame_t, frame_t1, w), w));
}

}  // namespace lumio::vonet
