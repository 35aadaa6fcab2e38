// Deterministic forward path of the brightness-guided ViT pose regressor.
//
// Data layout conventions (all math in 64-bit floats):
//  - Images are 3 channel planes of H x W, values in [0, 1] at the input
//    boundary; intermediate activations are unconstrained.
//  - Token matrices are row-per-token: Q, K, V, gates are N x d.
//  - Attention: scores = Q K' / alpha, softmax over the key axis (per row),
//    output = softmax(scores) * (V .* gate), so each output token is a
//    convex combination of gated value tokens. With an all-ones gate this is
//    exactly standard scaled-dot-product attention with scale alpha.
//
// The encoder enhances each frame with the brightness estimator, patch-embeds
// the enhanced images, concatenates both frames' patch tokens behind a shared
// cls token (with a learned frame-index embedding), and gates every attention
// layer with the patch-pooled brightness feature. Pre-LN transformer blocks;
// DropPath is identity at inference.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lumio/geometry.hpp"

namespace lumio::vonet {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Image {
  int height = 0;
  int width = 0;
  std::array<MatrixXd, 3> channels;

  static Image constant(int height, int width, double value);
};

/// Throws std::invalid_argument unless all values are finite and in [0, 1].
void validate_image(const Image& img);

/// H x W map; entry (y, x) is the channel mean of the image pixel.
using BrightnessPrior = MatrixXd;

/// H x W x C feature volume stored as C channel planes.
struct BrightnessFeature {
  std::vector<MatrixXd> channels;
};

/// Rows are tokens; row 0 is the cls token.
using TokenSequence = MatrixXd;

struct ModelConfig {
  int patch = 16;
  int image_height = 32;
  int image_width = 32;
  int model_dim = 16;            // D
  int layers = 1;                // L
  int brightness_channels = 4;   // C
  int heads = 1;
  int ffn_dim = 32;
  int decoder_hidden = 16;
  double drop_path_rate = 0.0;   // stored only; inference treats DropPath as identity

  int patches_per_frame() const;
  void validate() const;
};

struct LayerWeights {
  VectorXd ln1_scale, ln1_shift;
  MatrixXd wq, wk, wv;        // D x D
  VectorXd bq, bk, bv;
  double alpha = 1.0;         // learnable attention scale, > 0
  VectorXd ln2_scale, ln2_shift;
  MatrixXd ffn_w1;            // ffn_dim x D
  VectorXd ffn_b1;
  MatrixXd ffn_w2;            // D x ffn_dim
  VectorXd ffn_b2;
};

struct ModelWeights {
  ModelConfig config;

  // Brightness estimator: concat(I, L_p) -> 1x1 conv (4 -> C)
  // -> 9x9 depth-wise conv (padding 4) = F_br -> 1x1 conv (C -> 3) = I_br.
  MatrixXd br_conv1_w;              // C x 4
  VectorXd br_conv1_b;              // C
  std::vector<MatrixXd> br_dw_w;    // C kernels of 9 x 9
  VectorXd br_dw_b;                 // C
  MatrixXd br_conv2_w;              // 3 x C
  VectorXd br_conv2_b;              // 3

  MatrixXd embed_w;                 // D x 3*patch^2
  VectorXd embed_b;                 // D
  MatrixXd pos_embed;               // patches_per_frame x D
  VectorXd cls_token;               // D
  MatrixXd frame_embed;             // 2 x D
  MatrixXd gate_w;                  // D x C
  VectorXd gate_b;                  // D

  std::vector<LayerWeights> layers;

  VectorXd dec_ln_scale, dec_ln_shift;
  MatrixXd dec_w1;                  // decoder_hidden x D
  VectorXd dec_b1;
  MatrixXd dec_w2;                  // D x decoder_hidden
  VectorXd dec_b2;
  MatrixXd out_w;                   // 6 x D
  VectorXd out_b;                   // 6

  static ModelWeights zeros(const ModelConfig& cfg);
  static ModelWeights seeded(const ModelConfig& cfg, std::uint64_t seed);

  /// Shape consistency + finiteness. Throws std::invalid_argument.
  void validate() const;
};

BrightnessPrior brightness_prior(const Image& img);

std::pair<Image, BrightnessFeature> brightness_estimator(const Image& img,
                                                         const BrightnessPrior& prior,
                                                         const ModelWeights& w);

MatrixXd guided_attention(const MatrixXd& q, const MatrixXd& k, const MatrixXd& v,
                          const MatrixXd& gate, double alpha);

struct AttentionGrads {
  MatrixXd q, k, v, gate;
  double alpha = 0.0;
};

/// Analytic gradients of guided_attention under an upstream N x d gradient.
AttentionGrads guided_attention_grad(const MatrixXd& q, const MatrixXd& k,
                                     const MatrixXd& v, const MatrixXd& gate,
                                     double alpha, const MatrixXd& upstream);

/// One token per patch (flattened channel-major, projected, positional
/// encoding added) with the cls token prepended as row 0.
TokenSequence patch_embed(const Image& img, const ModelWeights& w);

/// Final hidden state of the shared cls token for a frame pair.
VectorXd encoder_forward(const Image& frame_t, const Image& frame_t1,
                         const ModelWeights& w);

/// x' = MLP(LayerNorm(cls)); output twist = W_out x' + b_out.
Twist6 decoder_forward(const VectorXd& cls, const ModelWeights& w);

Pose vonet_infer(const Image& frame_t, const Image& frame_t1, const ModelWeights& w);

}  // namespace lumio::vonet
