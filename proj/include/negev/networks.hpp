#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "negev/cam.hpp"
#include "negev/loss.hpp"
#include "negev/param_set.hpp"
#include "negev/tensor.hpp"

namespace negev {

/// Shared architecture description for the classifier/decoder pair.
/// The encoder is `stage_widths.size()` blocks of conv3x3-relu-conv3x3-relu
/// followed by 2x2 max pooling; the decoder mirrors it with nearest-
/// neighbour upsampling and channel-concatenated skip connections.
struct ArchConfig {
  int image_size = 64;
  int in_channels = 3;
  int num_classes = 2;
  std::vector<int> stage_widths = {16, 32, 64};

  int stages() const { return static_cast<int>(stage_widths.size()); }
  /// Spatial downscale between the image and the final feature maps.
  int feature_stride() const { return 1 << stages(); }
  void validate() const;
};

/// Activations the decoder consumes: per-stage pre-pool maps (the skip
/// connections) plus the pooled bottom features that also feed the head.
struct EncoderFeatures {
  std::vector<Tensor> skips;
  Tensor bottom;
};

class Classifier {
 public:
  Classifier(ArchConfig config, ParamSet params)
      : config_(std::move(config)), params_(std::move(params)) {}

  const ArchConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  EncoderFeatures forward_features(const Tensor& image) const;

  /// Class scores: dense(global_avg_pool(bottom features)).
  Tensor classify(const Tensor& image) const;
  int predict(const Tensor& image) const;

  /// Head-weighted sum of the final feature maps for class y, bilinearly
  /// resized to image resolution and min-max normalized to [0,1]. Builds no
  /// graph. A spatially constant raw map degenerates to a constant 0.5.
  Cam compute_cam(const Tensor& image, int class_index) const;

  void freeze() { params_.freeze_all(); }
  bool frozen() const { return params_.all_frozen(); }

 private:
  ArchConfig config_;
  ParamSet params_;
};

class Decoder {
 public:
  Decoder(ArchConfig config, ParamSet params)
      : config_(std::move(config)), params_(std::move(params)) {}

  const ArchConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  /// Upsampling path over cached encoder features. Output spatial size
  /// equals the input image size; gradients reach only the decoder.
  SoftmaxMaps forward(const EncoderFeatures& features) const;

 private:
  ArchConfig config_;
  ParamSet params_;
};

/// Seeded deterministic construction; the same seed gives bit-identical
/// parameters. Weights are uniform in [-a, a] with a = sqrt(6/(fan_in +
/// fan_out)); biases start at zero.
Classifier build_classifier(const ArchConfig& config, std::uint64_t seed);
Decoder build_decoder(const ArchConfig& config, std::uint64_t seed);

/// Full forward pass through a frozen classifier and the decoder. Throws
/// StateError when the classifier is not frozen.
SoftmaxMaps decode(const Classifier& classifier, const Decoder& decoder,
                   const Tensor& image);

/// Half-pixel-center bilinear resampling of a single-channel map.
std::vector<double> resize_bilinear(const std::vector<double>& src, int src_h,
                                    int src_w, int dst_h, int dst_w);

/// Sidecar metadata ("key = value" lines) stored next to checkpoints:
/// architecture fields, build seed and training epoch.
struct CheckpointMeta {
  ArchConfig arch;
  std::uint64_t seed = 0;
  int epoch = 0;
};

void save_meta(const std::filesystem::path& path, const CheckpointMeta& meta);
CheckpointMeta load_meta(const std::filesystem::path& path);

}  // namespace negev
