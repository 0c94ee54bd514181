#include "negev/networks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "negev/ops.hpp"
#include "negev/rng.hpp"

namespace negev {
namespace {

Tensor glorot_uniform(std::vector<int> shape, int fan_in, int fan_out, RngStream& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = a * (2.0 * rng.next_unit() - 1.0);
  return Tensor::from_values(std::move(shape), std::move(v));
}

void add_conv(ParamSet& params, const std::string& prefix, int c_in, int c_out,
              int k, RngStream& rng) {
  params.add(prefix + ".w",
             glorot_uniform({c_out, c_in, k, k}, c_in * k * k, c_out * k * k, rng));
  params.add(prefix + ".b", Tensor::zeros({c_out}));
}

Tensor conv_block(const Tensor& x, const ParamSet& params, const std::string& prefix,
                  int pad) {
  return conv2d(x, params.at(prefix + ".w"), params.at(prefix + ".b"), 1, pad);
}

}  // namespace

void ArchConfig::validate() const {
  if (num_classes < 2) throw ConfigError("ArchConfig: num_classes must be >= 2");
  if (stage_widths.empty()) throw ConfigError("ArchConfig: at least one stage required");
  for (int w : stage_widths)
    if (w < 1) throw ConfigError("ArchConfig: stage widths must be positive");
  if (in_channels < 1) throw ConfigError("ArchConfig: in_channels must be positive");
  if (image_size % feature_stride() != 0)
    throw ConfigError("ArchConfig: image_size must be divisible by 2^stages");
  if (image_size / feature_stride() < 1)
    throw ConfigError("ArchConfig: too many stages for this image size");
}

Classifier build_classifier(const ArchConfig& config, std::uint64_t seed) {
  config.validate();
  RngStream rng = derive_stream(seed, "classifier-init");
  ParamSet params;
  int c_prev = config.in_channels;
  for (int s = 0; s < config.stages(); ++s) {
    const int width = config.stage_widths[static_cast<std::size_t>(s)];
    const std::string stage = "enc" + std::to_string(s + 1);
    add_conv(params, stage + ".conv1", c_prev, width, 3, rng);
    add_conv(params, stage + ".conv2", width, width, 3, rng);
    c_prev = width;
  }
  params.add("head.w",
             glorot_uniform({config.num_classes, c_prev}, c_prev, config.num_classes, rng));
  params.add("head.b", Tensor::zeros({config.num_classes}));
  return Classifier(config, std::move(params));
}

Decoder build_decoder(const ArchConfig& config, std::uint64_t seed) {
  config.validate();
  RngStream rng = derive_stream(seed, "decoder-init");
  ParamSet params;
  int c_prev = config.stage_widths.back();
  for (int j = 0; j < config.stages(); ++j) {
    const int s = config.stages() - 1 - j;
    const int skip_width = config.stage_widths[static_cast<std::size_t>(s)];
    const int out_width = config.stage_widths[static_cast<std::size_t>(std::max(s - 1, 0))];
    add_conv(params, "dec" + std::to_string(j + 1) + ".conv", c_prev + skip_width,
             out_width, 3, rng);
    c_prev = out_width;
  }
  add_conv(params, "head", c_prev, 2, 1, rng);
  return Decoder(config, std::move(params));
}

EncoderFeatures Classifier::forward_features(const Tensor& image) const {
  if (image.rank() != 3 || image.dim(0) != config_.in_channels ||
      image.dim(1) != config_.image_size || image.dim(2) != config_.image_size)
    throw DimensionError("classifier: expected image [" +
                         std::to_string(config_.in_channels) + "," +
                         std::to_string(config_.image_size) + "," +
                         std::to_string(config_.image_size) + "]");
  EncoderFeatures features;
  Tensor h = image;
  for (int s = 0; s < config_.stages(); ++s) {
    const std::string stage = "enc" + std::to_string(s + 1);
    h = relu(conv_block(h, params_, stage + ".conv1", 1));
    h = relu(conv_block(h, params_, stage + ".conv2", 1));
    features.skips.push_back(h);
    h = maxpool2(h);
  }
  features.bottom = h;
  return features;
}

Tensor Classifier::classify(const Tensor& image) const {
  EncoderFeatures features = forward_features(image);
  return dense(global_avg_pool(features.bottom), params_.at("head.w"),
               params_.at("head.b"));
}

int Classifier::predict(const Tensor& image) const {
  Tensor scores = classify(image);
  auto v = scores.values();
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

Cam Classifier::compute_cam(const Tensor& image, int class_index) const {
  if (class_index < 0 || class_index >= config_.num_classes)
    throw ConfigError("compute_cam: class index " + std::to_string(class_index) +
                      " outside [0," + std::to_string(config_.num_classes) + ")");
  EncoderFeatures features = forward_features(image);
  const Tensor& bottom = features.bottom;
  const int c_feat = bottom.dim(0), fh = bottom.dim(1), fw = bottom.dim(2);
  const Tensor& head_w = params_.at("head.w");

  std::vector<double> raw(static_cast<std::size_t>(fh) * fw, 0.0);
  for (int k = 0; k < c_feat; ++k) {
    const double w = head_w[static_cast<std::size_t>(class_index) * c_feat + k];
    const double* plane = bottom.values().data() + static_cast<std::size_t>(k) * fh * fw;
    for (std::size_t p = 0; p < raw.size(); ++p) raw[p] += w * plane[p];
  }

  std::vector<double> resized =
      resize_bilinear(raw, fh, fw, config_.image_size, config_.image_size);

  Cam cam;
  cam.height = config_.image_size;
  cam.width = config_.image_size;
  cam.class_index = class_index;
  const auto [lo_it, hi_it] = std::minmax_element(resized.begin(), resized.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi - lo < 1e-12) {
    // Spatially constant map: both samplers (C and 1-C) degrade to uniform.
    cam.values.assign(resized.size(), 0.5);
  } else {
    cam.values.resize(resized.size());
    const double inv = 1.0 / (hi - lo);
    for (std::size_t p = 0; p < resized.size(); ++p)
      cam.values[p] = (resized[p] - lo) * inv;
  }
  return cam;
}

SoftmaxMaps Decoder::forward(const EncoderFeatures& features) const {
  if (static_cast<int>(features.skips.size()) != config_.stages())
    throw DimensionError("decoder: expected " + std::to_string(config_.stages()) +
                         " skip tensors, got " + std::to_string(features.skips.size()));
  Tensor h = features.bottom;
  for (int j = 0; j < config_.stages(); ++j) {
    const int s = config_.stages() - 1 - j;
    h = upsample_nearest2(h);
    h = concat_channels(h, features.skips[static_cast<std::size_t>(s)]);
    h = relu(conv_block(h, params_, "dec" + std::to_string(j + 1) + ".conv", 1));
  }
  Tensor logits = conv_block(h, params_, "head", 0);
  return SoftmaxMaps{pixel_softmax(logits)};
}

SoftmaxMaps decode(const Classifier& classifier, const Decoder& decoder,
                   const Tensor& image) {
  if (!classifier.frozen())
    throw StateError("decode: classifier must be frozen before decoding");
  return decoder.forward(classifier.forward_features(image));
}

std::vector<double> resize_bilinear(const std::vector<double>& src, int src_h,
                                    int src_w, int dst_h, int dst_w) {
  if (src_h <= 0 || src_w <= 0 || dst_h <= 0 || dst_w <= 0 ||
      src.size() != static_cast<std::size_t>(src_h) * src_w)
    throw DimensionError("resize_bilinear: bad dimensions");
  std::vector<double> dst(static_cast<std::size_t>(dst_h) * dst_w);
  const double sy = static_cast<double>(src_h) / dst_h;
  const double sx = static_cast<double>(src_w) / dst_w;
  for (int y = 0; y < dst_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src_h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < dst_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src_w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double wx = fx - x0;
      const double top = src[static_cast<std::size_t>(y0) * src_w + x0] * (1 - wx) +
                         src[static_cast<std::size_t>(y0) * src_w + x1] * wx;
      const double bot = src[static_cast<std::size_t>(y1) * src_w + x0] * (1 - wx) +
                         src[static_cast<std::size_t>(y1) * src_w + x1] * wx;
      dst[static_cast<std::size_t>(y) * dst_w + x] = top * (1 - wy) + bot * wy;
    }
  }
  return dst;
}

void save_meta(const std::filesystem::path& path, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << "image_size = " << meta.arch.image_size << "\n";
  out << "in_channels = " << meta.arch.in_channels << "\n";
  out << "num_classes = " << meta.arch.num_classes << "\n";
  out << "stage_widths = ";
  for (std::size_t i = 0; i < meta.arch.stage_widths.size(); ++i)
    out << (i ? "," : "") << meta.arch.stage_widths[i];
  out << "\n";
  out << "seed = " << meta.seed << "\n";
  out << "epoch = " << meta.epoch << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

CheckpointMeta load_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  CheckpointMeta meta;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("metadata line without '='", line_start);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "image_size") meta.arch.image_size = std::stoi(value);
      else if (key == "in_channels") meta.arch.in_channels = std::stoi(value);
      else if (key == "num_classes") meta.arch.num_classes = std::stoi(value);
      else if (key == "seed") meta.seed = std::stoull(value);
      else if (key == "epoch") meta.epoch = std::stoi(value);
      else if (key == "stage_widths") {
        meta.arch.stage_widths.clear();
        std::stringstream ss(value);
        std::string part;
        while (std::getline(ss, part, ','))
          meta.arch.stage_widths.push_back(std::stoi(trim(part)));
      } else {
        throw ParseError("unknown metadata key '" + key + "'", line_start);
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("bad metadata value for '" + key + "'", line_start);
    }
  }
  meta.arch.validate();
  return meta;
}

}  // namespace negev
