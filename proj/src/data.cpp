#include "negev/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "negev/netpbm.hpp"
#include "negev/rng.hpp"

namespace negev {
namespace {

// Per-channel base colors shared by foreground and background, so classes
// differ by texture statistics rather than brightness.
constexpr double kBaseColor[3] = {0.66, 0.48, 0.58};
constexpr double kChannelJitterStd = 0.02;

const std::vector<std::string>& known_splits() {
  static const std::vector<std::string> splits{"train", "valid", "valid_pixel_labeled",
                                               "test"};
  return splits;
}

// White gaussian field, box-blurred `passes` times, then standardized to
// zero mean / unit variance over the image.
std::vector<double> noise_field(int size, int passes, RngStream& rng) {
  const std::size_t n = static_cast<std::size_t>(size) * size;
  std::vector<double> field(n);
  for (double& x : field) x = rng.next_gaussian();

  std::vector<double> tmp(n);
  for (int pass = 0; pass < passes; ++pass) {
    // horizontal 3-tap box
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const auto at = [&](int xx) {
          xx = std::clamp(xx, 0, size - 1);
          return field[static_cast<std::size_t>(y) * size + xx];
        };
        tmp[static_cast<std::size_t>(y) * size + x] = (at(x - 1) + at(x) + at(x + 1)) / 3.0;
      }
    // vertical 3-tap box
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const auto at = [&](int yy) {
          yy = std::clamp(yy, 0, size - 1);
          return tmp[static_cast<std::size_t>(yy) * size + x];
        };
        field[static_cast<std::size_t>(y) * size + x] = (at(y - 1) + at(y) + at(y + 1)) / 3.0;
      }
  }

  double mean = 0.0;
  for (double x : field) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : field) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n);
  const double inv_std = var > 1e-12 ? 1.0 / std::sqrt(var) : 0.0;
  for (double& x : field) x = (x - mean) * inv_std;
  return field;
}

struct Blob {
  double cx, cy, rx, ry, theta;
};

std::vector<std::uint8_t> rasterize(const std::vector<Blob>& blobs, int size) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(size) * size, 0);
  for (const Blob& b : blobs) {
    const double c = std::cos(b.theta), s = std::sin(b.theta);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double dx = x + 0.5 - b.cx;
        const double dy = y + 0.5 - b.cy;
        const double u = (dx * c + dy * s) / b.rx;
        const double v = (-dx * s + dy * c) / b.ry;
        if (u * u + v * v <= 1.0) mask[static_cast<std::size_t>(y) * size + x] = 1;
      }
  }
  return mask;
}

std::vector<std::uint8_t> draw_blob_mask(const GenParams& p, RngStream& rng) {
  const std::size_t n = static_cast<std::size_t>(p.image_size) * p.image_size;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const int count =
        p.min_blobs + static_cast<int>(rng.next_below(
                          static_cast<std::uint64_t>(p.max_blobs - p.min_blobs + 1)));
    std::vector<Blob> blobs;
    for (int i = 0; i < count; ++i) {
      Blob b;
      b.cx = (0.15 + 0.7 * rng.next_unit()) * p.image_size;
      b.cy = (0.15 + 0.7 * rng.next_unit()) * p.image_size;
      b.rx = p.min_radius + (p.max_radius - p.min_radius) * rng.next_unit();
      b.ry = p.min_radius + (p.max_radius - p.min_radius) * rng.next_unit();
      b.theta = std::numbers::pi * rng.next_unit();
      blobs.push_back(b);
    }
    std::vector<std::uint8_t> mask = rasterize(blobs, p.image_size);
    std::size_t fg = 0;
    for (std::uint8_t m : mask) fg += m;
    const double fraction = static_cast<double>(fg) / static_cast<double>(n);
    if (fraction >= p.mask_fraction_min && fraction <= p.mask_fraction_max) return mask;
  }
  throw ConfigError("generate_dataset: cannot hit the configured mask fraction range");
}

struct GeneratedSample {
  Tensor image;
  std::vector<std::uint8_t> mask;
  bool fully_negative = false;
};

GeneratedSample synthesize(const GenParams& p, int label, RngStream& rng) {
  const int size = p.image_size;
  const std::size_t n = static_cast<std::size_t>(size) * size;

  const std::vector<double> bg = noise_field(size, p.bg_smooth_passes, rng);
  std::vector<double> jitter(3 * n);
  for (double& x : jitter) x = rng.next_gaussian();

  GeneratedSample out;
  const bool blobless = p.profile == Profile::cam16_like && label == 0;
  double blob_std = 0.0;
  std::vector<double> blob_field;
  if (blobless) {
    out.mask.assign(n, 0);
    out.fully_negative = true;
  } else {
    out.mask = draw_blob_mask(p, rng);
    const bool alt = p.profile == Profile::glas_like && label == 0;
    blob_std = alt ? p.alt_noise_std : p.fg_noise_std;
    blob_field = noise_field(size, alt ? p.alt_smooth_passes : p.fg_smooth_passes, rng);
  }

  out.image = Tensor::zeros({3, size, size});
  auto v = out.image.values_mut();
  for (std::size_t i = 0; i < n; ++i) {
    const bool fg = !out.mask.empty() && out.mask[i] != 0;
    const double texture = fg ? blob_std * blob_field[i] : p.bg_noise_std * bg[i];
    for (int c = 0; c < 3; ++c) {
      const double value =
          kBaseColor[c] + texture + kChannelJitterStd * jitter[static_cast<std::size_t>(c) * n + i];
      v[static_cast<std::size_t>(c) * n + i] = std::clamp(value, 0.0, 1.0);
    }
  }
  return out;
}

std::string format_id(const std::string& split, int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d", split.c_str(), idx);
  return buf;
}

}  // namespace

Profile profile_from_string(std::string_view name) {
  if (name == "glas_like") return Profile::glas_like;
  if (name == "cam16_like") return Profile::cam16_like;
  throw ConfigError("unknown profile '" + std::string(name) +
                    "' (expected glas_like or cam16_like)");
}

std::string_view to_string(Profile profile) {
  return profile == Profile::glas_like ? "glas_like" : "cam16_like";
}

void GenParams::validate() const {
  if (image_size < 8) throw ConfigError("GenParams: image_size too small");
  if (max_radius >= image_size)
    throw ConfigError("GenParams: blob radius exceeds the image");
  if (min_radius <= 0 || min_radius > max_radius)
    throw ConfigError("GenParams: bad radius range");
  if (min_blobs < 1 || min_blobs > max_blobs)
    throw ConfigError("GenParams: bad blob count range");
  if (!(mask_fraction_min >= 0 && mask_fraction_min < mask_fraction_max &&
        mask_fraction_max <= 1))
    throw ConfigError("GenParams: bad mask fraction range");
}

std::vector<const IndexRecord*> DatasetIndex::split(std::string_view name) const {
  std::vector<const IndexRecord*> out;
  for (const IndexRecord& r : records)
    if (r.split == name) out.push_back(&r);
  return out;
}

bool DatasetIndex::has_split(std::string_view name) const {
  return std::any_of(records.begin(), records.end(),
                     [&](const IndexRecord& r) { return r.split == name; });
}

const std::vector<std::uint8_t>& ImageSample::mask() const {
  if (!mask_)
    throw ProtocolError("mask of sample '" + image_id_ +
                        "' is not available in this mode");
  return *mask_;
}

DatasetIndex generate_dataset(std::uint64_t seed, const SplitCounts& counts,
                              const GenParams& params,
                              const std::filesystem::path& out_dir) {
  params.validate();
  if (counts.train < 1 || counts.valid < 1 || counts.test < 1)
    throw ConfigError("generate_dataset: each split needs at least one sample");
  if (counts.valid_pixel_labeled_per_class < 1)
    throw ConfigError("generate_dataset: pixel-labeled validation count must be >= 1");
  if (counts.valid < 2 * counts.valid_pixel_labeled_per_class)
    throw ConfigError("generate_dataset: valid split too small for the pixel-labeled subset");

  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "masks");

  DatasetIndex index;
  index.root = out_dir;

  const auto emit_split = [&](const std::string& split, int count) {
    for (int i = 0; i < count; ++i) {
      const std::string id = format_id(split, i);
      const int label = i % 2;
      RngStream rng = derive_stream(seed, id);
      GeneratedSample sample = synthesize(params, label, rng);

      IndexRecord rec;
      rec.split = split;
      rec.image_id = id;
      rec.image_path = "images/" + id + ".ppm";
      rec.mask_path = "masks/" + id + ".pgm";
      rec.label = label;
      rec.fully_negative = sample.fully_negative;
      write_ppm(out_dir / rec.image_path, sample.image);
      write_pgm(out_dir / rec.mask_path, params.image_size, params.image_size, sample.mask);
      index.records.push_back(std::move(rec));
    }
  };

  emit_split("train", counts.train);
  emit_split("valid", counts.valid);
  emit_split("test", counts.test);

  // Promote a seeded random per-class subset of the validation pool to the
  // pixel-labeled model-selection split.
  RngStream select = derive_stream(seed, "pixel-valid-select");
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < index.records.size(); ++i)
      if (index.records[i].split == "valid" && index.records[i].label == cls)
        pool.push_back(i);
    if (pool.size() < static_cast<std::size_t>(counts.valid_pixel_labeled_per_class))
      throw ConfigError("generate_dataset: validation pool too small for class " +
                        std::to_string(cls));
    shuffle(pool, select);
    for (int k = 0; k < counts.valid_pixel_labeled_per_class; ++k)
      index.records[pool[static_cast<std::size_t>(k)]].split = "valid_pixel_labeled";
  }

  // Keep records grouped by split, preserving generation order within each.
  std::stable_sort(index.records.begin(), index.records.end(),
                   [](const IndexRecord& a, const IndexRecord& b) {
                     const auto rank = [](const std::string& s) {
                       const auto& names = known_splits();
                       return std::find(names.begin(), names.end(), s) - names.begin();
                     };
                     return rank(a.split) < rank(b.split);
                   });

  save_index(index, out_dir / "index.txt");
  return index;
}

void save_index(const DatasetIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path.string());
  for (const IndexRecord& r : index.records)
    out << r.split << '\t' << r.image_id << '\t' << r.image_path << '\t' << r.mask_path
        << '\t' << r.label << '\t' << (r.fully_negative ? 1 : 0) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

DatasetIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  DatasetIndex index;
  index.root = path.parent_path();
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    std::stringstream ss(line);
    IndexRecord r;
    std::string label_str, neg_str;
    if (!std::getline(ss, r.split, '\t') || !std::getline(ss, r.image_id, '\t') ||
        !std::getline(ss, r.image_path, '\t') || !std::getline(ss, r.mask_path, '\t') ||
        !std::getline(ss, label_str, '\t') || !std::getline(ss, neg_str))
      throw ParseError("index line needs 6 tab-separated fields", line_start);
    try {
      r.label = std::stoi(label_str);
    } catch (const std::exception&) {
      throw ParseError("bad label field", line_start);
    }
    if (neg_str != "0" && neg_str != "1")
      throw ParseError("fully_negative field must be 0 or 1", line_start);
    r.fully_negative = neg_str == "1";
    if (std::find(known_splits().begin(), known_splits().end(), r.split) ==
        known_splits().end())
      throw ParseError("unknown split '" + r.split + "'", line_start);
    index.records.push_back(std::move(r));
  }
  return index;
}

std::vector<ImageSample> load_split(const DatasetIndex& index, std::string_view split,
                                    MaskAccess access) {
  if (std::find(known_splits().begin(), known_splits().end(), split) ==
      known_splits().end())
    throw ConfigError("unknown split '" + std::string(split) + "'");
  if (!index.has_split(split))
    throw IoError("split '" + std::string(split) + "' has no records in this index");

  bool attach_masks;
  switch (access) {
    case MaskAccess::Allow:
      attach_masks = true;
      break;
    case MaskAccess::Deny:
      attach_masks = false;
      break;
    default:
      attach_masks = split == "test" || split == "valid_pixel_labeled";
  }

  std::vector<ImageSample> samples;
  for (const IndexRecord* r : index.split(split)) {
    Tensor image = read_ppm(index.root / r->image_path);
    ImageSample sample(std::move(image), r->label, r->fully_negative, r->image_id);
    if (attach_masks) {
      PgmMask mask = read_pgm(index.root / r->mask_path);
      if (mask.height != sample.image().dim(1) || mask.width != sample.image().dim(2))
        throw DimensionError("mask dims disagree with image for " + r->image_id);
      sample.attach_mask(std::move(mask.mask01));
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

}  // namespace negev
