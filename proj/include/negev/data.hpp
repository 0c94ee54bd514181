#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "negev/tensor.hpp"

namespace negev {

/// cam16_like: class 0 images carry no blobs at all (fully negative).
/// glas_like: both classes carry blobs, each with its own texture; no
/// fully negative samples exist.
enum class Profile { glas_like, cam16_like };

Profile profile_from_string(std::string_view name);
std::string_view to_string(Profile profile);

/// Generator knobs. Foreground and background share per-channel means so
/// classes differ by texture rather than brightness; variances and
/// smoothing passes set the texture contrast.
struct GenParams {
  Profile profile = Profile::cam16_like;
  int image_size = 64;
  int min_blobs = 1;
  int max_blobs = 4;
  double min_radius = 5.0;
  double max_radius = 13.0;
  double bg_noise_std = 0.05;
  int bg_smooth_passes = 4;
  double fg_noise_std = 0.16;
  int fg_smooth_passes = 1;
  // glas_like only: texture of class-0 blobs.
  double alt_noise_std = 0.10;
  int alt_smooth_passes = 0;
  double mask_fraction_min = 0.02;
  double mask_fraction_max = 0.55;

  void validate() const;
};

struct SplitCounts {
  int train = 200;
  int valid = 40;
  int valid_pixel_labeled_per_class = 3;
  int test = 100;
};

struct IndexRecord {
  std::string split;
  std::string image_id;
  std::string image_path;  // relative to the index directory
  std::string mask_path;
  int label = 0;
  bool fully_negative = false;
};

struct DatasetIndex {
  std::filesystem::path root;
  std::vector<IndexRecord> records;

  std::vector<const IndexRecord*> split(std::string_view name) const;
  bool has_split(std::string_view name) const;
};

/// One loaded sample. The ground-truth mask is present only when the split
/// policy (or an explicit override) allows it; reading an absent mask is a
/// protocol violation, which is how training-time mask access is fenced off.
class ImageSample {
 public:
  ImageSample(Tensor image, int label, bool fully_negative, std::string image_id)
      : image_(std::move(image)), label_(label), fully_negative_(fully_negative),
        image_id_(std::move(image_id)) {}

  const Tensor& image() const { return image_; }
  int label() const { return label_; }
  bool fully_negative() const { return fully_negative_; }
  const std::string& image_id() const { return image_id_; }

  bool has_mask() const { return mask_.has_value(); }
  const std::vector<std::uint8_t>& mask() const;
  void attach_mask(std::vector<std::uint8_t> mask01) { mask_ = std::move(mask01); }

 private:
  Tensor image_;
  int label_;
  bool fully_negative_;
  std::string image_id_;
  std::optional<std::vector<std::uint8_t>> mask_;
};

enum class MaskAccess { Default, Deny, Allow };

/// Writes images (P6), masks (P5) and index.txt under out_dir. Regeneration
/// from the same (seed, counts, params) is byte-identical.
DatasetIndex generate_dataset(std::uint64_t seed, const SplitCounts& counts,
                              const GenParams& params,
                              const std::filesystem::path& out_dir);

void save_index(const DatasetIndex& index, const std::filesystem::path& path);
DatasetIndex load_index(const std::filesystem::path& path);

/// Loads a split in index order. Masks are attached only for `test` and
/// `valid_pixel_labeled` by default; pass MaskAccess::Allow to opt in (the
/// fully supervised baseline) or Deny to strip them.
std::vector<ImageSample> load_split(const DatasetIndex& index, std::string_view split,
                                    MaskAccess access = MaskAccess::Default);

}  // namespace negev
