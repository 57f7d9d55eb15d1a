#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cift {

enum class SourceTag { Real, Synthetic };
enum class FeatureFormat { Fvec, Csv };

std::string_view to_string(SourceTag tag);
std::string_view to_string(FeatureFormat format);
SourceTag parse_source_tag(std::string_view text);
FeatureFormat parse_feature_format(std::string_view text);

// Immutable n x d block of feature rows. Values are held as float32 (the
// on-disk precision) and promoted to double by to_eigen() for statistics.
class FeatureMatrix {
 public:
  FeatureMatrix(std::size_t rows, std::size_t dims, std::vector<float> data,
                SourceTag tag, std::string dataset_id,
                std::optional<std::vector<std::string>> frame_ids = std::nullopt);

  static FeatureMatrix from_eigen(const Eigen::MatrixXd& values, SourceTag tag,
                                  std::string dataset_id);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dims() const noexcept { return dims_; }
  SourceTag source_tag() const noexcept { return tag_; }
  const std::string& dataset_id() const noexcept { return dataset_id_; }
  const std::optional<std::vector<std::string>>& frame_ids() const noexcept {
    return frame_ids_;
  }

  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * dims_, dims_);
  }
  float operator()(std::size_t i, std::size_t j) const { return data_[i * dims_ + j]; }

  Eigen::MatrixXd to_eigen() const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t dims_;
  std::vector<float> data_;
  SourceTag tag_;
  std::string dataset_id_;
  std::optional<std::vector<std::string>> frame_ids_;
};

// Reader/writer for the FVEC binary layout (little-endian):
//   [0,8)   magic "CIFTFVEC"
//   [8,12)  version u32 = 1
//   [12,20) n u64
//   [20,28) d u64
//   [28]    dtype u8 = 1 (float32)
//   [29,32) zero padding
//   payload n*d float32, row-major
inline constexpr std::size_t kFvecHeaderSize = 32;
inline constexpr std::uint32_t kFvecVersion = 1;
inline constexpr std::uint8_t kFvecDtypeFloat32 = 1;

FeatureMatrix load_features(const std::filesystem::path& path, FeatureFormat format,
                            SourceTag tag = SourceTag::Real,
                            std::string dataset_id = {});
void write_features(const FeatureMatrix& m, const std::filesystem::path& path,
                    FeatureFormat format);

struct ManifestEntry {
  std::filesystem::path path;
  SourceTag tag;
  std::string dataset_id;
  FeatureFormat format;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  // Directory that relative entry paths resolve against.
  std::filesystem::path base_dir;

  // Checks unique ids and the presence of at least one Real and one
  // Synthetic entry.
  void validate_for_sweep() const;
};

Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Loads every entry with the given tag and stacks them in manifest order.
FeatureMatrix load_pool(const Manifest& manifest, SourceTag tag);

// Row-wise concatenation; dims must agree.
FeatureMatrix concat_rows(std::span<const FeatureMatrix> parts, SourceTag tag,
                          std::string dataset_id);

}  // namespace cift
