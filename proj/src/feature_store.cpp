#include "cift/feature_store.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cift/error.hpp"

namespace cift {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'I', 'F', 'T', 'F', 'V', 'E', 'C'};

template <typename T>
void put_le(unsigned char* out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFFu);
  }
}

template <typename T>
T get_le(const unsigned char* in) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(in[i]) << (8 * i);
  }
  return value;
}

std::string default_id(const std::filesystem::path& path, std::string id) {
  if (!id.empty()) return id;
  auto stem = path.stem().string();
  return stem.empty() ? std::string("features") : stem;
}

std::string cell_where(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

FeatureMatrix load_fvec(const std::filesystem::path& path, SourceTag tag,
                        std::string dataset_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < kFvecHeaderSize) {
    throw Error(ErrorCode::MalformedHeader,
                path.string() + ": file shorter than the 32-byte header");
  }
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": bad magic");
  }
  const auto version = get_le<std::uint32_t>(bytes.data() + 8);
  if (version != kFvecVersion) {
    throw Error(ErrorCode::MalformedHeader,
                path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto n = get_le<std::uint64_t>(bytes.data() + 12);
  const auto d = get_le<std::uint64_t>(bytes.data() + 20);
  if (bytes[28] != kFvecDtypeFloat32) {
    throw Error(ErrorCode::MalformedHeader,
                path.string() + ": unsupported dtype code " + std::to_string(bytes[28]));
  }
  if (n == 0 || d == 0) {
    throw Error(ErrorCode::InvalidShape, path.string() + ": header declares n=" +
                                             std::to_string(n) + ", d=" + std::to_string(d));
  }
  const std::size_t payload = bytes.size() - kFvecHeaderSize;
  const bool overflow = n > SIZE_MAX / sizeof(float) / d;
  if (overflow || payload != n * d * sizeof(float)) {
    const std::size_t have = payload / sizeof(float);
    std::string detail = path.string() + ": header n=" + std::to_string(n) +
                         ", d=" + std::to_string(d) + ", payload has " +
                         std::to_string(have) + " values";
    if (!overflow && have < n * d) detail += " (first missing value at " + cell_where(have / d, have % d) + ")";
    throw Error(ErrorCode::DimensionMismatch, detail);
  }
  std::vector<float> data(n * d);
  const unsigned char* p = bytes.data() + kFvecHeaderSize;
  for (std::size_t k = 0; k < data.size(); ++k, p += 4) {
    data[k] = std::bit_cast<float>(get_le<std::uint32_t>(p));
    if (!std::isfinite(data[k])) {
      throw Error(ErrorCode::NonFiniteValue, path.string() + ": " + cell_where(k / d, k % d));
    }
  }
  return FeatureMatrix(n, d, std::move(data), tag, default_id(path, std::move(dataset_id)));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

FeatureMatrix load_csv(const std::filesystem::path& path, SourceTag tag,
                       std::string dataset_id) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<float> data;
  std::size_t dims = 0;
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::size_t col = 0;
    while (true) {
      const auto comma = view.find(',');
      const std::string_view field = trim(view.substr(0, comma));
      float value = 0.0f;
      const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec == std::errc::result_out_of_range) {
        throw Error(ErrorCode::NonFiniteValue, path.string() + ": " + cell_where(rows, col));
      }
      if (field.empty() || ec != std::errc() || end != field.data() + field.size()) {
        throw Error(ErrorCode::MalformedHeader, path.string() + ": unparsable value '" +
                                                    std::string(field) + "' at " +
                                                    cell_where(rows, col));
      }
      if (!std::isfinite(value)) {
        throw Error(ErrorCode::NonFiniteValue, path.string() + ": " + cell_where(rows, col));
      }
      data.push_back(value);
      ++col;
      if (comma == std::string_view::npos) break;
      view.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      dims = col;
    } else if (col != dims) {
      throw Error(ErrorCode::DimensionMismatch,
                  path.string() + ": row " + std::to_string(rows) + " has " +
                      std::to_string(col) + " values, expected " + std::to_string(dims));
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::InvalidShape, path.string() + ": no feature rows");
  return FeatureMatrix(rows, dims, std::move(data), tag,
                       default_id(path, std::move(dataset_id)));
}

}  // namespace

std::string_view to_string(SourceTag tag) {
  return tag == SourceTag::Real ? "real" : "synthetic";
}

std::string_view to_string(FeatureFormat format) {
  return format == FeatureFormat::Fvec ? "fvec" : "csv";
}

SourceTag parse_source_tag(std::string_view text) {
  if (text == "real" || text == "Real") return SourceTag::Real;
  if (text == "synthetic" || text == "Synthetic" || text == "synth") return SourceTag::Synthetic;
  throw Error(ErrorCode::InvalidManifest, "unknown tag '" + std::string(text) + "'");
}

FeatureFormat parse_feature_format(std::string_view text) {
  if (text == "fvec" || text == "FVEC") return FeatureFormat::Fvec;
  if (text == "csv" || text == "CSV") return FeatureFormat::Csv;
  throw Error(ErrorCode::InvalidManifest, "unknown format '" + std::string(text) + "'");
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dims, std::vector<float> data,
                             SourceTag tag, std::string dataset_id,
                             std::optional<std::vector<std::string>> frame_ids)
    : rows_(rows),
      dims_(dims),
      data_(std::move(data)),
      tag_(tag),
      dataset_id_(std::move(dataset_id)),
      frame_ids_(std::move(frame_ids)) {
  if (rows_ == 0 || dims_ == 0) {
    throw Error(ErrorCode::InvalidShape, "feature matrix needs n >= 1 and d >= 1, got n=" +
                                             std::to_string(rows_) + ", d=" + std::to_string(dims_));
  }
  if (data_.size() != rows_ * dims_) {
    throw Error(ErrorCode::DimensionMismatch,
                "data length " + std::to_string(data_.size()) + " != " +
                    std::to_string(rows_) + " x " + std::to_string(dims_));
  }
  if (dataset_id_.empty()) throw Error(ErrorCode::InvalidArgument, "dataset_id must be non-empty");
  if (frame_ids_ && frame_ids_->size() != rows_) {
    throw Error(ErrorCode::DimensionMismatch, "frame_ids length " +
                                                  std::to_string(frame_ids_->size()) +
                                                  " != rows " + std::to_string(rows_));
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!std::isfinite(data_[k])) {
      throw Error(ErrorCode::NonFiniteValue, cell_where(k / dims_, k % dims_));
    }
  }
}

FeatureMatrix FeatureMatrix::from_eigen(const Eigen::MatrixXd& values, SourceTag tag,
                                        std::string dataset_id) {
  const auto n = static_cast<std::size_t>(values.rows());
  const auto d = static_cast<std::size_t>(values.cols());
  std::vector<float> data(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      data[i * d + j] = static_cast<float>(values(static_cast<Eigen::Index>(i),
                                                  static_cast<Eigen::Index>(j)));
    }
  }
  return FeatureMatrix(n, d, std::move(data), tag, std::move(dataset_id));
}

Eigen::MatrixXd FeatureMatrix::to_eigen() const {
  using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajorF> view(data_.data(), static_cast<Eigen::Index>(rows_),
                                   static_cast<Eigen::Index>(dims_));
  return view.cast<double>();
}

FeatureMatrix load_features(const std::filesystem::path& path, FeatureFormat format,
                            SourceTag tag, std::string dataset_id) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::IoError, "no such file: " + path.string());
  }
  return format == FeatureFormat::Fvec ? load_fvec(path, tag, std::move(dataset_id))
                                       : load_csv(path, tag, std::move(dataset_id));
}

void write_features(const FeatureMatrix& m, const std::filesystem::path& path,
                    FeatureFormat format) {
  if (format == FeatureFormat::Fvec) {
    std::vector<unsigned char> bytes(kFvecHeaderSize + m.data().size() * sizeof(float), 0);
    std::memcpy(bytes.data(), kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(bytes.data() + 8, kFvecVersion);
    put_le<std::uint64_t>(bytes.data() + 12, m.rows());
    put_le<std::uint64_t>(bytes.data() + 20, m.dims());
    bytes[28] = kFvecDtypeFloat32;
    unsigned char* p = bytes.data() + kFvecHeaderSize;
    for (const float v : m.data()) {
      put_le<std::uint32_t>(p, std::bit_cast<std::uint32_t>(v));
      p += 4;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
    return;
  }

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "# " << m.dataset_id() << " n=" << m.rows() << " d=" << m.dims() << '\n';
  std::array<char, 64> buf{};
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), row[j]);
      out.write(buf.data(), res.ptr - buf.data());
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void Manifest::validate_for_sweep() const {
  std::set<std::string> ids;
  bool has_real = false;
  bool has_synth = false;
  for (const auto& e : entries) {
    if (e.dataset_id.empty()) throw Error(ErrorCode::InvalidManifest, "empty dataset_id");
    if (!ids.insert(e.dataset_id).second) {
      throw Error(ErrorCode::InvalidManifest, "duplicate dataset_id '" + e.dataset_id + "'");
    }
    has_real |= e.tag == SourceTag::Real;
    has_synth |= e.tag == SourceTag::Synthetic;
  }
  if (!has_real) throw Error(ErrorCode::InvalidManifest, "manifest has no real entry");
  if (!has_synth) throw Error(ErrorCode::InvalidManifest, "manifest has no synthetic entry");
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
  Manifest manifest;
  manifest.base_dir = path.parent_path();
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& item : doc.at("entries")) {
      ManifestEntry e;
      e.path = item.at("path").get<std::string>();
      e.tag = parse_source_tag(item.at("tag").get<std::string>());
      e.dataset_id = item.at("dataset_id").get<std::string>();
      e.format = parse_feature_format(item.value("format", std::string("fvec")));
      manifest.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidManifest, path.string() + ": " + ex.what());
  }
  return manifest;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["entries"] = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    doc["entries"].push_back({{"path", e.path.generic_string()},
                              {"tag", std::string(to_string(e.tag))},
                              {"dataset_id", e.dataset_id},
                              {"format", std::string(to_string(e.format))}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

FeatureMatrix load_pool(const Manifest& manifest, SourceTag tag) {
  std::vector<FeatureMatrix> parts;
  for (const auto& e : manifest.entries) {
    if (e.tag != tag) continue;
    const auto full = e.path.is_absolute() ? e.path : manifest.base_dir / e.path;
    parts.push_back(load_features(full, e.format, tag, e.dataset_id));
  }
  if (parts.empty()) {
    throw Error(ErrorCode::InvalidManifest,
                "manifest has no " + std::string(to_string(tag)) + " entry");
  }
  if (parts.size() == 1) return std::move(parts.front());
  std::string id;
  for (const auto& p : parts) id += (id.empty() ? "" : "+") + p.dataset_id();
  return concat_rows(parts, tag, id);
}

FeatureMatrix concat_rows(std::span<const FeatureMatrix> parts, SourceTag tag,
                          std::string dataset_id) {
  if (parts.empty()) throw Error(ErrorCode::InvalidShape, "nothing to concatenate");
  const std::size_t d = parts.front().dims();
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p.dims() != d) {
      throw Error(ErrorCode::DimensionMismatch,
                  "'" + p.dataset_id() + "' has d=" + std::to_string(p.dims()) +
                      ", expected " + std::to_string(d));
    }
    n += p.rows();
  }
  std::vector<float> data;
  data.reserve(n * d);
  for (const auto& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
  return FeatureMatrix(n, d, std::move(data), tag, std::move(dataset_id));
}

}  // namespace cift
