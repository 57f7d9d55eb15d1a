#include "cift/robustness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>

#include "cift/error.hpp"

namespace cift {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

ConditionKind parse_kind(std::string_view text, std::size_t line_no) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "ID") return ConditionKind::ID;
  if (upper == "OOD") return ConditionKind::OOD;
  throw Error(ErrorCode::InvalidTable, "line " + std::to_string(line_no) + ": kind '" +
                                           std::string(text) + "' is neither ID nor OOD");
}

struct GroupMeans {
  double ood = 0.0;
  double id = 0.0;
};

GroupMeans means_at(const MseTable& table, const MixRatio& ratio, ErrorCode missing) {
  double ood = 0.0;
  double id = 0.0;
  std::size_t n_ood = 0;
  std::size_t n_id = 0;
  for (const auto& c : table.conditions()) {
    const auto v = c.at(ratio);
    if (!v) {
      throw Error(missing, "condition '" + c.name + "' has no entry for " + ratio.str());
    }
    if (c.kind == ConditionKind::OOD) {
      ood += *v;
      ++n_ood;
    } else {
      id += *v;
      ++n_id;
    }
  }
  return {ood / static_cast<double>(n_ood), id / static_cast<double>(n_id)};
}

}  // namespace

std::optional<double> MseCondition::at(const MixRatio& ratio) const {
  for (const auto& [r, v] : mse_by_ratio) {
    if (r == ratio) return v;
  }
  return std::nullopt;
}

MseTable::MseTable(std::vector<MseCondition> conditions) : conditions_(std::move(conditions)) {
  bool has_id = false;
  bool has_ood = false;
  for (const auto& c : conditions_) {
    has_id |= c.kind == ConditionKind::ID;
    has_ood |= c.kind == ConditionKind::OOD;
    for (std::size_t i = 0; i < c.mse_by_ratio.size(); ++i) {
      const auto& [ratio, value] = c.mse_by_ratio[i];
      if (!std::isfinite(value) || !(value > 0.0)) {
        throw Error(ErrorCode::InvalidTable, "condition '" + c.name + "' at " + ratio.str() +
                                                 ": MSE must be positive and finite");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (c.mse_by_ratio[j].first == ratio) {
          throw Error(ErrorCode::InvalidTable,
                      "condition '" + c.name + "' lists " + ratio.str() + " twice");
        }
      }
    }
    if (!c.at(MixRatio::baseline())) {
      throw Error(ErrorCode::MissingBaseline,
                  "condition '" + c.name + "' has no baseline (R:0) entry");
    }
  }
  if (!has_id || !has_ood) {
    throw Error(ErrorCode::InvalidTable, "table needs at least one ID and one OOD condition");
  }
}

MseTable MseTable::parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<MseCondition> conditions;
  std::map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split(view);
    if (!header_seen) {
      if (fields.size() != 4 || fields[0] != "condition" || fields[1] != "kind" ||
          fields[2] != "ratio" || fields[3] != "mse") {
        throw Error(ErrorCode::InvalidTable, "expected header 'condition,kind,ratio,mse'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) {
      throw Error(ErrorCode::InvalidTable, "line " + std::to_string(line_no) + ": expected 4 fields");
    }
    const std::string name(fields[0]);
    const ConditionKind kind = parse_kind(fields[1], line_no);
    MixRatio ratio = MixRatio::baseline();
    try {
      ratio = MixRatio::parse(fields[2]);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidTable, "line " + std::to_string(line_no) + ": " + e.what());
    }
    double mse = 0.0;
    const auto f = fields[3];
    const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), mse);
    if (ec != std::errc() || end != f.data() + f.size()) {
      throw Error(ErrorCode::InvalidTable, "line " + std::to_string(line_no) +
                                               ": cannot parse mse '" + std::string(f) + "'");
    }
    auto [it, inserted] = index.try_emplace(name, conditions.size());
    if (inserted) conditions.push_back({name, kind, {}});
    auto& cond = conditions[it->second];
    if (cond.kind != kind) {
      throw Error(ErrorCode::InvalidTable, "line " + std::to_string(line_no) + ": condition '" +
                                               name + "' changes kind");
    }
    cond.mse_by_ratio.emplace_back(ratio, mse);
  }
  if (!header_seen) throw Error(ErrorCode::InvalidTable, "empty MSE table");
  return MseTable(std::move(conditions));
}

MseTable MseTable::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open MSE table " + path.string());
  return parse_csv(in);
}

double robustness_score_from_means(double ood_mean, double ood_baseline, double id_mean,
                                   double id_baseline) {
  const double ood_gain = std::max(0.0, 1.0 - ood_mean / ood_baseline);
  return ood_gain * 100.0 * (id_baseline / id_mean);
}

RsPoint robustness_score(const MseTable& table, const MixRatio& ratio) {
  const GroupMeans base = means_at(table, MixRatio::baseline(), ErrorCode::MissingBaseline);
  const GroupMeans at = means_at(table, ratio, ErrorCode::MissingRatio);
  return {ratio, robustness_score_from_means(at.ood, base.ood, at.id, base.id), at.ood, at.id};
}

std::vector<RsPoint> rs_curve(const MseTable& table) {
  std::vector<MixRatio> common;
  for (const auto& [ratio, value] : table.conditions().front().mse_by_ratio) {
    const bool everywhere = std::all_of(table.conditions().begin(), table.conditions().end(),
                                        [&](const MseCondition& c) { return c.at(ratio).has_value(); });
    if (everywhere) common.push_back(ratio);
  }
  std::sort(common.begin(), common.end());
  std::vector<RsPoint> out;
  out.reserve(common.size());
  for (const auto& r : common) out.push_back(robustness_score(table, r));
  return out;
}

}  // namespace cift
