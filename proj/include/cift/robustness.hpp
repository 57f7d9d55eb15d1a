#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cift/composition.hpp"

namespace cift {

enum class ConditionKind { ID, OOD };

struct MseCondition {
  std::string name;
  ConditionKind kind = ConditionKind::ID;
  std::vector<std::pair<MixRatio, double>> mse_by_ratio;

  std::optional<double> at(const MixRatio& ratio) const;
};

// Open-loop MSE per evaluation condition and mixing ratio. Construction
// enforces positive finite values, a baseline entry in every condition and at
// least one ID and one OOD condition.
class MseTable {
 public:
  explicit MseTable(std::vector<MseCondition> conditions);

  // CSV with header `condition,kind,ratio,mse`, ratio written R:S.
  static MseTable parse_csv(std::istream& in);
  static MseTable read_csv(const std::filesystem::path& path);

  const std::vector<MseCondition>& conditions() const noexcept { return conditions_; }

 private:
  std::vector<MseCondition> conditions_;
};

struct RsPoint {
  MixRatio ratio = MixRatio::baseline();
  double rs = 0.0;
  double ood_mean = 0.0;
  double id_mean = 0.0;
};

// max(0, 1 - ood/ood_baseline) * 100 * (id_baseline / id)
double robustness_score_from_means(double ood_mean, double ood_baseline, double id_mean,
                                   double id_baseline);

RsPoint robustness_score(const MseTable& table, const MixRatio& ratio);

// One point per ratio present in every condition, ordered by lambda.
std::vector<RsPoint> rs_curve(const MseTable& table);

}  // namespace cift
