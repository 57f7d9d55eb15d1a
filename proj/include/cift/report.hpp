#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "json.hpp"

#include "cift/composition.hpp"
#include "cift/robustness.hpp"
#include "cift/theory_oracle.hpp"

namespace cift {

nlohmann::json sweep_report_json(const SweepReport& report);
std::string sweep_report_csv(const SweepReport& report);

// Line chart of SNR against lambda. Every point is a <circle class="point">
// carrying data-ratio / data-lambda / data-snr; the decoherence point and the
// selected ratio get class "decoherence" and "selected" markers.
std::string sweep_report_svg(const SweepReport& report);

// Columns: ratio,lambda,ood_mean,id_mean,rs (rs to two decimals).
std::string rs_curve_csv(std::span<const RsPoint> curve);

nlohmann::json oracle_cases_json(std::span<const theory::OracleCase> cases);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cift
