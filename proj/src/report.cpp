#include "cift/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cift/error.hpp"

namespace cift {

namespace {

// Shortest round-trip formatting, locale independent.
std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  // Prefer the shortest representation that parses back exactly.
  for (int prec = 1; prec <= 17; ++prec) {
    char trial[32];
    std::snprintf(trial, sizeof(trial), "%.*g", prec, x);
    if (std::strtod(trial, nullptr) == x) return trial;
  }
  return buf;
}

std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  return buf;
}

nlohmann::json ratio_json(const MixRatio& r) {
  return {{"ratio", r.str()},
          {"real_parts", r.real_parts()},
          {"synth_parts", r.synth_parts()},
          {"lambda", r.lambda()}};
}

}  // namespace

nlohmann::json sweep_report_json(const SweepReport& report) {
  nlohmann::json doc;
  doc["points"] = nlohmann::json::array();
  for (const auto& p : report.points) {
    nlohmann::json item = {{"ratio", p.ratio.str()},
                           {"real_parts", p.ratio.real_parts()},
                           {"synth_parts", p.ratio.synth_parts()},
                           {"lambda", p.ratio.lambda()},
                           {"mu", p.mu},
                           {"sigma", p.sigma},
                           {"snr", p.defined ? nlohmann::json(p.snr) : nlohmann::json(nullptr)},
                           {"n_real_rows", p.n_real_rows},
                           {"n_synth_rows", p.n_synth_rows}};
    doc["points"].push_back(std::move(item));
  }
  doc["decoherence_index"] = report.decoherence_index
                                 ? nlohmann::json(*report.decoherence_index)
                                 : nlohmann::json(nullptr);
  doc["lambda_star"] = ratio_json(report.lambda_star);
  doc["notes"] = report.notes;
  return doc;
}

std::string sweep_report_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "real_parts,synth_parts,ratio,lambda,mu,sigma,snr,n_real_rows,n_synth_rows\n";
  for (const auto& p : report.points) {
    out << p.ratio.real_parts() << ',' << p.ratio.synth_parts() << ',' << p.ratio.str() << ','
        << num(p.ratio.lambda()) << ',' << num(p.mu) << ',' << num(p.sigma) << ','
        << (p.defined ? num(p.snr) : std::string()) << ',' << p.n_real_rows << ','
        << p.n_synth_rows << '\n';
  }
  return out.str();
}

std::string sweep_report_svg(const SweepReport& report) {
  constexpr double width = 640.0;
  constexpr double height = 400.0;
  constexpr double left = 60.0;
  constexpr double right = 20.0;
  constexpr double top = 30.0;
  constexpr double bottom = 50.0;

  double lambda_max = 0.0;
  double snr_max = 0.0;
  for (const auto& p : report.points) {
    lambda_max = std::max(lambda_max, p.ratio.lambda());
    if (p.defined) snr_max = std::max(snr_max, p.snr);
  }
  if (lambda_max <= 0.0) lambda_max = 1.0;
  if (snr_max <= 0.0) snr_max = 1.0;
  snr_max *= 1.1;
  auto sx = [&](double l) { return left + (width - left - right) * l / lambda_max; };
  auto sy = [&](double s) { return height - bottom - (height - top - bottom) * s / snr_max; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "  <line class=\"axis\" x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\""
      << width - right << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "  <line class=\"axis\" x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "  <text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">mixing ratio lambda (synthetic fraction)</text>\n";
  svg << "  <text x=\"16\" y=\"" << height / 2 << "\" transform=\"rotate(-90 16 " << height / 2
      << ")\" text-anchor=\"middle\" font-size=\"13\">feature-space SNR |mu/sigma|</text>\n";

  svg << "  <polyline class=\"snr\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  bool first = true;
  for (const auto& p : report.points) {
    if (!p.defined) continue;
    svg << (first ? "" : " ") << fixed(sx(p.ratio.lambda()), 2) << ',' << fixed(sy(p.snr), 2);
    first = false;
  }
  svg << "\"/>\n";

  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const auto& p = report.points[i];
    if (!p.defined) continue;
    const double x = sx(p.ratio.lambda());
    const double y = sy(p.snr);
    svg << "  <circle class=\"point\" cx=\"" << fixed(x, 2) << "\" cy=\"" << fixed(y, 2)
        << "\" r=\"4\" fill=\"#1f77b4\" data-ratio=\"" << p.ratio.str() << "\" data-lambda=\""
        << num(p.ratio.lambda()) << "\" data-snr=\"" << num(p.snr) << "\"/>\n";
    svg << "  <text x=\"" << fixed(x, 2) << "\" y=\"" << height - bottom + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << p.ratio.str() << "</text>\n";
    if (report.decoherence_index && *report.decoherence_index == i) {
      svg << "  <circle class=\"decoherence\" cx=\"" << fixed(x, 2) << "\" cy=\"" << fixed(y, 2)
          << "\" r=\"9\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" data-ratio=\""
          << p.ratio.str() << "\"/>\n";
    }
    if (p.ratio == report.lambda_star) {
      svg << "  <circle class=\"selected\" cx=\"" << fixed(x, 2) << "\" cy=\"" << fixed(y, 2)
          << "\" r=\"9\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"2\" data-ratio=\""
          << p.ratio.str() << "\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string rs_curve_csv(std::span<const RsPoint> curve) {
  std::ostringstream out;
  out << "ratio,lambda,ood_mean,id_mean,rs\n";
  for (const auto& p : curve) {
    out << p.ratio.str() << ',' << num(p.ratio.lambda()) << ',' << num(p.ood_mean) << ','
        << num(p.id_mean) << ',' << fixed(p.rs, 2) << '\n';
  }
  return out.str();
}

nlohmann::json oracle_cases_json(std::span<const theory::OracleCase> cases) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& c : cases) {
    doc.push_back({{"suite", c.suite},
                   {"case", c.name},
                   {"analytic", c.analytic},
                   {"brute_force", c.brute_force},
                   {"abs_diff", c.abs_diff},
                   {"tolerance", c.tolerance},
                   {"pass", c.pass}});
  }
  return doc;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace cift
