#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "envlab/envelope2d.hpp"
#include "envlab/family.hpp"
#include "envlab/report.hpp"
#include "envlab/sampled_weight.hpp"
#include "envlab/sections.hpp"

namespace envlab {

/// Numeric table with named columns. Lines starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// Columns `s,u`. Asymptotic slopes come from the end secants unless given.
SampledWeight read_weight_csv(const std::string& path);
void write_weight_csv(const std::string& path, const SampledWeight& w);

/// Columns `tau,s,phi`, τ the slow index. The polytope is not stored; reading
/// attaches the bounding box of the sampled difference quotients.
SampledWeight2D read_weight2d_csv(const std::string& path);
void write_weight2d_csv(const std::string& path, const SampledWeight2D& w);

/// Columns `t,s,psi`.
void write_family_csv(const std::string& path, const FamilyCurve& fc);

/// `{ "s": [...], "phi_A": [...], "d_A": int, "phi_L": [...], "d_L": int }`.
ModelBundlePair pair_from_json(const nlohmann::json& j);
nlohmann::json pair_to_json(const ModelBundlePair& pair);

/// `{ "m": int, "coefficients": [ { "l", "k", "re", "im" } ] }`.
TotalSpaceSection section_from_json(const nlohmann::json& j);
nlohmann::json section_to_json(const TotalSpaceSection& F);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);
void write_report(const std::string& path, const VerificationReport& rep);

/// gnuplot columns `s u u_e psi`, one row per sample.
void write_plot_1d(const std::string& path, const SampledWeight& w, const SampledWeight& envelope);
/// gnuplot surface: one `tau s phi` block per τ, blocks separated by a blank line.
void write_plot_2d(const std::string& path, const SampledWeight2D& w);

}  // namespace envlab
