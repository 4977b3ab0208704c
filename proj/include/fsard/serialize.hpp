#pragma once

#include "fsard/analysis.hpp"
#include "fsard/optimizer.hpp"
#include "fsard/simulator.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fsard {

using Json = nlohmann::ordered_json;

std::string_view library_version();

/// 10 significant digits; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double value);

/// Value rounded to 10 significant digits, null when not finite.
Json json_number(double value);

Json to_json(const ProtocolConfig &config);
Json to_json(const AlohaConfig &config);
Json to_json(const SchemeSpec &scheme);
Json to_json(const SlotProfile &profile);
Json to_json(const MomentDecomposition &moments);
Json to_json(const AnalysisReport &report);
Json to_json(const EmpiricalMoments &moments);
Json to_json(const FrameStats &frames);
/// Includes the empirical moment report when the run carried a large enough trace.
Json to_json(const SimResult &result);
/// Summary record; the per-point trace goes to CSV.
Json to_json(const OptimizationResult &result);

/// "# fsard-csv v1", the library version and the resolved experiment spec as comment lines.
void write_csv_preamble(std::ostream &out, const Json &spec);
void write_csv_line(std::ostream &out, const std::vector<std::string> &fields);

std::vector<std::string> analysis_csv_header();
std::vector<std::string> analysis_csv_row(const AnalysisReport &report);

std::vector<std::string> simulation_csv_header();
/// `replication` < 0 marks an aggregate row.
std::vector<std::string> simulation_csv_row(const SimResult &result, int replication);

std::vector<std::string> search_csv_header();
/// `param` is gamma for framed schemes and tau for slotted ALOHA.
std::vector<std::string> search_csv_row(Scheme scheme, int users, int mini_slots, double rho, const SearchPoint &point);

} // namespace fsard
