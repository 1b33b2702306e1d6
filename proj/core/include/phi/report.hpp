#pragma once

#include <string>
#include <vector>

#include "phi/decompose.hpp"
#include "phi/packing.hpp"
#include "phi/simulator.hpp"

namespace phi {

inline constexpr const char* kReportSchema = "phi_sim_report_v1";

/// Report as a JSON document (schema "phi_sim_report_v1"). manifest_json,
/// if non-empty, must be a JSON object and is embedded under "manifest".
std::string report_json(const SimReport& report, const std::string& manifest_json = {},
                        bool include_rounds = false);

std::string metrics_json(const PhiMetrics& m);

/// One JSON object per line: {"units":[...],"row_meta":[...]}.
std::string pack_trace_jsonl(const std::vector<Pack>& packs);

} // namespace phi
