#pragma once

#include <string>

#include "ems/orchestrator.hpp"

namespace ems::report {

enum class Format { Text, Tabular };

/// Deterministic report rendering; wall times are excluded so identical runs
/// produce identical bytes.
std::string render(const orch::ProcedureReport& rep, Format fmt);

/// Side-by-side A/B comparison (CCR, average LMP deltas, objectives).
std::string render_compare(const orch::ProcedureReport& a, const orch::ProcedureReport& b,
                           Format fmt);

std::string render_rtca(const Case& c, const rtca::RtcaReport& rep);

}  // namespace ems::report
