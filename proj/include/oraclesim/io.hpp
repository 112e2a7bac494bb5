#pragma once

#include <map>
#include <string>
#include <vector>

#include "oraclesim/experiments.hpp"
#include "oraclesim/progress.hpp"

namespace oraclesim {

/* Result persistence and config parsing. CSV is the plot-ready surface with
   the fixed column set; JSON is the full round-trippable artifact. All
   doubles are written with 17 significant digits, so re-reading reproduces
   them bit-exactly. */

std::string criterion_tag(RuntimeCriterion c);
RuntimeCriterion parse_criterion(const std::string& tag);
std::string status_tag(RunStatus s);
RunStatus parse_status(const std::string& tag);
std::string engine_tag(EngineKind e);
EngineKind parse_engine(const std::string& tag);
std::string method_tag(StepMethod m);
StepMethod parse_method(const std::string& tag);

// Shortest exact decimal: %.17g trimmed to the fewest round-tripping digits.
std::string format_double(double v);

// Columns: N,gamma,E,p,criterion,T_measured,T_bound,satisfied,wall_time_s
// (missing optionals are empty cells). Header always present.
std::string sweep_csv(const SweepResult& result);
// Lossy inverse of sweep_csv, enough to re-fit: status is inferred from the
// presence of T_measured.
std::vector<SweepRow> read_sweep_csv(const std::string& text);

std::string sweep_json(const SweepResult& result);
SweepResult read_sweep_json(const std::string& text);

// Columns: t,success_prob,F_w,F_total,rate_direct,rate_closed_form,
// purity_w,trace_w
std::string trajectory_csv(const std::vector<ProgressSample>& samples);

std::string unravel_json(const UnravelReport& report);

// key = value lines, '#' starts a comment, blank lines ignored; later keys
// override earlier ones.
std::map<std::string, std::string> parse_config(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace oraclesim
