#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "risnc/config.hpp"
#include "risnc/simulation.hpp"

namespace risnc {

inline constexpr const char* kCodeVersion = "0.1.0";

/// Per-slot CSV `policy,replication,slot,plant,delta,sinr,stage_cost,cost_to_come`.
/// Slots 0..T-1 carry the transmission outcome; slot T carries the terminal
/// state cost with empty delta and sinr.
void write_slot_csv(std::ostream& out, const ExperimentResult& result);

/// Summary CSV `policy,slot,mean_cost_to_come,stderr`, T + 1 rows per policy.
void write_summary_csv(std::ostream& out, const ExperimentResult& result);

/// Resolved config, seed and code version. Loadable by load_config.
void write_manifest(std::ostream& out, const Config& config);

/// Whitespace-separated columns: slot, then mean cost-to-come per policy.
void write_plot_data(std::ostream& out, const ExperimentResult& result);

struct OutputPaths {
  std::filesystem::path slots;
  std::filesystem::path summary;
  std::filesystem::path manifest;
  std::filesystem::path plot;
};

OutputPaths output_paths(const std::filesystem::path& dir);

/// Writes every artifact into dir (created if missing). Throws Error with
/// the offending path on I/O failure.
OutputPaths emit_outputs(const ExperimentResult& result, const Config& config,
                         const std::filesystem::path& dir, bool with_plot);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& value);
/// Round-trippable decimal text for doubles ("%.17g"); non-finite as inf/-inf/nan.
std::string format_double(double value);

}  // namespace risnc
