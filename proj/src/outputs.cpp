#include "risnc/outputs.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "risnc/error.hpp"

namespace risnc {

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_slot_csv(std::ostream& out, const ExperimentResult& result) {
  out << "policy,replication,slot,plant,delta,sinr,stage_cost,cost_to_come\n";
  for (std::size_t p = 0; p < result.policies.size(); ++p) {
    const std::string name = csv_field(to_string(result.policies[p]));
    for (const RunTrace& tr : result.traces[p]) {
      for (std::size_t t = 0; t < tr.slots.size(); ++t) {
        for (std::size_t k = 0; k < tr.slots[t].size(); ++k) {
          const PlantSlot& s = tr.slots[t][k];
          out << name << ',' << tr.replication << ',' << t << ',' << k << ','
              << (s.delta ? 1 : 0) << ',' << format_double(s.sinr) << ','
              << format_double(s.stage_cost) << ',' << format_double(s.cost_to_come) << '\n';
        }
      }
      for (std::size_t k = 0; k < tr.terminal_cost.size(); ++k) {
        out << name << ',' << tr.replication << ',' << tr.slots.size() << ',' << k << ",,,"
            << format_double(tr.terminal_cost[k]) << ','
            << format_double(tr.terminal_cost_to_come[k]) << '\n';
      }
    }
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "policy,slot,mean_cost_to_come,stderr\n";
  for (const SummaryRow& row : result.summary) {
    out << csv_field(to_string(row.policy)) << ',' << row.slot << ','
        << format_double(row.mean_cost_to_come) << ',' << format_double(row.stderr_cost_to_come)
        << '\n';
  }
}

void write_manifest(std::ostream& out, const Config& config) {
  nlohmann::json doc{{"manifest_version", 1},
                     {"code_version", kCodeVersion},
                     {"seed", config.experiment.seed},
                     {"config", to_json(config)}};
  out << doc.dump(2) << '\n';
}

void write_plot_data(std::ostream& out, const ExperimentResult& result) {
  out << "# slot";
  for (Policy p : result.policies) out << ' ' << to_string(p);
  out << '\n';
  if (result.summary.empty()) return;
  for (int t = 0; t <= result.horizon; ++t) {
    out << t;
    for (const SummaryRow& row : result.summary) {
      if (row.slot == t) out << ' ' << format_double(row.mean_cost_to_come);
    }
    out << '\n';
  }
}

OutputPaths output_paths(const std::filesystem::path& dir) {
  return {dir / "slots.csv", dir / "summary.csv", dir / "manifest.json", dir / "plot.dat"};
}

namespace {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  writer(out);
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

OutputPaths emit_outputs(const ExperimentResult& result, const Config& config,
                         const std::filesystem::path& dir, bool with_plot) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  const OutputPaths paths = output_paths(dir);
  write_file(paths.slots, [&](std::ostream& o) { write_slot_csv(o, result); });
  write_file(paths.summary, [&](std::ostream& o) { write_summary_csv(o, result); });
  write_file(paths.manifest, [&](std::ostream& o) { write_manifest(o, config); });
  if (with_plot) write_file(paths.plot, [&](std::ostream& o) { write_plot_data(o, result); });
  return paths;
}

}  // namespace risnc
