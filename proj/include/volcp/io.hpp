#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "volcp/montecarlo.hpp"

namespace volcp {

// All JSON payloads use insertion-ordered objects so that serialized
// output is stable field-for-field.
using ojson = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct CsvSpec {
  // Step size when the file has no time column. When a time column is
  // present the step is inferred and this must not be set.
  std::optional<double> delta_override;
};

// CSV with columns "t,x" (equispaced times) or a single value column.
// An optional first header line is detected by failing to parse as numbers.
// Errors carry the 1-based file row number.
SamplePath load_csv(std::istream& in, const CsvSpec& spec = {});
SamplePath load_csv_file(const std::string& filename, const CsvSpec& spec = {});

void write_path_csv(std::ostream& out, const SamplePath& path);
void write_trace_csv(std::ostream& out, const CusumTrace& trace);
void write_records_csv(std::ostream& out, const std::vector<McRecord>& records);

// --- JSON payloads ---------------------------------------------------------

ojson to_json(const ChangePointFit& fit);
ChangePointFit fit_from_json(const ojson& j);

ojson to_json(const TestReport& report);
TestReport test_report_from_json(const ojson& j);

ojson to_json(const IntervalEstimate& interval);
IntervalEstimate interval_from_json(const ojson& j);

ojson to_json(const QuantileTable& table);
QuantileTable table_from_json(const ojson& j);

ojson to_json(const McConfig& mc);
McConfig mc_config_from_json(const ojson& j);

// The experiment's model is serialized through its textual coefficient
// specs, so configs on disk are restricted to the coefficient
// mini-language.
ojson to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const ojson& j);

ojson to_json(const McSummary& summary);
// Recomputes aggregates from the records and rejects a summary whose
// stored aggregates disagree.
McSummary summary_from_json(const ojson& j);

ojson to_json(const RateReport& report);
ojson to_json(const DiagnosticReport& report);

// Versioned envelope: {"schema_version":1, "kind":<kind>, ...payload...},
// with an optional "config" echo so a report can be rerun.
ojson make_report(const std::string& kind, ojson payload,
                  std::optional<ojson> config_echo = std::nullopt);

// Parses an envelope, checks the version and kind, returns the payload.
ojson open_report(const std::string& text, const std::string& expected_kind);

void save_table(const std::string& filename, const QuantileTable& table);
QuantileTable load_table(const std::string& filename);

// Cache key: target law, trim and full MC config.
std::string table_cache_key(LimitLaw target, double trim_delta,
                            const McConfig& mc);

// Loads the table from cache_dir when present, otherwise simulates it and
// stores the result.
QuantileTable cached_table(const std::string& cache_dir, LimitLaw target,
                           double trim_delta, const McConfig& mc);

std::string read_text_file(const std::string& filename);
void write_text_file(const std::string& filename, const std::string& text);

}  // namespace volcp
