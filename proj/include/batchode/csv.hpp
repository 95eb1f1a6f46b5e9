#pragma once

// CSV serialization of experiment results. One header row, comma-separated,
// newline-terminated; reals in shortest round-trip form.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "batchode/ensemble.hpp"

namespace batchode {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_real(double x);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  CsvWriter& field(std::string_view text);
  CsvWriter& field(double x);
  CsvWriter& field(std::int64_t x);
  CsvWriter& field(std::size_t x);
  CsvWriter& field(int x) { return field(static_cast<std::int64_t>(x)); }
  /// Terminates the current row; throws std::logic_error on a column count mismatch.
  void end_row();

 private:
  void separator();
  std::ostream& out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

struct LorenzPerfRow {
  std::size_t n = 0;
  double runtime_seconds = 0.0;
  int width = 0;
  int unroll = 0;
  int workers = 0;
};

struct MicroRow {
  std::string model;
  std::size_t n = 0;
  int width = 0;
  int unroll = 0;
  double runtime_seconds = 0.0;
};

void write_lorenz_perf_csv(std::ostream& out, const std::vector<LorenzPerfRow>& rows);
void write_micro_csv(std::ostream& out, const std::vector<MicroRow>& rows);
/// f1_hz, phase_index, y1_max, n_f_total
void write_km_response_csv(std::ostream& out, const EnsembleResult& result);
/// f1_hz, tolerance, stepper, E_abs, n_f_total
void write_work_precision_csv(std::ostream& out, const std::vector<WorkPrecisionRow>& rows);
/// q, phase_index, y1_max, y1_min, n_impacts
void write_valve_csv(std::ostream& out, const EnsembleResult& result);

}  // namespace batchode
