#include "batchode/csv.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace batchode {

std::string format_real(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  if (header.empty()) throw std::invalid_argument("csv header is empty");
  for (const auto& h : header) field(h);
  end_row();
}

void CsvWriter::separator() {
  if (in_row_ > 0) out_ << ',';
  ++in_row_;
}

CsvWriter& CsvWriter::field(std::string_view text) {
  if (text.find_first_of(",\n") != std::string_view::npos)
    throw std::invalid_argument("csv field contains a separator");
  separator();
  out_ << text;
  return *this;
}

CsvWriter& CsvWriter::field(double x) { return field(std::string_view(format_real(x))); }

CsvWriter& CsvWriter::field(std::int64_t x) {
  separator();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::field(std::size_t x) {
  separator();
  out_ << x;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("csv row has the wrong number of fields");
  out_ << '\n';
  in_row_ = 0;
}

void write_lorenz_perf_csv(std::ostream& out, const std::vector<LorenzPerfRow>& rows) {
  CsvWriter csv(out, {"N", "runtime_seconds", "runtime_per_instance_us", "width", "unroll", "workers"});
  for (const auto& r : rows) {
    csv.field(r.n).field(r.runtime_seconds).field(r.runtime_seconds * 1e6 / static_cast<double>(r.n));
    csv.field(r.width).field(r.unroll).field(r.workers);
    csv.end_row();
  }
}

void write_micro_csv(std::ostream& out, const std::vector<MicroRow>& rows) {
  CsvWriter csv(out, {"model", "N", "width", "unroll", "runtime_seconds"});
  for (const auto& r : rows) {
    csv.field(r.model).field(r.n).field(r.width).field(r.unroll).field(r.runtime_seconds);
    csv.end_row();
  }
}

void write_km_response_csv(std::ostream& out, const EnsembleResult& result) {
  CsvWriter csv(out, {"f1_hz", "phase_index", "y1_max", "n_f_total"});
  for (const auto& inst : result.instances) {
    for (std::size_t k = 0; k < inst.records.size(); ++k) {
      csv.field(inst.sweep_value).field(k).field(inst.records[k].y1_max).field(inst.counters.rhs_evals);
      csv.end_row();
    }
  }
}

void write_work_precision_csv(std::ostream& out, const std::vector<WorkPrecisionRow>& rows) {
  CsvWriter csv(out, {"f1_hz", "tolerance", "stepper", "E_abs", "n_f_total"});
  for (const auto& r : rows) {
    csv.field(r.frequency).field(r.tolerance).field(to_string(r.stepper)).field(r.error).field(r.rhs_evals);
    csv.end_row();
  }
}

void write_valve_csv(std::ostream& out, const EnsembleResult& result) {
  CsvWriter csv(out, {"q", "phase_index", "y1_max", "y1_min", "n_impacts"});
  for (const auto& inst : result.instances) {
    for (std::size_t k = 0; k < inst.records.size(); ++k) {
      const auto& r = inst.records[k];
      csv.field(inst.sweep_value).field(k).field(r.y1_max).field(r.y1_min).field(r.events);
      csv.end_row();
    }
  }
}

}  // namespace batchode
