#ifndef SYMTENSOR_IO_HPP
#define SYMTENSOR_IO_HPP

#include "symtensor/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace symtensor {

/// I/O failure carrying the offending path.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Tensor text format: first non-comment line "N d1 ... dN", then the
// prod(d) values in column-major order, whitespace separated. Lines whose
// first non-blank character is '#' are ignored.
void write_tensor(std::ostream& os, const DenseTensor<double>& t);
DenseTensor<double> read_tensor(std::istream& is);
void write_tensor(const std::filesystem::path& path, const DenseTensor<double>& t);
DenseTensor<double> read_tensor(const std::filesystem::path& path);

// Model text format:
//   model <pattern> <rank>
//   factor <rows> <cols>  followed by rows*cols column-major values
//   ... one factor block per distinct factor ...
//   weights <rank> <values>   (optional)
void write_model(std::ostream& os, const FactorModel<double>& m);
FactorModel<double> read_model(std::istream& is);
void write_model(const std::filesystem::path& path, const FactorModel<double>& m);
FactorModel<double> read_model(const std::filesystem::path& path);

// Trace CSV: header "iteration,residual_sq,elapsed_s"; residuals printed with
// 17 significant digits so that parsing recovers them bit-exactly.
void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace);
ConvergenceTrace read_trace_csv(std::istream& is);
void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace);
ConvergenceTrace read_trace_csv(const std::filesystem::path& path);

std::string summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const std::string& text);
void write_summary_json(const std::filesystem::path& path, const RunSummary& s);
RunSummary read_summary_json(const std::filesystem::path& path);

}  // namespace symtensor

#endif  // SYMTENSOR_IO_HPP
