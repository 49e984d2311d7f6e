#include "symtensor/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace symtensor {

namespace {

// Token stream over a text source with '#' comment lines removed.
class Tokens {
 public:
  explicit Tokens(std::istream& is) {
    std::string line;
    std::string body;
    while (std::getline(is, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      body += line;
      body += '\n';
    }
    ss_.str(body);
  }

  std::string word(const char* what) {
    std::string w;
    if (!(ss_ >> w)) throw IoError(std::string("unexpected end of input while reading ") + what);
    return w;
  }

  long long integer(const char* what) {
    const std::string w = word(what);
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(w, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != w.size()) throw IoError(std::string("expected integer for ") + what + ", got '" + w + "'");
    return v;
  }

  double real(const char* what) {
    const std::string w = word(what);
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end != w.c_str() + w.size())
      throw IoError(std::string("expected number for ") + what + ", got '" + w + "'");
    return v;
  }

  bool done() {
    ss_ >> std::ws;
    return ss_.eof();
  }

 private:
  std::istringstream ss_;
};

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double number_or_nan(const nlohmann::json& v) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_tensor(std::ostream& os, const DenseTensor<double>& t) {
  os << t.order();
  for (Index d : t.dims()) os << ' ' << d;
  os << '\n';
  const Index row = t.dim(0);
  for (Index i = 0; i < t.numel(); ++i) {
    os << format_real(t.data()[i]);
    os << (((i + 1) % row == 0) ? '\n' : ' ');
  }
}

DenseTensor<double> read_tensor(std::istream& is) {
  Tokens tok(is);
  const auto order = tok.integer("tensor order");
  if (order != 3 && order != 4) throw IoError("tensor order must be 3 or 4, got " + std::to_string(order));
  std::vector<Index> dims;
  for (long long n = 0; n < order; ++n) {
    const auto d = tok.integer("tensor dimension");
    if (d <= 0) throw IoError("tensor dimensions must be positive");
    dims.push_back(static_cast<Index>(d));
  }
  DenseTensor<double> t(dims);
  for (Index i = 0; i < t.numel(); ++i) t.data()[i] = tok.real("tensor value");
  if (!tok.done()) throw IoError("trailing data after tensor values");
  return t;
}

void write_tensor(const std::filesystem::path& path, const DenseTensor<double>& t) {
  auto out = open_out(path);
  write_tensor(out, t);
  finish(out, path);
}

DenseTensor<double> read_tensor(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto in = open_in(path);
    return read_tensor(in);
  });
}

void write_model(std::ostream& os, const FactorModel<double>& m) {
  m.validate();
  os << "# symtensor factor model\n";
  os << "model " << pattern_name(m.pattern) << ' ' << m.rank() << '\n';
  for (const auto& f : m.factors) {
    os << "factor " << f.rows() << ' ' << f.cols() << '\n';
    for (Index j = 0; j < f.cols(); ++j) {
      for (Index i = 0; i < f.rows(); ++i) os << (i ? " " : "") << format_real(f(i, j));
      os << '\n';
    }
  }
  if (m.weights.size() != 0) {
    os << "weights " << m.weights.size() << '\n';
    for (Index r = 0; r < m.weights.size(); ++r) os << (r ? " " : "") << format_real(m.weights(r));
    os << '\n';
  }
}

FactorModel<double> read_model(std::istream& is) {
  Tokens tok(is);
  if (tok.word("model header") != "model") throw IoError("model file must start with 'model'");
  const std::string name = tok.word("pattern");
  const auto pattern = parse_pattern(name);
  if (!pattern) throw IoError("unknown pattern '" + name + "'");
  const auto rank = tok.integer("rank");
  if (rank < 1) throw IoError("model rank must be >= 1");
  std::vector<Matrix<double>> factors;
  for (int f = 0; f < factor_count(*pattern); ++f) {
    if (tok.word("factor header") != "factor") throw IoError("expected 'factor' block");
    const auto rows = tok.integer("factor rows");
    const auto cols = tok.integer("factor cols");
    if (rows < 1 || cols != rank) throw IoError("factor shape inconsistent with rank");
    Matrix<double> m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = tok.real("factor value");
    factors.push_back(std::move(m));
  }
  Vector<double> weights;
  if (!tok.done()) {
    if (tok.word("weights header") != "weights") throw IoError("expected 'weights' block");
    const auto n = tok.integer("weights length");
    if (n != rank) throw IoError("weights length must equal rank");
    weights.resize(n);
    for (Index r = 0; r < n; ++r) weights(r) = tok.real("weight value");
    if (!tok.done()) throw IoError("trailing data after model");
  }
  return FactorModel<double>(*pattern, std::move(factors), std::move(weights));
}

void write_model(const std::filesystem::path& path, const FactorModel<double>& m) {
  auto out = open_out(path);
  write_model(out, m);
  finish(out, path);
}

FactorModel<double> read_model(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto in = open_in(path);
    return read_model(in);
  });
}

void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace) {
  trace.validate();
  os << "iteration,residual_sq,elapsed_s\n";
  for (std::size_t k = 0; k < trace.residuals.size(); ++k)
    os << (k + 1) << ',' << format_sci(trace.residuals[k]) << ',' << format_real(trace.elapsed[k])
       << '\n';
}

ConvergenceTrace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "iteration,residual_sq,elapsed_s") throw IoError("unexpected trace header '" + line + "'");
  ConvergenceTrace trace;
  std::size_t expected = 1;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string it, res, el;
    if (!std::getline(row, it, ',') || !std::getline(row, res, ',') || !std::getline(row, el))
      throw IoError("malformed trace row '" + line + "'");
    if (std::stoul(it) != expected) throw IoError("trace iterations must be consecutive from 1");
    ++expected;
    trace.residuals.push_back(std::strtod(res.c_str(), nullptr));
    trace.elapsed.push_back(std::strtod(el.c_str(), nullptr));
  }
  try {
    trace.validate();
  } catch (const Error& e) {
    throw IoError(e.what());
  }
  return trace;
}

void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace) {
  auto out = open_out(path);
  write_trace_csv(out, trace);
  finish(out, path);
}

ConvergenceTrace read_trace_csv(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto in = open_in(path);
    return read_trace_csv(in);
  });
}

std::string summary_to_json(const RunSummary& s) {
  using nlohmann::json;
  json j;
  j["experiment"] = s.experiment;
  j["pattern"] = s.pattern;
  j["dims"] = s.dims;
  j["rank"] = s.rank;
  json runs = json::array();
  for (const auto& r : s.runs) {
    runs.push_back({{"run_index", r.run_index},
                    {"seed", r.seed},
                    {"solver", r.solver},
                    {"iterations", r.iterations},
                    {"final_residual", r.final_residual},
                    {"wall_time_s", r.wall_time},
                    {"stop_reason", std::string(stop_reason_name(r.stop_reason))},
                    {"trace_file", r.trace_file}});
  }
  j["runs"] = std::move(runs);
  json aggs = json::array();
  for (const auto& a : s.aggregates) {
    aggs.push_back({{"solver", a.solver},
                    {"population", a.population},
                    {"total", a.total},
                    {"converged", a.converged},
                    {"convergence_fraction", a.convergence_fraction},
                    {"mean_iterations", json_number(a.mean_iterations)},
                    {"median_iterations", json_number(a.median_iterations)},
                    {"mean_wall_time_s", json_number(a.mean_wall_time)},
                    {"median_wall_time_s", json_number(a.median_wall_time)}});
  }
  j["aggregates"] = std::move(aggs);
  return j.dump(2);
}

RunSummary summary_from_json(const std::string& text) {
  using nlohmann::json;
  RunSummary s;
  try {
    const json j = json::parse(text);
    s.experiment = j.at("experiment").get<std::string>();
    s.pattern = j.at("pattern").get<std::string>();
    s.dims = j.at("dims").get<std::vector<Index>>();
    s.rank = j.at("rank").get<Index>();
    for (const auto& r : j.at("runs")) {
      RunRecord rec;
      rec.run_index = r.at("run_index").get<int>();
      rec.seed = r.at("seed").get<std::uint64_t>();
      rec.solver = r.at("solver").get<std::string>();
      rec.iterations = r.at("iterations").get<int>();
      rec.final_residual = r.at("final_residual").get<double>();
      rec.wall_time = r.at("wall_time_s").get<double>();
      const auto reason = parse_stop_reason(r.at("stop_reason").get<std::string>());
      if (!reason) throw IoError("unknown stop_reason in summary");
      rec.stop_reason = *reason;
      rec.trace_file = r.at("trace_file").get<std::string>();
      s.runs.push_back(std::move(rec));
    }
    for (const auto& a : j.at("aggregates")) {
      SolverAggregate agg;
      agg.solver = a.at("solver").get<std::string>();
      agg.population = a.at("population").get<std::string>();
      agg.total = a.at("total").get<int>();
      agg.converged = a.at("converged").get<int>();
      agg.convergence_fraction = a.at("convergence_fraction").get<double>();
      agg.mean_iterations = number_or_nan(a.at("mean_iterations"));
      agg.median_iterations = number_or_nan(a.at("median_iterations"));
      agg.mean_wall_time = number_or_nan(a.at("mean_wall_time_s"));
      agg.median_wall_time = number_or_nan(a.at("median_wall_time_s"));
      s.aggregates.push_back(std::move(agg));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed summary JSON: ") + e.what());
  }
  return s;
}

void write_summary_json(const std::filesystem::path& path, const RunSummary& s) {
  auto out = open_out(path);
  out << summary_to_json(s) << '\n';
  finish(out, path);
}

RunSummary read_summary_json(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto in = open_in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return summary_from_json(buf.str());
  });
}

}  // namespace symtensor
