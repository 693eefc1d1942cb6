#include "lefgpd/cli.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <sstream>
#include <string>

namespace lefgpd::cli {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::SchemaViolation, "field '" + field + "': " + what);
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
    throw Error(ErrorKind::SchemaViolation, "line " + std::to_string(line) + ": " + e.what());
  }
}

// Object view that rejects keys outside the allowed set.
class Fields {
 public:
  Fields(const json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) schema_error(path_.empty() ? "<root>" : path_, "expected an object");
    for (const auto& [key, value] : j.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) schema_error(child(key), "unknown key");
    }
  }

  const json* find(const char* key) const {
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& require(const char* key) const {
    const json* v = find(key);
    if (v == nullptr) schema_error(child(key), "required");
    return *v;
  }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
};

double number(const json& j, const std::string& field) {
  if (!j.is_number()) schema_error(field, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) schema_error(field, "expected an integer");
  return j.get<int>();
}

TorusMap parse_map(const json& j, int dim) {
  const std::string path = "map";
  if (!j.is_object()) schema_error(path, "expected an object");
  const json* type = j.contains("type") ? &j.at("type") : nullptr;
  if (type == nullptr || !type->is_string()) schema_error("map.type", "expected \"affine\" or \"circle_fourier\"");
  const std::string kind = type->get<std::string>();

  if (kind == "affine") {
    const Fields f(j, path, {"type", "matrix", "shift"});
    const json& rows = f.require("matrix");
    if (!rows.is_array() || static_cast<int>(rows.size()) != dim) {
      schema_error("map.matrix", "expected " + std::to_string(dim) + " rows");
    }
    IntMatrix a(dim, dim);
    for (int r = 0; r < dim; ++r) {
      const std::string rp = "map.matrix[" + std::to_string(r) + "]";
      if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != dim) {
        schema_error(rp, "expected " + std::to_string(dim) + " entries");
      }
      for (int c = 0; c < dim; ++c) a(r, c) = integer(rows[r][c], rp + "[" + std::to_string(c) + "]");
    }
    Vector b = Vector::Zero(dim);
    if (const json* shift = f.find("shift")) {
      if (!shift->is_array() || static_cast<int>(shift->size()) != dim) {
        schema_error("map.shift", "expected " + std::to_string(dim) + " numbers");
      }
      for (int i = 0; i < dim; ++i) b(i) = number((*shift)[i], "map.shift[" + std::to_string(i) + "]");
    }
    return TorusMap::affine(a, b);
  }
  if (kind == "circle_fourier") {
    if (dim != 1) schema_error("map.type", "circle_fourier maps need dimension 1");
    const Fields f(j, path, {"type", "degree", "constant", "terms"});
    const int degree = integer(f.require("degree"), "map.degree");
    const double constant = f.find("constant") ? number(*f.find("constant"), "map.constant") : 0.0;
    std::vector<FourierTerm> terms;
    if (const json* list = f.find("terms")) {
      if (!list->is_array()) schema_error("map.terms", "expected an array");
      for (std::size_t i = 0; i < list->size(); ++i) {
        const std::string tp = "map.terms[" + std::to_string(i) + "]";
        const Fields tf((*list)[i], tp, {"frequency", "amplitude"});
        terms.push_back({integer(tf.require("frequency"), tp + ".frequency"),
                         number(tf.require("amplitude"), tp + ".amplitude")});
      }
    }
    return TorusMap::circle(degree, constant, std::move(terms));
  }
  schema_error("map.type", "expected \"affine\" or \"circle_fourier\"");
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  const json doc = parse_document(text);
  const Fields root(doc, "", {"dimension", "map", "complex", "s", "t_ladder", "grid_size", "tolerances",
                              "output", "deterministic", "verbosity"});
  RunConfig rc;
  auto& vc = rc.verification;

  const int dim = integer(root.require("dimension"), "dimension");
  if (dim < 1 || dim > 3) schema_error("dimension", "must be 1, 2 or 3");
  int grid = 64;
  if (const json* g = root.find("grid_size")) grid = integer(*g, "grid_size");
  if (grid < 2) schema_error("grid_size", "must be >= 2");
  vc.geom = TorusGeometry(dim, grid);
  vc.map = parse_map(root.require("map"), dim);

  if (const json* c = root.find("complex")) {
    if (!c->is_string() || c->get<std::string>() != "de_rham") schema_error("complex", "only \"de_rham\" is supported");
  }
  if (const json* s = root.find("s")) {
    vc.s = integer(*s, "s");
    if (vc.s != 1) schema_error("s", "must be 1 (the de Rham Laplacian has order 2)");
  }
  if (const json* l = root.find("t_ladder")) {
    const Fields lf(*l, "t_ladder", {"t_max", "ratio", "rungs"});
    if (const json* v = lf.find("t_max")) vc.ladder.t_max = number(*v, "t_ladder.t_max");
    if (const json* v = lf.find("ratio")) vc.ladder.ratio = number(*v, "t_ladder.ratio");
    if (const json* v = lf.find("rungs")) vc.ladder.rungs = integer(*v, "t_ladder.rungs");
  }
  if (vc.ladder.rungs < 4) schema_error("t_ladder.rungs", "must be >= 4");
  if (!(vc.ladder.ratio > 0.0 && vc.ladder.ratio < 1.0)) schema_error("t_ladder.ratio", "must lie in (0, 1)");
  if (!(vc.ladder.t_max > 0.0 && vc.ladder.t_max <= 1.0)) schema_error("t_ladder.t_max", "must lie in (0, 1]");
  if (std::pow(vc.ladder.t_max, 2 * vc.s) > kMaxHeatTime) schema_error("t_ladder.t_max", "t_max^(2s) must be <= 0.25");

  if (const json* t = root.find("tolerances")) {
    const Fields tf(*t, "tolerances", {"spectral", "geometric"});
    if (const json* v = tf.find("spectral")) vc.tolerances.spectral = number(*v, "tolerances.spectral");
    if (const json* v = tf.find("geometric")) vc.tolerances.geometric = number(*v, "tolerances.geometric");
    if (!(vc.tolerances.spectral > 0.0)) schema_error("tolerances.spectral", "must be positive");
    if (!(vc.tolerances.geometric > 0.0)) schema_error("tolerances.geometric", "must be positive");
  }
  if (const json* o = root.find("output")) {
    const Fields of(*o, "output", {"format", "path"});
    if (const json* v = of.find("format")) {
      const std::string fmt_name = v->is_string() ? v->get<std::string>() : "";
      if (fmt_name == "json") rc.format = OutputFormat::Json;
      else if (fmt_name == "csv") rc.format = OutputFormat::Csv;
      else schema_error("output.format", "expected \"json\" or \"csv\"");
    }
    if (const json* v = of.find("path")) {
      if (!v->is_string()) schema_error("output.path", "expected a string");
      rc.output_path = v->get<std::string>();
    }
  }
  if (const json* d = root.find("deterministic")) {
    if (!d->is_boolean() || !d->get<bool>()) schema_error("deterministic", "runs are always deterministic; only true is accepted");
  }
  if (const json* v = root.find("verbosity")) rc.verbosity = integer(*v, "verbosity");
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::SchemaViolation, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

// ---------------------------------------------------------------------------

std::string format_double(double value) {
  if (!std::isfinite(value)) return "nan";
  return fmt::format("{:.17g}", value);
}

namespace {

void dump_into(const ojson& v, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case ojson::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [key, item] : v.items()) {
        out += inner + ojson(key).dump() + ": ";
        dump_into(item, out, indent + 1);
        out += ++i < v.size() ? ",\n" : "\n";
      }
      out += pad + "}";
      return;
    }
    case ojson::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        out += inner;
        dump_into(v[i], out, indent + 1);
        out += i + 1 < v.size() ? ",\n" : "\n";
      }
      out += pad + "]";
      return;
    }
    case ojson::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? fmt::format("{:.17g}", d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }
ojson optional_bool(const std::optional<bool>& v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

std::string dump_json(const ojson& value) {
  std::string out;
  dump_into(value, out, 0);
  out += "\n";
  return out;
}

ojson report_to_json(const ConvergenceReport& report) {
  ojson j;
  j["verdict"] = {{"pass", report.verdict.pass},
                  {"geometric", report.verdict.geometric},
                  {"spectral", optional_bool(report.verdict.spectral)},
                  {"spectral_t_independent", optional_bool(report.verdict.spectral_t_independent)},
                  {"cohomological", optional_bool(report.verdict.cohomological)}};
  j["limits"] = {{"geometric_extrapolated", report.geometric_extrapolated},
                 {"spectral", optional_number(report.spectral)},
                 {"fixed_point_side", report.fixed_point_side},
                 {"cohomological", optional_number(report.cohomological)},
                 {"boundary_str0_direct", report.boundary ? ojson(report.boundary->direct) : ojson(nullptr)},
                 {"boundary_str0_determinant",
                  report.boundary ? ojson(report.boundary->determinant_formula) : ojson(nullptr)}};
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    rows.push_back({{"t", r.t},
                    {"tau", r.tau},
                    {"grid_points", r.grid_points},
                    {"str_t_geometric", r.str_geometric},
                    {"str_spectral", optional_number(r.str_spectral)},
                    {"running_error", r.running_error},
                    {"extrapolation_residual", i < report.extrapolation_residuals.size()
                                                   ? ojson(report.extrapolation_residuals[i])
                                                   : ojson(nullptr)}});
  }
  j["rungs"] = rows;
  ojson fps = ojson::array();
  for (const auto& c : report.fixed_points) {
    ojson loc = ojson::array();
    for (Eigen::Index i = 0; i < c.record.location.size(); ++i) loc.push_back(c.record.location(i));
    ojson diff = ojson::array();
    for (Eigen::Index r = 0; r < c.record.differential.rows(); ++r) {
      ojson row = ojson::array();
      for (Eigen::Index col = 0; col < c.record.differential.cols(); ++col) row.push_back(c.record.differential(r, col));
      diff.push_back(row);
    }
    fps.push_back({{"location", loc},
                   {"differential", diff},
                   {"det_minus_identity", c.record.det_minus_identity},
                   {"weight", c.record.weight},
                   {"simple", c.record.simple},
                   {"local_supertrace", c.local_supertrace},
                   {"contribution", c.contribution}});
  }
  j["fixed_points"] = fps;
  if (report.error) {
    j["error"] = {{"kind", std::string(to_string(report.error->kind))}, {"message", report.error->message}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

std::string report_to_csv(const ConvergenceReport& report) {
  std::string out(kSweepHeader);
  out += "\n";
  for (const auto& r : report.rows) {
    out += format_double(r.t) + "," + format_double(r.tau) + "," + format_double(r.str_geometric) + "," +
           (r.str_spectral ? format_double(*r.str_spectral) : std::string("nan")) + "," +
           format_double(report.fixed_point_side) + "," + format_double(r.running_error) + "\n";
  }
  return out;
}

int exit_code(const ConvergenceReport& report) {
  if (report.error) return kExitError;
  return report.verdict.pass ? kExitPass : kExitFailedVerdict;
}

namespace {

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  file << text;
}

int finish(const ConvergenceReport& report, const std::string& text, const std::string& path, std::ostream& out,
           std::ostream& err) {
  write_output(text, path, out);
  if (report.error) err << "error: " << report.error->message << "\n";
  else if (!report.verdict.pass) err << "verdict: fail\n";
  return exit_code(report);
}

}  // namespace

int run_verify(const std::string& config_path, const std::string& out_path, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig rc = load_run_config(config_path);
    const ConvergenceReport report = verify(rc.verification);
    if (rc.verbosity > 0) {
      for (const auto& row : report.rows) {
        err << fmt::format("t={:.6g} grid={} str={:.12g} err={:.3e}\n", row.t, row.grid_points, row.str_geometric,
                           row.running_error);
      }
      err << fmt::format("extrapolated={:.12g} fixed_point_side={:.12g}\n", report.geometric_extrapolated,
                         report.fixed_point_side);
    }
    const std::string text = rc.format == OutputFormat::Csv ? report_to_csv(report) : dump_json(report_to_json(report));
    return finish(report, text, out_path.empty() ? rc.output_path : out_path, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int run_sweep(const std::string& config_path, double t_max, double ratio, int rungs, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  try {
    RunConfig rc = load_run_config(config_path);
    auto& ladder = rc.verification.ladder;
    ladder = LadderSpec{t_max, ratio, rungs};
    if (rungs < 4) schema_error("--rungs", "must be >= 4");
    if (!(ratio > 0.0 && ratio < 1.0)) schema_error("--ratio", "must lie in (0, 1)");
    if (!(t_max > 0.0) || std::pow(t_max, 2 * rc.verification.s) > kMaxHeatTime) {
      schema_error("--t-max", "t_max^(2s) must lie in (0, 0.25]");
    }
    const ConvergenceReport report = verify(rc.verification);
    return finish(report, report_to_csv(report), out_path, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

// ---------------------------------------------------------------------------

namespace {

Matrix parse_coefficient(const json& j, const std::string& field) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) schema_error(field, "expected a number or a square matrix");
  const auto r = static_cast<Eigen::Index>(j.size());
  Matrix m(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const std::string rp = field + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != r) schema_error(rp, "matrix must be square");
    for (Eigen::Index c = 0; c < r; ++c) m(i, c) = number(j[i][c], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

}  // namespace

EllipticSymbol parse_symbol(int order, int dim, std::string_view coeff_json) {
  if (order < 2 || order % 2 != 0) schema_error("--order", "must be a positive even integer");
  if (dim < 1 || dim > 2) schema_error("--dim", "must be 1 or 2");
  const json doc = parse_document(coeff_json);
  const int s = order / 2;
  const bool term_list = doc.is_array() && !doc.empty() && doc[0].is_object();
  if (!term_list) return EllipticSymbol::diagonal(dim, s, parse_coefficient(doc, "--coeff"));

  EllipticSymbol sym{dim, s, {}};
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string tp = "--coeff[" + std::to_string(i) + "]";
    const Fields f(doc[i], tp, {"alpha", "a"});
    const json& alpha = f.require("alpha");
    if (!alpha.is_array() || static_cast<int>(alpha.size()) != dim) {
      schema_error(tp + ".alpha", "expected " + std::to_string(dim) + " entries");
    }
    SymbolTerm term;
    for (std::size_t k = 0; k < alpha.size(); ++k) term.alpha.push_back(integer(alpha[k], tp + ".alpha"));
    term.coeff = parse_coefficient(f.require("a"), tp + ".a");
    sym.terms.push_back(std::move(term));
  }
  return sym;
}

int run_model_kernel(int order, int dim, const std::string& coeff_json, const std::string& out_path,
                     std::ostream& out, std::ostream& err) {
  try {
    const EllipticSymbol sym = parse_symbol(order, dim, coeff_json);
    const ModelKernel kernel(sym);
    const TotalIntegral total = model_kernel_total_integral(sym);

    auto matrix_json = [](const Matrix& m) {
      ojson rows = ojson::array();
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ojson row = ojson::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
      }
      return rows;
    };

    std::vector<double> axis;
    const double step = dim == 1 ? 0.5 : 1.0;
    const int half = dim == 1 ? 8 : 3;
    for (int i = -half; i <= half; ++i) axis.push_back(i * step);
    const auto values = kernel.evaluate_grid(axis);
    ojson samples = ojson::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
      ojson x = ojson::array();
      x.push_back(axis[i % axis.size()]);
      if (dim == 2) x.push_back(axis[i / axis.size()]);
      samples.push_back({{"x", x}, {"value", matrix_json(values[i])}});
    }

    ojson j;
    j["order"] = order;
    j["dim"] = dim;
    j["rank"] = sym.rank();
    j["frequency_box_half_width"] = kernel.box_half_width();
    j["samples_per_axis"] = kernel.samples_per_axis();
    j["total_integral"] = matrix_json(total.value);
    j["tail_estimate"] = total.tail_estimate;
    j["integration_box_half_width"] = total.box_half_width;
    j["sample_grid"] = {{"start", axis.front()}, {"step", step}, {"count", axis.size()}};
    j["samples"] = samples;
    write_output(dump_json(j), out_path, out);
    return kExitPass;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace lefgpd::cli
