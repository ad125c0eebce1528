#include "gausschan/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gausschan/gauge.hpp"

namespace gausschan::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorKind::ParseError, msg); }

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    parse_fail(path.string() + ": " + e.what());
  }
}

int read_header(const Json& j) {
  if (!j.is_object()) parse_fail("top level must be an object");
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion) {
    parse_fail("schema_version must be \"1\"");
  }
  if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
    parse_fail("n must be a positive integer");
  }
  return j["n"].get<int>();
}

std::string read_label(const Json& j) {
  if (!j.contains("label")) return {};
  if (!j["label"].is_string()) parse_fail("label must be a string");
  return j["label"].get<std::string>();
}

RealMatrix sized_matrix(const Json& j, const char* key, int n) {
  if (!j.contains(key)) parse_fail(std::string("missing field ") + key);
  RealMatrix m = matrix_from_json(j[key], key);
  if (m.rows() != 2 * n || m.cols() != 2 * n) {
    parse_fail(std::string(key) + " must be " + std::to_string(2 * n) + "x" + std::to_string(2 * n));
  }
  return m;
}

Json tolerance_json(const Tolerance& tol) { return Json{{"abs_eps", tol.abs_eps}, {"rel_eps", tol.rel_eps}}; }

Json start_report(const char* command, const std::string& label, const Tolerance& tol) {
  Json r;
  r["command"] = command;
  if (!label.empty()) r["label"] = label;
  r["tolerance"] = tolerance_json(tol);
  return r;
}

Json cp_json(const RealMatrix& x, const RealMatrix& y, const Tolerance& tol) {
  return Json{{"verdict", cp_check(x, y, tol)}, {"min_eigenvalue", cp_margin(x, y)}};
}

Json reversible_json(const GaussianChannel& c, const Tolerance& tol) {
  const auto cert = reversibility_certificate(c);
  return Json{{"verdict", is_reversible(c, tol)},
              {"symplectic_residual", cert.symplectic_residual},
              {"noise_norm", cert.noise_norm}};
}

GaussianChannel load_channel(const fs::path& path, const Tolerance& tol, std::string* label) {
  ChannelFile f = read_channel_file(path);
  if (label) *label = f.label;
  return {std::move(f.x), std::move(f.y), tol};
}

Json generator_json(const Generator& g) {
  return Json{{"a", matrix_to_json(g.a())}, {"b", matrix_to_json(g.b())}, {"h", matrix_to_json(g.h())}};
}

Json jordan_json(const std::vector<linalg::JordanNegativeReport>& reports) {
  Json out = Json::array();
  for (const auto& r : reports) {
    out.push_back(Json{{"eigenvalue", r.eigenvalue}, {"block_sizes", r.block_sizes}, {"paired", r.paired()}});
  }
  return out;
}

Json verdict_json(const EmbeddabilityVerdict& v) {
  Json out{{"status", std::string(to_string(v.status))}};
  if (!v.note.empty()) out["note"] = v.note;
  if (!v.jordan.empty()) out["jordan"] = jordan_json(v.jordan);
  if (v.witness) out["witness"] = generator_json(*v.witness);
  return out;
}

Json error_json(const Error& e) {
  return Json{{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool is_real_matrix(const Json& j) {
  return j.is_array() && !j.empty() &&
         std::all_of(j.begin(), j.end(), [](const Json& row) {
           return row.is_array() && std::all_of(row.begin(), row.end(), [](const Json& v) { return v.is_number(); });
         });
}

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_null()) return "none";
  return v.dump();
}

void render(const Json& j, int indent, std::ostringstream& os);

void render_value(const std::string& head, const Json& v, int indent, std::ostringstream& os) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (is_real_matrix(v)) {
    os << pad << head << ":\n";
    for (const auto& row : v) {
      os << pad << "  [";
      for (std::size_t k = 0; k < row.size(); ++k) {
        os << (k ? " " : "") << format_number(row[k].get<double>());
      }
      os << "]\n";
    }
  } else if (v.is_object()) {
    os << pad << head << ":\n";
    render(v, indent + 2, os);
  } else if (v.is_array() && std::any_of(v.begin(), v.end(), [](const Json& e) { return e.is_structured(); })) {
    os << pad << head << ":\n";
    for (const auto& e : v) render_value("-", e, indent + 2, os);
  } else if (v.is_array()) {
    os << pad << head << ": [";
    for (std::size_t k = 0; k < v.size(); ++k) os << (k ? ", " : "") << scalar_text(v[k]);
    os << "]\n";
  } else {
    os << pad << head << ": " << scalar_text(v) << "\n";
  }
}

void render(const Json& j, int indent, std::ostringstream& os) {
  for (const auto& [key, value] : j.items()) render_value(key, value, indent, os);
}

}  // namespace

RealMatrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) parse_fail(std::string(what) + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      parse_fail(std::string(what) + " has ragged rows");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const Json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) parse_fail(std::string(what) + " has a non-numeric entry");
      m(i, k) = v.get<double>();
      if (!std::isfinite(m(i, k))) parse_fail(std::string(what) + " has a non-finite entry");
    }
  }
  return m;
}

Json matrix_to_json(const RealMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

Json matrix_to_json(const ComplexMatrix& m) {
  return Json{{"re", matrix_to_json(RealMatrix(m.real()))}, {"im", matrix_to_json(RealMatrix(m.imag()))}};
}

ChannelFile parse_channel(const Json& j) {
  ChannelFile f;
  f.n = read_header(j);
  f.x = sized_matrix(j, "x", f.n);
  f.y = sized_matrix(j, "y", f.n);
  f.label = read_label(j);
  return f;
}

ChannelFile read_channel_file(const fs::path& path) { return parse_channel(read_json(path)); }

GeneratorFile parse_generator(const Json& j) {
  GeneratorFile f;
  f.n = read_header(j);
  f.a = sized_matrix(j, "a", f.n);
  f.b = sized_matrix(j, "b", f.n);
  f.h = sized_matrix(j, "h", f.n);
  f.label = read_label(j);
  return f;
}

GeneratorFile read_generator_file(const fs::path& path) { return parse_generator(read_json(path)); }

Json channel_to_json(const GaussianChannel& c, const std::string& label) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = c.modes();
  j["x"] = matrix_to_json(c.x());
  j["y"] = matrix_to_json(c.y());
  if (!label.empty()) j["label"] = label;
  return j;
}

void write_json_file(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) parse_fail("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) parse_fail("write failed for " + path.string());
}

Tolerance resolve_tolerance(std::optional<double> flag) {
  Tolerance tol;
  if (flag) {
    tol = Tolerance::uniform(*flag);
  } else if (const char* env = std::getenv(kTolEnv); env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0') parse_fail(std::string(kTolEnv) + " is not a number: " + env);
    tol = Tolerance::uniform(v);
  }
  validate(tol);
  return tol;
}

Outcome error_outcome(const char* command, const Error& e) {
  Json r;
  r["command"] = command;
  r["error"] = error_json(e);
  return {std::move(r), e.kind() == ErrorKind::ParseError ? 2 : 1};
}

namespace {

template <typename F>
Outcome guarded(const char* command, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return error_outcome(command, e);
  } catch (const fs::filesystem_error& e) {
    return error_outcome(command, Error(ErrorKind::ParseError, e.what()));
  }
}

}  // namespace

Outcome cmd_check(const fs::path& path, const Tolerance& tol) {
  return guarded("check", [&] {
    const ChannelFile f = read_channel_file(path);
    Json r = start_report("check", f.label, tol);
    r["n"] = f.n;
    r["cp"] = cp_json(f.x, f.y, tol);
    if (!r["cp"]["verdict"].get<bool>()) return Outcome{std::move(r), 1};
    const GaussianChannel c(f.x, f.y, tol);
    r["reversible"] = reversible_json(c, tol);
    return Outcome{std::move(r), 0};
  });
}

Outcome cmd_compose(const fs::path& first, const fs::path& second,
                    const std::optional<fs::path>& out, const Tolerance& tol) {
  return guarded("compose", [&] {
    const GaussianChannel c1 = load_channel(first, tol, nullptr);
    const GaussianChannel c2 = load_channel(second, tol, nullptr);
    const GaussianChannel c = compose(c1, c2);
    Json r = start_report("compose", {}, tol);
    r["order"] = "Heisenberg picture: the signal passes through the second channel first";
    r["cp"] = cp_json(c.x(), c.y(), tol);
    const Json file = channel_to_json(c);
    if (out) {
      write_json_file(*out, file);
      r["output"] = out->string();
    } else {
      r["result"] = file;
    }
    return Outcome{std::move(r), 0};
  });
}

Outcome cmd_classify(const fs::path& path, const Tolerance& tol) {
  return guarded("classify", [&] {
    std::string label;
    const GaussianChannel c = load_channel(path, tol, &label);
    Json r = start_report("classify", label, tol);
    r["n"] = c.modes();
    r["cp"] = cp_json(c.x(), c.y(), tol);
    r["reversible"] = reversible_json(c, tol);

    Json idem{{"verdict", is_idempotent(c, tol)}};
    if (idem["verdict"].get<bool>()) {
      try {
        const auto nf = idempotent_normal_form(c, tol);
        idem["normal_form"] = Json{{"k", nf.k}, {"noise", nf.noise}, {"residual", nf.residual},
                                   {"symplectic", matrix_to_json(nf.symplectic)}};
      } catch (const Error& e) {
        idem["normal_form_error"] = error_json(e);
      }
    }
    r["idempotent"] = idem;

    const double det = c.x().determinant();
    const bool necessary = infdiv_necessary(c, tol);
    Json infdiv{{"det_x", det}, {"necessary_condition", necessary}};
    infdiv["message"] = necessary ? "det X >= 0: necessary condition for infinitesimal divisibility holds"
                                  : "det X < 0: not infinitesimal divisible";
    infdiv["distance_from_identity"] = distance_from_identity(c);
    r["infinitesimal_divisibility"] = infdiv;

    Json gauge{{"covariant", is_gauge_covariant(c, tol)}};
    if (gauge["covariant"].get<bool>()) {
      try {
        const auto cls = classify(hat(c, tol), tol);
        gauge["case"] = std::string(to_string(cls.gauge_case));
        gauge["k_spectrum"] = cls.k_spectrum;
        gauge["unitary_factor"] = matrix_to_json(cls.unitary_factor);
        if (cls.invariant_cov) gauge["invariant_cov"] = matrix_to_json(*cls.invariant_cov);
        if (cls.anchor) gauge["anchor"] = matrix_to_json(*cls.anchor);
        if (cls.gauge_case == GaugeCase::Mixed) {
          gauge["commuting"] = cls.commuting;
          Json parts = Json::array();
          for (const auto& p : cls.components) {
            parts.push_back(Json{{"case", std::string(to_string(p.gauge_case))}, {"k_spectrum", p.k_spectrum}});
          }
          gauge["components"] = parts;
        }
      } catch (const Error& e) {
        gauge["error"] = error_json(e);
      }
    }
    r["gauge"] = gauge;
    r["embeddability"] = verdict_json(embeddable_x(c.x(), tol));
    return Outcome{std::move(r), 0};
  });
}

Outcome cmd_divide(const fs::path& path, std::optional<double> epsilon,
                   const std::optional<fs::path>& out_left, const std::optional<fs::path>& out_right,
                   const Tolerance& tol) {
  return guarded("divide", [&] {
    std::string label;
    const GaussianChannel c = load_channel(path, tol, &label);
    const Division d = divide(c, tol, epsilon);
    Json r = start_report("divide", label, tol);
    r["branch"] = d.branch == Division::Branch::KernelProjector ? "kernel-projector" : "positive-split";
    if (d.branch == Division::Branch::PositiveSplit) r["epsilon"] = d.epsilon;
    r["residual"] = d.residual;
    auto factor = [&](const GaussianChannel& f, const std::optional<fs::path>& out, const char* name) {
      Json j{{"reversible", reversible_json(f, tol)}, {"cp", cp_json(f.x(), f.y(), tol)}};
      const Json file = channel_to_json(f, label.empty() ? name : label + "/" + name);
      if (out) {
        write_json_file(*out, file);
        j["output"] = out->string();
      } else {
        j["channel"] = file;
      }
      return j;
    };
    r["left"] = factor(d.left, out_left, "left");
    r["right"] = factor(d.right, out_right, "right");
    return Outcome{std::move(r), 0};
  });
}

Outcome cmd_semigroup(const fs::path& path, const std::vector<double>& times,
                      const std::optional<fs::path>& out_dir, const Tolerance& tol) {
  return guarded("semigroup", [&] {
    const GeneratorFile f = read_generator_file(path);
    const Generator g(f.a, f.b, f.h, tol);
    Json r = start_report("semigroup", f.label, tol);
    r["n"] = f.n;

    Json evolutions = Json::array();
    for (std::size_t i = 0; i < times.size(); ++i) {
      const GaussianChannel c = evolve(g, times[i], tol);
      Json e{{"t", times[i]}};
      const Json file = channel_to_json(c, (f.label.empty() ? "t=" : f.label + " t=") + format_number(times[i]));
      if (out_dir) {
        fs::create_directories(*out_dir);
        const fs::path p = *out_dir / ("evolve_" + std::to_string(i) + ".json");
        write_json_file(p, file);
        e["output"] = p.string();
      } else {
        e["x"] = file["x"];
        e["y"] = file["y"];
      }
      evolutions.push_back(std::move(e));
    }
    r["evolutions"] = evolutions;

    Json simple;
    try {
      const SimpleForm sf = simple_form(g, tol);
      simple["exists"] = true;
      simple["anchor"] = matrix_to_json(sf.anchor);
      const bool bounded = linalg::psd_check(sf.anchor, tol);
      simple["bounded_noise"] = bounded;
      if (auto st = invariant_state(sf, tol)) {
        simple["invariant_state"] = Json{{"mean", std::vector<double>(st->mean().data(), st->mean().data() + st->mean().size())},
                                         {"cov", matrix_to_json(st->cov())}};
      } else {
        simple["invariant_state"] = nullptr;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularKroneckerSum) throw;
      simple["exists"] = false;
      simple["note"] = "no simple form: the drift has an eigenvalue pair summing to zero (e.g. non-diagonal B for squeezing)";
      simple["bounded_noise"] = "indeterminate";
      simple["detail"] = e.what();
    }
    r["simple_form"] = simple;

    const LindbladData lind = lindblad_export(g, tol);
    r["lindblad"] = Json{{"hamiltonian", matrix_to_json(lind.hamiltonian)},
                         {"operators", matrix_to_json(lind.lindblad)}};
    return Outcome{std::move(r), 0};
  });
}

Outcome cmd_embed_check(const fs::path& path, const Tolerance& tol) {
  return guarded("embed-check", [&] {
    const ChannelFile f = read_channel_file(path);
    Json r = start_report("embed-check", f.label, tol);
    r["n"] = f.n;
    const EmbeddabilityVerdict v = embeddable_x(f.x, tol);
    r["embeddable_x"] = verdict_json(v);
    int code = v.status == Verdict::No ? 1 : 0;
    if (cp_check(f.x, f.y, tol)) {
      const GaussianChannel c(f.x, f.y, tol);
      if (is_reversible(c, tol)) {
        r["in_exp_sp"] = verdict_json(in_exp_sp(c.x(), tol));
        const SymplecticSplit s = split_exp_sp(c.x(), tol);
        r["split_exp_sp"] = Json{{"positive", matrix_to_json(s.positive)},
                                 {"orthogonal", matrix_to_json(s.orthogonal)},
                                 {"positive_log", matrix_to_json(s.positive_log)},
                                 {"orthogonal_log", matrix_to_json(s.orthogonal_log)}};
      }
    }
    return Outcome{std::move(r), code};
  });
}

Outcome cmd_batch(const fs::path& dir, const Tolerance& tol) {
  return guarded("batch", [&] {
    if (!fs::is_directory(dir)) parse_fail(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    Json r = start_report("batch", {}, tol);
    Json items = Json::array();
    int code = 0;
    for (const auto& p : files) {
      Outcome check = cmd_check(p, tol);
      Json item{{"file", p.filename().string()}, {"exit_code", check.exit_code}, {"check", check.report}};
      if (check.exit_code == 0) {
        Outcome cls = cmd_classify(p, tol);
        item["classify"] = cls.report;
        item["exit_code"] = std::max(check.exit_code, cls.exit_code);
      }
      code = std::max(code, item["exit_code"].get<int>());
      items.push_back(std::move(item));
    }
    r["files"] = items;
    return Outcome{std::move(r), code};
  });
}

std::string render_human(const Json& report) {
  std::ostringstream os;
  render(report, 0, os);
  return os.str();
}

}  // namespace gausschan::cli
