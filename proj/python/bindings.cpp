#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gausschan/cli.hpp"
#include "gausschan/gauge.hpp"

namespace py = pybind11;
using namespace gausschan;

namespace {

py::dict verdict_dict(const EmbeddabilityVerdict& v) {
  py::dict d;
  d["status"] = std::string(to_string(v.status));
  d["note"] = v.note;
  if (v.witness) {
    d["witness"] = py::dict(py::arg("a") = v.witness->a(), py::arg("b") = v.witness->b(),
                            py::arg("h") = v.witness->h());
  } else {
    d["witness"] = py::none();
  }
  py::list jordan;
  for (const auto& j : v.jordan) {
    jordan.append(py::dict(py::arg("eigenvalue") = j.eigenvalue, py::arg("block_sizes") = j.block_sizes,
                           py::arg("paired") = j.paired()));
  }
  d["jordan"] = jordan;
  return d;
}

std::pair<std::string, int> as_pair(const cli::Outcome& o) { return {o.report.dump(2), o.exit_code}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian channels as matrix pairs (X, Y)";

  // Instances carry the library's error kind as `kind`.
  static PyObject* error_type =
      py::exception<Error>(m, "GausschanError", PyExc_ValueError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type, inst.ptr());
    }
  });

  py::class_<Tolerance>(m, "Tolerance")
      .def(py::init<>())
      .def(py::init([](double abs_eps, double rel_eps) { return Tolerance{abs_eps, rel_eps}; }),
           py::arg("abs_eps"), py::arg("rel_eps"))
      .def_static("uniform", &Tolerance::uniform)
      .def_readwrite("abs_eps", &Tolerance::abs_eps)
      .def_readwrite("rel_eps", &Tolerance::rel_eps);

  py::class_<GaussianChannel>(m, "GaussianChannel")
      .def(py::init<RealMatrix, RealMatrix, const Tolerance&>(), py::arg("x"), py::arg("y"),
           py::arg("tol") = Tolerance{})
      .def_static("identity", &GaussianChannel::identity)
      .def_static("beam_splitter", &GaussianChannel::beam_splitter)
      .def_property_readonly("modes", &GaussianChannel::modes)
      .def_property_readonly("x", &GaussianChannel::x)
      .def_property_readonly("y", &GaussianChannel::y)
      .def("__matmul__", [](const GaussianChannel& a, const GaussianChannel& b) { return compose(a, b); });

  m.def("symplectic_form", &symplectic_form);
  m.def("cp_margin", &cp_margin);
  m.def("cp_check", &cp_check, py::arg("x"), py::arg("y"), py::arg("tol") = Tolerance{});
  m.def("compose", py::overload_cast<const GaussianChannel&, const GaussianChannel&>(&compose));
  m.def("conjugate", &conjugate);
  m.def("embed_pi", &embed_pi);
  m.def("is_reversible", &is_reversible, py::arg("c"), py::arg("tol") = Tolerance{});
  m.def("p_map", [](const GaussianChannel& c) { return p_map(c).p(); });
  m.def("channel_from_positive", [](const ComplexMatrix& p, const Tolerance& tol) {
    return channel_from_positive(PositiveClassRep(p, tol), tol);
  }, py::arg("p"), py::arg("tol") = Tolerance{});
  m.def("divide", [](const GaussianChannel& c, std::optional<double> epsilon, const Tolerance& tol) {
    const Division d = divide(c, tol, epsilon);
    py::dict out;
    out["left"] = d.left;
    out["right"] = d.right;
    out["branch"] = d.branch == Division::Branch::KernelProjector ? "kernel-projector" : "positive-split";
    out["epsilon"] = d.epsilon;
    out["residual"] = d.residual;
    return out;
  }, py::arg("c"), py::arg("epsilon") = std::nullopt, py::arg("tol") = Tolerance{});
  m.def("is_idempotent", &is_idempotent, py::arg("c"), py::arg("tol") = Tolerance{});
  m.def("idempotent_normal_form", [](const GaussianChannel& c, const Tolerance& tol) {
    const auto nf = idempotent_normal_form(c, tol);
    return py::dict(py::arg("symplectic") = nf.symplectic, py::arg("k") = nf.k, py::arg("noise") = nf.noise,
                    py::arg("residual") = nf.residual);
  }, py::arg("c"), py::arg("tol") = Tolerance{});

  py::class_<Generator>(m, "Generator")
      .def(py::init<RealMatrix, RealMatrix, RealMatrix, const Tolerance&>(), py::arg("a"), py::arg("b"),
           py::arg("h"), py::arg("tol") = Tolerance{})
      .def_property_readonly("modes", &Generator::modes)
      .def_property_readonly("a", &Generator::a)
      .def_property_readonly("b", &Generator::b)
      .def_property_readonly("h", &Generator::h)
      .def("drift", &Generator::drift);

  m.def("evolve", &evolve, py::arg("g"), py::arg("t"), py::arg("tol") = Tolerance{});
  m.def("semigroup_law_check", &semigroup_law_check, py::arg("g"), py::arg("t"), py::arg("s"),
        py::arg("tol") = Tolerance{});
  m.def("simple_form_anchor", [](const Generator& g, const Tolerance& tol) { return simple_form(g, tol).anchor; },
        py::arg("g"), py::arg("tol") = Tolerance{});
  m.def("lindblad_export", [](const Generator& g, const Tolerance& tol) {
    const auto l = lindblad_export(g, tol);
    return py::make_tuple(l.hamiltonian, l.lindblad);
  }, py::arg("g"), py::arg("tol") = Tolerance{});
  m.def("embeddable_x", [](const RealMatrix& x, const Tolerance& tol) { return verdict_dict(embeddable_x(x, tol)); },
        py::arg("x"), py::arg("tol") = Tolerance{});
  m.def("in_exp_sp", [](const RealMatrix& s, const Tolerance& tol) { return verdict_dict(in_exp_sp(s, tol)); },
        py::arg("s"), py::arg("tol") = Tolerance{});
  m.def("split_exp_sp", [](const RealMatrix& s, const Tolerance& tol) {
    const auto sp = split_exp_sp(s, tol);
    return py::make_tuple(sp.positive, sp.orthogonal);
  }, py::arg("s"), py::arg("tol") = Tolerance{});
  m.def("infdiv_necessary", &infdiv_necessary, py::arg("c"), py::arg("tol") = Tolerance{});

  m.def("gauge_classify", [](const ComplexMatrix& x_hat, const ComplexMatrix& y_hat, const Tolerance& tol) {
    const auto c = classify(GaugeChannel(x_hat, y_hat, tol), tol);
    py::dict d;
    d["case"] = std::string(to_string(c.gauge_case));
    d["k_spectrum"] = c.k_spectrum;
    d["unitary_factor"] = c.unitary_factor;
    d["invariant_cov"] = c.invariant_cov ? py::cast(*c.invariant_cov) : py::none();
    d["anchor"] = c.anchor ? py::cast(*c.anchor) : py::none();
    return d;
  }, py::arg("x_hat"), py::arg("y_hat"), py::arg("tol") = Tolerance{});
  m.def("hat_matrix", &hat_matrix);
  m.def("unhat_matrix", &unhat_matrix);

  // The CLI commands, returning (JSON report, exit code).
  py::module_ cmd = m.def_submodule("cli", "report-producing commands behind the executable");
  cmd.def("check", [](const std::filesystem::path& p, const Tolerance& tol) { return as_pair(cli::cmd_check(p, tol)); },
          py::arg("path"), py::arg("tol") = Tolerance{});
  cmd.def("classify", [](const std::filesystem::path& p, const Tolerance& tol) {
    return as_pair(cli::cmd_classify(p, tol));
  }, py::arg("path"), py::arg("tol") = Tolerance{});
  cmd.def("embed_check", [](const std::filesystem::path& p, const Tolerance& tol) {
    return as_pair(cli::cmd_embed_check(p, tol));
  }, py::arg("path"), py::arg("tol") = Tolerance{});
  cmd.def("semigroup", [](const std::filesystem::path& p, const std::vector<double>& times, const Tolerance& tol) {
    return as_pair(cli::cmd_semigroup(p, times, std::nullopt, tol));
  }, py::arg("path"), py::arg("times"), py::arg("tol") = Tolerance{});
  cmd.def("divide", [](const std::filesystem::path& p, std::optional<double> epsilon, const Tolerance& tol) {
    return as_pair(cli::cmd_divide(p, epsilon, std::nullopt, std::nullopt, tol));
  }, py::arg("path"), py::arg("epsilon") = std::nullopt, py::arg("tol") = Tolerance{});
}
