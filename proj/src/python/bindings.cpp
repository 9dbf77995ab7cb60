#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "stratcause/bounds.hpp"
#include "stratcause/cli.hpp"
#include "stratcause/covselect.hpp"
#include "stratcause/identify.hpp"
#include "stratcause/io.hpp"
#include "stratcause/oracle.hpp"
#include "stratcause/report.hpp"
#include "stratcause/simulate.hpp"

namespace py = pybind11;
using namespace stratcause;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& obj) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

ExperimentalQuantities experimental_for(const StratifiedJoint& joint, const py::object& experimental) {
  if (experimental.is_none()) return adjusted_experimental(joint);
  return experimental_from_json(from_python(experimental), joint);
}

Smoothing parse_smoothing(const std::string& s) {
  if (s == "none") return Smoothing::kNone;
  if (s == "add-half") return Smoothing::kAddHalf;
  throw ValidationError("unknown smoothing '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_stratcause, m) {
  m.doc() = "Bounds and point estimates for the probabilities of causation from stratified data";
  m.attr("__version__") = cli::kVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<IncompatibilityError>(m, "IncompatibilityError", base.ptr());

  py::enum_<Quantity>(m, "Quantity")
      .value("PN", Quantity::kPN)
      .value("PS", Quantity::kPS)
      .value("PNS", Quantity::kPNS);

  py::class_<StratifiedJoint>(m, "StratifiedJoint")
      .def_property_readonly("covariates", &StratifiedJoint::covariates)
      .def_property_readonly("total_n", &StratifiedJoint::total_n)
      .def("__len__", &StratifiedJoint::size)
      .def("collapse", [](const StratifiedJoint& j, const std::vector<std::string>& keep) { return collapse(j, keep); })
      .def("to_dict", [](const StratifiedJoint& j) { return to_python(to_json(j)); });

  py::class_<Interval>(m, "Interval")
      .def_readonly("quantity", &Interval::quantity)
      .def_readonly("lower", &Interval::lower)
      .def_readonly("upper", &Interval::upper)
      .def_property_readonly("method", [](const Interval& iv) { return to_string(iv.method); })
      .def("to_dict", [](const Interval& iv) { return to_python(to_json(iv)); })
      .def("__repr__", [](const Interval& iv) {
        std::ostringstream s;
        s << "<Interval " << to_string(iv.quantity) << " " << to_string(iv.method) << " [" << iv.lower << ", "
          << iv.upper << "]>";
        return s.str();
      });

  py::class_<Estimate>(m, "Estimate")
      .def_readonly("quantity", &Estimate::quantity)
      .def_readonly("value", &Estimate::value)
      .def_readonly("avar", &Estimate::avar)
      .def_readonly("n", &Estimate::n)
      .def_readonly("warnings", &Estimate::warnings)
      .def("to_dict", [](const Estimate& e) { return to_python(to_json(e)); });

  m.def(
      "load_counts",
      [](const std::string& path, const std::string& smoothing) {
        return to_probabilities(load_counts_file(path), parse_smoothing(smoothing));
      },
      py::arg("path"), py::arg("smoothing") = "none");

  m.def(
      "joint_from_dict", [](const py::object& obj) { return joint_from_json(from_python(obj)); }, py::arg("data"));

  m.def(
      "bounds",
      [](const StratifiedJoint& joint, Quantity q, const std::string& method, const py::object& experimental,
         bool clamp) {
        const ExperimentalQuantities exp = experimental_for(joint, experimental);
        const BoundsOptions opts{.clamp = clamp};
        if (method == "stratified") return stratified_interval(q, joint, exp, opts);
        if (method == "tian-pearl") return tian_pearl_interval(q, joint, exp, opts);
        throw ValidationError("method must be 'stratified' or 'tian-pearl'");
      },
      py::arg("joint"), py::arg("quantity"), py::arg("method") = "stratified", py::arg("experimental") = py::none(),
      py::arg("clamp") = false);

  m.def(
      "pn_point", [](const StratifiedJoint& j, std::optional<std::int64_t> n) { return pn_point(j, {.n = n}); },
      py::arg("joint"), py::arg("n") = py::none());
  m.def(
      "pns_point", [](const StratifiedJoint& j, std::optional<std::int64_t> n) { return pns_point(j, {.n = n}); },
      py::arg("joint"), py::arg("n") = py::none());

  m.def(
      "select",
      [](const StratifiedJoint& j, const std::string& s, const std::string& t, std::optional<std::int64_t> n) {
        return to_python(to_json(compare_covariate_sets(j, s, t, {.n = n})));
      },
      py::arg("joint"), py::arg("s"), py::arg("t"), py::arg("n") = py::none());

  m.def(
      "verify",
      [](const StratifiedJoint& j, const py::object& experimental, double resolution, double tol) {
        return to_python(
            to_json(oracle::verify_bounds(j, experimental_for(j, experimental), tol, {.resolution = resolution})));
      },
      py::arg("joint"), py::arg("experimental") = py::none(), py::arg("resolution") = 1e-3, py::arg("tol") = 2e-3);

  m.def(
      "simulate",
      [](int setting, std::int64_t n, std::int64_t reps, std::uint64_t seed, unsigned threads) {
        StudyResult r;
        {
          py::gil_scoped_release release;
          r = replicate_study(builtin_scenario(setting), {.n = n, .reps = reps, .seed = seed, .threads = threads});
        }
        return to_python(to_json(r));
      },
      py::arg("setting"), py::arg("n") = 1000, py::arg("reps") = 5000, py::arg("seed") = 0, py::arg("threads") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int status = cli::run(args, out, err);
        return py::make_tuple(status, out.str(), err.str());
      },
      py::arg("args"));
}
