#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cdlab/error.hpp"
#include "cdlab/exactcore.hpp"
#include "cdlab/families.hpp"
#include "cdlab/oracles.hpp"
#include "cdlab/risklab.hpp"

namespace py = pybind11;
using namespace cdlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix<double> to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ContractError("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  Matrix<double> m(rows, cols);
  auto view = a.unchecked<2>();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = view(i, j);
  }
  return m;
}

Array to_array(const Matrix<double>& m) {
  Array out({m.rows(), m.cols()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) view(i, j) = m(i, j);
  }
  return out;
}

Family make_family(const std::string& kind, std::optional<std::string> base,
                   std::optional<double> theta0, std::optional<double> theta1) {
  if (kind == "gaussian-location") return Family::gaussian_location();
  if (kind == "gaussian-scale") return Family::gaussian_scale();
  if (kind == "two-point") {
    if (!base || !theta0 || !theta1) throw ContractError("two-point needs base, theta0, theta1");
    const FamilyKind b = *base == "gaussian-scale" ? FamilyKind::GaussianScale : FamilyKind::GaussianLocation;
    return Family::two_point(b, *theta0, *theta1);
  }
  throw ContractError("unknown family kind '" + kind + "'");
}

Engine engine_of(const std::string& name) {
  const auto e = parse_engine(name);
  if (!e) throw ContractError("unknown engine '" + name + "'");
  return *e;
}

py::dict risk_dict(const RiskEstimate& r) {
  py::dict d;
  d["mean"] = r.mean;
  d["stderr"] = r.standard_error;
  d["reps"] = r.reps;
  d["seed"] = r.master_seed;
  return d;
}

py::dict estimate_dict(const McEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["stderr"] = e.standard_error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_cdlab, m) {
  m.doc() = "Exact oracle estimators for the compound decision problem";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_OverflowError);

  py::class_<Family>(m, "Family")
      .def(py::init(&make_family), py::arg("kind"), py::arg("base") = py::none(),
           py::arg("theta0") = py::none(), py::arg("theta1") = py::none())
      .def_property_readonly("name", &Family::name)
      .def("log_density", &Family::log_density, py::arg("mu"), py::arg("y"))
      .def("__repr__", [](const Family& f) { return "Family('" + f.name() + "')"; });

  py::class_<TwoValuedSpec>(m, "TwoValuedSpec")
      .def(py::init([](std::size_t K, std::size_t n, double mu0, double mu1) {
             return TwoValuedSpec{K, n, mu0, mu1};
           }),
           py::arg("K"), py::arg("n"), py::arg("mu0") = 0.0, py::arg("mu1") = 1.0)
      .def_readonly("K", &TwoValuedSpec::K)
      .def_readonly("n", &TwoValuedSpec::n)
      .def_readonly("mu0", &TwoValuedSpec::mu0)
      .def_readonly("mu1", &TwoValuedSpec::mu1);

  m.def("log_density", &log_density, py::arg("family"), py::arg("mu"), py::arg("y"));
  m.def("sample", py::overload_cast<const Family&, double, std::uint64_t>(&sample),
        py::arg("family"), py::arg("mu"), py::arg("seed"));
  m.def("loglik_matrix",
        [](const Family& f, std::vector<double> mus, std::vector<double> ys) {
          return to_array(loglik_matrix(f, ParameterMultiset(std::move(mus)), ys).entries());
        },
        py::arg("family"), py::arg("mus"), py::arg("ys"));

  m.def("permanent_log",
        [](const Array& a) {
          const LogValue v = permanent_log(to_matrix(a));
          return py::make_tuple(v.log_abs, v.sign);
        },
        py::arg("log_entries"), "Returns (log|perm|, sign).");
  m.def("permanental_minors_log",
        [](const Array& a) {
          const Matrix<LogValue> minors = permanental_minors_log(to_matrix(a));
          Matrix<double> logs(minors.rows(), minors.cols());
          for (std::size_t i = 0; i < minors.rows(); ++i) {
            for (std::size_t j = 0; j < minors.cols(); ++j) logs(i, j) = minors(i, j).log_abs;
          }
          return to_array(logs);
        },
        py::arg("log_entries"));
  m.def("esp_log",
        [](std::vector<double> log_rhos) { return esp_log(log_rhos).log_e; },
        py::arg("log_rhos"));

  m.def("weights",
        [](const Array& loglik) { return to_array(weights(LogLikelihoodMatrix(to_matrix(loglik))).p); },
        py::arg("loglik"));
  m.def("simple_rule",
        [](const Array& loglik, std::vector<double> mus) {
          return simple_rule(LogLikelihoodMatrix(to_matrix(loglik)), ParameterMultiset(std::move(mus))).values;
        },
        py::arg("loglik"), py::arg("mus"));
  m.def("pi_rule_enum",
        [](const Array& loglik, std::vector<double> mus) {
          return pi_rule_enum(LogLikelihoodMatrix(to_matrix(loglik)), ParameterMultiset(std::move(mus))).values;
        },
        py::arg("loglik"), py::arg("mus"));
  m.def("pi_rule_permanent",
        [](const Array& loglik, std::vector<double> mus, unsigned workers) {
          return pi_rule_permanent(LogLikelihoodMatrix(to_matrix(loglik)),
                                   ParameterMultiset(std::move(mus)), Parallel{workers})
              .values;
        },
        py::arg("loglik"), py::arg("mus"), py::arg("workers") = 1);
  m.def("pi_rule_two_valued",
        [](std::vector<double> log_rho, const TwoValuedSpec& spec) {
          return pi_rule_two_valued(log_rho, spec).values;
        },
        py::arg("log_rho"), py::arg("spec"));
  m.def("simple_rule_two_valued",
        [](std::vector<double> log_rho, const TwoValuedSpec& spec) {
          return simple_rule_two_valued(log_rho, spec).values;
        },
        py::arg("log_rho"), py::arg("spec"));

  m.def("draw_instance",
        [](const Family& f, std::vector<double> mus, std::uint64_t seed, std::uint64_t rep) {
          const Instance inst = draw_instance(f, ParameterMultiset(std::move(mus)), seed, rep);
          return py::make_tuple(inst.labels, inst.ys);
        },
        py::arg("family"), py::arg("mus"), py::arg("seed"), py::arg("rep") = 0);
  m.def("mc_gap",
        [](const Family& f, std::vector<double> mus, const std::string& engine, std::size_t reps,
           std::uint64_t seed, unsigned workers) {
          GapReport r;
          {
            py::gil_scoped_release release;
            r = mc_gap(f, ParameterMultiset(std::move(mus)), engine_of(engine), reps, seed, Parallel{workers});
          }
          py::dict d;
          d["n"] = r.n;
          d["gap_sq"] = risk_dict(r.gap_sq);
          d["risk_s"] = risk_dict(r.risk_s);
          d["risk_pi"] = risk_dict(r.risk_pi);
          d["risk_diff"] = risk_dict(r.risk_diff);
          d["pythagoras_residual"] = r.pythagoras_residual;
          d["pythagoras_stderr"] = r.pythagoras_stderr;
          return d;
        },
        py::arg("family"), py::arg("mus"), py::arg("engine"), py::arg("reps"), py::arg("seed"),
        py::arg("workers") = 1);

  m.def("check_G2",
        [](const Family& f, std::vector<double> mus, std::size_t reps, std::uint64_t seed) {
          const G2Report r = check_G2(f, ParameterMultiset(std::move(mus)), reps, seed);
          py::dict d;
          d["sum_sq_weights"] = estimate_dict(r.sum_sq_weights);
          d["inverse_min_weight"] = estimate_dict(r.inverse_min_weight);
          d["weighted_inverse_min"] = estimate_dict(r.weighted_inverse_min);
          d["first_obs_sum_sq"] = estimate_dict(r.first_obs_sum_sq);
          d["gaussian_bound"] = r.gaussian_bound ? py::cast(*r.gaussian_bound) : py::none();
          return d;
        },
        py::arg("family"), py::arg("mus"), py::arg("reps"), py::arg("seed"));
  m.def("check_B1",
        [](const Family& f, std::vector<double> mus, std::size_t reps, std::uint64_t seed) {
          const B1Report r = check_B1(f, ParameterMultiset(std::move(mus)), reps, seed);
          py::dict d;
          d["spread"] = r.spread;
          d["max_ratio_variance"] = estimate_dict(r.max_ratio_variance);
          d["implied_V"] = r.implied_V;
          return d;
        },
        py::arg("family"), py::arg("mus"), py::arg("reps"), py::arg("seed"));
  m.def("check_two_valued_condition",
        [](const Family& f, double mu0, double mu1, std::size_t reps, std::uint64_t seed) {
          const TwoValuedConditionReport r = check_two_valued_condition(f, mu0, mu1, reps, seed);
          py::dict d;
          d["var_under_0"] = estimate_dict(r.under_0.variance);
          d["var_under_1"] = estimate_dict(r.under_1.variance);
          d["flagged"] = r.flagged();
          return d;
        },
        py::arg("family"), py::arg("mu0"), py::arg("mu1"), py::arg("reps"), py::arg("seed"));
}
