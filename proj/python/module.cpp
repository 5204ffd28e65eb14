#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "mulbench/cost.hpp"
#include "mulbench/dataset.hpp"
#include "mulbench/geometry.hpp"
#include "mulbench/operand.hpp"
#include "mulbench/probe.hpp"
#include "mulbench/render.hpp"
#include "mulbench/stats.hpp"
#include "mulbench/trace.hpp"
#include "mulbench/words.hpp"

namespace py = pybind11;
using namespace mulbench;

namespace {

Operand op(const std::string& s) { return Operand::from_decimal(s); }

Heuristic heuristic_arg(const std::string& name) {
  auto h = heuristic_from_name(name);
  if (!h) throw py::value_error("unknown heuristic: " + name);
  return *h;
}

Representation representation_arg(const std::string& name) {
  auto r = representation_from_name(name);
  if (!r) throw py::value_error("unknown representation: " + name);
  return *r;
}

CostParams params_from_kwargs(double margin_min) {
  CostParams p;
  if (margin_min > 0) p.margin_min = margin_min;
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiplication benchmark generation and probing toolkit";
  m.attr("__version__") = "0.1.0";

  m.def("exact_multiply",
        [](const std::string& a, const std::string& b) {
          return exact_multiply(op(a), op(b)).to_string();
        },
        py::arg("a"), py::arg("b"), "Exact product of two decimal strings.");

  m.def("compute_load",
        [](const std::string& a, const std::string& b) {
          LoadMetrics metrics = compute_load(op(a), op(b));
          py::dict d;
          d["d_total"] = metrics.d_total;
          d["d_nonzero"] = metrics.d_nonzero;
          d["C"] = metrics.load_C;
          d["ot_ops"] = metrics.ot_ops;
          d["dd_one_sided"] = metrics.dd_one_sided;
          d["nonzero_products"] = metrics.nonzero_products;
          d["carry_mult"] = metrics.carry_mult;
          d["carry_add"] = metrics.carry_add;
          d["carry_count"] = metrics.carry_count;
          return d;
        },
        py::arg("a"), py::arg("b"), "Arithmetic load metrics for an operand pair.");

  m.def("count_carries",
        [](const std::string& a, const std::string& b) {
          CarryCounts c = count_carries(op(a), op(b));
          return py::make_tuple(c.mult_stage, c.add_stage);
        },
        py::arg("a"), py::arg("b"),
        "(multiplication-stage, addition-stage) carry events of a x b.");

  m.def("sample_operand",
        [](const std::string& pattern, std::uint64_t seed, bool extended) {
          DigitTemplate tmpl = DigitTemplate::parse(pattern, extended);
          SplitMix64 rng(seed);
          return sample_operand(tmpl, rng).to_string();
        },
        py::arg("pattern"), py::arg("seed"), py::arg("extended") = false,
        "Deterministically sample an operand from a V/0 digit template.");

  m.def("heuristic_costs",
        [](const std::string& a, const std::string& b) {
          CostBreakdown c = cost_breakdown(op(a), op(b), CostParams{});
          py::dict d;
          d["ot"] = c.ot_cost;
          d["dd"] = c.dd_cost;
          d["rc"] = c.rc_cost;
          d["rc_base"] = c.rc_base;
          return d;
        },
        py::arg("a"), py::arg("b"), "OT/DD/RC costs under the default parameters.");

  m.def("label_target",
        [](const std::string& a, const std::string& b,
           double margin_min) -> std::optional<py::dict> {
          CostParams params = params_from_kwargs(margin_min);
          auto label = label_target(op(a), op(b), params.margin_min, params);
          if (!label) return std::nullopt;
          py::dict d;
          d["target"] = heuristic_name(label->target);
          d["runner_up"] = heuristic_name(label->runner_up);
          d["margin"] = label->margin;
          return d;
        },
        py::arg("a"), py::arg("b"), py::arg("margin_min") = 0.0,
        "Min-cost heuristic label when margin-separated, else None.");

  m.def("to_words",
        [](const std::string& n) { return to_words(BigNat::from_decimal(n)); },
        py::arg("n"), "American English cardinal for a decimal string.");

  m.def("parse_words",
        [](const std::string& text) -> std::optional<std::string> {
          auto value = parse_words(text);
          if (!value) return std::nullopt;
          return value->to_string();
        },
        py::arg("text"), "Inverse of to_words; None when the text is not a cardinal.");

  m.def("gen_trace",
        [](const std::string& a, const std::string& b, const std::string& heuristic) {
          Problem p = Problem::make(a + "x" + b, op(a), op(b));
          return gen_trace(p, heuristic_arg(heuristic)).text();
        },
        py::arg("a"), py::arg("b"), py::arg("heuristic"),
        "Synthetic reasoning trace text (RC/DD/OT/STYLE).");

  m.def("verify_trace",
        [](const std::string& text) {
          VerifyResult v = verify_trace_text(text);
          return py::make_tuple(v.ok, v.line, v.message);
        },
        py::arg("text"), "(ok, failing_line, message) for a trace text.");

  m.def("gen_contrastive_pair",
        [](const std::string& a, const std::string& b, const std::string& heuristic,
           std::uint64_t seed) {
          Problem p = Problem::make(a + "x" + b, op(a), op(b));
          SplitMix64 rng(seed);
          ContrastivePair pair = gen_contrastive_pair(p, heuristic_arg(heuristic), rng);
          py::dict d;
          d["correct"] = pair.correct_step;
          d["incorrect"] = pair.incorrect_step;
          d["corruption"] = pair.corruption;
          return d;
        },
        py::arg("a"), py::arg("b"), py::arg("heuristic"), py::arg("seed") = 0);

  m.def("verify_step", &verify_step, py::arg("step"),
        "True iff every equation in the step text holds.");

  m.def("render_prompt",
        [](const std::string& a, const std::string& b, const std::string& representation) {
          Problem p = Problem::make(a + "x" + b, op(a), op(b));
          return render_prompt(p, representation_arg(representation));
        },
        py::arg("a"), py::arg("b"), py::arg("representation") = "numeral_text");

  m.def("render_image",
        [](const std::string& a, const std::string& b, const std::string& representation,
           const std::string& format) {
          Problem p = Problem::make(a + "x" + b, op(a), op(b));
          StyleConfig style;
          if (format == "png") {
            style.format = ImageFormat::Png;
          } else if (format != "svg") {
            throw py::value_error("format must be svg or png");
          }
          return py::bytes(render_image(p, representation_arg(representation), style));
        },
        py::arg("a"), py::arg("b"), py::arg("representation") = "numeral_image",
        py::arg("format") = "svg", "Deterministic SVG/PNG bytes for the equation image.");

  m.def("extract_answer",
        [](const std::string& completion) -> std::optional<std::string> {
          auto answer = extract_answer(completion);
          if (!answer) return std::nullopt;
          return answer->to_string();
        },
        py::arg("completion"), "Last well-formed integer in a completion, else None.");

  m.def("length_normalized_loss",
        [](const std::vector<double>& losses) {
          return length_normalized_loss(TokenLosses{losses});
        },
        py::arg("losses"));

  m.def("llr", &llr, py::arg("loss_h"), py::arg("loss_0"), py::arg("token_count"),
        "Log-likelihood ratio -T * (l_h - l_0) for length-matched templates.");

  m.def("fit_logistic",
        [](const std::vector<double>& loads, const std::vector<bool>& correct) {
          if (loads.size() != correct.size())
            throw py::value_error("loads and correct must have equal lengths");
          std::vector<BinaryObs> data;
          for (std::size_t i = 0; i < loads.size(); ++i)
            data.push_back({loads[i], correct[i]});
          LogisticFit fit = fit_logistic(data);
          py::dict d;
          d["intercept"] = fit.beta0;
          d["slope"] = fit.beta1;
          d["c50"] = fit.c50 ? py::cast(*fit.c50) : py::none();
          d["r2_corr"] = fit.r2_corr;
          d["r2_mcfadden"] = fit.r2_mcfadden;
          d["converged"] = fit.converged;
          d["separated"] = fit.separated;
          return d;
        },
        py::arg("loads"), py::arg("correct"),
        "Logistic accuracy-vs-load fit via iteratively reweighted least squares.");

  m.def("fit_error_rate",
        [](const std::vector<double>& n_ops, const std::vector<bool>& correct) {
          if (n_ops.size() != correct.size())
            throw py::value_error("n_ops and correct must have equal lengths");
          std::vector<OpsObs> data;
          for (std::size_t i = 0; i < n_ops.size(); ++i)
            data.push_back({n_ops[i], correct[i]});
          return fit_error_rate(data, "C").p;
        },
        py::arg("n_ops"), py::arg("correct"),
        "Per-operation failure probability from log-accuracy regression.");

  m.def("cosine_similarity",
        [](const std::vector<double>& v1, const std::vector<double>& v2) {
          return cosine_similarity(v1, v2);
        },
        py::arg("v1"), py::arg("v2"));

  m.def("build_hds",
        [](std::size_t count, std::uint64_t seed) {
          HdsOptions opts;
          opts.count = count;
          opts.seed = seed;
          auto items = build_hds(opts);
          py::list out;
          for (const auto& item : items) {
            py::dict d;
            d["id"] = item.id;
            d["a"] = item.problem.a.to_string();
            d["b"] = item.problem.b.to_string();
            d["product"] = item.problem.product.to_string();
            d["target"] = heuristic_name(item.target);
            d["family"] = item.family.name();
            d["split"] = item.split;
            d["margin"] = item.margin;
            out.append(d);
          }
          return out;
        },
        py::arg("count") = 30, py::arg("seed") = 1,
        "Heuristic-disagreement set items as dicts.");
}
