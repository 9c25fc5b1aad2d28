// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "inlg/cli/commands.hpp"
#include "inlg/decoding.hpp"
#include "inlg/metrics.hpp"
#include "inlg/numcore/checkpoint.hpp"
#include "inlg/objectives.hpp"

namespace py = pybind11;
using namespace inlg;

namespace {

using Array = py::array_t<Real, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
  const auto r = std::size_t(a.shape(0)), c = std::size_t(a.shape(1));
  return Tensor({r, c}, std::vector<Real>(a.data(), a.data() + r * c));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

KeyValues to_key_values(const py::dict& d) {
  KeyValues kv;
  for (const auto& [k, v] : d) {
    std::string value;
    if (py::isinstance<py::bool_>(v)) value = v.cast<bool>() ? "true" : "false";
    else value = py::str(v).cast<std::string>();
    kv.emplace_back(k.cast<std::string>(), value);
  }
  return kv;
}

py::dict train_summary(const TrainResult& r) {
  py::list epochs;
  for (const auto& e : r.epochs) {
    py::dict d;
    d["epoch"] = e.epoch;
    d["train_teacher"] = e.train_teacher;
    d["val_ce"] = e.val_ce ? py::cast(*e.val_ce) : py::none();
    epochs.append(d);
  }
  py::dict out;
  out["steps"] = r.steps;
  out["epochs"] = epochs;
  out["best_epoch"] = r.best_epoch ? py::cast(*r.best_epoch) : py::none();
  return out;
}

py::dict metrics_dict(const TextMetrics& m) {
  py::dict d;
  d["id"] = m.id;
  d["tokens"] = m.tokens;
  d["rep_2"] = m.rep_2;
  d["rep_3"] = m.rep_3;
  d["rep_4"] = m.rep_4;
  d["diversity"] = m.diversity;
  d["distinct_2"] = m.distinct_2 ? py::cast(*m.distinct_2) : py::none();
  return d;
}

// Python exceptions for the library's error families.
void register_errors(py::module_& m) {
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<ContractViolation> contract(m, "ContractViolation", PyExc_ValueError);
  static py::exception<NumericFault> numeric(m, "NumericFault", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const ContractViolation& e) {
      contract(e.what());
    } catch (const NumericFault& e) {
      numeric(e.what());
    }
  });
}

}  // namespace

PYBIND11_MODULE(_inlg, m) {
  m.doc() = "Grounded prefix language model: training, decoding and metrics";
  register_errors(m);

  m.def("rep_n", &rep_n, py::arg("tokens"), py::arg("n"));
  m.def("diversity", &diversity, py::arg("tokens"));
  m.def(
      "distinct_n",
      [](const TokenSeq& t, std::size_t n, const std::string& denom) {
        return distinct_n(t, n, parse_distinct_denominator(denom));
      },
      py::arg("tokens"), py::arg("n"), py::arg("denominator") = "tokens");
  m.def(
      "text_metrics",
      [](const TokenSeq& t, const std::string& denom) {
        return metrics_dict(text_metrics("", t, parse_distinct_denominator(denom)));
      },
      py::arg("tokens"), py::arg("denominator") = "tokens");
  m.def(
      "metrics_report",
      [](const std::vector<std::pair<std::string, std::string>>& texts, const std::string& mode,
         const std::string& denom) {
        std::vector<TextRecord> recs;
        for (const auto& [id, text] : texts) recs.push_back({id, text});
        return report(recs, parse_vocab_mode(mode), parse_distinct_denominator(denom)).to_json();
      },
      py::arg("texts"), py::arg("mode") = "word", py::arg("denominator") = "tokens",
      "Corpus report as a JSON string.");
  m.def("tokenize", [](const std::string& s, const std::string& mode) {
    return tokenize(s, parse_vocab_mode(mode));
  }, py::arg("text"), py::arg("mode") = "word");

  m.def(
      "contrastive_loss",
      [](const Array& features, const Array& reps, Real tau, const std::string& denom) {
        ContrastiveConfig c;
        c.tau = tau;
        c.denominator = parse_denominator_mode(denom);
        c.validate();
        return contrastive_loss(to_tensor(features), to_tensor(reps), c);
      },
      py::arg("features"), py::arg("reps"), py::arg("tau") = Real(0.1),
      py::arg("denominator") = "standard", "InfoNCE loss, or None for fewer than two rows.");

  m.def(
      "make_synthetic",
      [](const std::string& out_dir, std::uint64_t seed, std::size_t train, std::size_t val,
         std::size_t captions, std::size_t attributes, std::size_t feature_dim) {
        SyntheticWorldSpec spec;
        spec.train_examples = train;
        spec.val_examples = val;
        spec.caption_examples = captions;
        spec.num_attributes = attributes;
        spec.feature_dim = feature_dim;
        spec.validate();
        write_synthetic(gen_synthetic(spec, seed), spec, out_dir);
      },
      py::arg("out_dir"), py::arg("seed"), py::arg("train") = 512, py::arg("val") = 128,
      py::arg("captions") = 512, py::arg("attributes") = 8, py::arg("feature_dim") = 16);

  m.def(
      "train",
      [](const py::dict& config) {
        return train_summary(run_train(resolve_config(Command::train, {}, to_key_values(config))));
      },
      py::arg("config"), "Fine-tune from a dict of configuration keys.");
  m.def(
      "pretrain_map",
      [](const py::dict& config) {
        return train_summary(
            run_pretrain(resolve_config(Command::pretrain, {}, to_key_values(config))));
      },
      py::arg("config"), "Pre-train the mapping network from a dict of configuration keys.");
  m.def(
      "resolved_config",
      [](const std::string& command, const py::dict& config) {
        const Command cmd = command == "pretrain" ? Command::pretrain
                            : command == "generate" ? Command::generate
                                                    : Command::train;
        return resolve_config(cmd, {}, to_key_values(config)).snapshot();
      },
      py::arg("command"), py::arg("config"));

  py::class_<Model>(m, "Model")
      .def_static(
          "load", [](const std::string& path) { return Model::from_checkpoint(load_checkpoint(path)); },
          py::arg("path"))
      .def("save", [](const Model& self, const std::string& path) {
        save_checkpoint(self.to_checkpoint(), path);
      }, py::arg("path"))
      .def_property_readonly("prefix_len", [](const Model& self) { return self.config.prefix_len; })
      .def_property_readonly("feature_dim", [](const Model& self) { return self.config.feature_dim; })
      .def_property_readonly("vocab", [](const Model& self) { return self.vocab.tokens(); })
      .def("param_names", [](const Model& self) {
        std::vector<std::string> out;
        for (const auto& [n, t] : self.params) out.push_back(n);
        return out;
      })
      .def("param", [](const Model& self, const std::string& name) {
        auto it = self.params.find(name);
        if (it == self.params.end()) throw py::key_error(name);
        return to_array(it->second);
      }, py::arg("name"))
      .def("prefix", [](const Model& self, const std::vector<Real>& feature) {
        return to_array(eval_prefix(self, feature));
      }, py::arg("feature"))
      .def(
          "generate",
          [](const Model& self, const std::vector<Real>& feature, const std::string& context,
             std::size_t beam, std::size_t max_len, Real alpha) {
            DecodeConfig dc;
            dc.beam_width = beam;
            dc.max_output_len = max_len;
            dc.alpha = alpha;
            dc.validate();
            const auto ctx = self.vocab.encode(tokenize(context, self.vocab_mode));
            py::gil_scoped_release release;
            const auto hyps = beam_search(self, feature, ctx, dc);
            py::gil_scoped_acquire acquire;
            py::list out;
            for (const auto& h : hyps) {
              py::dict d;
              d["text"] = detokenize(self.vocab.decode(h.tokens), self.vocab_mode);
              d["logprob"] = h.logprob;
              d["score"] = h.score;
              d["finished"] = h.finished;
              out.append(d);
            }
            return out;
          },
          py::arg("feature"), py::arg("context") = "", py::arg("beam") = 10,
          py::arg("max_len") = 100, py::arg("alpha") = Real(0),
          "Beam-search hypotheses, best first.");
}
