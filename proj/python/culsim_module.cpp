/*
 * Copyright (c) 2026, The culsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Python bindings: configuration, workload generation, both simulators
// through the experiment runner, and the verifier entry points.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "culsim/experiment.hpp"
#include "culsim/protocol.hpp"
#include "culsim/trace.hpp"
#include "culsim/verify.hpp"
#include "culsim/workload.hpp"

namespace py = pybind11;
using namespace culsim;

namespace {

using PyOp = std::tuple<std::string, Addr, Word>;
using PyStreams = std::vector<std::vector<PyOp>>;

PyStreams to_py(const Streams& s) {
  PyStreams out(s.size());
  for (std::size_t c = 0; c < s.size(); ++c) {
    for (const CoreOp& op : s[c]) {
      const char* k = op.kind == OpKind::Load ? "R" : op.kind == OpKind::Store ? "W" : "IF";
      out[c].emplace_back(k, op.address, op.value);
    }
  }
  return out;
}

Streams from_py(const PyStreams& s) {
  Streams out(s.size());
  for (std::size_t c = 0; c < s.size(); ++c) {
    for (const auto& [k, addr, value] : s[c]) {
      if (k == "R") out[c].push_back(CoreOp::load(addr));
      else if (k == "W") out[c].push_back(CoreOp::store(addr, value));
      else if (k == "IF") out[c].push_back(CoreOp::ifetch(addr));
      else throw py::value_error("unknown op '" + k + "' (expected R, W or IF)");
    }
  }
  return out;
}

py::object to_python(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

WorkloadSpec make_spec(const std::string& kind, std::uint64_t ops, std::uint32_t working_set,
                       double sharing, std::uint64_t seed) {
  auto k = parse_workload_kind(kind);
  if (!k) throw py::value_error("unknown workload kind '" + kind + "'");
  return {*k, ops, working_set, sharing, seed};
}

}  // namespace

PYBIND11_MODULE(culsim, m) {
  m.doc() = "Snoop-based MOESI coherence simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_static(
          "from_file", [](const std::string& path) { return load_config(path); },
          py::arg("path"))
      .def(
          "set",
          [](SimConfig& c, const std::string& key, const std::string& value) {
            set_config_field(c, key, value);
          },
          py::arg("key"), py::arg("value"), "Set a field by its config-file key.")
      .def("validate", &SimConfig::validate)
      .def_readwrite("n_cores", &SimConfig::n_cores)
      .def_readwrite("line_size", &SimConfig::line_size)
      .def_readwrite("cache_size", &SimConfig::cache_size)
      .def_readwrite("ways", &SimConfig::ways)
      .def_readwrite("coherent_ifetch", &SimConfig::coherent_ifetch)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("serialize", &SimConfig::serialize)
      .def("to_dict", [](const SimConfig& c) { return to_python(config_json(c)); });

  m.def(
      "flags_of_state",
      [](const std::string& state) {
        auto s = parse_state(state);
        if (!s) throw py::value_error("unknown state '" + state + "'");
        const LineFlags f = flags_of_state(*s);
        return std::make_tuple(f.valid, f.shared, f.dirty);
      },
      py::arg("state"), "(valid, shared, dirty) for a MOESI or ACE state name.");
  m.def(
      "state_of_flags",
      [](bool valid, bool shared, bool dirty) {
        return std::string(to_string(state_of_flags({valid, shared, dirty})));
      },
      py::arg("valid"), py::arg("shared"), py::arg("dirty"));

  m.def(
      "gen_workload",
      [](const std::string& kind, std::uint64_t ops, std::uint32_t working_set, double sharing,
         std::uint64_t seed, const SimConfig& config) {
        return to_py(gen_workload(make_spec(kind, ops, working_set, sharing, seed), config));
      },
      py::arg("kind"), py::arg("ops_per_core") = 1000, py::arg("working_set") = 16,
      py::arg("sharing_fraction") = 0.5, py::arg("seed") = 1, py::arg("config") = SimConfig{},
      "Per-core lists of (op, address, value) tuples.");
  m.def(
      "parse_trace",
      [](const std::string& text, std::uint32_t n_cores) {
        return to_py(parse_trace(text, "<string>", n_cores));
      },
      py::arg("text"), py::arg("n_cores") = 2);
  m.def(
      "format_trace", [](const PyStreams& s) { return format_trace(from_py(s)); },
      py::arg("streams"));

  m.def(
      "run",
      [](const PyStreams& streams, const SimConfig& config, const std::string& model,
         bool check) {
        Experiment e;
        e.config = config;
        if (model == "both") e.models = {"snoop", "directory"};
        else e.models = {model};
        e.streams = from_py(streams);
        e.workload = Json{{"source", "python"}};
        e.check = check;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(e);
        }
        py::dict out;
        out["exit_code"] = r.exit_code;
        out["report"] = to_python(r.report);
        return out;
      },
      py::arg("streams"), py::arg("config") = SimConfig{}, py::arg("model") = "snoop",
      py::arg("check") = false,
      "Runs one or both models; returns {'exit_code': int, 'report': dict}.");

  m.def(
      "oracle_certified",
      [](unsigned workers) {
        py::gil_scoped_release release;
        return oracle_tables(ProtocolTable::canonical(), true, workers).all_certified();
      },
      py::arg("workers") = 1);
  m.def("shipped_mutations", &shipped_mutations);
  m.def(
      "check_mutation",
      [](const std::string& text) {
        const Mutation mut = parse_mutation(text);
        MutationVerdict v;
        {
          py::gil_scoped_release release;
          v = check_mutation(mut);
        }
        py::dict out;
        out["caught"] = v.caught;
        out["caught_by"] = v.caught_by;
        out["trace"] = v.witness ? v.witness->trace : std::vector<std::string>{};
        return out;
      },
      py::arg("mutation"));
  m.def(
      "run_litmus",
      [](unsigned n_cores, bool coherent_ifetch) {
        py::list out;
        std::vector<LitmusTest> tests = builtin_litmus(n_cores);
        for (const LitmusTest& t : tests) {
          ExploreConfig ec;
          ec.coherent_ifetch = coherent_ifetch;
          LitmusResult r;
          {
            py::gil_scoped_release release;
            r = run_litmus(t, ec);
          }
          py::dict d;
          d["name"] = t.name;
          d["forbidden_seen"] = r.forbidden_seen;
          d["exhaustive"] = r.exhaustive;
          d["states"] = r.states;
          d["outcomes"] = r.observed_outcomes;
          out.append(d);
        }
        return out;
      },
      py::arg("n_cores") = 2, py::arg("coherent_ifetch") = false,
      "Runs the built-in coherence litmus tests.");
}
