#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cafo/cli.hpp"
#include "cafo/failover.hpp"
#include "cafo/oracles.hpp"

namespace py = pybind11;
using namespace cafo;

namespace {

std::vector<std::pair<int, int>> cell_pairs(const std::vector<Cell>& cells) {
    std::vector<std::pair<int, int>> out;
    out.reserve(cells.size());
    for (const auto& c : cells) out.emplace_back(c.x, c.y);
    return out;
}

py::dict event_dict(const MonitorEvent& e) {
    py::dict d;
    d["generation"] = e.generation;
    d["kind"] = event_kind_name(e.kind);
    d["section"] = e.section;
    d["action"] = e.action;
    d["detail"] = e.detail;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bindings for the cafo cellular-automaton failover core";

    py::class_<Rule>(m, "Rule")
        .def(py::init([](int b, int over, int under) {
                 Rule r{b, over, under};
                 r.validate();
                 return r;
             }),
             py::arg("new_life") = 3, py::arg("over_population") = 3, py::arg("under_population") = 2)
        .def_readonly("new_life", &Rule::new_life)
        .def_readonly("over_population", &Rule::over_population)
        .def_readonly("under_population", &Rule::under_population)
        .def("__eq__", [](const Rule& a, const Rule& b) { return a == b; });

    py::class_<Grid>(m, "Grid")
        .def(py::init<int, int>(), py::arg("width"), py::arg("height"))
        .def_property_readonly("width", &Grid::width)
        .def_property_readonly("height", &Grid::height)
        .def_property_readonly("generation", &Grid::generation)
        .def("get", &Grid::get)
        .def("set", &Grid::set, py::arg("x"), py::arg("y"), py::arg("alive") = true)
        .def("population", py::overload_cast<>(&Grid::population, py::const_))
        .def("live_cells", [](const Grid& g) { return cell_pairs(g.live_cells()); })
        .def("hash", [](const Grid& g) { return hash_hex(grid_hash(g)); })
        .def("to_ascii", [](const Grid& g) { return to_ascii(g); })
        .def("to_rle", [](const Grid& g) { return grid_to_rle(g); })
        .def_static("from_ascii", &from_ascii)
        .def_static("from_rle", [](const std::string& s) { return grid_from_rle(s); })
        .def("step", [](const Grid& g, std::int64_t n, const Rule& r) { return step_n(g, r, n); }, py::arg("n") = 1,
             py::arg("rule") = Rule::conway())
        .def("__eq__", [](const Grid& a, const Grid& b) { return a == b; });

    m.def("builtin_names", &builtin_names);
    m.def(
        "builtin_cells", [](const std::string& name) { return cell_pairs(builtin(name).cells); }, py::arg("name"));
    m.def(
        "place",
        [](Grid g, const std::string& name, int x, int y) {
            place_cells(g, placement_cells(Placement{builtin(name), {x, y}, {}, 0}));
            return g;
        },
        py::arg("grid"), py::arg("name"), py::arg("x"), py::arg("y"));
    m.def(
        "period",
        [](const std::string& name) -> std::tuple<int, int, int> {
            if (name == "gosper_gun" || name == "p92_gun") return {detect_emission_period(builtin(name)), 0, 0};
            auto r = detect_period(builtin(name));
            return {r.period, r.displacement.x, r.displacement.y};
        },
        py::arg("name"), "(period, dx, dy); guns report their emission period");

    m.def("default_config_json", [] { return config_to_json(default_config()); });
    m.def(
        "validate", [] {
            py::list rows;
            for (const auto& r : validate_assets(builtin_catalog())) {
                py::dict d;
                d["subject"] = r.subject;
                d["check"] = r.check;
                d["expected"] = r.expected;
                d["observed"] = r.observed;
                d["pass"] = r.pass;
                rows.append(d);
            }
            return rows;
        });

    py::class_<Session>(m, "Session")
        .def(py::init([](const std::string& config_json) {
                 return Session(config_json.empty() ? default_config() : config_from_json(config_json));
             }),
             py::arg("config_json") = "")
        .def("init", &Session::init)
        .def("kill_primary", &Session::kill_primary)
        .def("reset_backup", &Session::reset_backup, py::arg("force") = false)
        .def("step", &Session::step, py::arg("n") = 1, py::call_guard<py::gil_scoped_release>())
        .def_property_readonly("generation", &Session::generation)
        .def_property_readonly("grid", &Session::grid, py::return_value_policy::copy)
        .def_property_readonly("next_reset_gen", &Session::next_reset_gen)
        .def_property_readonly("backup_role", [](const Session& s) {
            return s.role_of_backup() == BackupRole::ActingPrimary ? "ActingPrimary" : "Standby";
        })
        .def("blinker_state", [](const Session& s, int section) { return blinker_state_name(s.blinker_state(section)); })
        .def("events", [](const Session& s) {
            py::list out;
            for (const auto& e : s.events()) out.append(event_dict(e));
            return out;
        })
        .def("events_jsonl", [](const Session& s) {
            std::string out;
            for (const auto& e : s.events()) out += event_to_json(e) + "\n";
            return out;
        });

    m.def(
        "run_scenario",
        [](const std::string& scenario_json, const std::string& out_dir) {
            auto s = parse_scenario(scenario_json);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_scenario(s, default_config(), out_dir);
            }
            py::dict d;
            d["exit_code"] = r.exit_code;
            d["violations"] = r.violations;
            d["error"] = r.error;
            d["final_hash"] = hash_hex(r.final_hash);
            py::list ev;
            for (const auto& e : r.events) ev.append(event_dict(e));
            d["events"] = ev;
            py::list fo;
            for (const auto& f : r.failovers) {
                py::dict x;
                x["kill"] = f.kill;
                x["complete"] = f.complete;
                x["latency"] = f.latency;
                x["bound"] = f.bound;
                fo.append(x);
            }
            d["failovers"] = fo;
            return d;
        },
        py::arg("scenario_json"), py::arg("out_dir") = "");

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const std::invalid_argument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const std::runtime_error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });
}
